#pragma once

// Item datasets: recipes, exercises, supplements, stores, nutritionists.
//
// Each dataset is a TSV file with a fixed header (see docs/data_formats.md).
// List-valued cells separate entries with '|'. Loading collects every
// problem (with file and line) before failing, so a bad seed file reports
// all of its issues at once.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nutrirec/error.hpp"
#include "nutrirec/tsv.hpp"
#include "nutrirec/types.hpp"

namespace nutrirec {

struct Recipe {
    std::string id;
    std::string name;
    std::string ingredients;
    std::string description;
    DietaryType dietary_type = DietaryType::Vegetarian;
    std::set<std::string> allergens;
};

struct Exercise {
    std::string id;
    std::string name;
    std::set<FitnessGoal> goals;
    Intensity intensity = Intensity::Moderate;
    double duration_min = 0.0;
    Setting setting = Setting::Either;
};

struct Supplement {
    std::string id;
    std::string name;
    std::set<HealthGoal> goals;
    std::set<std::string> allergens;
};

struct Store {
    std::string id;
    std::string name;
    GeoPoint location;
    std::set<std::string> inventory;  // supplement ids
};

struct Nutritionist {
    std::string id;
    std::string name;
    std::set<std::string> specialties;  // goal keys
    std::set<DietaryType> dietary_expertise;
    double rating = 0.0;
    GeoPoint location;
    std::string venue;
};

/// Immutable once loaded; share freely across threads.
struct Catalog {
    std::vector<Recipe> recipes;
    std::vector<Exercise> exercises;
    std::vector<Supplement> supplements;
    std::vector<Store> stores;
    std::vector<Nutritionist> nutritionists;

    template <typename T>
    static const T* find_in(const std::vector<T>& items, const std::string& id) {
        auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return x.id == id; });
        return it == items.end() ? nullptr : &*it;
    }

    const Recipe* recipe(const std::string& id) const { return find_in(recipes, id); }
    const Exercise* exercise(const std::string& id) const { return find_in(exercises, id); }
    const Supplement* supplement(const std::string& id) const { return find_in(supplements, id); }
    const Store* store(const std::string& id) const { return find_in(stores, id); }
    const Nutritionist* nutritionist(const std::string& id) const { return find_in(nutritionists, id); }
};

enum class CatalogIssueKind { Parse, Validation, DuplicateId, Referential };

struct CatalogIssue {
    CatalogIssueKind kind = CatalogIssueKind::Parse;
    std::string source;
    std::size_t line = 0;
    std::string id;
    std::string message;

    std::string describe() const {
        std::ostringstream os;
        os << source;
        if (line) os << ':' << line;
        os << ": " << message;
        return os.str();
    }
};

class CatalogError : public LoadError {
public:
    explicit CatalogError(std::vector<CatalogIssue> issues) : LoadError(summarize(issues)), issues_(std::move(issues)) {}

    const std::vector<CatalogIssue>& issues() const noexcept { return issues_; }

    bool has(CatalogIssueKind kind) const {
        return std::any_of(issues_.begin(), issues_.end(), [&](const auto& i) { return i.kind == kind; });
    }

private:
    static std::string summarize(const std::vector<CatalogIssue>& issues) {
        std::string out = "catalog failed to load (" + std::to_string(issues.size()) + " issue(s))";
        for (const auto& i : issues) out += "\n  " + i.describe();
        return out;
    }

    std::vector<CatalogIssue> issues_;
};

struct CatalogLoadOptions {
    /// Promote validate_catalog warnings (rating range, empty goal sets,
    /// uncovered dietary types) to load errors.
    bool strict = false;
};

struct CatalogSources {
    std::istream* recipes = nullptr;
    std::istream* exercises = nullptr;
    std::istream* supplements = nullptr;
    std::istream* stores = nullptr;
    std::istream* nutritionists = nullptr;
};

struct CatalogPaths {
    std::filesystem::path recipes, exercises, supplements, stores, nutritionists;

    /// Standard file names inside one directory.
    static CatalogPaths in_directory(const std::filesystem::path& dir) {
        return {dir / "recipes.tsv", dir / "exercises.tsv", dir / "supplements.tsv", dir / "stores.tsv",
                dir / "nutritionists.tsv"};
    }
};

/// Report-only checks: empty goal sets, ratings outside [0, 5], and
/// dietary types without recipes.
inline std::vector<std::string> validate_catalog(const Catalog& c) {
    std::vector<std::string> warnings;
    for (const auto& e : c.exercises)
        if (e.goals.empty()) warnings.push_back("exercise " + e.id + " has no goals");
    for (const auto& s : c.supplements)
        if (s.goals.empty()) warnings.push_back("supplement " + s.id + " has no goals");
    for (const auto& n : c.nutritionists) {
        if (n.specialties.empty()) warnings.push_back("nutritionist " + n.id + " has no specialties");
        if (!(n.rating >= 0.0 && n.rating <= 5.0))
            warnings.push_back("nutritionist " + n.id + " rating " + std::to_string(n.rating) + " outside [0, 5]");
    }
    for (auto t : kAllDietaryTypes) {
        const bool covered =
            std::any_of(c.recipes.begin(), c.recipes.end(), [&](const Recipe& r) { return r.dietary_type == t; });
        if (!covered) warnings.push_back("no recipes for dietary type " + std::string(key(t)));
    }
    return warnings;
}

namespace detail {

class CatalogParser {
public:
    std::vector<CatalogIssue> issues;

    template <typename T, typename RowFn>
    std::vector<T> dataset(std::istream* in, const std::string& source, const std::vector<std::string>& header,
                           RowFn&& parse_row) {
        std::vector<T> items;
        if (!in) return items;
        tsv::Table table;
        try {
            table = tsv::read(*in, source, header);
        } catch (const tsv::ParseError& e) {
            issues.push_back({CatalogIssueKind::Parse, source, e.line(), "", e.detail()});
            return items;
        }
        std::set<std::string> seen;
        for (const auto& row : table.rows) {
            row_ = &row;
            source_ = source;
            const std::string id = tsv::trim(row.cells[0]);
            if (id.empty()) {
                issue(CatalogIssueKind::Validation, "", "empty id");
                continue;
            }
            if (!seen.insert(id).second) {
                issue(CatalogIssueKind::DuplicateId, id, "duplicate id '" + id + "'");
                continue;
            }
            const auto before = issues.size();
            T item = parse_row(row, id);
            if (issues.size() == before) items.push_back(std::move(item));
        }
        return items;
    }

    void issue(CatalogIssueKind kind, const std::string& id, const std::string& message) {
        issues.push_back({kind, source_, row_ ? row_->line : 0, id, message});
    }

    std::string text(const tsv::Row& row, std::size_t col) const { return tsv::trim(row.cells[col]); }

    double number(const tsv::Row& row, std::size_t col, const std::string& id, const char* field) {
        const auto s = text(row, col);
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos == s.size() && std::isfinite(v)) return v;
        } catch (const std::exception&) {
        }
        issue(CatalogIssueKind::Parse, id, std::string(field) + " '" + s + "' is not a number");
        return 0.0;
    }

    GeoPoint location(const tsv::Row& row, std::size_t lat_col, const std::string& id) {
        GeoPoint g{number(row, lat_col, id, "latitude"), number(row, lat_col + 1, id, "longitude")};
        if (!g.valid()) issue(CatalogIssueKind::Validation, id, "coordinates out of range");
        return g;
    }

    std::set<std::string> names(const tsv::Row& row, std::size_t col) const {
        std::set<std::string> out;
        for (const auto& a : tsv::split_list(row.cells[col])) out.insert(normalize_name(a));
        return out;
    }

    template <typename E, typename ParseFn>
    std::set<E> enum_list(const tsv::Row& row, std::size_t col, const std::string& id, const char* field,
                          ParseFn&& parse) {
        std::set<E> out;
        for (const auto& k : tsv::split_list(row.cells[col])) {
            if (auto v = parse(k)) out.insert(*v);
            else issue(CatalogIssueKind::Parse, id, std::string("unknown ") + field + " '" + k + "'");
        }
        return out;
    }

private:
    const tsv::Row* row_ = nullptr;
    std::string source_;
};

}  // namespace detail

inline const std::vector<std::string> kRecipeHeader = {"id", "name", "ingredients", "description", "dietary_type",
                                                       "allergens"};
inline const std::vector<std::string> kExerciseHeader = {"id", "name", "goals", "intensity", "duration_min",
                                                         "setting"};
inline const std::vector<std::string> kSupplementHeader = {"id", "name", "goals", "allergens"};
inline const std::vector<std::string> kStoreHeader = {"id", "name", "latitude", "longitude", "inventory"};
inline const std::vector<std::string> kNutritionistHeader = {"id",     "name",     "specialties", "dietary_expertise",
                                                             "rating", "latitude", "longitude",   "venue"};

/// Parses and validates all datasets; throws CatalogError listing every issue.
/// A null stream is an empty dataset.
inline Catalog load_catalog(const CatalogSources& src, const CatalogLoadOptions& opts = {},
                            const std::array<std::string, 5>& names = {"recipes.tsv", "exercises.tsv",
                                                                       "supplements.tsv", "stores.tsv",
                                                                       "nutritionists.tsv"}) {
    using K = CatalogIssueKind;
    detail::CatalogParser p;
    Catalog c;

    c.recipes = p.dataset<Recipe>(src.recipes, names[0], kRecipeHeader, [&](const tsv::Row& row, const std::string& id) {
        Recipe r;
        r.id = id;
        r.name = p.text(row, 1);
        r.ingredients = p.text(row, 2);
        r.description = p.text(row, 3);
        if (r.name.empty()) p.issue(K::Validation, id, "empty name");
        if (auto t = parse_dietary_type(p.text(row, 4))) r.dietary_type = *t;
        else p.issue(K::Parse, id, "unknown dietary_type '" + p.text(row, 4) + "'");
        r.allergens = p.names(row, 5);
        return r;
    });

    c.exercises =
        p.dataset<Exercise>(src.exercises, names[1], kExerciseHeader, [&](const tsv::Row& row, const std::string& id) {
            Exercise e;
            e.id = id;
            e.name = p.text(row, 1);
            if (e.name.empty()) p.issue(K::Validation, id, "empty name");
            e.goals = p.enum_list<FitnessGoal>(row, 2, id, "fitness goal", parse_fitness_goal);
            if (auto v = parse_intensity(p.text(row, 3))) e.intensity = *v;
            else p.issue(K::Parse, id, "unknown intensity '" + p.text(row, 3) + "'");
            e.duration_min = p.number(row, 4, id, "duration_min");
            if (!(e.duration_min > 0.0)) p.issue(K::Validation, id, "duration_min must be > 0");
            if (auto v = parse_setting(p.text(row, 5))) e.setting = *v;
            else p.issue(K::Parse, id, "unknown setting '" + p.text(row, 5) + "'");
            return e;
        });

    c.supplements = p.dataset<Supplement>(
        src.supplements, names[2], kSupplementHeader, [&](const tsv::Row& row, const std::string& id) {
            Supplement s;
            s.id = id;
            s.name = p.text(row, 1);
            if (s.name.empty()) p.issue(K::Validation, id, "empty name");
            s.goals = p.enum_list<HealthGoal>(row, 2, id, "health goal", parse_health_goal);
            s.allergens = p.names(row, 3);
            return s;
        });

    std::set<std::string> supplement_ids;
    for (const auto& s : c.supplements) supplement_ids.insert(s.id);

    c.stores = p.dataset<Store>(src.stores, names[3], kStoreHeader, [&](const tsv::Row& row, const std::string& id) {
        Store s;
        s.id = id;
        s.name = p.text(row, 1);
        if (s.name.empty()) p.issue(K::Validation, id, "empty name");
        s.location = p.location(row, 2, id);
        for (const auto& ref : tsv::split_list(row.cells[4])) {
            if (!supplement_ids.count(ref))
                p.issue(K::Referential, id, "store '" + id + "' stocks unknown supplement '" + ref + "'");
            s.inventory.insert(ref);
        }
        return s;
    });

    c.nutritionists = p.dataset<Nutritionist>(
        src.nutritionists, names[4], kNutritionistHeader, [&](const tsv::Row& row, const std::string& id) {
            Nutritionist n;
            n.id = id;
            n.name = p.text(row, 1);
            if (n.name.empty()) p.issue(K::Validation, id, "empty name");
            for (const auto& g : tsv::split_list(row.cells[2])) {
                if (is_goal_key(g)) n.specialties.insert(g);
                else p.issue(K::Parse, id, "unknown specialty '" + g + "'");
            }
            n.dietary_expertise = p.enum_list<DietaryType>(row, 3, id, "dietary type", parse_dietary_type);
            n.rating = p.number(row, 4, id, "rating");
            n.location = p.location(row, 5, id);
            n.venue = p.text(row, 7);
            return n;
        });

    auto issues = std::move(p.issues);
    if (opts.strict)
        for (auto& w : validate_catalog(c)) issues.push_back({K::Validation, "catalog", 0, "", w});
    if (!issues.empty()) throw CatalogError(std::move(issues));
    return c;
}

inline Catalog load_catalog(const CatalogPaths& paths, const CatalogLoadOptions& opts = {}) {
    std::array<std::ifstream, 5> files;
    const std::array<std::filesystem::path, 5> ps = {paths.recipes, paths.exercises, paths.supplements, paths.stores,
                                                     paths.nutritionists};
    for (std::size_t i = 0; i < 5; ++i) {
        files[i].open(ps[i], std::ios::binary);
        if (!files[i]) throw LoadError("cannot open catalog file " + ps[i].string());
    }
    return load_catalog(CatalogSources{&files[0], &files[1], &files[2], &files[3], &files[4]}, opts,
                        {ps[0].string(), ps[1].string(), ps[2].string(), ps[3].string(), ps[4].string()});
}

}  // namespace nutrirec
