#pragma once

// User profiles: anthropometrics (BMI, BMR), preferences and feedback,
// persisted as JSON Lines (one profile object per line, sorted by id).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nutrirec/error.hpp"
#include "nutrirec/types.hpp"

namespace nutrirec {

enum class Sex { Male, Female };
enum class ActivityLevel { Sedentary, Light, Moderate, Active };

struct FeedbackEntry {
    std::string item_id;
    int rating = 0;
    std::int64_t timestamp = 0;

    friend bool operator==(const FeedbackEntry&, const FeedbackEntry&) = default;
};

struct UserProfile {
    std::string id;
    double height_m = 1.70;
    double weight_kg = 70.0;
    double age_years = 30.0;
    Sex sex = Sex::Female;
    ActivityLevel activity_level = ActivityLevel::Moderate;
    std::optional<DietaryType> dietary_type;
    std::set<std::string> allergens;           // normalized names
    std::vector<std::string> health_history;   // free-text tags
    std::set<std::string> goals;               // goal keys, fitness or health
    std::optional<GeoPoint> location;
    std::optional<Setting> workout_setting;    // home or gym preference
    bool expert_guidance = false;              // also route health intents to nutritionists
    std::map<std::string, double> tag_weights; // overrides for content-vector weights
    std::vector<FeedbackEntry> feedback;

    friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

inline std::vector<FieldError> anthropometric_errors(double height_m, double weight_kg, double age_years) {
    std::vector<FieldError> errs;
    if (!(height_m > 0.3 && height_m < 2.8)) errs.push_back({"height_m", "must be in (0.3, 2.8) meters"});
    if (!(weight_kg > 2.0 && weight_kg < 500.0)) errs.push_back({"weight_kg", "must be in (2, 500) kilograms"});
    if (!(age_years >= 0.0 && age_years < 130.0)) errs.push_back({"age_years", "must be in [0, 130) years"});
    return errs;
}

/// Throws ValidationError listing every offending field.
inline void validate_profile(const UserProfile& p) {
    std::vector<FieldError> errs;
    if (p.id.empty()) errs.push_back({"id", "must not be empty"});
    for (auto& e : anthropometric_errors(p.height_m, p.weight_kg, p.age_years)) errs.push_back(std::move(e));
    if (p.location && !p.location->valid())
        errs.push_back({"location", "latitude must be in [-90, 90] and longitude in [-180, 180]"});
    for (const auto& g : p.goals)
        if (!is_goal_key(g)) errs.push_back({"goals", "unknown goal '" + g + "'"});
    for (const auto& a : p.allergens)
        if (a.empty() || a != normalize_name(a)) errs.push_back({"allergens", "allergen names must be lowercase and non-empty"});
    for (const auto& [tag, w] : p.tag_weights)
        if (!std::isfinite(w) || w < 0.0) errs.push_back({"tag_weights", "weight for '" + tag + "' must be finite and >= 0"});
    for (const auto& f : p.feedback)
        if (f.rating < 1 || f.rating > 5) errs.push_back({"feedback", "rating for '" + f.item_id + "' must be 1..5"});
    if (!errs.empty()) throw ValidationError(std::move(errs));
}

inline double compute_bmi(double weight_kg, double height_m) {
    std::vector<FieldError> errs;
    if (!(height_m > 0.3 && height_m < 2.8)) errs.push_back({"height_m", "must be in (0.3, 2.8) meters"});
    if (!(weight_kg > 2.0 && weight_kg < 500.0)) errs.push_back({"weight_kg", "must be in (2, 500) kilograms"});
    if (!errs.empty()) throw ValidationError(std::move(errs));
    return weight_kg / (height_m * height_m);
}

inline double compute_bmi(const UserProfile& p) { return compute_bmi(p.weight_kg, p.height_m); }

enum class BmiCategory { Underweight, Normal, Overweight, Obese };

inline std::string_view key(BmiCategory c) {
    switch (c) {
        case BmiCategory::Underweight: return "underweight";
        case BmiCategory::Normal: return "normal";
        case BmiCategory::Overweight: return "overweight";
        default: return "obese";
    }
}

/// Cut-points vary by country; WHO by default. Obese means strictly above
/// `obese_above`, so a BMI of exactly 30.0 is overweight.
struct BmiCutPoints {
    double normal_from = 18.5;
    double overweight_from = 25.0;
    double obese_above = 30.0;
};

inline BmiCategory bmi_category(double bmi, const BmiCutPoints& cuts = {}) {
    if (!(bmi > 0.0) || !std::isfinite(bmi)) throw ValidationError({{"bmi", "must be positive"}});
    if (bmi < cuts.normal_from) return BmiCategory::Underweight;
    if (bmi < cuts.overweight_from) return BmiCategory::Normal;
    if (bmi <= cuts.obese_above) return BmiCategory::Overweight;
    return BmiCategory::Obese;
}

/// Mifflin-St Jeor, kcal/day.
inline double compute_bmr(double weight_kg, double height_m, double age_years, Sex sex) {
    auto errs = anthropometric_errors(height_m, weight_kg, age_years);
    if (!errs.empty()) throw ValidationError(std::move(errs));
    const double base = 10.0 * weight_kg + 6.25 * (height_m * 100.0) - 5.0 * age_years;
    return sex == Sex::Male ? base + 5.0 : base - 161.0;
}

inline double compute_bmr(const UserProfile& p) { return compute_bmr(p.weight_kg, p.height_m, p.age_years, p.sex); }

// --- JSON -----------------------------------------------------------------

inline std::string_view key(Sex s) { return s == Sex::Male ? "male" : "female"; }

inline std::string_view key(ActivityLevel a) {
    switch (a) {
        case ActivityLevel::Sedentary: return "sedentary";
        case ActivityLevel::Light: return "light";
        case ActivityLevel::Moderate: return "moderate";
        default: return "active";
    }
}

inline nlohmann::json profile_to_json(const UserProfile& p) {
    using nlohmann::json;
    json j;
    j["id"] = p.id;
    j["height_m"] = p.height_m;
    j["weight_kg"] = p.weight_kg;
    j["age_years"] = p.age_years;
    j["sex"] = key(p.sex);
    j["activity_level"] = key(p.activity_level);
    j["dietary_type"] = p.dietary_type ? json(key(*p.dietary_type)) : json(nullptr);
    j["allergens"] = p.allergens;
    j["health_history"] = p.health_history;
    j["goals"] = p.goals;
    j["location"] = p.location ? json{{"latitude", p.location->latitude}, {"longitude", p.location->longitude}}
                               : json(nullptr);
    j["workout_setting"] = p.workout_setting ? json(key(*p.workout_setting)) : json(nullptr);
    j["expert_guidance"] = p.expert_guidance;
    j["tag_weights"] = p.tag_weights;
    j["feedback"] = json::array();
    for (const auto& f : p.feedback)
        j["feedback"].push_back({{"item_id", f.item_id}, {"rating", f.rating}, {"timestamp", f.timestamp}});
    return j;
}

/// Strict decoding: unknown fields and wrong types become field errors.
/// `id` is required; any other missing field keeps its default.
inline UserProfile profile_from_json(const nlohmann::json& j) {
    using nlohmann::json;
    if (!j.is_object()) throw ValidationError({{"profile", "must be a JSON object"}});
    static const std::set<std::string> kKnown = {
        "id",    "height_m", "weight_kg",       "age_years",       "sex",         "activity_level", "dietary_type",
        "allergens", "health_history", "goals", "location", "workout_setting", "expert_guidance", "tag_weights",
        "feedback"};

    std::vector<FieldError> errs;
    UserProfile p;
    for (const auto& [k, v] : j.items())
        if (!kKnown.count(k)) errs.push_back({k, "unknown field"});

    auto number = [&](const char* name, double& out) {
        if (!j.contains(name)) return;
        if (!j[name].is_number()) errs.push_back({name, "must be a number"});
        else out = j[name].get<double>();
    };
    auto string_list = [&](const char* name, auto&& sink) {
        if (!j.contains(name)) return;
        if (!j[name].is_array()) {
            errs.push_back({name, "must be an array of strings"});
            return;
        }
        for (const auto& e : j[name]) {
            if (!e.is_string()) errs.push_back({name, "must be an array of strings"});
            else sink(e.get<std::string>());
        }
    };

    if (!j.contains("id") || !j["id"].is_string()) errs.push_back({"id", "required string"});
    else p.id = j["id"].get<std::string>();
    number("height_m", p.height_m);
    number("weight_kg", p.weight_kg);
    number("age_years", p.age_years);

    if (j.contains("sex")) {
        const auto& v = j["sex"];
        if (v == "male") p.sex = Sex::Male;
        else if (v == "female") p.sex = Sex::Female;
        else errs.push_back({"sex", "must be \"male\" or \"female\""});
    }
    if (j.contains("activity_level")) {
        const auto& v = j["activity_level"];
        bool ok = false;
        for (auto a : {ActivityLevel::Sedentary, ActivityLevel::Light, ActivityLevel::Moderate, ActivityLevel::Active})
            if (v.is_string() && v.get<std::string>() == key(a)) {
                p.activity_level = a;
                ok = true;
            }
        if (!ok) errs.push_back({"activity_level", "must be sedentary, light, moderate or active"});
    }
    if (j.contains("dietary_type") && !j["dietary_type"].is_null()) {
        const auto& v = j["dietary_type"];
        auto t = v.is_string() ? parse_dietary_type(v.get<std::string>()) : std::nullopt;
        if (!t) errs.push_back({"dietary_type", "must be vegetarian, gluten_free, high_protein, keto or null"});
        else p.dietary_type = *t;
    }
    string_list("allergens", [&](std::string s) { p.allergens.insert(normalize_name(s)); });
    string_list("health_history", [&](std::string s) { p.health_history.push_back(std::move(s)); });
    string_list("goals", [&](std::string s) { p.goals.insert(std::move(s)); });

    if (j.contains("location") && !j["location"].is_null()) {
        const auto& v = j["location"];
        if (!v.is_object() || !v.contains("latitude") || !v.contains("longitude") || !v["latitude"].is_number() ||
            !v["longitude"].is_number() || v.size() != 2)
            errs.push_back({"location", "must be {\"latitude\": number, \"longitude\": number} or null"});
        else
            p.location = GeoPoint{v["latitude"].get<double>(), v["longitude"].get<double>()};
    }
    if (j.contains("workout_setting") && !j["workout_setting"].is_null()) {
        const auto& v = j["workout_setting"];
        auto s = v.is_string() ? parse_setting(v.get<std::string>()) : std::nullopt;
        if (!s || *s == Setting::Either) errs.push_back({"workout_setting", "must be \"home\", \"gym\" or null"});
        else p.workout_setting = *s;
    }
    if (j.contains("expert_guidance")) {
        if (!j["expert_guidance"].is_boolean()) errs.push_back({"expert_guidance", "must be a boolean"});
        else p.expert_guidance = j["expert_guidance"].get<bool>();
    }
    if (j.contains("tag_weights")) {
        const auto& v = j["tag_weights"];
        if (!v.is_object()) errs.push_back({"tag_weights", "must be an object of numbers"});
        else
            for (const auto& [tag, w] : v.items()) {
                if (!w.is_number()) errs.push_back({"tag_weights", "weight for '" + tag + "' must be a number"});
                else p.tag_weights[tag] = w.get<double>();
            }
    }
    if (j.contains("feedback")) {
        const auto& v = j["feedback"];
        if (!v.is_array()) errs.push_back({"feedback", "must be an array"});
        else
            for (const auto& f : v) {
                if (!f.is_object() || !f.contains("item_id") || !f["item_id"].is_string() || !f.contains("rating") ||
                    !f["rating"].is_number_integer() || !f.contains("timestamp") ||
                    !f["timestamp"].is_number_integer() || f.size() != 3) {
                    errs.push_back({"feedback", "entries must be {item_id, rating, timestamp}"});
                    continue;
                }
                p.feedback.push_back(
                    {f["item_id"].get<std::string>(), f["rating"].get<int>(), f["timestamp"].get<std::int64_t>()});
            }
    }
    if (!errs.empty()) throw ValidationError(std::move(errs));
    validate_profile(p);
    return p;
}

// --- store ----------------------------------------------------------------

/// In-memory profile store with optional file backing. Writers are
/// serialized; readers share the lock.
class ProfileStore {
public:
    ProfileStore() = default;
    explicit ProfileStore(std::filesystem::path backing) : path_(std::move(backing)) {}

    ProfileStore(const ProfileStore& other) {
        std::shared_lock lock(other.mutex_);
        profiles_ = other.profiles_;
        path_ = other.path_;
    }

    /// Reads a JSON Lines profile file. A missing file is a LoadError.
    static ProfileStore load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw LoadError("cannot open profile store " + path.string());
        ProfileStore store(path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                auto p = profile_from_json(nlohmann::json::parse(line));
                store.profiles_[p.id] = std::move(p);
            } catch (const std::exception& e) {
                throw LoadError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        return store;
    }

    /// Like load, but a missing file yields an empty store bound to `path`.
    static ProfileStore open(const std::filesystem::path& path) {
        if (!std::filesystem::exists(path)) return ProfileStore(path);
        return load(path);
    }

    /// Validates, inserts or replaces by id, and persists when file-backed.
    UserProfile upsert(UserProfile profile) {
        validate_profile(profile);
        std::unique_lock lock(mutex_);
        profiles_[profile.id] = profile;
        if (!path_.empty()) write_atomic(path_);
        return profile;
    }

    std::optional<UserProfile> get(const std::string& id) const {
        std::shared_lock lock(mutex_);
        auto it = profiles_.find(id);
        if (it == profiles_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return profiles_.size();
    }

    std::vector<UserProfile> all() const {
        std::shared_lock lock(mutex_);
        std::vector<UserProfile> out;
        for (const auto& [id, p] : profiles_) out.push_back(p);
        return out;
    }

    void save(const std::filesystem::path& path) const {
        std::shared_lock lock(mutex_);
        write_atomic(path);
    }

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    // Caller holds the lock.
    void write_atomic(const std::filesystem::path& path) const {
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot write " + tmp.string());
            for (const auto& [id, p] : profiles_) out << profile_to_json(p).dump() << '\n';
            out.flush();
            if (!out) throw Error("failed writing " + tmp.string());
        }
        std::filesystem::rename(tmp, path);
    }

    mutable std::shared_mutex mutex_;
    std::map<std::string, UserProfile> profiles_;
    std::filesystem::path path_;
};

}  // namespace nutrirec
