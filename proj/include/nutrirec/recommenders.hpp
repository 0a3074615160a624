#pragma once

// Content-based, collaborative (user-based k-NN) and hybrid scoring, plus the
// four domain recommenders built on them: meals, exercises, supplements with
// their nearest stocking store, and nutritionists.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nutrirec/catalog.hpp"
#include "nutrirec/error.hpp"
#include "nutrirec/profile.hpp"
#include "nutrirec/text_pipeline.hpp"
#include "nutrirec/types.hpp"

namespace nutrirec {

// --- content-based --------------------------------------------------------

/// Sparse weighted tags, e.g. {"goal:weight_management": 1, "diet:keto": 1}.
using TagVector = std::map<std::string, double>;

inline std::string goal_tag(std::string_view goal_key) { return "goal:" + std::string(goal_key); }
inline std::string diet_tag(DietaryType t) { return "diet:" + std::string(key(t)); }
inline std::string intensity_tag(Intensity i) { return "intensity:" + std::string(key(i)); }
inline std::string setting_tag(Setting s) { return "setting:" + std::string(key(s)); }

/// Cosine similarity clamped to [0, 1]; a zero vector on either side is 0.
inline double content_score(const TagVector& user, const TagVector& item) {
    double dot = 0.0, nu = 0.0, ni = 0.0;
    for (const auto& [tag, w] : user) {
        nu += w * w;
        if (auto it = item.find(tag); it != item.end()) dot += w * it->second;
    }
    for (const auto& [tag, w] : item) ni += w * w;
    if (nu == 0.0 || ni == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(ni)), 0.0, 1.0);
}

// --- ratings ----------------------------------------------------------------

struct Rating {
    int value = 0;
    std::int64_t timestamp = 0;
};

/// Sparse user x item ratings in 1..5, one current rating per pair. Item
/// keys are kind-qualified ("meal:r001") so every recommender shares one
/// matrix.
class RatingsMatrix {
public:
    using Row = std::map<std::string, Rating>;

    void set(const std::string& user, const std::string& item, int rating, std::int64_t timestamp = 0) {
        if (rating < 1 || rating > 5) throw ValidationError({{"rating", "must be an integer in 1..5"}});
        rows_[user][item] = Rating{rating, timestamp};
    }

    std::optional<Rating> get(const std::string& user, const std::string& item) const {
        auto u = rows_.find(user);
        if (u == rows_.end()) return std::nullopt;
        auto i = u->second.find(item);
        if (i == u->second.end()) return std::nullopt;
        return i->second;
    }

    const Row* row(const std::string& user) const {
        auto u = rows_.find(user);
        return u == rows_.end() ? nullptr : &u->second;
    }

    const std::map<std::string, Row>& rows() const noexcept { return rows_; }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& [u, r] : rows_) n += r.size();
        return n;
    }

private:
    std::map<std::string, Row> rows_;
};

enum class ItemKind { Meal, Exercise, Supplement, Nutritionist };

inline std::string_view key(ItemKind k) {
    switch (k) {
        case ItemKind::Meal: return "meal";
        case ItemKind::Exercise: return "exercise";
        case ItemKind::Supplement: return "supplement";
        default: return "nutritionist";
    }
}

inline std::optional<ItemKind> parse_item_kind(std::string_view s) {
    for (auto k : {ItemKind::Meal, ItemKind::Exercise, ItemKind::Supplement, ItemKind::Nutritionist})
        if (key(k) == s) return k;
    return std::nullopt;
}

inline std::string rating_key(ItemKind kind, const std::string& item_id) {
    return std::string(key(kind)) + ":" + item_id;
}

inline std::int64_t now_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

/// Inserts or overwrites the (user, item) rating.
inline RatingsMatrix& record_feedback(RatingsMatrix& ratings, const std::string& user, const std::string& item,
                                      int rating, std::optional<std::int64_t> timestamp = std::nullopt) {
    ratings.set(user, item, rating, timestamp ? *timestamp : now_seconds());
    return ratings;
}

// --- collaborative ----------------------------------------------------------

inline constexpr std::size_t kDefaultNeighbors = 10;

namespace detail {

inline double row_mean(const RatingsMatrix::Row& row) {
    double s = 0.0;
    for (const auto& [item, r] : row) s += r.value;
    return s / static_cast<double>(row.size());
}

/// Cosine between mean-centered rows; unrated items count as 0.
inline double centered_cosine(const RatingsMatrix::Row& a, double mean_a, const RatingsMatrix::Row& b,
                              double mean_b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [item, r] : a) {
        const double ca = r.value - mean_a;
        na += ca * ca;
        if (auto it = b.find(item); it != b.end()) dot += ca * (it->second.value - mean_b);
    }
    for (const auto& [item, r] : b) {
        const double cb = r.value - mean_b;
        nb += cb * cb;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace detail

/// User-based k-NN prediction in [1, 5].
///
/// - the user's own rating of the item is returned as-is;
/// - neighbors are other users who rated the item, the k most similar by
///   mean-centered cosine (ties by user id);
/// - prediction = mean_u + sum(sim * (r_v - mean_v)) / sum(|sim|), or mean_u
///   when every neighbor similarity is 0;
/// - nullopt (cold start) when the user has no ratings or nobody else rated
///   the item.
inline std::optional<double> collaborative_score(const RatingsMatrix& ratings, const std::string& user,
                                                 const std::string& item, std::size_t k = kDefaultNeighbors) {
    const auto* ru = ratings.row(user);
    if (!ru || ru->empty()) return std::nullopt;
    if (auto own = ru->find(item); own != ru->end()) return static_cast<double>(own->second.value);

    const double mean_u = detail::row_mean(*ru);
    struct Neighbor {
        const std::string* id;
        double sim;
        double centered;
    };
    std::vector<Neighbor> neighbors;
    for (const auto& [vid, rv] : ratings.rows()) {
        if (vid == user || rv.empty()) continue;
        auto it = rv.find(item);
        if (it == rv.end()) continue;
        const double mean_v = detail::row_mean(rv);
        neighbors.push_back({&vid, detail::centered_cosine(*ru, mean_u, rv, mean_v), it->second.value - mean_v});
    }
    if (neighbors.empty()) return std::nullopt;

    std::sort(neighbors.begin(), neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        return *a.id < *b.id;
    });
    if (neighbors.size() > k) neighbors.resize(k);

    double num = 0.0, den = 0.0;
    for (const auto& n : neighbors) {
        num += n.sim * n.centered;
        den += std::abs(n.sim);
    }
    const double pred = den == 0.0 ? mean_u : mean_u + num / den;
    return std::clamp(pred, 1.0, 5.0);
}

// --- recommendations --------------------------------------------------------

struct StoreMatch {
    std::string store_id;
    std::string store_name;
    double distance_km = 0.0;
};

struct Recommendation {
    std::string item_id;
    ItemKind kind = ItemKind::Meal;
    std::string name;
    double score = 0.0;
    std::string explanation;

    double content = 0.0;
    std::optional<double> collaborative;  // predicted rating, absent on cold start
    std::optional<StoreMatch> store;      // supplements
    std::optional<double> rating;         // nutritionists
    std::optional<std::string> venue;     // nutritionists
    std::optional<double> distance_km;    // nutritionists
};

/// Score descending, then item id ascending.
inline void sort_recommendations(std::vector<Recommendation>& recs) {
    std::sort(recs.begin(), recs.end(), [](const Recommendation& a, const Recommendation& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item_id < b.item_id;
    });
}

struct Candidate {
    std::string id;
    ItemKind kind = ItemKind::Meal;
    std::string name;
    TagVector features;
};

inline constexpr double kDefaultAlpha = 0.5;

namespace detail {

inline std::string format_number(double v, int precision = 2) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

}  // namespace detail

/// score = alpha * content + (1 - alpha) * (predicted rating - 1) / 4.
/// Cold-start items (no collaborative prediction) score on content alone.
inline std::vector<Recommendation> hybrid_rank(const TagVector& user_vector, const std::vector<Candidate>& candidates,
                                               const RatingsMatrix* ratings, const std::string& user_id,
                                               double alpha = kDefaultAlpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError({{"alpha", "must be in [0, 1]"}});
    std::vector<Recommendation> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) {
        Recommendation r;
        r.item_id = c.id;
        r.kind = c.kind;
        r.name = c.name;
        r.content = content_score(user_vector, c.features);
        if (ratings) r.collaborative = collaborative_score(*ratings, user_id, rating_key(c.kind, c.id));
        std::string why = "profile match " + detail::format_number(r.content);
        if (r.collaborative) {
            const double normalized = (*r.collaborative - 1.0) / 4.0;
            r.score = alpha * r.content + (1.0 - alpha) * normalized;
            why += ", predicted rating " + detail::format_number(*r.collaborative) + "/5";
        } else {
            r.score = r.content;
            why += "; no ratings yet, ranked by profile match only";
        }
        r.explanation = std::move(why);
        out.push_back(std::move(r));
    }
    sort_recommendations(out);
    return out;
}

struct RecommendOptions {
    std::size_t k = 3;
    double alpha = kDefaultAlpha;
    const RatingsMatrix* ratings = nullptr;
};

namespace detail {

inline void apply_tag_overrides(TagVector& v, const UserProfile& p) {
    for (const auto& [tag, w] : p.tag_weights) v[tag] = w;
}

inline void add_profile_goals(TagVector& v, const UserProfile& p) {
    for (const auto& g : p.goals) v.emplace(goal_tag(g), 1.0);
}

/// True when any profile allergen is listed for the item or appears as a
/// token phrase in its ingredient text.
inline bool conflicts_with_allergens(const UserProfile& p, const std::set<std::string>& item_allergens,
                                     std::string_view ingredients = {}) {
    if (p.allergens.empty()) return false;
    for (const auto& a : item_allergens)
        if (p.allergens.count(normalize_name(a))) return true;
    if (!ingredients.empty()) {
        const auto toks = tokenize(ingredients);
        for (const auto& a : p.allergens) {
            const auto phrase = tokenize(a);
            if (!phrase.empty() && std::search(toks.begin(), toks.end(), phrase.begin(), phrase.end()) != toks.end())
                return true;
        }
    }
    return false;
}

inline void truncate(std::vector<Recommendation>& recs, std::size_t k) {
    if (recs.size() > k) recs.resize(k);
}

}  // namespace detail

inline TagVector recipe_features(const Recipe& r) { return {{diet_tag(r.dietary_type), 1.0}}; }

inline TagVector exercise_features(const Exercise& e) {
    TagVector v;
    for (auto g : e.goals) v[goal_tag(key(g))] = 1.0;
    v[intensity_tag(e.intensity)] = 1.0;
    if (e.setting == Setting::Either) {
        v[setting_tag(Setting::Home)] = 1.0;
        v[setting_tag(Setting::Gym)] = 1.0;
    } else {
        v[setting_tag(e.setting)] = 1.0;
    }
    return v;
}

inline TagVector supplement_features(const Supplement& s) {
    TagVector v;
    for (auto g : s.goals) v[goal_tag(key(g))] = 1.0;
    return v;
}

inline TagVector nutritionist_features(const Nutritionist& n) {
    TagVector v;
    for (const auto& g : n.specialties) v[goal_tag(g)] = 1.0;
    for (auto d : n.dietary_expertise) v[diet_tag(d)] = 1.0;
    return v;
}

/// Recipes of the requested dietary type that are safe for the profile's
/// allergens, hybrid-ranked.
inline std::vector<Recommendation> recommend_meals(const UserProfile& profile, DietaryType type,
                                                   const Catalog& catalog, const RecommendOptions& opts = {}) {
    TagVector user{{diet_tag(type), 1.0}};
    detail::apply_tag_overrides(user, profile);
    std::vector<Candidate> candidates;
    for (const auto& r : catalog.recipes) {
        if (r.dietary_type != type) continue;
        if (detail::conflicts_with_allergens(profile, r.allergens, r.ingredients)) continue;
        candidates.push_back({r.id, ItemKind::Meal, r.name, recipe_features(r)});
    }
    auto recs = hybrid_rank(user, candidates, opts.ratings, profile.id, opts.alpha);
    for (auto& r : recs) r.explanation = std::string(label(type)) + " recipe; " + r.explanation;
    detail::truncate(recs, opts.k);
    return recs;
}

inline std::vector<Recommendation> recommend_exercises(const UserProfile& profile, FitnessGoal goal,
                                                       const Catalog& catalog, const RecommendOptions& opts = {}) {
    TagVector user{{goal_tag(key(goal)), 1.0}};
    if (profile.workout_setting) user[setting_tag(*profile.workout_setting)] = 1.0;
    detail::apply_tag_overrides(user, profile);
    std::vector<Candidate> candidates;
    for (const auto& e : catalog.exercises) {
        if (!e.goals.count(goal)) continue;
        if (profile.workout_setting && e.setting != Setting::Either && e.setting != *profile.workout_setting) continue;
        candidates.push_back({e.id, ItemKind::Exercise, e.name, exercise_features(e)});
    }
    auto recs = hybrid_rank(user, candidates, opts.ratings, profile.id, opts.alpha);
    for (auto& r : recs) {
        const auto* e = catalog.exercise(r.item_id);
        r.explanation = std::string(label(goal)) + " routine, " + detail::format_number(e->duration_min, 0) + " min, " +
                        std::string(key(e->intensity)) + " intensity; " + r.explanation;
    }
    detail::truncate(recs, opts.k);
    return recs;
}

inline constexpr double kEarthRadiusKm = 6371.0;

/// Great-circle distance on a sphere of radius 6371 km.
inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    if (!a.valid() || !b.valid()) throw ValidationError({{"location", "coordinates out of range"}});
    constexpr double kRad = std::numbers::pi / 180.0;
    const double dlat = (b.latitude - a.latitude) * kRad;
    const double dlon = (b.longitude - a.longitude) * kRad;
    const double s1 = std::sin(dlat / 2.0), s2 = std::sin(dlon / 2.0);
    const double h = s1 * s1 + std::cos(a.latitude * kRad) * std::cos(b.latitude * kRad) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::min(1.0, h)));
}

/// Nearest store stocking `supplement_id`; ties by store id.
inline std::optional<StoreMatch> nearest_store(const Catalog& catalog, const std::string& supplement_id,
                                               const GeoPoint& from) {
    std::optional<StoreMatch> best;
    for (const auto& s : catalog.stores) {
        if (!s.inventory.count(supplement_id)) continue;
        const double d = haversine_km(from, s.location);
        if (!best || d < best->distance_km || (d == best->distance_km && s.id < best->store_id))
            best = StoreMatch{s.id, s.name, d};
    }
    return best;
}

/// Supplements for the goal, allergen-filtered, ranked by profile match and
/// paired with the nearest stocking store.
inline std::vector<Recommendation> recommend_supplements(const UserProfile& profile, HealthGoal goal,
                                                         const Catalog& catalog, const RecommendOptions& opts = {}) {
    if (!profile.location) throw ValidationError({{"location", "required to find nearby stores"}});
    TagVector user{{goal_tag(key(goal)), 1.0}};
    detail::add_profile_goals(user, profile);
    detail::apply_tag_overrides(user, profile);

    std::vector<Candidate> candidates;
    for (const auto& s : catalog.supplements) {
        if (!s.goals.count(goal)) continue;
        if (detail::conflicts_with_allergens(profile, s.allergens)) continue;
        candidates.push_back({s.id, ItemKind::Supplement, s.name, supplement_features(s)});
    }
    auto recs = hybrid_rank(user, candidates, nullptr, profile.id, 1.0);
    detail::truncate(recs, opts.k);
    for (auto& r : recs) {
        r.store = nearest_store(catalog, r.item_id, *profile.location);
        r.explanation = std::string(label(goal)) + " supplement; ";
        if (r.store)
            r.explanation += "available at " + r.store->store_name + " (" +
                             detail::format_number(r.store->distance_km) + " km away)";
        else
            r.explanation += "not currently stocked by any known store";
    }
    return recs;
}

/// Nutritionists ranked by expertise match with the profile's goals and
/// dietary type, then rating (desc), distance (asc, skipped without a
/// profile location) and id.
inline std::vector<Recommendation> recommend_nutritionists(const UserProfile& profile, const Catalog& catalog,
                                                           const RecommendOptions& opts = {}) {
    TagVector user;
    detail::add_profile_goals(user, profile);
    if (profile.dietary_type) user[diet_tag(*profile.dietary_type)] = 1.0;
    detail::apply_tag_overrides(user, profile);

    std::vector<Recommendation> recs;
    for (const auto& n : catalog.nutritionists) {
        Recommendation r;
        r.item_id = n.id;
        r.kind = ItemKind::Nutritionist;
        r.name = n.name;
        r.content = content_score(user, nutritionist_features(n));
        r.score = r.content;
        r.rating = n.rating;
        r.venue = n.venue;
        if (profile.location) r.distance_km = haversine_km(*profile.location, n.location);
        r.explanation = "expertise match " + detail::format_number(r.content) + ", rated " +
                        detail::format_number(n.rating, 1) + ", at " + n.venue;
        if (r.distance_km) r.explanation += " (" + detail::format_number(*r.distance_km) + " km away)";
        recs.push_back(std::move(r));
    }
    std::sort(recs.begin(), recs.end(), [](const Recommendation& a, const Recommendation& b) {
        if (a.score != b.score) return a.score > b.score;
        if (*a.rating != *b.rating) return *a.rating > *b.rating;
        if (a.distance_km && b.distance_km && *a.distance_km != *b.distance_km)
            return *a.distance_km < *b.distance_km;
        return a.item_id < b.item_id;
    });
    detail::truncate(recs, opts.k);
    return recs;
}

}  // namespace nutrirec
