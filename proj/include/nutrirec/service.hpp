#pragma once

// Chat and recommendation service: intent extraction -> dispatch ->
// recommenders -> templated reply, plus profile and feedback handling and a
// transport-independent JSON router (see http_server.hpp for the HTTP
// binding and docs/api.md for the wire schemas).

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nutrirec/catalog.hpp"
#include "nutrirec/diet_classifier.hpp"
#include "nutrirec/error.hpp"
#include "nutrirec/intent.hpp"
#include "nutrirec/profile.hpp"
#include "nutrirec/recommenders.hpp"
#include "nutrirec/tsv.hpp"
#include "nutrirec/version.hpp"

namespace nutrirec {

using nlohmann::json;

// --- reply templates -------------------------------------------------------

/// Bundled reply templates; identical to data/replies.tsv.
inline constexpr std::string_view kDefaultRepliesTsv =
    "key\ttemplate\n"
    "dietary:vegetarian\tTry our delicious {items}\n"
    "dietary:gluten_free\tHow about {items}\n"
    "dietary:high_protein\tSnack on {items}\n"
    "dietary:keto\tFeast on {items}\n"
    "fitness:weight_management\t{items} incorporating bodyweight exercises and nutritional guidance based on weight "
    "management goals\n"
    "fitness:muscle_building\t{items} with a hybrid approach, considering both user preferences and targeted muscle "
    "groups\n"
    "fitness:cardiovascular_health\t{items} tailored to the user's preferred activities, considering both intensity "
    "and variety\n"
    "fitness:quick_workouts\t{items} combining both cardio and strength exercises for time-efficient effectiveness\n"
    "supplements\tFor {goal}, we recommend {items}.\n"
    "nutritionists\tFor expert guidance, see {items}.\n"
    "empty\tI couldn't find any {request} that fit your profile right now.\n"
    "clarify\tSorry, I didn't catch that. You can say things like \"I'm a vegetarian\", \"I want to lose weight and "
    "tone my body.\" or \"I need immune support\".\n"
    "error\tSomething went wrong while preparing your recommendations: {error}\n";

class ReplyTemplates {
public:
    static ReplyTemplates parse(std::istream& in, const std::string& source = "replies") {
        const auto table = tsv::read(in, source, {"key", "template"});
        ReplyTemplates t;
        for (const auto& row : table.rows) t.templates_[tsv::trim(row.cells[0])] = row.cells[1];
        for (const char* required : {"clarify", "empty", "error"})
            if (!t.templates_.count(required))
                throw LoadError(source + ": missing required template '" + std::string(required) + "'");
        return t;
    }

    static ReplyTemplates defaults() {
        std::istringstream in{std::string(kDefaultRepliesTsv)};
        return parse(in, "default_replies");
    }

    static ReplyTemplates load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw LoadError("cannot open reply templates " + path);
        return parse(in, path);
    }

    /// Template for `key`, or `fallback`'s template when absent.
    std::string render(const std::string& key, const std::map<std::string, std::string>& vars,
                       const std::string& fallback = "empty") const {
        auto it = templates_.find(key);
        if (it == templates_.end()) it = templates_.find(fallback);
        std::string out = it == templates_.end() ? std::string() : it->second;
        for (const auto& [name, value] : vars) {
            const std::string slot = "{" + name + "}";
            for (std::size_t pos = out.find(slot); pos != std::string::npos; pos = out.find(slot, pos + value.size()))
                out.replace(pos, slot.size(), value);
        }
        return out;
    }

    const std::map<std::string, std::string>& entries() const noexcept { return templates_; }

private:
    std::map<std::string, std::string> templates_;
};

/// "a", "a or b", "a, b, or c".
inline std::string join_alternatives(const std::vector<std::string>& items) {
    if (items.empty()) return {};
    if (items.size() == 1) return items[0];
    if (items.size() == 2) return items[0] + " or " + items[1];
    std::string out;
    for (std::size_t i = 0; i + 1 < items.size(); ++i) out += items[i] + ", ";
    return out + "or " + items.back();
}

// --- JSON encodings ---------------------------------------------------------

inline json to_json(const Intent& intent) {
    json j;
    const auto k = intent.kind();
    static constexpr std::array<const char*, 4> kKinds = {"dietary", "fitness", "health", "unknown"};
    j["kind"] = kKinds[static_cast<std::size_t>(k)];
    j["key"] = intent_key(intent);
    if (auto d = intent.dietary()) j["value"] = key(*d);
    else if (auto f = intent.fitness()) j["value"] = key(*f);
    else if (auto h = intent.health()) j["value"] = key(*h);
    else j["value"] = nullptr;
    j["confidence"] = intent.confidence;
    j["source"] = source_name(intent.source);
    return j;
}

inline json to_json(const Recommendation& r) {
    json j;
    j["item_id"] = r.item_id;
    j["kind"] = key(r.kind);
    j["name"] = r.name;
    j["score"] = r.score;
    j["explanation"] = r.explanation;
    j["content_score"] = r.content;
    j["predicted_rating"] = r.collaborative ? json(*r.collaborative) : json(nullptr);
    j["store"] = r.store ? json{{"store_id", r.store->store_id},
                                {"name", r.store->store_name},
                                {"distance_km", r.store->distance_km}}
                         : json(nullptr);
    j["rating"] = r.rating ? json(*r.rating) : json(nullptr);
    j["venue"] = r.venue ? json(*r.venue) : json(nullptr);
    j["distance_km"] = r.distance_km ? json(*r.distance_km) : json(nullptr);
    return j;
}

inline json to_json(const std::vector<Recommendation>& recs) {
    json arr = json::array();
    for (const auto& r : recs) arr.push_back(to_json(r));
    return arr;
}

struct ChatTurn {
    std::string session;
    std::string message;
    std::string reply;
    Intent intent;
    std::vector<Route> routes;
    std::vector<Recommendation> recommendations;
    std::optional<std::string> error;
};

inline json to_json(const ChatTurn& t) {
    json j;
    j["session"] = t.session;
    j["message"] = t.message;
    j["reply"] = t.reply;
    j["intent"] = to_json(t.intent);
    j["routes"] = json::array();
    for (auto r : t.routes) j["routes"].push_back(route_name(r));
    j["recommendations"] = to_json(t.recommendations);
    j["error"] = t.error ? json(*t.error) : json(nullptr);
    return j;
}

// --- service -----------------------------------------------------------------

struct ServiceConfig {
    std::size_t top_k = 3;
    double alpha = kDefaultAlpha;
    /// Location given to sessions that have no stored profile.
    std::optional<GeoPoint> default_location = GeoPoint{40.7128, -74.0060};
    std::function<std::int64_t()> clock = now_seconds;
};

/// Request-level failures with an HTTP-style status.
class ServiceError : public Error {
public:
    ServiceError(int status, const std::string& message, std::vector<FieldError> fields = {})
        : Error(message), status_(status), fields_(std::move(fields)) {}

    int status() const noexcept { return status_; }
    const std::vector<FieldError>& fields() const noexcept { return fields_; }

private:
    int status_;
    std::vector<FieldError> fields_;
};

class NutritionService {
public:
    NutritionService(Catalog catalog, std::shared_ptr<ProfileStore> profiles, RuleSet rules = default_rules(),
                     ReplyTemplates templates = ReplyTemplates::defaults(), ServiceConfig config = {})
        : catalog_(std::move(catalog)),
          profiles_(std::move(profiles)),
          rules_(std::move(rules)),
          templates_(std::move(templates)),
          config_(std::move(config)) {
        if (!profiles_) profiles_ = std::make_shared<ProfileStore>();
        for (const auto& p : profiles_->all())
            for (const auto& f : p.feedback) ratings_.set(p.id, f.item_id, f.rating, f.timestamp);
    }

    /// Optional classifier used as the intent fallback.
    void set_classifier(Checkpoint model) {
        std::unique_lock lock(model_mutex_);
        model_ = std::make_shared<const Checkpoint>(std::move(model));
    }

    const Catalog& catalog() const noexcept { return catalog_; }
    const ServiceConfig& config() const noexcept { return config_; }
    ProfileStore& profiles() noexcept { return *profiles_; }

    UserProfile resolve_profile(const std::string& session) const {
        if (auto p = profiles_->get(session)) return *p;
        UserProfile anon;
        anon.id = session;
        anon.location = config_.default_location;
        return anon;
    }

    ChatTurn handle_chat(const std::string& session, const std::string& message) {
        ChatTurn turn;
        turn.session = session;
        turn.message = message;
        try {
            if (session.empty()) throw ValidationError({{"session", "must not be empty"}});
            std::shared_ptr<const Checkpoint> model;
            {
                std::shared_lock lock(model_mutex_);
                model = model_;
            }
            std::optional<ClassifierRef> classifier;
            if (model) classifier = ClassifierRef{&model->params, &model->vocab};
            turn.intent = extract_intent(message, rules_, classifier);

            UserProfile profile = resolve_profile(session);
            if (absorb_intent(profile, turn.intent)) profile = profiles_->upsert(profile);

            turn.routes = dispatch(turn.intent, profile.expert_guidance);
            std::vector<std::string> replies;
            for (Route route : turn.routes) {
                auto [text, recs] = answer(route, turn.intent, profile);
                replies.push_back(std::move(text));
                for (auto& r : recs) turn.recommendations.push_back(std::move(r));
            }
            for (std::size_t i = 0; i < replies.size(); ++i) turn.reply += (i ? " " : "") + replies[i];
        } catch (const std::exception& e) {
            turn.recommendations.clear();
            turn.error = e.what();
            turn.reply = templates_.render("error", {{"error", e.what()}});
        }
        if (turn.reply.empty()) turn.reply = templates_.render("clarify", {});
        {
            std::lock_guard lock(history_mutex_);
            history_[session].push_back(turn);
        }
        return turn;
    }

    /// Nutritionist referral from the stored profile (goals and dietary type
    /// gathered by earlier turns). Recorded in history like a chat turn.
    ChatTurn refer_nutritionist(const std::string& session) {
        ChatTurn turn;
        turn.session = session;
        turn.message = "(nutritionist referral)";
        turn.routes = {Route::Nutritionists};
        try {
            if (session.empty()) throw ValidationError({{"session", "must not be empty"}});
            auto [text, recs] = answer(Route::Nutritionists, turn.intent, resolve_profile(session));
            turn.reply = std::move(text);
            turn.recommendations = std::move(recs);
        } catch (const std::exception& e) {
            turn.error = e.what();
            turn.reply = templates_.render("error", {{"error", e.what()}});
        }
        std::lock_guard lock(history_mutex_);
        history_[session].push_back(turn);
        return turn;
    }

    std::vector<ChatTurn> history(const std::string& session) const {
        std::lock_guard lock(history_mutex_);
        auto it = history_.find(session);
        return it == history_.end() ? std::vector<ChatTurn>{} : it->second;
    }

    std::vector<Recommendation> recommend(ItemKind kind, const UserProfile& profile,
                                          const std::optional<std::string>& target = std::nullopt) const {
        std::shared_lock lock(ratings_mutex_);
        const RecommendOptions opts{config_.top_k, config_.alpha, &ratings_};
        switch (kind) {
            case ItemKind::Meal: {
                std::optional<DietaryType> t = profile.dietary_type;
                if (target) {
                    t = parse_dietary_type(*target);
                    if (!t) throw ServiceError(400, "unknown dietary type", {{"diet", "unknown dietary type '" + *target + "'"}});
                }
                if (!t) throw ServiceError(400, "no dietary type", {{"diet", "profile has no dietary type; pass diet="}});
                return recommend_meals(profile, *t, catalog_, opts);
            }
            case ItemKind::Exercise: {
                std::optional<FitnessGoal> g;
                if (target) {
                    g = parse_fitness_goal(*target);
                    if (!g) throw ServiceError(400, "unknown fitness goal", {{"goal", "unknown fitness goal '" + *target + "'"}});
                } else {
                    for (const auto& k : profile.goals)
                        if ((g = parse_fitness_goal(k))) break;
                }
                if (!g) throw ServiceError(400, "no fitness goal", {{"goal", "profile has no fitness goal; pass goal="}});
                return recommend_exercises(profile, *g, catalog_, opts);
            }
            case ItemKind::Supplement: {
                std::optional<HealthGoal> g;
                if (target) {
                    g = parse_health_goal(*target);
                    if (!g) throw ServiceError(400, "unknown health goal", {{"goal", "unknown health goal '" + *target + "'"}});
                } else {
                    for (const auto& k : profile.goals)
                        if ((g = parse_health_goal(k))) break;
                }
                if (!g) throw ServiceError(400, "no health goal", {{"goal", "profile has no health goal; pass goal="}});
                return recommend_supplements(profile, *g, catalog_, opts);
            }
            default:
                return recommend_nutritionists(profile, catalog_, opts);
        }
    }

    /// Finds which dataset holds `item_id`; `kind` disambiguates if given.
    std::optional<ItemKind> item_kind(const std::string& item_id, std::optional<ItemKind> kind = std::nullopt) const {
        auto has = [&](ItemKind k) {
            switch (k) {
                case ItemKind::Meal: return catalog_.recipe(item_id) != nullptr;
                case ItemKind::Exercise: return catalog_.exercise(item_id) != nullptr;
                case ItemKind::Supplement: return catalog_.supplement(item_id) != nullptr;
                default: return catalog_.nutritionist(item_id) != nullptr;
            }
        };
        if (kind) return has(*kind) ? kind : std::nullopt;
        for (auto k : {ItemKind::Meal, ItemKind::Exercise, ItemKind::Supplement, ItemKind::Nutritionist})
            if (has(k)) return k;
        return std::nullopt;
    }

    /// Records a 1..5 rating in the shared matrix and the session's profile.
    std::string record_feedback(const std::string& session, const std::string& item_id, int rating,
                                std::optional<ItemKind> kind = std::nullopt) {
        if (rating < 1 || rating > 5) throw ValidationError({{"rating", "must be an integer in 1..5"}});
        const auto k = item_kind(item_id, kind);
        if (!k) throw ServiceError(404, "unknown item '" + item_id + "'", {{"item_id", "not in the catalog"}});
        const std::string item_key = rating_key(*k, item_id);
        const auto ts = config_.clock();

        UserProfile profile = resolve_profile(session);
        auto it = std::find_if(profile.feedback.begin(), profile.feedback.end(),
                               [&](const FeedbackEntry& f) { return f.item_id == item_key; });
        if (it != profile.feedback.end()) *it = {item_key, rating, ts};
        else profile.feedback.push_back({item_key, rating, ts});
        profiles_->upsert(profile);

        std::unique_lock lock(ratings_mutex_);
        nutrirec::record_feedback(ratings_, session, item_key, rating, ts);
        return item_key;
    }

    RatingsMatrix ratings_snapshot() const {
        std::shared_lock lock(ratings_mutex_);
        return ratings_;
    }

private:
    /// Folds the stated preference into the profile; true when it changed.
    static bool absorb_intent(UserProfile& p, const Intent& intent) {
        if (auto d = intent.dietary()) {
            if (p.dietary_type == *d) return false;
            p.dietary_type = *d;
            return true;
        }
        if (auto f = intent.fitness()) return p.goals.insert(std::string(key(*f))).second;
        if (auto h = intent.health()) return p.goals.insert(std::string(key(*h))).second;
        return false;
    }

    static std::string render_item(const Recommendation& r) {
        switch (r.kind) {
            case ItemKind::Supplement:
                return r.store ? r.name + " from " + r.store->store_name : r.name + " (not stocked at any nearby store)";
            case ItemKind::Nutritionist: {
                std::ostringstream os;
                os << r.name << " (rating " << std::fixed << std::setprecision(1) << r.rating.value_or(0.0) << ") at "
                   << r.venue.value_or("");
                return os.str();
            }
            default: return r.name;
        }
    }

    std::pair<std::string, std::vector<Recommendation>> answer(Route route, const Intent& intent,
                                                               const UserProfile& profile) const {
        std::vector<Recommendation> recs;
        std::string template_key, request;
        std::map<std::string, std::string> vars;
        switch (route) {
            case Route::Meals:
                recs = recommend(ItemKind::Meal, profile, std::string(key(*intent.dietary())));
                template_key = intent_key(intent);
                request = std::string(label(*intent.dietary())) + " meals";
                break;
            case Route::Exercises:
                recs = recommend(ItemKind::Exercise, profile, std::string(key(*intent.fitness())));
                template_key = intent_key(intent);
                request = "workouts for " + lower(label(*intent.fitness()));
                break;
            case Route::Supplements:
                recs = recommend(ItemKind::Supplement, profile, std::string(key(*intent.health())));
                template_key = "supplements";
                vars["goal"] = lower(label(*intent.health()));
                request = "supplements for " + vars["goal"];
                break;
            case Route::Nutritionists:
                recs = recommend(ItemKind::Nutritionist, profile);
                template_key = "nutritionists";
                request = "nutritionists";
                break;
            default:
                return {templates_.render("clarify", {}), {}};
        }
        if (recs.empty()) return {templates_.render("empty", {{"request", request}}), {}};
        std::vector<std::string> names;
        for (const auto& r : recs) names.push_back(render_item(r));
        vars["items"] = join_alternatives(names);
        return {templates_.render(template_key, vars), std::move(recs)};
    }

    static std::string lower(std::string_view s) { return normalize_name(s); }

    Catalog catalog_;
    std::shared_ptr<ProfileStore> profiles_;
    RuleSet rules_;
    ReplyTemplates templates_;
    ServiceConfig config_;

    mutable std::shared_mutex model_mutex_;
    std::shared_ptr<const Checkpoint> model_;

    mutable std::shared_mutex ratings_mutex_;
    RatingsMatrix ratings_;

    mutable std::mutex history_mutex_;
    std::map<std::string, std::vector<ChatTurn>> history_;
};

// --- router ------------------------------------------------------------------

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    json body;
};

/// Maps the wire API onto a NutritionService. Transport-agnostic so it can
/// be exercised without sockets.
class ApiRouter {
public:
    explicit ApiRouter(NutritionService& service) : service_(service) {}

    ApiResponse handle(const ApiRequest& req) {
        try {
            return route(req);
        } catch (const ServiceError& e) {
            return error_response(e.status(), e.what(), e.fields());
        } catch (const ValidationError& e) {
            return error_response(400, e.what(), e.fields());
        } catch (const json::exception& e) {
            return error_response(400, std::string("malformed JSON: ") + e.what(), {});
        } catch (const std::exception& e) {
            return error_response(500, e.what(), {});
        }
    }

private:
    static ApiResponse error_response(int status, const std::string& message, const std::vector<FieldError>& fields) {
        json f = json::array();
        for (const auto& fe : fields) f.push_back({{"field", fe.field}, {"message", fe.message}});
        return {status, {{"error", message}, {"fields", f}}};
    }

    static json parse_object(const std::string& body, const std::set<std::string>& allowed) {
        json j = json::parse(body.empty() ? std::string("{}") : body);
        if (!j.is_object()) throw ServiceError(400, "request body must be a JSON object");
        std::vector<FieldError> unknown;
        for (const auto& [k, v] : j.items())
            if (!allowed.count(k)) unknown.push_back({k, "unknown field"});
        if (!unknown.empty()) throw ServiceError(400, "unknown fields in request", unknown);
        return j;
    }

    static void reject_unknown_query(const ApiRequest& req, const std::set<std::string>& allowed) {
        std::vector<FieldError> unknown;
        for (const auto& [k, v] : req.query)
            if (!allowed.count(k)) unknown.push_back({k, "unknown query parameter"});
        if (!unknown.empty()) throw ServiceError(400, "unknown query parameters", unknown);
    }

    static std::string required_string(const json& j, const char* field) {
        if (!j.contains(field) || !j[field].is_string() || j[field].get<std::string>().empty())
            throw ServiceError(400, std::string("missing ") + field, {{field, "required non-empty string"}});
        return j[field].get<std::string>();
    }

    ApiResponse route(const ApiRequest& req) {
        const std::string& path = req.path;
        if (path == "/health") {
            if (req.method != "GET") return error_response(405, "method not allowed", {});
            return {200, {{"status", "ok"}, {"service", "nutrirec"}, {"version", kVersion}}};
        }
        if (path == "/chat") {
            if (req.method != "POST") return error_response(405, "method not allowed", {});
            const json j = parse_object(req.body, {"session", "message"});
            const auto session = required_string(j, "session");
            if (!j.contains("message") || !j["message"].is_string())
                throw ServiceError(400, "missing message", {{"message", "required string"}});
            return {200, to_json(service_.handle_chat(session, j["message"].get<std::string>()))};
        }
        if (path == "/feedback") {
            if (req.method != "POST") return error_response(405, "method not allowed", {});
            const json j = parse_object(req.body, {"session", "item_id", "rating", "kind"});
            const auto session = required_string(j, "session");
            const auto item = required_string(j, "item_id");
            if (!j.contains("rating") || !j["rating"].is_number_integer())
                throw ServiceError(400, "invalid rating", {{"rating", "must be an integer in 1..5"}});
            std::optional<ItemKind> kind;
            if (j.contains("kind")) {
                kind = j["kind"].is_string() ? parse_item_kind(j["kind"].get<std::string>()) : std::nullopt;
                if (!kind) throw ServiceError(400, "invalid kind", {{"kind", "must be meal, exercise, supplement or nutritionist"}});
            }
            const auto rating = j["rating"].get<long long>();
            if (rating < 1 || rating > 5) throw ValidationError({{"rating", "must be an integer in 1..5"}});
            const auto item_key = service_.record_feedback(session, item, static_cast<int>(rating), kind);
            return {200, {{"status", "ok"}, {"session", session}, {"item_key", item_key}, {"rating", rating}}};
        }
        if (path.rfind("/profile/", 0) == 0) {
            const std::string id = path.substr(9);
            if (id.empty() || id.find('/') != std::string::npos) return error_response(404, "not found", {});
            if (req.method == "GET") {
                auto p = service_.profiles().get(id);
                if (!p) return error_response(404, "profile '" + id + "' not found", {});
                return {200, profile_to_json(*p)};
            }
            if (req.method == "PUT") {
                json j = json::parse(req.body.empty() ? std::string("{}") : req.body);
                if (!j.is_object()) throw ServiceError(400, "profile must be a JSON object");
                if (j.contains("id") && j["id"] != id)
                    throw ServiceError(400, "id mismatch", {{"id", "must match the path id '" + id + "'"}});
                j["id"] = id;
                const auto stored = service_.profiles().upsert(profile_from_json(j));
                return {200, profile_to_json(stored)};
            }
            return error_response(405, "method not allowed", {});
        }
        if (path.rfind("/recommendations/", 0) == 0) {
            if (req.method != "GET") return error_response(405, "method not allowed", {});
            const auto kind = parse_item_kind(path.substr(17));
            if (!kind) return error_response(404, "unknown recommendation kind", {});
            reject_unknown_query(req, {"session", "goal", "diet"});
            auto s = req.query.find("session");
            if (s == req.query.end() || s->second.empty())
                throw ServiceError(400, "missing session", {{"session", "required query parameter"}});
            std::optional<std::string> target;
            if (auto g = req.query.find("goal"); g != req.query.end()) target = g->second;
            if (auto d = req.query.find("diet"); d != req.query.end()) target = d->second;
            const auto profile = service_.resolve_profile(s->second);
            const auto recs = service_.recommend(*kind, profile, target);
            return {200, {{"session", s->second}, {"kind", key(*kind)}, {"recommendations", to_json(recs)}}};
        }
        return error_response(404, "no route for " + req.method + " " + path, {});
    }

    NutritionService& service_;
};

}  // namespace nutrirec
