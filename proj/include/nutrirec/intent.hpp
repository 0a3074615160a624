#pragma once

// Utterance -> structured intent. A keyword rule layer decides first; when no
// rule fires an optional trained classifier may supply a dietary intent.

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nutrirec/diet_classifier.hpp"
#include "nutrirec/error.hpp"
#include "nutrirec/text_pipeline.hpp"
#include "nutrirec/tsv.hpp"
#include "nutrirec/types.hpp"

namespace nutrirec {

enum class IntentKind { Dietary = 0, Fitness = 1, Health = 2, Unknown = 3 };
enum class IntentSource { Rules, Classifier };

struct Intent {
    std::variant<std::monostate, DietaryType, FitnessGoal, HealthGoal> target;
    double confidence = 0.0;
    IntentSource source = IntentSource::Rules;

    static Intent unknown() { return {}; }
    bool is_unknown() const noexcept { return target.index() == 0; }

    IntentKind kind() const {
        switch (target.index()) {
            case 1: return IntentKind::Dietary;
            case 2: return IntentKind::Fitness;
            case 3: return IntentKind::Health;
            default: return IntentKind::Unknown;
        }
    }

    std::optional<DietaryType> dietary() const {
        if (auto* d = std::get_if<DietaryType>(&target)) return *d;
        return std::nullopt;
    }
    std::optional<FitnessGoal> fitness() const {
        if (auto* g = std::get_if<FitnessGoal>(&target)) return *g;
        return std::nullopt;
    }
    std::optional<HealthGoal> health() const {
        if (auto* g = std::get_if<HealthGoal>(&target)) return *g;
        return std::nullopt;
    }

    friend bool operator==(const Intent&, const Intent&) = default;
};

/// "dietary:keto", "fitness:quick_workouts", "health:bone_health", "unknown".
inline std::string intent_key(const Intent& intent) {
    switch (intent.kind()) {
        case IntentKind::Dietary: return "dietary:" + std::string(key(*intent.dietary()));
        case IntentKind::Fitness: return "fitness:" + std::string(key(*intent.fitness()));
        case IntentKind::Health: return "health:" + std::string(key(*intent.health()));
        default: return "unknown";
    }
}

inline std::optional<Intent> parse_intent_key(std::string_view text) {
    if (text == "unknown") return Intent::unknown();
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    const auto family = text.substr(0, colon);
    const auto name = text.substr(colon + 1);
    Intent out;
    out.confidence = 1.0;
    if (family == "dietary") {
        if (auto v = parse_dietary_type(name)) out.target = *v;
        else return std::nullopt;
    } else if (family == "fitness") {
        if (auto v = parse_fitness_goal(name)) out.target = *v;
        else return std::nullopt;
    } else if (family == "health") {
        if (auto v = parse_health_goal(name)) out.target = *v;
        else return std::nullopt;
    } else {
        return std::nullopt;
    }
    return out;
}

inline std::string_view source_name(IntentSource s) { return s == IntentSource::Rules ? "rules" : "classifier"; }

struct IntentRule {
    Intent target;
    std::vector<std::string> phrases;                  // as written in the rule file
    std::vector<std::vector<std::string>> phrase_tokens;
    int priority = 0;                                  // lower wins among ties of the same family
    std::size_t declaration = 0;
};

/// Keyword rules. TSV columns: intent, phrases ('|'-separated), priority.
class RuleSet {
public:
    static RuleSet parse(std::istream& in, const std::string& source = "rules") {
        const auto table = tsv::read(in, source, {"intent", "phrases", "priority"});
        RuleSet rs;
        for (const auto& row : table.rows) {
            const auto where = source + ":" + std::to_string(row.line);
            auto intent = parse_intent_key(tsv::trim(row.cells[0]));
            if (!intent || intent->is_unknown()) throw LoadError(where + ": unknown intent '" + row.cells[0] + "'");
            IntentRule rule;
            rule.target = *intent;
            for (auto& p : tsv::split_list(row.cells[1])) {
                auto toks = tokenize(p);
                if (toks.empty()) throw LoadError(where + ": phrase '" + p + "' has no tokens");
                rule.phrase_tokens.push_back(std::move(toks));
                rule.phrases.push_back(std::move(p));
            }
            if (rule.phrases.empty()) throw LoadError(where + ": rule has no phrases");
            try {
                rule.priority = std::stoi(tsv::trim(row.cells[2]));
            } catch (const std::exception&) {
                throw LoadError(where + ": priority must be an integer");
            }
            rule.declaration = rs.rules_.size();
            rs.rules_.push_back(std::move(rule));
        }
        if (rs.rules_.empty()) throw LoadError(source + ": rule set is empty");
        return rs;
    }

    static RuleSet load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw LoadError("cannot open rules " + path);
        return parse(in, path);
    }

    const std::vector<IntentRule>& rules() const noexcept { return rules_; }
    bool empty() const noexcept { return rules_.empty(); }

private:
    std::vector<IntentRule> rules_;
};

/// Bundled rules; identical to data/intent_rules.tsv. Every utterance of
/// the dietary and fitness tables maps to its listed intent. Synonyms such as
/// "vegan" are deliberately absent: add rows to extend coverage.
inline constexpr std::string_view kDefaultRulesTsv =
    "intent\tphrases\tpriority\n"
    "dietary:vegetarian\tvegetarian|meat free|meatless\t0\n"
    "dietary:gluten_free\tgluten free|celiac|no gluten\t0\n"
    "dietary:high_protein\tprotein rich|high protein|more protein\t0\n"
    "dietary:keto\tketo|ketogenic|low carb\t0\n"
    "fitness:weight_management\tlose weight|tone my body|weight loss|burn fat|weight management\t0\n"
    "fitness:muscle_building\tbuild muscle|muscle mass|bulk up|gain muscle\t0\n"
    "fitness:cardiovascular_health\tcardiovascular|cardio|heart health|endurance\t0\n"
    "fitness:quick_workouts\tshort and effective|quick workout|workout ideas|short workout\t0\n"
    "health:immune_support\timmune|immunity|catching colds\t0\n"
    "health:muscle_recovery\tmuscle recovery|recover|recovery|sore muscles\t0\n"
    "health:bone_health\tbone health|bones|bone density\t0\n"
    "health:energy_boost\tenergy boost|more energy|tired|fatigue\t0\n"
    "health:sports_nutrition\tsports nutrition|athlete|athletic\t0\n"
    "health:stress_management\tstress|stressed|anxiety\t0\n"
    "health:weight_management\tmanage my weight\t0\n";

inline RuleSet default_rules() {
    std::istringstream in{std::string(kDefaultRulesTsv)};
    return RuleSet::parse(in, "default_rules");
}

/// Optional classifier used when no rule fires.
struct ClassifierRef {
    const ModelParams* params = nullptr;
    const Vocabulary* vocab = nullptr;
};

inline constexpr double kClassifierIntentThreshold = 0.5;

namespace detail {

inline bool contains_phrase(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase) {
    if (phrase.empty() || phrase.size() > tokens.size()) return false;
    return std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) != tokens.end();
}

}  // namespace detail

inline Intent extract_intent(std::string_view utterance, const RuleSet& rules,
                             std::optional<ClassifierRef> model = std::nullopt) {
    if (rules.empty()) throw ValidationError("extract_intent requires a non-empty rule set");
    const auto tokens = tokenize(utterance);

    const IntentRule* best = nullptr;
    std::size_t best_score = 0;
    auto ahead = [](const IntentRule& a, const IntentRule& b) {
        const auto ka = static_cast<int>(a.target.kind()), kb = static_cast<int>(b.target.kind());
        if (ka != kb) return ka < kb;
        if (a.priority != b.priority) return a.priority < b.priority;
        return a.declaration < b.declaration;
    };
    for (const auto& rule : rules.rules()) {
        std::size_t score = 0;
        for (const auto& phrase : rule.phrase_tokens)
            if (detail::contains_phrase(tokens, phrase)) ++score;
        if (score == 0) continue;
        if (!best || score > best_score || (score == best_score && ahead(rule, *best))) {
            best = &rule;
            best_score = score;
        }
    }
    if (best) {
        Intent out = best->target;
        out.confidence = 1.0;
        out.source = IntentSource::Rules;
        return out;
    }

    if (model && model->params && model->vocab) {
        const auto len = model->params->config.seq_len;
        const auto ids = encode(tokens, *model->vocab, len);
        // nothing the model has seen: its output would be bias alone
        if (std::none_of(ids.begin(), ids.end(), [](TokenId id) { return id > kUnkId; })) return Intent::unknown();
        const auto pred = predict(*model->params, EncodedRecipe{ids, ids, ids});
        if (pred.confidence >= kClassifierIntentThreshold && pred.class_index < kNumDietaryTypes) {
            Intent out;
            out.target = dietary_from_index(pred.class_index);
            out.confidence = pred.confidence;
            out.source = IntentSource::Classifier;
            return out;
        }
    }
    return Intent::unknown();
}

enum class Route { Meals, Exercises, Supplements, Nutritionists, Clarify };

inline std::string_view route_name(Route r) {
    switch (r) {
        case Route::Meals: return "meals";
        case Route::Exercises: return "exercises";
        case Route::Supplements: return "supplements";
        case Route::Nutritionists: return "nutritionists";
        default: return "clarify";
    }
}

/// Recommenders that answer an intent, in reply order.
inline std::vector<Route> dispatch(const Intent& intent, bool wants_expert_guidance = false) {
    switch (intent.kind()) {
        case IntentKind::Dietary: return {Route::Meals};
        case IntentKind::Fitness: return {Route::Exercises};
        case IntentKind::Health:
            if (wants_expert_guidance) return {Route::Supplements, Route::Nutritionists};
            return {Route::Supplements};
        default: return {Route::Clarify};
    }
}

}  // namespace nutrirec
