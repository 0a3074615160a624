#pragma once

// Scripted multi-turn conversations replayed against a NutritionService.

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "nutrirec/error.hpp"
#include "nutrirec/service.hpp"

namespace nutrirec {

struct ScenarioStep {
    enum class Kind { Say, ReferNutritionist };
    Kind kind = Kind::Say;
    std::string text;
};

struct Scenario {
    std::string name;
    std::string session;
    std::string summary;
    std::vector<ScenarioStep> steps;
};

inline const std::map<std::string, Scenario>& builtin_scenarios() {
    static const std::map<std::string, Scenario> all = {
        {"jane",
         {"jane",
          "jane",
          "vegetarian meals, weight-management workout, immune support, nutritionist referral",
          {{ScenarioStep::Kind::Say, "I'm a vegetarian."},
           {ScenarioStep::Kind::Say, "I want to lose weight and tone my body."},
           {ScenarioStep::Kind::Say, "I need immune support."},
           {ScenarioStep::Kind::ReferNutritionist, ""}}}},
    };
    return all;
}

/// Thrown for unknown scenario names; the message lists what exists.
class UsageError : public Error {
public:
    using Error::Error;
};

inline const Scenario& find_scenario(const std::string& name) {
    const auto& all = builtin_scenarios();
    auto it = all.find(name);
    if (it == all.end()) {
        std::string names;
        for (const auto& [n, s] : all) names += (names.empty() ? "" : ", ") + n;
        throw UsageError("unknown scenario '" + name + "'; available: " + names);
    }
    return it->second;
}

struct Transcript {
    std::string scenario;
    std::vector<ChatTurn> turns;
};

inline Transcript run_scenario(const std::string& name, NutritionService& service) {
    const Scenario& sc = find_scenario(name);
    Transcript t{sc.name, {}};
    for (const auto& step : sc.steps) {
        if (step.kind == ScenarioStep::Kind::Say) t.turns.push_back(service.handle_chat(sc.session, step.text));
        else t.turns.push_back(service.refer_nutritionist(sc.session));
    }
    return t;
}

/// "user: ..." / "bot: ..." lines, one blank line between turns.
inline void write_transcript(std::ostream& out, const Transcript& t) {
    out << "# scenario " << t.scenario << '\n';
    for (std::size_t i = 0; i < t.turns.size(); ++i) {
        const auto& turn = t.turns[i];
        if (i) out << '\n';
        out << "user: " << turn.message << '\n';
        out << "intent: " << intent_key(turn.intent) << '\n';
        out << "bot: " << turn.reply << '\n';
    }
}

}  // namespace nutrirec
