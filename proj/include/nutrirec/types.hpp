#pragma once

// Domain vocabularies shared by the classifier, intent rules, profiles and
// the catalog. Every enum has a stable snake_case key used in data files and
// on the wire, plus a display label.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "nutrirec/error.hpp"

namespace nutrirec {

enum class DietaryType { Vegetarian = 0, GlutenFree = 1, HighProtein = 2, Keto = 3 };

enum class FitnessGoal { WeightManagement, MuscleBuilding, CardiovascularHealth, QuickWorkouts };

enum class HealthGoal {
    ImmuneSupport,
    MuscleRecovery,
    BoneHealth,
    EnergyBoost,
    SportsNutrition,
    StressManagement,
    WeightManagement,
};

inline constexpr std::size_t kNumDietaryTypes = 4;

inline constexpr std::array<DietaryType, 4> kAllDietaryTypes = {
    DietaryType::Vegetarian, DietaryType::GlutenFree, DietaryType::HighProtein, DietaryType::Keto};

inline constexpr std::array<FitnessGoal, 4> kAllFitnessGoals = {
    FitnessGoal::WeightManagement, FitnessGoal::MuscleBuilding,
    FitnessGoal::CardiovascularHealth, FitnessGoal::QuickWorkouts};

inline constexpr std::array<HealthGoal, 7> kAllHealthGoals = {
    HealthGoal::ImmuneSupport,   HealthGoal::MuscleRecovery,   HealthGoal::BoneHealth,
    HealthGoal::EnergyBoost,     HealthGoal::SportsNutrition,  HealthGoal::StressManagement,
    HealthGoal::WeightManagement};

namespace detail {

struct EnumName {
    std::string_view key;
    std::string_view label;
};

inline constexpr std::array<EnumName, 4> kDietaryNames = {{
    {"vegetarian", "Vegetarian"},
    {"gluten_free", "Gluten-Free"},
    {"high_protein", "High-Protein"},
    {"keto", "Keto"},
}};

inline constexpr std::array<EnumName, 4> kFitnessNames = {{
    {"weight_management", "Weight Management"},
    {"muscle_building", "Muscle Building"},
    {"cardiovascular_health", "Cardiovascular Health"},
    {"quick_workouts", "Quick Workouts"},
}};

inline constexpr std::array<EnumName, 7> kHealthNames = {{
    {"immune_support", "Immune Support"},
    {"muscle_recovery", "Muscle Recovery"},
    {"bone_health", "Bone Health"},
    {"energy_boost", "Energy Boost"},
    {"sports_nutrition", "Sports Nutrition"},
    {"stress_management", "Stress Management"},
    {"weight_management", "Weight Management"},
}};

template <typename E, std::size_t N>
std::optional<E> lookup_key(const std::array<EnumName, N>& names, std::string_view key) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i].key == key) return static_cast<E>(i);
    }
    return std::nullopt;
}

}  // namespace detail

inline std::string_view key(DietaryType t) { return detail::kDietaryNames[static_cast<std::size_t>(t)].key; }
inline std::string_view label(DietaryType t) { return detail::kDietaryNames[static_cast<std::size_t>(t)].label; }
inline std::string_view key(FitnessGoal g) { return detail::kFitnessNames[static_cast<std::size_t>(g)].key; }
inline std::string_view label(FitnessGoal g) { return detail::kFitnessNames[static_cast<std::size_t>(g)].label; }
inline std::string_view key(HealthGoal g) { return detail::kHealthNames[static_cast<std::size_t>(g)].key; }
inline std::string_view label(HealthGoal g) { return detail::kHealthNames[static_cast<std::size_t>(g)].label; }

inline std::optional<DietaryType> parse_dietary_type(std::string_view s) {
    return detail::lookup_key<DietaryType>(detail::kDietaryNames, s);
}
inline std::optional<FitnessGoal> parse_fitness_goal(std::string_view s) {
    return detail::lookup_key<FitnessGoal>(detail::kFitnessNames, s);
}
inline std::optional<HealthGoal> parse_health_goal(std::string_view s) {
    return detail::lookup_key<HealthGoal>(detail::kHealthNames, s);
}

/// Goal names are shared between fitness and health goals ("weight_management"
/// is both), so profiles and nutritionist specialties store plain goal keys.
inline bool is_goal_key(std::string_view s) {
    return parse_fitness_goal(s).has_value() || parse_health_goal(s).has_value();
}

inline std::size_t class_index(DietaryType t) { return static_cast<std::size_t>(t); }

inline DietaryType dietary_from_index(std::size_t i) {
    if (i >= kNumDietaryTypes) throw ValidationError("dietary class index out of range: " + std::to_string(i));
    return static_cast<DietaryType>(i);
}

enum class Intensity { Low, Moderate, High };
enum class Setting { Home, Gym, Either };

inline std::string_view key(Intensity i) {
    static constexpr std::array<std::string_view, 3> k = {"low", "moderate", "high"};
    return k[static_cast<std::size_t>(i)];
}
inline std::string_view key(Setting s) {
    static constexpr std::array<std::string_view, 3> k = {"home", "gym", "either"};
    return k[static_cast<std::size_t>(s)];
}
inline std::optional<Intensity> parse_intensity(std::string_view s) {
    if (s == "low") return Intensity::Low;
    if (s == "moderate") return Intensity::Moderate;
    if (s == "high") return Intensity::High;
    return std::nullopt;
}
inline std::optional<Setting> parse_setting(std::string_view s) {
    if (s == "home") return Setting::Home;
    if (s == "gym") return Setting::Gym;
    if (s == "either") return Setting::Either;
    return std::nullopt;
}

/// Allergen and ingredient names compare lowercased and trimmed.
inline std::string normalize_name(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    std::string out(s.substr(b, e - b));
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

struct GeoPoint {
    double latitude = 0.0;
    double longitude = 0.0;

    bool valid() const {
        return latitude >= -90.0 && latitude <= 90.0 && longitude >= -180.0 && longitude <= 180.0;
    }
    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

}  // namespace nutrirec
