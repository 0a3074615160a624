#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <thread>

#include "nutrirec/profile.hpp"

using namespace nutrirec;

namespace {

bool has_field(const ValidationError& e, const std::string& field) {
    for (const auto& f : e.fields())
        if (f.field == field) return true;
    return false;
}

UserProfile sample() {
    UserProfile p;
    p.id = "jane";
    p.height_m = 1.65;
    p.weight_kg = 62;
    p.dietary_type = DietaryType::Vegetarian;
    p.allergens = {"peanut", "tree nuts"};
    p.goals = {"weight_management", "immune_support"};
    p.location = GeoPoint{40.71, -74.0};
    p.workout_setting = Setting::Home;
    p.tag_weights = {{"goal:immune_support", 2.0}};
    p.feedback = {{"meal:r001", 5, 1700000000}};
    return p;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("nutrirec_" + name + "_" + std::to_string(::getpid()));
}

}  // namespace

TEST(Bmi, Arithmetic) {
    EXPECT_NEAR(compute_bmi(70, 1.75), 22.857142857142858, 1e-12);
    EXPECT_NEAR(compute_bmi(92, 1.75), 30.040816326530614, 1e-12);
    EXPECT_GT(compute_bmi(92, 1.75), 30.0);
    EXPECT_THROW(compute_bmi(70, 0.0), ValidationError);
}

TEST(Bmi, CategoryBoundaries) {
    EXPECT_EQ(bmi_category(30.1), BmiCategory::Obese);
    EXPECT_EQ(bmi_category(30.0), BmiCategory::Overweight);
    EXPECT_EQ(bmi_category(22.0), BmiCategory::Normal);
    EXPECT_EQ(bmi_category(18.4), BmiCategory::Underweight);
    EXPECT_EQ(bmi_category(18.5), BmiCategory::Normal);
    EXPECT_EQ(bmi_category(25.0), BmiCategory::Overweight);
    EXPECT_THROW(bmi_category(0.0), ValidationError);
}

TEST(Bmi, CustomCutPoints) {
    const BmiCutPoints asian{18.5, 23.0, 27.5};
    EXPECT_EQ(bmi_category(24.0, asian), BmiCategory::Overweight);
    EXPECT_EQ(bmi_category(28.0, asian), BmiCategory::Obese);
}

TEST(Bmr, MifflinStJeor) {
    EXPECT_DOUBLE_EQ(compute_bmr(70, 1.75, 30, Sex::Male), 1648.75);
    EXPECT_DOUBLE_EQ(compute_bmr(70, 1.75, 30, Sex::Female), 1482.75);
    for (double w : {45.0, 80.0, 130.0})
        for (double a : {18.0, 50.0, 90.0})
            EXPECT_NEAR(compute_bmr(w, 1.6, a, Sex::Male) - compute_bmr(w, 1.6, a, Sex::Female), 166.0, 1e-9);
}

TEST(Validation, FieldLevelErrors) {
    auto p = sample();
    p.weight_kg = -5;
    p.goals.insert("flying");
    try {
        validate_profile(p);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_TRUE(has_field(e, "weight_kg"));
        EXPECT_TRUE(has_field(e, "goals"));
    }
}

TEST(Json, RoundTrip) {
    const auto p = sample();
    EXPECT_EQ(profile_from_json(profile_to_json(p)), p);
}

TEST(Json, StrictDecoding) {
    auto j = profile_to_json(sample());
    j["favourite_colour"] = "blue";
    j["sex"] = "other";
    try {
        profile_from_json(j);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_TRUE(has_field(e, "favourite_colour"));
        EXPECT_TRUE(has_field(e, "sex"));
    }
    EXPECT_THROW(profile_from_json(nlohmann::json{{"weight_kg", 70}}), ValidationError);  // no id
    const auto minimal = profile_from_json(nlohmann::json{{"id", "x"}});
    EXPECT_EQ(minimal.weight_kg, UserProfile{}.weight_kg);
}

TEST(Store, UpsertReplacesById) {
    ProfileStore s;
    s.upsert(sample());
    auto p = sample();
    p.weight_kg = 64;
    s.upsert(p);
    EXPECT_EQ(s.size(), 1u);
    EXPECT_EQ(s.get("jane")->weight_kg, 64);
    EXPECT_FALSE(s.get("nobody"));
}

TEST(Store, RejectsInvalidProfile) {
    ProfileStore s;
    auto p = sample();
    p.weight_kg = -1;
    EXPECT_THROW(s.upsert(p), ValidationError);
    EXPECT_EQ(s.size(), 0u);
}

TEST(Store, PersistsAndReloads) {
    const auto path = temp_path("profiles.jsonl");
    std::filesystem::remove(path);
    {
        auto s = ProfileStore::open(path);
        EXPECT_EQ(s.size(), 0u);
        s.upsert(sample());
        UserProfile other;
        other.id = "sam";
        s.upsert(other);
    }
    const auto loaded = ProfileStore::load(path);
    EXPECT_EQ(loaded.size(), 2u);
    EXPECT_EQ(*loaded.get("jane"), sample());
    EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    std::filesystem::remove(path);
}

TEST(Store, LoadReportsLineOfBadRecord) {
    const auto path = temp_path("bad.jsonl");
    {
        std::ofstream out(path);
        out << profile_to_json(sample()).dump() << "\n{\"id\": \"x\", \"weight_kg\": -3}\n";
    }
    try {
        ProfileStore::load(path);
        FAIL();
    } catch (const LoadError& e) {
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    }
    std::filesystem::remove(path);
    EXPECT_THROW(ProfileStore::load(path), LoadError);
}

TEST(Store, ConcurrentWritersAndReaders) {
    ProfileStore s;
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&s, t] {
            for (int i = 0; i < 50; ++i) {
                UserProfile p;
                p.id = "u" + std::to_string(t) + "_" + std::to_string(i);
                s.upsert(p);
                (void)s.get("u0_0");
            }
        });
    for (auto& th : threads) th.join();
    EXPECT_EQ(s.size(), 200u);
}
