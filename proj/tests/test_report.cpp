#include <gtest/gtest.h>

#include <cmath>

#include "rsde/verify/report.hpp"

using namespace rsde::verify;

TEST(Report, RowPassRule) {
    ExperimentReport r;
    r.z = 3.0;
    r.add_row(1.0, 1.3, 1.0, 0.1);   // exactly at bound + 3 SE
    r.add_row(2.0, 1.31, 1.0, 0.1);  // just beyond
    EXPECT_TRUE(r.rows[0].pass);
    EXPECT_FALSE(r.rows[1].pass);
}

TEST(Report, FinalizePicksLeastSlack) {
    ExperimentReport r;
    r.add_row(1.0, 0.5, 1.0, 0.0);
    r.add_row(2.0, 0.9, 1.0, 0.0);
    r.add_row(3.0, 0.1, 1.0, 0.0);
    r.finalize();
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.status, "pass");
    EXPECT_EQ(r.empirical, 0.9);
    r.add_row(4.0, 2.0, 1.0, 0.1);
    r.finalize();
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.status, "fail");
    EXPECT_EQ(r.empirical, 2.0);
}

TEST(Report, NanBoundRowsCarryNoSlack) {
    ExperimentReport r;
    r.rows.push_back({0.1, 5.0, std::nan(""), 0.0, true});
    r.add_row(0.05, 0.2, 0.3, 0.0);
    r.finalize();
    EXPECT_EQ(r.empirical, 0.2);
    EXPECT_TRUE(r.pass);
}

TEST(Report, ExtraConditionsAndInvalid) {
    ExperimentReport r;
    r.add_row(1.0, 0.0, 1.0, 0.0);
    r.finalize(false);
    EXPECT_EQ(r.status, "fail");
    r.finalize(true, false);
    EXPECT_EQ(r.status, "invalid");
    EXPECT_FALSE(r.pass);
}

TEST(Report, JsonRoundTrip) {
    ExperimentReport r;
    r.name = "demo";
    r.check = "check_contraction";
    r.rows.push_back({0.1, 5.0, std::nan(""), 0.0, true});
    r.add_row(1.0, 0.25, 0.5, 0.01);
    r.flagged_typo = "something";
    r.metadata["k"] = 3;
    r.finalize();
    const Json j = to_json(r);
    EXPECT_TRUE(j["rows"][0]["bound"].is_null());  // NaN serializes as null
    const auto back = report_from_json(Json::parse(j.dump()));
    EXPECT_EQ(back.name, "demo");
    EXPECT_EQ(back.status, r.status);
    ASSERT_EQ(back.rows.size(), 2u);
    EXPECT_TRUE(std::isnan(back.rows[0].bound));
    EXPECT_EQ(back.rows[1].std_error, 0.01);
    EXPECT_EQ(*back.flagged_typo, "something");
    EXPECT_EQ(back.metadata["k"], 3);
    EXPECT_EQ(to_json(back).dump(), j.dump());
    // key order is fixed
    auto it = j.begin();
    EXPECT_EQ(it.key(), "name");
}
