#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "lyapinfl/surgery.hpp"

using namespace lyapinfl;

namespace {

const PLMap t_minus = PLMap::from_slopes(std::vector<double>{1.2, 19, 20});

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST(AddBranch, DoublingFromTen)
{
    // The four-inflection threshold sits between 80 and 85, so doubling from
    // 10 overshoots to 160.
    const BranchSearchResult r = add_branch_search(t_minus, 4, 10.0);
    EXPECT_EQ(r.tried, (std::vector<double>{10, 20, 40, 80, 160}));
    EXPECT_EQ(r.map.branch_count(), 4u);
    EXPECT_EQ(r.map.max_log_slope(), 160.0);
    EXPECT_GE(r.report.transversal_count, 4u);
}

TEST(AddBranch, ExactlyFourAtOneHundred)
{
    const BranchSearchResult r = add_branch_search(t_minus, 4, 12.5);
    EXPECT_EQ(r.map.max_log_slope(), 100.0);
    EXPECT_EQ(r.report.transversal_count, 4u);
}

TEST(AddBranch, ThresholdBracket)
{
    EXPECT_LT(find_inflections(t_minus.with_log_slope(80.0)).transversal_count, 4u);
    EXPECT_EQ(find_inflections(t_minus.with_log_slope(85.0)).transversal_count, 4u);
}

TEST(AddBranch, CapIsReported)
{
    SearchOptions opt;
    opt.lambda_cap = 4.0;
    EXPECT_EQ(code_of([&] { add_branch_search(t_minus, 4, 3.1, opt); }), ErrorCode::CapExceeded);
}

TEST(AddBranch, TargetAlreadyMetStopsAtFirstCandidate)
{
    const BranchSearchResult r = add_branch_search(t_minus, 2, 3.5);
    EXPECT_EQ(r.tried.size(), 1u);
    EXPECT_EQ(r.map.max_log_slope(), 3.5);
}

TEST(AddBranch, RejectsBadArguments)
{
    EXPECT_EQ(code_of([] { add_branch_search(t_minus, 4, 2.0); }), ErrorCode::InvalidArgument);
    SearchOptions flat;
    flat.growth = 1.0;
    EXPECT_EQ(code_of([&] { add_branch_search(t_minus, 4, 10.0, flat); }), ErrorCode::InvalidArgument);
}

TEST(AddBranch, PatternPreconditionOnBase)
{
    SearchOptions opt;
    opt.require_pattern = true;
    const PLMap t_plus = PLMap::from_slopes(std::vector<double>{3, 4, 80});
    EXPECT_EQ(code_of([&] { add_branch_search(t_plus, 4, 10.0, opt); }), ErrorCode::BasePatternViolation);
    const BranchSearchResult r = add_branch_search(t_minus, 4, 12.5, opt);
    EXPECT_TRUE(r.report.predicates.negative_parameter_pattern);
}

TEST(Chain, NoStepsWhenAlreadyAtTarget)
{
    const SurgeryTrace tr = build_chain(t_minus, 3);
    EXPECT_TRUE(tr.steps.empty());
    EXPECT_EQ(tr.base_count, 2u);
    EXPECT_EQ(tr.final_map, t_minus);
}

TEST(Chain, FourBranches)
{
    const SurgeryTrace tr = build_chain(t_minus, 4);
    ASSERT_EQ(tr.steps.size(), 1u);
    EXPECT_EQ(tr.steps[0].branches, 4u);
    EXPECT_GE(tr.steps[0].transversal_count, 4u);
    EXPECT_TRUE(tr.steps[0].pattern);
    EXPECT_EQ(tr.final_map.branch_count(), 4u);
    EXPECT_GE(tr.final_report.transversal_count, tr.base_count + 2);
}

TEST(Chain, FailureNamesTheStep)
{
    SearchOptions opt;
    opt.lambda_cap = 2e3;
    try {
        build_chain(t_minus, 5, opt);
        FAIL() << "expected the fifth branch to stall";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CapExceeded);
        EXPECT_NE(std::string(e.what()).find("5 branches"), std::string::npos);
    }
}

TEST(Coincidence, ReferenceBracket)
{
    const CoincidenceResult c = milestone_coincidence_search(std::log(1.2), std::log(200.0), 29.542, 29.543);
    EXPECT_NEAR(c.x_star, 29.54276, 1e-3);
    EXPECT_GE(c.x_star, 29.542);
    EXPECT_LE(c.x_star, 29.543);
    EXPECT_NEAR(c.t2, 0.1008, 5e-4);
    EXPECT_NEAR(alpha(c.report.map, c.t2), std::log(c.x_star), 1e-12);
    EXPECT_LE(std::abs(c.g_at_t2), g_zero_band(f_derivs(c.report.map, c.t2).log_f()));

    const InflectionReport& r = c.report;
    ASSERT_EQ(r.inflections.size(), 2u);
    EXPECT_NEAR(r.inflections[0].t, -0.4218, 5e-4);
    EXPECT_NEAR(r.inflections[0].alpha, 1.2159, 5e-4);
    EXPECT_NEAR(r.inflections[1].t, 0.1008, 5e-4);
    EXPECT_NEAR(r.inflections[1].alpha, 3.3858, 5e-4);
    ASSERT_TRUE(r.inflections[1].coincident_milestone.has_value());
    EXPECT_EQ(*r.inflections[1].coincident_milestone, 1u);
    EXPECT_NEAR(r.inflections[1].alpha, std::log(c.x_star), 1e-6);
}

TEST(Coincidence, LooseToleranceStillLandsInBand)
{
    const CoincidenceResult c = milestone_coincidence_search(std::log(1.2), std::log(200.0), 29.542, 29.543, 1e-9);
    EXPECT_NEAR(c.x_star, 29.54276, 1e-3);
    // G moves by ~|dG/dx2| * 1e-9 across the final bracket
    EXPECT_LE(std::abs(c.g_at_t2), 1e-8);
}

TEST(Coincidence, BadBrackets)
{
    const double l1 = std::log(1.2), l3 = std::log(200.0);
    EXPECT_EQ(code_of([&] { milestone_coincidence_search(l1, l3, 29.543, 29.542); }), ErrorCode::NoSignChange);
    EXPECT_EQ(code_of([&] { milestone_coincidence_search(l1, l3, 29.0, 29.1); }), ErrorCode::NoSignChange);
    // x2 = 0.5 is not an expanding slope
    EXPECT_EQ(code_of([&] { milestone_coincidence_search(l1, l3, 0.5, 30.0); }), ErrorCode::NonExpandingSlope);
}
