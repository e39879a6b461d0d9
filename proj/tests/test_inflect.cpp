#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lyapinfl/app.hpp"
#include "lyapinfl/inflect.hpp"
#include "oracles.hpp"

using namespace lyapinfl;

namespace {

PLMap slopes(std::vector<double> x) { return PLMap::from_slopes(x); }

const BoundResult* bound(const InflectionReport& r, const std::string& name)
{
    for (const auto& b : r.bounds)
        if (b.name == name)
            return &b;
    return nullptr;
}

void expect_points(const InflectionReport& r, std::vector<double> t, std::vector<double> a, double a_tol,
                   bool relative)
{
    ASSERT_EQ(r.transversal_count, t.size());
    ASSERT_EQ(r.inflections.size(), t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_NEAR(r.inflections[i].t, t[i], 5e-4);
        EXPECT_NEAR(r.inflections[i].alpha, a[i], relative ? a_tol * a[i] : a_tol);
        EXPECT_EQ(r.inflections[i].kind, InflectionKind::Transversal);
    }
}

std::vector<int> signs(const std::vector<ConvexityInterval>& p)
{
    std::vector<int> s;
    for (const auto& iv : p)
        s.push_back(iv.sign);
    return s;
}

} // namespace

TEST(FindInflections, TMinus)
{
    const InflectionReport r = find_inflections(slopes({1.2, 19, 20}));
    expect_points(r, {-0.3378, -0.1706}, {1.4038, 1.7272}, 5e-4, false);
    EXPECT_LT(r.inflections[1].t, 0.0);
    EXPECT_TRUE(r.predicates.all_parameters_negative);
    EXPECT_EQ(signs(r.convexity_profile), (std::vector<int>{-1, 1, -1}));
    EXPECT_EQ(r.convexity_profile[0].t_hi, r.inflections[0].t);
    EXPECT_EQ(r.convexity_profile[1].t_hi, r.inflections[1].t);
    for (const auto& p : r.inflections) {
        EXPECT_LE(p.bracket_lo, p.t);
        EXPECT_GE(p.bracket_hi, p.t);
        EXPECT_LE(p.bracket_hi - p.bracket_lo, 1e-12);
        EXPECT_NEAR(p.alpha, alpha(r.map, p.t), 1e-12);
    }
}

TEST(FindInflections, TPlus)
{
    const InflectionReport r = find_inflections(slopes({3, 4, 80}));
    expect_points(r, {0.0881, 0.3289}, {2.4910, 3.0781}, 5e-4, false);
    EXPECT_GT(r.inflections[0].t, 0.0);
    EXPECT_TRUE(r.predicates.all_parameters_positive);
    EXPECT_FALSE(negative_param_pattern(r));
}

TEST(FindInflections, TMinusStar)
{
    const double lam[] = {std::log(1.2), std::log(19.0), std::log(20.0), 100.0};
    const InflectionReport r = find_inflections(PLMap::from_log_slopes(lam));
    expect_points(r, {-0.3378, -0.1703, -0.1147, 0.0293}, {1.4038, 1.7278, 1.8338, 85.7605}, 1e-3, true);
    EXPECT_TRUE(negative_param_pattern(r));
    EXPECT_TRUE(r.predicates.negative_parameter_pattern);
    EXPECT_EQ(signs(convexity_profile(r)), (std::vector<int>{-1, 1, -1, 1, -1}));
    const BoundResult* general = bound(r, "branch_number");
    ASSERT_NE(general, nullptr);
    EXPECT_EQ(general->bound, 16);
    EXPECT_TRUE(general->satisfied);
}

TEST(FindInflections, TwoBranchMatchesDenseScan)
{
    const PLMap m = slopes({2, 4});
    const InflectionReport r = find_inflections(m);
    const auto scan = oracle::scan_sign_changes(
        [&](double t) { return g_char(m, t); }, -50.0, 50.0, 100001,
        [&](double t) { return g_zero_band(f_derivs(m, t).log_f()); });
    ASSERT_EQ(r.transversal_count, scan.size());
    for (std::size_t i = 0; i < scan.size(); ++i)
        EXPECT_NEAR(r.inflections[i].t, scan[i], 1e-3);
}

TEST(FindInflections, NoInflections)
{
    const PLMap m = slopes({2, 2.5});
    const InflectionReport r = find_inflections(m);
    EXPECT_EQ(r.transversal_count, 0u);
    ASSERT_EQ(r.convexity_profile.size(), 1u);
    EXPECT_EQ(r.convexity_profile[0].sign, -1);
    EXPECT_EQ(convexity_profile(m).size(), 1u);
}

TEST(FindInflections, DegenerateMap)
{
    try {
        find_inflections(slopes({3, 3, 3}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateSpectrum);
    }
}

TEST(CheckBounds, ThreeBranches)
{
    const InflectionReport r = find_inflections(slopes({1.2, 19, 20}));
    EXPECT_EQ(bound(r, "branch_number")->bound, 7);
    EXPECT_EQ(bound(r, "three_branch")->bound, 2);
    EXPECT_TRUE(bound(r, "three_branch")->applies);
    EXPECT_EQ(bound(r, "essential_branch_number")->bound, 7);
    EXPECT_TRUE(bound(r, "essential_three")->applies);
    EXPECT_FALSE(bound(r, "essential_two")->applies);
    for (const auto& b : r.bounds)
        EXPECT_TRUE(!b.applies || b.satisfied) << b.name;
}

TEST(CheckBounds, FiveBranchesTwoSlopes)
{
    const InflectionReport r = find_inflections(slopes({1.5, 1.5, 1.5, 40, 40}));
    EXPECT_TRUE(bound(r, "essential_two")->applies);
    EXPECT_EQ(bound(r, "essential_two")->bound, 2);
    EXPECT_EQ(bound(r, "branch_number")->bound, 30);
    EXPECT_FALSE(bound(r, "three_branch")->applies);
    EXPECT_LE(r.transversal_count, 2u);
    EXPECT_EQ(general_bound(4), 16);
    EXPECT_EQ(general_bound(3), 7);
}

TEST(Milestones, CoincidenceIsFlagged)
{
    const InflectionReport r = find_inflections(slopes({1.2, 29.54276, 200}), {1e-12, 1e-9, 1e-9, 1e-3});
    ASSERT_EQ(r.inflections.size(), 2u);
    ASSERT_TRUE(r.inflections[1].coincident_milestone.has_value());
    EXPECT_EQ(*r.inflections[1].coincident_milestone, 1u);
    EXPECT_NEAR(r.inflections[1].alpha, 3.3858, 5e-4);
    EXPECT_FALSE(r.inflections[0].coincident_milestone.has_value());
}

TEST(Milestones, TMinusInflectionsShareTheFirstInterval)
{
    const InflectionReport r = find_inflections(slopes({1.2, 19, 20}));
    for (const auto& p : r.inflections) {
        ASSERT_TRUE(p.milestone_interval.has_value());
        EXPECT_EQ(*p.milestone_interval, 0u);
        EXPECT_FALSE(p.coincident_milestone.has_value());
    }
}

TEST(Milestones, TerminalMilestonesNeverCoincide)
{
    app::Rng rng(41);
    for (int i = 0; i < 200; ++i) {
        const PLMap m = app::random_map(rng);
        if (essential_branch_number(m) < 2)
            continue;
        const InflectionReport r = find_inflections(m);
        const std::size_t last = r.milestones.size() - 1;
        for (const auto& p : r.inflections) {
            if (p.coincident_milestone) {
                EXPECT_NE(*p.coincident_milestone, 0u);
                EXPECT_NE(*p.coincident_milestone, last);
            }
            EXPECT_GT(p.alpha, m.min_log_slope());
            EXPECT_LT(p.alpha, m.max_log_slope());
        }
    }
}

TEST(QSign, Classes)
{
    const double wide[] = {1, 11, 121};
    EXPECT_EQ(q_sign_class(PLMap::from_log_slopes(wide)), QSignClass::AllPositive);
    const double low_pair[] = {1, 1, 2};
    EXPECT_EQ(q_sign_class(PLMap::from_log_slopes(low_pair)), QSignClass::AllPositive);
    const double high_pair[] = {1, 2, 2};
    EXPECT_EQ(q_sign_class(PLMap::from_log_slopes(high_pair)), QSignClass::AllNegative);
    const double both[] = {1, 1, 2, 2};
    EXPECT_EQ(q_sign_class(PLMap::from_log_slopes(both)), QSignClass::Mixed);

    const double close[] = {1, 1.1, 1.2};
    const PLMap m = PLMap::from_log_slopes(close);
    const double q = oracle::q_expanded(1, 1.1, 1.2);
    const QSignClass c = q_sign_class(m);
    if (q > 1e-12) {
        EXPECT_EQ(c, QSignClass::AllPositive);
    } else if (q < -1e-12) {
        EXPECT_EQ(c, QSignClass::AllNegative);
    }
    EXPECT_TRUE(find_inflections(m).predicates.q_consistent);

    try {
        q_sign_class(slopes({2, 3}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotApplicable);
    }
}

TEST(QSign, ClassesAreConsistentWithInflectionSigns)
{
    app::Rng rng(43);
    for (int i = 0; i < 300; ++i) {
        const PLMap m = app::random_map(rng, 3, 6);
        if (essential_branch_number(m) < 2)
            continue;
        const InflectionReport r = find_inflections(m);
        ASSERT_TRUE(r.predicates.q_class.has_value());
        std::size_t nonpos = 0, nonneg = 0;
        for (const auto& p : r.inflections) {
            nonpos += p.t <= 0.0;
            nonneg += p.t >= 0.0;
        }
        if (*r.predicates.q_class == QSignClass::AllPositive) {
            EXPECT_LE(nonpos, 1u);
        }
        if (*r.predicates.q_class == QSignClass::AllNegative) {
            EXPECT_LE(nonneg, 1u);
        }
        EXPECT_TRUE(r.predicates.q_consistent);
    }
}

TEST(TwoSlope, TStar)
{
    EXPECT_NEAR(two_slope_tstar(slopes({2, 8, 8})), -0.5, 1e-15);
    EXPECT_EQ(two_slope_tstar(slopes({2, 8})), 0.0);
    try {
        two_slope_tstar(slopes({2, 3, 4}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotApplicable);
    }
}

TEST(TwoSlope, EqualMultiplicitiesStraddleTheMidpoint)
{
    bool seen = false;
    for (double x2 = 3.0; x2 < 1e6 && !seen; x2 *= 1.5) {
        const PLMap m = slopes({1.1, x2});
        const InflectionReport r = find_inflections(m);
        if (r.transversal_count != 2)
            continue;
        seen = true;
        const double mid = 0.5 * (m.min_log_slope() + m.max_log_slope());
        EXPECT_LT(r.inflections[0].alpha, mid);
        EXPECT_GT(r.inflections[1].alpha, mid);
        EXPECT_LT(r.inflections[0].t, 0.0);
        EXPECT_GT(r.inflections[1].t, 0.0);
        EXPECT_TRUE(r.predicates.t_star_straddles);
    }
    EXPECT_TRUE(seen);
}

TEST(TwoSlope, RandomStraddle)
{
    app::Rng rng(47);
    int with_two = 0;
    for (int i = 0; i < 400; ++i) {
        const std::size_t n1 = rng.index(1, 4), n2 = rng.index(1, 4);
        const double l1 = rng.log_uniform(0.05, 1.0), l2 = rng.log_uniform(2.0, 12.0);
        std::vector<double> lam(n1, l1);
        lam.insert(lam.end(), n2, l2);
        const PLMap m = PLMap::from_log_slopes(lam);
        const InflectionReport r = find_inflections(m);
        ASSERT_LE(r.transversal_count, 2u);
        ASSERT_TRUE(r.predicates.t_star.has_value());
        if (r.transversal_count == 2) {
            ++with_two;
            EXPECT_LT(r.inflections[0].t, *r.predicates.t_star);
            EXPECT_GT(r.inflections[1].t, *r.predicates.t_star);
        }
    }
    EXPECT_GT(with_two, 10);
}

TEST(NegativePattern, Examples)
{
    InflectionReport r(slopes({2, 3}));
    EXPECT_FALSE(negative_param_pattern(r));
    for (double t : {-0.3378, -0.1703, -0.1147, 0.0293}) {
        InflectionPoint p;
        p.t = t;
        r.inflections.push_back(p);
    }
    EXPECT_TRUE(negative_param_pattern(r));
    r.inflections[2].t = 0.01;
    EXPECT_FALSE(negative_param_pattern(r));
}

TEST(InflectProperty, EvennessBoundsPanelsAndTails)
{
    app::Rng rng(53);
    for (int i = 0; i < 150; ++i) {
        const PLMap m = app::random_map(rng);
        if (essential_branch_number(m) < 2)
            continue;
        const InflectionReport r = find_inflections(m);
        EXPECT_EQ(r.transversal_count % 2, 0u);
        for (const auto& b : r.bounds)
            EXPECT_TRUE(!b.applies || b.satisfied) << b.name;
        EXPECT_EQ(r.convexity_profile.front().sign, -1);
        EXPECT_EQ(r.convexity_profile.back().sign, -1);

        // G is monotone between consecutive critical points
        const auto& cp = r.critical_points;
        for (std::size_t k = 0; k + 1 < cp.size(); ++k) {
            const double a = cp[k], b = cp[k + 1];
            if (b - a < 1e-6)
                continue;
            std::vector<double> g;
            for (int j = 1; j <= 64; ++j)
                g.push_back(g_char(m, a + (b - a) * j / 65.0));
            const bool up = g.back() > g.front();
            for (std::size_t j = 1; j < g.size(); ++j) {
                const double tol = 1e-12 * (1.0 + std::abs(g[j]));
                if (up)
                    EXPECT_GE(g[j], g[j - 1] - tol);
                else
                    EXPECT_LE(g[j], g[j - 1] + tol);
            }
        }

        const TailThresholds th = tail_thresholds(h_expsum(m));
        const double lo = std::min(th.lo, cp.empty() ? th.lo : cp.front());
        const double hi = std::max(th.hi, cp.empty() ? th.hi : cp.back());
        // beyond every critical point G only decreases towards -inf
        EXPECT_LT(g_char(m, lo - 40.0), 0.0);
        EXPECT_LT(g_char(m, hi + 40.0), 0.0);
    }
}
