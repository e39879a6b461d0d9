#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lyapinfl/error.hpp"
#include "lyapinfl/inflect.hpp"
#include "lyapinfl/plmap.hpp"
#include "lyapinfl/spectrum.hpp"

namespace lyapinfl {

struct SearchOptions {
    double growth = 2.0;
    double lambda_cap = 1e4;
    // Require the base to carry the negative-parameter layout (all inflection
    // parameters negative, or all but the largest) and the result to satisfy
    // negative_param_pattern().
    bool require_pattern = false;
    InflectOptions inflect = {};
};

struct BranchSearchResult {
    PLMap map;
    InflectionReport report;
    std::vector<double> tried; // candidate log-slopes in order, the last one accepted
};

inline bool base_pattern_ok(const InflectionReport& base)
{
    return base.predicates.all_parameters_negative || base.predicates.negative_parameter_pattern;
}

/// Adds one branch of log-slope lambda_start * growth^k for k = 0, 1, ...
/// and returns the first augmented map whose certified transversal count
/// reaches target_count (and, if requested, shows the negative-parameter
/// pattern). Throws CapExceeded once the candidate passes lambda_cap.
inline BranchSearchResult add_branch_search(const PLMap& base, std::size_t target_count, double lambda_start,
                                            const SearchOptions& opt = {})
{
    if (!(opt.growth > 1.0))
        throw Error(ErrorCode::InvalidArgument, "growth factor must exceed 1");
    if (!(lambda_start > base.max_log_slope()))
        throw Error(ErrorCode::InvalidArgument, "starting log-slope must exceed the largest log-slope of the base");
    if (opt.require_pattern) {
        const InflectionReport base_report = find_inflections(base, opt.inflect);
        if (!base_pattern_ok(base_report))
            throw Error(ErrorCode::BasePatternViolation,
                        "base inflections are not parametrized by negative parameters");
    }
    std::vector<double> tried;
    for (double lam = lambda_start; lam <= opt.lambda_cap; lam *= opt.growth) {
        tried.push_back(lam);
        PLMap candidate = base.with_log_slope(lam);
        InflectionReport report = find_inflections(candidate, opt.inflect);
        const bool pattern = !opt.require_pattern || report.predicates.negative_parameter_pattern;
        if (report.transversal_count >= target_count && pattern)
            return {std::move(candidate), std::move(report), std::move(tried)};
    }
    throw Error(ErrorCode::CapExceeded,
                "no log-slope up to " + std::to_string(opt.lambda_cap) + " reaches " +
                    std::to_string(target_count) + " inflections");
}

struct SurgeryStep {
    std::size_t branches;       // branch count after the step
    double added_log_slope;
    std::size_t transversal_count;
    bool pattern;
    std::vector<double> tried;
};

struct SurgeryTrace {
    PLMap base;
    std::size_t base_count;
    std::vector<SurgeryStep> steps;
    PLMap final_map;
    InflectionReport final_report;
};

/// Repeated root-surgery: grows the map one branch at a time up to
/// n_target branches, demanding at k branches a count of at least
/// max(2k - 4, previous + 2) together with the negative-parameter pattern.
/// Each step starts its search at growth * (current largest log-slope).
inline SurgeryTrace build_chain(const PLMap& base, std::size_t n_target, const SearchOptions& opt = {})
{
    InflectionReport current = find_inflections(base, opt.inflect);
    SurgeryTrace trace{base, current.transversal_count, {}, base, current};
    PLMap map = base;
    std::size_t count = current.transversal_count;
    SearchOptions step_opt = opt;
    step_opt.require_pattern = true;
    for (std::size_t k = base.branch_count() + 1; k <= n_target; ++k) {
        const std::size_t target = std::max<std::size_t>(2 * k >= 4 ? 2 * k - 4 : 0, count + 2);
        try {
            BranchSearchResult r = add_branch_search(map, target, opt.growth * map.max_log_slope(), step_opt);
            trace.steps.push_back({k, r.map.max_log_slope(), r.report.transversal_count,
                                   r.report.predicates.negative_parameter_pattern, r.tried});
            count = r.report.transversal_count;
            map = r.map;
            trace.final_map = r.map;
            trace.final_report = std::move(r.report);
        } catch (const Error& e) {
            throw Error(e.code(), "surgery step to " + std::to_string(k) + " branches: " + e.what());
        }
    }
    return trace;
}

struct CoincidenceResult {
    double x_star;
    double t2;            // alpha(t2) = log x_star
    double g_at_t2;       // residual of the coincidence criterion
    InflectionReport report;
};

/// Middle slope x2 at which the middle milestone log x2 is an inflection of
/// the three-branch map (l1, log x2, l3): bisects phi(x2) = G(t2) with
/// alpha(t2) = log x2 over the given bracket.
inline CoincidenceResult milestone_coincidence_search(double lambda1, double lambda3, double x2_lo, double x2_hi,
                                                      double tol = 1e-12, const InflectOptions& iopt = {})
{
    if (!(x2_lo < x2_hi))
        throw Error(ErrorCode::NoSignChange, "bracket is empty or inverted");
    const auto map_for = [&](double x2) {
        const double l2 = std::log(x2);
        const double lam[] = {lambda1, l2, lambda3};
        return PLMap::from_log_slopes(lam);
    };
    const auto phi = [&](double x2) {
        const PLMap m = map_for(x2);
        const double l2 = std::log(x2);
        if (!(l2 > m.min_log_slope() && l2 < m.max_log_slope()))
            throw Error(ErrorCode::NoSignChange, "middle slope is outside (x1, x3)");
        const double t2 = t_of_alpha(m, l2);
        return std::pair{g_char(m, t2), t2};
    };
    double lo = x2_lo, hi = x2_hi;
    auto [g_lo, t_lo] = phi(lo);
    auto [g_hi, t_hi] = phi(hi);
    if (!(g_lo * g_hi < 0.0))
        throw Error(ErrorCode::NoSignChange, "coincidence criterion has the same sign at both bracket ends");
    const int s_lo = detail::sign_of(g_lo);
    const BisectResult r =
        bisect_sign_change([&](double x) { return detail::sign_of(phi(x).first); }, lo, hi, s_lo, tol);
    auto [g_a, t_a] = phi(r.lo);
    auto [g_b, t_b] = phi(r.hi);
    const bool take_lo = std::abs(g_a) <= std::abs(g_b);
    const double x_star = take_lo ? r.lo : r.hi;
    InflectionReport report = find_inflections(map_for(x_star), iopt);
    return {x_star, take_lo ? t_a : t_b, take_lo ? g_a : g_b, std::move(report)};
}

} // namespace lyapinfl
