#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lyapinfl/bisect.hpp"
#include "lyapinfl/characteristic.hpp"
#include "lyapinfl/error.hpp"
#include "lyapinfl/expsum.hpp"
#include "lyapinfl/plmap.hpp"
#include "lyapinfl/spectrum.hpp"

namespace lyapinfl {

enum class InflectionKind { Transversal, Tangential };

struct InflectionPoint {
    double t = 0.0;
    double alpha = 0.0;
    InflectionKind kind = InflectionKind::Transversal;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double g_value = 0.0; // G at t
    // Milestone k with milestone[k] <= alpha < milestone[k+1] (0-based).
    std::optional<std::size_t> milestone_interval;
    // Set when |alpha - milestone| <= coincide tolerance.
    std::optional<std::size_t> coincident_milestone;
};

/// Maximal t-interval of constant concavity; sign -1 concave, +1 convex.
/// Infinite ends are stored as +-infinity.
struct ConvexityInterval {
    double t_lo;
    double t_hi;
    int sign;
};

struct BoundResult {
    std::string name;
    long long bound;
    bool applies;
    bool satisfied;
};

enum class QSignClass { AllPositive, AllNegative, Mixed };

inline const char* to_string(QSignClass c)
{
    switch (c) {
    case QSignClass::AllPositive: return "all_positive";
    case QSignClass::AllNegative: return "all_negative";
    case QSignClass::Mixed: return "mixed";
    }
    return "mixed";
}

struct Predicates {
    std::optional<QSignClass> q_class; // n >= 3 only
    bool q_consistent = true;
    std::optional<double> t_star; // r_T = 2 only
    bool t_star_straddles = true; // vacuous unless exactly two inflections
    bool negative_parameter_pattern = false;
    bool all_parameters_negative = false;
    bool all_parameters_positive = false;
};

struct InflectOptions {
    double tol = 1e-12;          // t-width of inflection brackets
    double zero_band = 1e-9;     // G band, relative to 1 + |2 log F|
    double h_value_tol = 1e-9;   // tangential band for zeros of H
    double coincide_tol = 1e-6;  // alpha distance counted as a milestone coincidence
};

struct InflectionReport {
    PLMap map;
    std::vector<InflectionPoint> inflections;           // transversal, increasing t
    std::vector<InflectionPoint> tangential_candidates; // G ~ 0 at a critical point, no sign change
    std::size_t transversal_count = 0;
    std::size_t tangential_count = 0;
    std::vector<double> critical_points; // zeros of H = critical points of G
    std::vector<ConvexityInterval> convexity_profile;
    std::vector<BoundResult> bounds;
    Predicates predicates;
    std::vector<Milestone> milestones;
    InflectOptions options;

    explicit InflectionReport(PLMap m) : map(std::move(m)) {}
};

inline long long general_bound(long long n) { return n * (n - 1) * (n + 4) / 6; }

inline std::vector<BoundResult> check_bounds(const InflectionReport& report)
{
    const long long n = static_cast<long long>(report.map.branch_count());
    const long long r = static_cast<long long>(essential_branch_number(report.map));
    const long long count = static_cast<long long>(report.transversal_count + report.tangential_count);
    std::vector<BoundResult> out;
    const auto add = [&](std::string name, long long bound, bool applies) {
        out.push_back({std::move(name), bound, applies, !applies || count <= bound});
    };
    add("branch_number", general_bound(n), n >= 2);
    add("three_branch", 2, n == 3);
    add("essential_two", 2, r == 2);
    add("essential_three", 6, r == 3);
    add("essential_branch_number", general_bound(r), r >= 2);
    return out;
}

/// Places each inflection's alpha in its milestone subinterval and flags
/// coincidences within coincide_tol.
inline void classify_milestones(InflectionReport& report, const std::vector<Milestone>& ms,
                                double coincide_tol)
{
    report.milestones = ms;
    const auto classify = [&](InflectionPoint& p) {
        p.milestone_interval.reset();
        p.coincident_milestone.reset();
        for (std::size_t k = 0; k < ms.size(); ++k) {
            if (ms[k].log_slope <= p.alpha && (k + 1 == ms.size() || p.alpha < ms[k + 1].log_slope))
                p.milestone_interval = k;
            if (std::abs(p.alpha - ms[k].log_slope) <= coincide_tol)
                p.coincident_milestone = k;
        }
    };
    for (auto& p : report.inflections)
        classify(p);
    for (auto& p : report.tangential_candidates)
        classify(p);
}

/// Sign class of Q over all branch triples whose log-slopes are not all
/// equal (all-equal triples contribute nothing to H).
inline QSignClass q_sign_class(const PLMap& map)
{
    const auto lam = map.log_slopes();
    const std::size_t n = lam.size();
    if (n < 3)
        throw Error(ErrorCode::NotApplicable, "Q is defined for maps with at least three branches");
    bool pos = false, neg = false, zero = false;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                if (lam[i] == lam[k])
                    continue;
                const double q = q_coeff(lam[i], lam[j], lam[k]);
                pos |= q > 0.0;
                neg |= q < 0.0;
                zero |= q == 0.0;
            }
    if (pos && !neg && !zero)
        return QSignClass::AllPositive;
    if (neg && !pos && !zero)
        return QSignClass::AllNegative;
    return QSignClass::Mixed;
}

/// The unique zero of H for a two-slope map with multiplicities (n1, n2):
/// t* = log(n2/n1) / (l_1 - l_2).
inline double two_slope_tstar(const PLMap& map)
{
    const auto m = multiplicities(map);
    if (m.size() != 2)
        throw Error(ErrorCode::NotApplicable, "t* needs exactly two distinct slopes");
    return std::log(static_cast<double>(m[1].count) / static_cast<double>(m[0].count)) /
           (m[0].log_slope - m[1].log_slope);
}

/// All inflection parameters negative except the largest, which is positive.
inline bool negative_param_pattern(const InflectionReport& report)
{
    const auto& pts = report.inflections;
    if (pts.empty() || !(pts.back().t > 0.0))
        return false;
    return std::all_of(pts.begin(), pts.end() - 1, [](const InflectionPoint& p) { return p.t < 0.0; });
}

/// Alternating concave/convex partition of the t-line by the transversal
/// inflections; starts and ends concave.
inline std::vector<ConvexityInterval> convexity_profile(const InflectionReport& report)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<ConvexityInterval> out;
    double lo = -inf;
    int sign = -1;
    for (const auto& p : report.inflections) {
        out.push_back({lo, p.t, sign});
        lo = p.t;
        sign = -sign;
    }
    out.push_back({lo, inf, sign});
    return out;
}

namespace detail {

struct GNode {
    double t;
    double g;
    int sign; // 0 inside the zero band
};

inline GNode g_node(const PLMap& map, double t, double band_rel)
{
    const ScaledQuad q = f_derivs(map, t);
    const double g = q.c2 > 0.0 ? 2.0 * q.log_f() - q.mean * q.mean * q.f0 / q.c2
                                : -std::numeric_limits<double>::infinity();
    const int s = std::abs(g) <= g_zero_band(q.log_f(), band_rel) ? 0 : sign_of(g);
    return {t, g, s};
}

// Walks outward from `start` until G is certifiably negative.
inline GNode negative_tail(const PLMap& map, double start, double direction, double band_rel)
{
    double step = 1.0;
    for (int it = 0; it < 64; ++it) {
        const GNode n = g_node(map, start + direction * step, band_rel);
        if (n.sign < 0)
            return n;
        step *= 2.0;
    }
    throw Error(ErrorCode::CapExceeded, "characteristic function did not turn negative in the tail");
}

} // namespace detail

/// Certified inflections of the spectrum.
///
/// G' has the sign of H (the other factors of G' are positive), so the zeros
/// of the exponential sum H cut the t-line into panels on which G is strictly
/// monotone, and G tends to -inf at both ends. Each panel whose end values
/// have opposite signs holds exactly one inflection, found by bisection on G.
/// A critical point with G inside the zero band is ambiguous: if the signs on
/// either side differ it is a (flat) crossing, otherwise it is listed as a
/// tangential candidate and not counted.
inline InflectionReport find_inflections(const PLMap& map, const InflectOptions& opt = {})
{
    require_nondegenerate(map, "find_inflections");
    InflectionReport report(map);
    report.options = opt;

    const ExpSum h = h_expsum(map);
    const auto h_roots = isolate_roots(h, {opt.tol, opt.h_value_tol, 200});
    for (const auto& r : h_roots)
        report.critical_points.push_back(r.root);

    const TailThresholds tails = tail_thresholds(h);
    const double first = report.critical_points.empty() ? tails.lo : report.critical_points.front();
    const double last = report.critical_points.empty() ? tails.hi : report.critical_points.back();

    std::vector<detail::GNode> nodes;
    nodes.push_back(detail::negative_tail(map, std::min(tails.lo, first), -1.0, opt.zero_band));
    for (double c : report.critical_points)
        nodes.push_back(detail::g_node(map, c, opt.zero_band));
    nodes.push_back(detail::negative_tail(map, std::max(tails.hi, last), +1.0, opt.zero_band));

    const auto g_sign = [&](double t) { return detail::sign_of(g_char(map, t)); };
    const auto make_point = [&](double t, double lo, double hi, InflectionKind kind) {
        InflectionPoint p;
        p.t = t;
        p.alpha = alpha(map, t);
        p.kind = kind;
        p.bracket_lo = lo;
        p.bracket_hi = hi;
        p.g_value = g_char(map, t);
        return p;
    };

    std::size_t i = 0;
    while (i + 1 < nodes.size()) {
        std::size_t j = i + 1;
        while (nodes[j].sign == 0)
            ++j;
        const auto& a = nodes[i];
        const auto& b = nodes[j];
        if (a.sign != b.sign) {
            const BisectResult r = bisect_sign_change(g_sign, a.t, b.t, a.sign, opt.tol);
            report.inflections.push_back(make_point(r.root, r.lo, r.hi, InflectionKind::Transversal));
        } else {
            for (std::size_t k = i + 1; k < j; ++k) {
                const std::size_t idx = k - 1; // critical point index
                const auto& hb = h_roots[idx];
                report.tangential_candidates.push_back(
                    make_point(nodes[k].t, hb.lo, hb.hi, InflectionKind::Tangential));
            }
        }
        i = j;
    }

    report.transversal_count = report.inflections.size();
    report.tangential_count = report.tangential_candidates.size();
    report.convexity_profile = convexity_profile(report);
    report.bounds = check_bounds(report);
    classify_milestones(report, milestones(map), opt.coincide_tol);

    Predicates& pred = report.predicates;
    const auto& pts = report.inflections;
    if (map.branch_count() >= 3) {
        pred.q_class = q_sign_class(map);
        const auto count_if = [&](auto pred_fn) {
            return std::count_if(pts.begin(), pts.end(), pred_fn);
        };
        if (*pred.q_class == QSignClass::AllPositive)
            pred.q_consistent = count_if([](const InflectionPoint& p) { return p.t <= 0.0; }) <= 1;
        else if (*pred.q_class == QSignClass::AllNegative)
            pred.q_consistent = count_if([](const InflectionPoint& p) { return p.t >= 0.0; }) <= 1;
    }
    if (essential_branch_number(map) == 2) {
        pred.t_star = two_slope_tstar(map);
        if (pts.size() == 2)
            pred.t_star_straddles = pts[0].t < *pred.t_star && *pred.t_star < pts[1].t;
    }
    pred.negative_parameter_pattern = negative_param_pattern(report);
    pred.all_parameters_negative =
        !pts.empty() && std::all_of(pts.begin(), pts.end(), [](const InflectionPoint& p) { return p.t < 0.0; });
    pred.all_parameters_positive =
        !pts.empty() && std::all_of(pts.begin(), pts.end(), [](const InflectionPoint& p) { return p.t > 0.0; });
    return report;
}

/// Profile for a map, computing the report on the way.
inline std::vector<ConvexityInterval> convexity_profile(const PLMap& map)
{
    return convexity_profile(find_inflections(map));
}

} // namespace lyapinfl
