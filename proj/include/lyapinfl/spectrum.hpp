#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "lyapinfl/error.hpp"
#include "lyapinfl/plmap.hpp"

namespace lyapinfl {

/// F(t) = sum_i x_i^t and its first three derivatives at one point, as
/// F^(k)(t) = exp(shift) * fk. Ratios of the mantissas cancel the shift, so
/// every spectrum quantity below is formed without overflow.
///
/// The central moments c2 = sum w_i (l_i - mean)^2 and c3 = sum w_i (l_i - mean)^3
/// (w_i = exp(l_i t - shift)) are accumulated directly: F''F - F'^2 = e^{2M} f0 c2
/// and F^2 F''' + 2F'^3 - 3FF'F'' = e^{3M} f0^2 c3 both cancel catastrophically
/// when formed from f0..f3 at large |t|.
struct ScaledQuad {
    double shift = 0.0;
    double f0 = 0.0;
    double f1 = 0.0;
    double f2 = 0.0;
    double f3 = 0.0;
    double mean = 0.0; // f1 / f0, the Lyapunov exponent alpha(t)
    double c2 = 0.0;
    double c3 = 0.0;

    [[nodiscard]] double log_f() const { return shift + std::log(f0); }
};

/// extra_shift only exists to test that results do not depend on the shift.
inline ScaledQuad f_derivs(const PLMap& map, double t, double extra_shift = 0.0)
{
    const auto lam = map.log_slopes();
    ScaledQuad q;
    q.shift = lam.back() * t;
    for (double l : lam)
        q.shift = std::max(q.shift, l * t);
    q.shift += extra_shift;
    for (double l : lam) {
        const double w = std::exp(l * t - q.shift);
        q.f0 += w;
        q.f1 += w * l;
        q.f2 += w * l * l;
        q.f3 += w * l * l * l;
    }
    q.mean = q.f1 / q.f0;
    // one correction pass: the residual sum w_i (l_i - mean) absorbs the
    // rounding of f1 / f0, so equal slopes give exactly zero moments
    double resid = 0.0;
    for (double l : lam)
        resid += std::exp(l * t - q.shift) * (l - q.mean);
    q.mean += resid / q.f0;
    for (double l : lam) {
        const double w = std::exp(l * t - q.shift);
        const double d = l - q.mean;
        q.c2 += w * d * d;
        q.c3 += w * d * d * d;
    }
    return q;
}

inline bool is_degenerate(const PLMap& map) { return map.min_log_slope() == map.max_log_slope(); }

inline void require_nondegenerate(const PLMap& map, const char* what)
{
    if (is_degenerate(map))
        throw Error(ErrorCode::DegenerateSpectrum,
                    std::string(what) + ": all branches share one slope, the spectrum is a single point");
}

/// alpha(t) = F'(t)/F(t). For a single-slope map this is that log-slope for every t.
inline double alpha(const PLMap& map, double t) { return f_derivs(map, t).mean; }

/// L(alpha(t)) = F log F / F' - t.
inline double l_param(const PLMap& map, double t)
{
    const ScaledQuad q = f_derivs(map, t);
    return q.log_f() / q.mean - t;
}

/// dL/dalpha = -F^2 log F / F'^2; vanishes exactly where F(t) = 1.
inline double dl_dalpha(const PLMap& map, double t)
{
    const ScaledQuad q = f_derivs(map, t);
    return -q.log_f() / (q.mean * q.mean);
}

/// alpha'(t) = (F''F - F'^2)/F^2.
inline double alpha_prime(const PLMap& map, double t)
{
    const ScaledQuad q = f_derivs(map, t);
    return q.c2 / q.f0;
}

inline void require_interior(const PLMap& map, double target_alpha)
{
    if (!std::isfinite(target_alpha) || !(target_alpha > map.min_log_slope()) ||
        !(target_alpha < map.max_log_slope()))
        throw Error(ErrorCode::AlphaOutOfDomain,
                    "alpha " + std::to_string(target_alpha) + " is not inside the open spectrum domain");
}

/// Inverse of the strictly increasing alpha(t): expanding bracket from
/// [-1, 1], bisection to the last representable midpoint, then Newton
/// polish steps that are kept only when they reduce the residual.
inline double t_of_alpha(const PLMap& map, double target_alpha, double tol = 1e-12)
{
    require_nondegenerate(map, "t_of_alpha");
    require_interior(map, target_alpha);
    double lo = -1.0;
    double hi = 1.0;
    while (alpha(map, lo) >= target_alpha)
        lo *= 2.0;
    while (alpha(map, hi) <= target_alpha)
        hi *= 2.0;
    for (int it = 0; it < 400; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi)
            break;
        const double a = alpha(map, mid);
        if (a == target_alpha)
            return mid;
        if (a < target_alpha)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-16 * std::max(1.0, std::abs(mid)) && std::abs(a - target_alpha) <= tol)
            break;
    }
    double t = lo + 0.5 * (hi - lo);
    double resid = std::abs(alpha(map, t) - target_alpha);
    for (int it = 0; it < 3 && resid > 0.0; ++it) {
        const ScaledQuad q = f_derivs(map, t);
        const double slope = q.c2 / q.f0;
        if (!(slope > 0.0))
            break;
        const double next = t - (q.mean - target_alpha) / slope;
        const double r = std::abs(alpha(map, next) - target_alpha);
        if (!(r < resid))
            break;
        t = next;
        resid = r;
    }
    return t;
}

/// Legendre-transform route to the spectrum, used as an oracle for l_param:
/// L(alpha) = (1/alpha) min_u { log F(u) - u alpha }, minimized by
/// golden-section search on function values alone.
inline double l_legendre(const PLMap& map, double target_alpha)
{
    require_interior(map, target_alpha);
    const auto g = [&](double u) { return f_derivs(map, u).log_f() - u * target_alpha; };

    // Bracket a minimum of the convex g: walk downhill with doubling steps.
    double a = -1.0, b = 0.0, c = 1.0;
    double ga = g(a), gb = g(b), gc = g(c);
    double step = 1.0;
    while (ga < gb) {
        step *= 2.0;
        c = b; gc = gb;
        b = a; gb = ga;
        a = b - step; ga = g(a);
    }
    while (gc < gb) {
        step *= 2.0;
        a = b; ga = gb;
        b = c; gb = gc;
        c = b + step; gc = g(c);
    }

    constexpr double inv_phi = 0.6180339887498949;
    double x1 = c - inv_phi * (c - a);
    double x2 = a + inv_phi * (c - a);
    double g1 = g(x1), g2 = g(x2);
    double best = std::min({ga, gb, gc, g1, g2});
    for (int it = 0; it < 300 && (c - a) > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
        if (g1 < g2) {
            c = x2;
            x2 = x1; g2 = g1;
            x1 = c - inv_phi * (c - a);
            g1 = g(x1);
            best = std::min(best, g1);
        } else {
            a = x1;
            x1 = x2; g1 = g2;
            x2 = a + inv_phi * (c - a);
            g2 = g(x2);
            best = std::min(best, g2);
        }
    }
    return best / target_alpha;
}

struct BowenResult {
    double dimension;    // s with F(-s) = 1, the maximum of L
    double alpha_at_max; // alpha(-s)
};

inline BowenResult bowen_dimension(const PLMap& map)
{
    const auto log_f_neg = [&](double s) { return f_derivs(map, -s).log_f(); };
    if (map.branch_count() == 1)
        return {0.0, map.min_log_slope()};
    double lo = 0.0;
    double hi = 1.0;
    while (log_f_neg(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi)
            break;
        const double v = log_f_neg(mid);
        if (v == 0.0) {
            lo = hi = mid;
            break;
        }
        if (v > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double s = lo + 0.5 * (hi - lo);
    return {s, alpha(map, -s)};
}

struct SpectrumSample {
    double t;
    double alpha;
    double L;
    double dL_dalpha;
};

inline std::vector<SpectrumSample> sample_spectrum(const PLMap& map, std::span<const double> t_values)
{
    require_nondegenerate(map, "sample_spectrum");
    std::vector<SpectrumSample> out;
    out.reserve(t_values.size());
    for (double t : t_values) {
        if (!std::isfinite(t))
            throw Error(ErrorCode::NonFinite, "sample parameter is not finite");
        const ScaledQuad q = f_derivs(map, t);
        const double lf = q.log_f();
        out.push_back({t, q.mean, lf / q.mean - t, -lf / (q.mean * q.mean)});
    }
    return out;
}

} // namespace lyapinfl
