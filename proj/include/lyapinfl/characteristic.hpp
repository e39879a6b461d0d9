#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "lyapinfl/error.hpp"
#include "lyapinfl/expsum.hpp"
#include "lyapinfl/plmap.hpp"
#include "lyapinfl/spectrum.hpp"

namespace lyapinfl {

/// Coefficient of the triple-product base l_i + l_j + l_k in H:
///   2(l_i^3 + l_j^3 + l_k^3) + 12 l_i l_j l_k
///     - 3(l_i l_j^2 + l_i^2 l_j + l_i^2 l_k + l_i l_k^2 + l_j l_k^2 + l_j^2 l_k).
/// Evaluated through the equivalent factorization
///   (2l_i - l_j - l_k)(2l_j - l_i - l_k)(2l_k - l_i - l_j),
/// which is exactly 0 on an all-equal triple and exactly 2(l_k - l_i)^3 when
/// two of the three coincide, so merged H terms cancel without residue.
inline double q_coeff(double li, double lj, double lk)
{
    return ((li - lj) + (li - lk)) * ((lj - li) + (lj - lk)) * ((lk - li) + (lk - lj));
}

/// Band inside which a G value is treated as zero: |G| <= rel (1 + |2 log F|).
inline double g_zero_band(double log_f, double rel = 1e-9) { return rel * (1.0 + std::abs(2.0 * log_f)); }

/// Concavity-convexity characteristic function
///   G(t) = 2 log F - F'^2 / (F''F - F'^2),
/// whose sign is the sign of L''(alpha(t)).
inline double g_char(const PLMap& map, double t)
{
    require_nondegenerate(map, "g_char");
    const ScaledQuad q = f_derivs(map, t);
    if (!(q.c2 > 0.0))
        return -std::numeric_limits<double>::infinity();
    return 2.0 * q.log_f() - q.mean * q.mean * q.f0 / q.c2;
}

/// G-bar(t) = 2 log F (F''F - F'^2) - F'^2 = G * (F''F - F'^2). Same sign as
/// G for non-degenerate maps, defined for every map; overflows to +-inf
/// only when the true value does.
inline double g_bar(const PLMap& map, double t)
{
    const ScaledQuad q = f_derivs(map, t);
    const double inner = 2.0 * q.log_f() * q.f0 * q.c2 - q.f1 * q.f1;
    if (inner == 0.0)
        return 0.0;
    const double mag = 2.0 * q.shift + std::log(std::abs(inner));
    return std::copysign(std::exp(mag), inner);
}

/// d^2 L / d alpha^2 = (F/F')^3 G(t).
inline double second_deriv_l(const PLMap& map, double t)
{
    require_nondegenerate(map, "second_deriv_l");
    const ScaledQuad q = f_derivs(map, t);
    const double g = q.c2 > 0.0 ? 2.0 * q.log_f() - q.mean * q.mean * q.f0 / q.c2
                                : -std::numeric_limits<double>::infinity();
    return g / (q.mean * q.mean * q.mean);
}

/// H(t) = F^2 F''' + 2F'^3 - 3FF'F'' as an exponential sum: for each pair
/// i < j the bases 2l_i + l_j and l_i + 2l_j with coefficients +-(l_j - l_i)^3,
/// and for each triple i < j < k the base l_i + l_j + l_k with Q(i, j, k).
/// Bases are summed in a fixed order so that repeated slopes produce
/// bit-identical bases, which normalize() then merges exactly.
inline ExpSum h_expsum(const PLMap& map)
{
    const auto lam = map.log_slopes();
    const std::size_t n = lam.size();
    if (n < 2)
        throw Error(ErrorCode::SingleBranch, "H vanishes identically for a one-branch map");
    std::vector<Term> raw;
    raw.reserve(n * (n - 1) + n * (n - 1) * (n - 2) / 6);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = lam[j] - lam[i];
            const double d3 = d * d * d;
            raw.push_back({(lam[i] + lam[i]) + lam[j], d3});
            raw.push_back({(lam[i] + lam[j]) + lam[j], -d3});
            for (std::size_t k = j + 1; k < n; ++k)
                raw.push_back({(lam[i] + lam[j]) + lam[k], q_coeff(lam[i], lam[j], lam[k])});
        }
    }
    return ExpSum::normalize(std::move(raw));
}

/// H(t) evaluated from the central third moment: H = e^{3M} f0^2 c3.
inline Evaluation h_direct(const PLMap& map, double t)
{
    // c3 is re-summed with log-domain weights: far in a tail the weights
    // w_i = exp(l_i t - M) of all but the dominant branch underflow, while
    // H itself is still a perfectly ordinary number on the log scale.
    const ScaledQuad q = f_derivs(map, t);
    double k = -std::numeric_limits<double>::infinity();
    for (double l : map.log_slopes()) {
        const double d = l - q.mean;
        if (d != 0.0)
            k = std::max(k, l * t - q.shift + 3.0 * std::log(std::abs(d)));
    }
    Evaluation e;
    if (!std::isfinite(k))
        return e;
    detail::CompensatedSum acc;
    for (double l : map.log_slopes()) {
        const double d = l - q.mean;
        if (d != 0.0)
            acc.add((d > 0.0 ? 1.0 : -1.0) * std::exp(l * t - q.shift + 3.0 * std::log(std::abs(d)) - k));
    }
    const double v = acc.result();
    e.sign = detail::sign_of(v);
    if (e.sign != 0) {
        e.log_magnitude = 3.0 * q.shift + 2.0 * std::log(q.f0) + k + std::log(std::abs(v));
        e.value = e.sign * std::exp(e.log_magnitude);
    }
    return e;
}

struct CharSample {
    double t;
    double G;
    int H_sign;
    double d2L_dalpha2;
};

inline std::vector<CharSample> sample_characteristic(const PLMap& map, std::span<const double> t_values)
{
    require_nondegenerate(map, "sample_characteristic");
    std::vector<CharSample> out;
    out.reserve(t_values.size());
    for (double t : t_values) {
        const double g = g_char(map, t);
        out.push_back({t, g, h_direct(map, t).sign, g / std::pow(alpha(map, t), 3)});
    }
    return out;
}

} // namespace lyapinfl
