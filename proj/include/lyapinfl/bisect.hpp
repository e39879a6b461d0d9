#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace lyapinfl {

struct BisectResult {
    double lo;
    double hi;
    double root;
    bool converged;
};

/// Shrinks [lo, hi] around a sign change. sign_at(t) returns -1, 0 or +1;
/// sign_at(lo) must equal sign_lo and sign_at(hi) must equal -sign_lo.
/// Stops at width <= tol, at adjacent doubles, or after max_iterations
/// (converged = false). An exact zero at a midpoint is replaced by the
/// nearest nonzero samples on either side.
template <class SignFn>
BisectResult bisect_sign_change(SignFn&& sign_at, double lo, double hi, int sign_lo, double tol,
                                int max_iterations = 200)
{
    for (int it = 0; it < max_iterations; ++it) {
        if (hi - lo <= tol)
            return {lo, hi, lo + 0.5 * (hi - lo), true};
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi)
            return {lo, hi, mid, true};
        const int sm = sign_at(mid);
        if (sm == 0) {
            // The sum can round to zero on a run of doubles; step outwards
            // to the nearest nonzero samples on each side and keep going.
            const double ulp = std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid));
            double step = ulp, l = mid;
            int sl = 0;
            while (sl == 0) {
                step *= 2.0;
                l = std::max(lo, mid - step);
                sl = l == lo ? sign_lo : sign_at(l);
            }
            if (sl != sign_lo) {
                hi = l;
                continue;
            }
            lo = l;
            step = ulp;
            double h = mid;
            int sh = 0;
            while (sh == 0) {
                step *= 2.0;
                h = std::min(hi, mid + step);
                sh = h == hi ? -sign_lo : sign_at(h);
            }
            (sh == sign_lo ? lo : hi) = h;
            continue;
        }
        if (sm == sign_lo)
            lo = mid;
        else
            hi = mid;
    }
    return {lo, hi, lo + 0.5 * (hi - lo), hi - lo <= tol};
}

} // namespace lyapinfl
