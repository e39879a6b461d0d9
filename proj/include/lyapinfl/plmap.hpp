#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lyapinfl/error.hpp"

namespace lyapinfl {

/// Finitely-branched piecewise linear expanding map, reduced to what the
/// spectrum depends on: the sorted natural logs of the branch slopes.
///
/// Slopes are stored as log-slopes so that branches like e^100 are exact.
/// Interval placement inside [0,1] is not modelled; only the realizability
/// condition sum(1/x_i) <= 1 is tracked (warning by default, error in
/// strict mode).
class PLMap {
public:
    static PLMap from_slopes(std::span<const double> slopes, bool strict_geometry = false)
    {
        if (slopes.empty())
            throw Error(ErrorCode::EmptyInput, "map needs at least one branch");
        std::vector<double> logs;
        logs.reserve(slopes.size());
        for (double x : slopes) {
            if (!std::isfinite(x))
                throw Error(ErrorCode::NonFinite, "slope is not finite");
            if (!(x > 1.0))
                throw Error(ErrorCode::NonExpandingSlope,
                            "slope " + std::to_string(x) + " is not > 1");
            logs.push_back(std::log(x));
        }
        return PLMap(std::move(logs), strict_geometry);
    }

    static PLMap from_log_slopes(std::span<const double> log_slopes, bool strict_geometry = false)
    {
        if (log_slopes.empty())
            throw Error(ErrorCode::EmptyInput, "map needs at least one branch");
        for (double l : log_slopes) {
            if (!std::isfinite(l))
                throw Error(ErrorCode::NonFinite, "log-slope is not finite");
            if (!(l > 0.0))
                throw Error(ErrorCode::NonExpandingSlope,
                            "log-slope " + std::to_string(l) + " is not > 0");
        }
        return PLMap(std::vector<double>(log_slopes.begin(), log_slopes.end()), strict_geometry);
    }

    [[nodiscard]] std::span<const double> log_slopes() const noexcept { return lambda_; }
    [[nodiscard]] std::size_t branch_count() const noexcept { return lambda_.size(); }
    [[nodiscard]] double min_log_slope() const noexcept { return lambda_.front(); }
    [[nodiscard]] double max_log_slope() const noexcept { return lambda_.back(); }

    /// sum of 1/x_i; the branches fit disjointly in [0,1] iff this is <= 1.
    [[nodiscard]] double geometric_sum() const noexcept
    {
        double s = 0.0;
        for (double l : lambda_)
            s += std::exp(-l);
        return s;
    }
    [[nodiscard]] bool geometry_ok() const noexcept { return geometric_sum() <= 1.0; }

    /// Copy of this map with one more branch of the given log-slope.
    [[nodiscard]] PLMap with_log_slope(double log_slope) const
    {
        std::vector<double> next = lambda_;
        next.push_back(log_slope);
        return from_log_slopes(next);
    }

    friend bool operator==(const PLMap&, const PLMap&) = default;

private:
    PLMap(std::vector<double> lambda, bool strict_geometry) : lambda_(std::move(lambda))
    {
        std::sort(lambda_.begin(), lambda_.end());
        if (strict_geometry && !geometry_ok())
            throw Error(ErrorCode::GeometryViolation,
                        "sum of inverse slopes " + std::to_string(geometric_sum()) + " exceeds 1");
    }

    std::vector<double> lambda_;
};

struct Milestone {
    std::size_t least_index; // 1-based branch index
    double log_slope;
};

struct Multiplicity {
    double log_slope;
    std::size_t count;
};

/// Distinct log-slopes with their branch counts, increasing. Grouping is by
/// exact equality of the stored values.
inline std::vector<Multiplicity> multiplicities(const PLMap& map)
{
    std::vector<Multiplicity> out;
    for (double l : map.log_slopes()) {
        if (!out.empty() && out.back().log_slope == l)
            ++out.back().count;
        else
            out.push_back({l, 1});
    }
    return out;
}

inline std::vector<Milestone> milestones(const PLMap& map)
{
    std::vector<Milestone> out;
    const auto lam = map.log_slopes();
    for (std::size_t i = 0; i < lam.size(); ++i) {
        if (i == 0 || lam[i] != lam[i - 1])
            out.push_back({i + 1, lam[i]});
    }
    return out;
}

inline std::size_t essential_branch_number(const PLMap& map)
{
    return multiplicities(map).size();
}

struct Domain {
    double lo;
    double hi;
};

inline Domain spectrum_domain(const PLMap& map)
{
    return {map.min_log_slope(), map.max_log_slope()};
}

} // namespace lyapinfl
