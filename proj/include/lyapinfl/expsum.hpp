#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "lyapinfl/bisect.hpp"
#include "lyapinfl/error.hpp"

namespace lyapinfl {

/// One term c * exp(b t).
struct Term {
    double base;
    double coeff;

    friend bool operator==(const Term&, const Term&) = default;
};

/// Canonical exponential sum  sum_i c_i exp(b_i t):  bases strictly
/// increasing, no zero coefficients. The empty sum is the zero function.
///
/// A sum with D terms has at most D - 1 real zeros; isolate_roots() below
/// finds all of them by recursing on the derivative.
class ExpSum {
public:
    ExpSum() = default;

    /// Sorts, merges bases closer than base_merge_tol (chains of near-equal
    /// bases collapse onto the first one), and drops zero coefficients.
    static ExpSum normalize(std::vector<Term> raw, double base_merge_tol = 0.0)
    {
        std::sort(raw.begin(), raw.end(),
                  [](const Term& a, const Term& b) { return a.base < b.base; });
        ExpSum s;
        for (const Term& t : raw) {
            if (!s.terms_.empty() && t.base - s.terms_.back().base <= base_merge_tol)
                s.terms_.back().coeff += t.coeff;
            else
                s.terms_.push_back(t);
        }
        std::erase_if(s.terms_, [](const Term& t) { return t.coeff == 0.0; });
        return s;
    }

    [[nodiscard]] std::span<const Term> terms() const noexcept { return terms_; }
    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
    [[nodiscard]] bool empty() const noexcept { return terms_.empty(); }

    /// k * s; zero roots are unchanged for k != 0.
    [[nodiscard]] ExpSum scaled(double k) const
    {
        ExpSum out = *this;
        for (Term& t : out.terms_)
            t.coeff *= k;
        std::erase_if(out.terms_, [](const Term& t) { return t.coeff == 0.0; });
        return out;
    }

    /// s(t + a): same bases, coefficients multiplied by exp(b_i a).
    [[nodiscard]] ExpSum shifted(double a) const
    {
        ExpSum out = *this;
        for (Term& t : out.terms_)
            t.coeff *= std::exp(t.base * a);
        std::erase_if(out.terms_, [](const Term& t) { return t.coeff == 0.0 || !std::isfinite(t.coeff); });
        return out;
    }

    friend bool operator==(const ExpSum&, const ExpSum&) = default;

private:
    std::vector<Term> terms_;
};

/// Value of a sum at a point, carried as sign and log-magnitude so that
/// exponents far beyond the binary64 range stay representable.
struct Evaluation {
    int sign = 0;
    double log_magnitude = -std::numeric_limits<double>::infinity();
    double value = 0.0; // sign * exp(log_magnitude); may be +-inf
    double log_scale = -std::numeric_limits<double>::infinity(); // log sum |c_i| exp(b_i t)
};

namespace detail {

// Neumaier-compensated accumulation.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) noexcept
    {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    [[nodiscard]] double result() const noexcept { return sum + comp; }
};

inline int sign_of(double v) noexcept { return (v > 0.0) - (v < 0.0); }

} // namespace detail

inline Evaluation eval(const ExpSum& s, double t)
{
    Evaluation e;
    if (s.empty())
        return e;
    double m = -std::numeric_limits<double>::infinity();
    for (const Term& term : s.terms())
        m = std::max(m, term.base * t);
    detail::CompensatedSum acc;
    double scale = 0.0;
    for (const Term& term : s.terms()) {
        const double w = std::exp(term.base * t - m);
        acc.add(term.coeff * w);
        scale += std::abs(term.coeff) * w;
    }
    const double v = acc.result();
    e.sign = detail::sign_of(v);
    e.log_scale = m + std::log(scale);
    if (e.sign != 0) {
        e.log_magnitude = m + std::log(std::abs(v));
        e.value = e.sign * std::exp(e.log_magnitude);
    }
    return e;
}

/// Termwise derivative (b, c b); a b = 0 term vanishes.
inline ExpSum derivative(const ExpSum& s)
{
    std::vector<Term> out;
    out.reserve(s.size());
    for (const Term& t : s.terms())
        out.push_back({t.base, t.coeff * t.base});
    return ExpSum::normalize(std::move(out));
}

/// Divides by exp(b_1 t) so the smallest base becomes 0; zeros are unchanged.
inline ExpSum reduce(const ExpSum& s)
{
    if (s.empty())
        throw Error(ErrorCode::EmptySum, "cannot reduce the empty sum");
    const double b1 = s.terms().front().base;
    std::vector<Term> out;
    out.reserve(s.size());
    for (const Term& t : s.terms())
        out.push_back({t.base - b1, t.coeff});
    return ExpSum::normalize(std::move(out));
}

struct TailThresholds {
    double lo; // for t < lo the smallest-base term dominates
    double hi; // for t > hi the largest-base term dominates
};

/// Dominant-term certificate: beyond hi, |c_D| e^{b_D t} exceeds every other
/// term times (D - 1), hence their sum; symmetric for lo. A single term
/// returns (0, 0) since its sign never changes.
inline TailThresholds tail_thresholds(const ExpSum& s)
{
    if (s.empty())
        throw Error(ErrorCode::EmptySum, "tail thresholds of the empty sum");
    const std::size_t d = s.size();
    if (d == 1)
        return {0.0, 0.0};
    const auto terms = s.terms();
    const double k = static_cast<double>(d - 1);
    const Term& first = terms.front();
    const Term& last = terms.back();
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < d; ++i) {
        const Term& ti = terms[i];
        hi = std::max(hi, std::log(k * std::abs(ti.coeff) / std::abs(last.coeff)) / (last.base - ti.base));
    }
    for (std::size_t i = 1; i < d; ++i) {
        const Term& ti = terms[i];
        lo = std::min(lo, -std::log(k * std::abs(ti.coeff) / std::abs(first.coeff)) / (ti.base - first.base));
    }
    return {lo, hi};
}

enum class RootKind { Transversal, Tangential };

struct RootBracket {
    double lo;
    double hi;
    double root;
    RootKind kind;
    double achieved_width;
    bool converged = true; // false when the iteration cap stopped refinement
};

struct IsolationOptions {
    double tol = 1e-12;       // bracket width target in t
    double value_tol = 1e-9;  // tangential band, relative to sum |c_i| e^{b_i t}
    int max_iterations = 200; // per bisection
};

namespace detail {

inline int sign_at(const ExpSum& s, double t) { return eval(s, t).sign; }

inline RootBracket bisect(const ExpSum& s, double lo, double hi, int sign_lo,
                          const IsolationOptions& opt)
{
    const BisectResult r = bisect_sign_change([&](double t) { return sign_at(s, t); }, lo, hi, sign_lo,
                                              opt.tol, opt.max_iterations);
    return {r.lo, r.hi, r.root, RootKind::Transversal, r.hi - r.lo, r.converged};
}

struct Node {
    double t;
    int sign;        // 0 marks a value inside the tangential band
    RootBracket src; // bracket of the critical point (unused for tail nodes)
};

inline ExpSum unit_scaled(const ExpSum& s)
{
    double mx = 0.0;
    for (const Term& t : s.terms())
        mx = std::max(mx, std::abs(t.coeff));
    return mx > 0.0 ? s.scaled(1.0 / mx) : s;
}

inline std::vector<RootBracket> isolate(const ExpSum& s, const IsolationOptions& opt)
{
    std::vector<RootBracket> roots;
    if (s.size() <= 1)
        return roots;

    // Critical points of exp(-b_1 t) s(t); between them that function, and so
    // the sign pattern of s, is strictly monotone.
    const ExpSum d = unit_scaled(derivative(reduce(s)));
    const std::vector<RootBracket> crit = isolate(d, opt);

    const TailThresholds tails = tail_thresholds(s);
    const int sign_first = sign_of(s.terms().front().coeff);
    const int sign_last = sign_of(s.terms().back().coeff);

    std::vector<Node> nodes;
    nodes.reserve(crit.size() + 2);
    const double left = std::min(tails.lo, crit.empty() ? tails.lo : crit.front().root) - 1.0;
    const double right = std::max(tails.hi, crit.empty() ? tails.hi : crit.back().root) + 1.0;
    nodes.push_back({left, sign_first, {}});
    for (const RootBracket& c : crit) {
        const Evaluation e = eval(s, c.root);
        const bool in_band = e.sign == 0 || e.log_magnitude <= std::log(opt.value_tol) + e.log_scale;
        nodes.push_back({c.root, in_band ? 0 : e.sign, c});
    }
    nodes.push_back({right, sign_last, {}});

    // Walk runs of band-zero nodes between nonzero nodes.
    std::size_t i = 0;
    while (i + 1 < nodes.size()) {
        std::size_t j = i + 1;
        while (nodes[j].sign == 0)
            ++j; // tail nodes are never zero, so this stops
        const Node& a = nodes[i];
        const Node& b = nodes[j];
        if (j == i + 1) {
            if (a.sign != b.sign)
                roots.push_back(bisect(s, a.t, b.t, a.sign, opt));
        } else if (a.sign != b.sign) {
            // Crosses zero through a flat critical point.
            roots.push_back(bisect(s, a.t, b.t, a.sign, opt));
        } else {
            for (std::size_t k = i + 1; k < j; ++k) {
                RootBracket r = nodes[k].src;
                r.kind = RootKind::Tangential;
                r.root = nodes[k].t;
                roots.push_back(r);
            }
        }
        i = j;
    }
    return roots;
}

} // namespace detail

/// Complete real-root isolation by Rolle recursion. Every real zero of s is
/// returned exactly once, sorted; transversal zeros come with a sign-change
/// bracket of width <= tol. Critical points whose value falls inside the
/// tangential band are reported with kind Tangential instead of being
/// silently counted or dropped.
inline std::vector<RootBracket> isolate_roots(const ExpSum& s, const IsolationOptions& opt = {})
{
    if (!(opt.tol > 0.0))
        throw Error(ErrorCode::InvalidArgument, "isolation tolerance must be positive");
    return detail::isolate(detail::unit_scaled(s), opt);
}

} // namespace lyapinfl
