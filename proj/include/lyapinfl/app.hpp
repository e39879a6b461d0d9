#pragma once

// Command implementations behind tools/lyapinfl. Kept in the library so the
// test suite can drive them without spawning processes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lyapinfl/characteristic.hpp"
#include "lyapinfl/error.hpp"
#include "lyapinfl/expsum.hpp"
#include "lyapinfl/inflect.hpp"
#include "lyapinfl/io.hpp"
#include "lyapinfl/plmap.hpp"
#include "lyapinfl/spectrum.hpp"
#include "lyapinfl/surgery.hpp"

namespace lyapinfl::app {

namespace fs = std::filesystem;

enum ExitCode : int { Ok = 0, Usage = 1, ParseFailure = 2, DomainFailure = 3, NumericFailure = 4 };

inline int exit_code_for(ErrorCode c)
{
    switch (c) {
    case ErrorCode::Parse: return ParseFailure;
    case ErrorCode::InvalidArgument: return Usage;
    case ErrorCode::TangentialAmbiguity:
    case ErrorCode::CapExceeded:
    case ErrorCode::EmptySum: return NumericFailure;
    default: return DomainFailure;
    }
}

// ---------------------------------------------------------------- built-ins

struct BuiltinMap {
    const char* name;
    const char* label;
    std::vector<double> log_slopes;
};

inline std::vector<BuiltinMap> builtin_maps()
{
    return {
        {"T-minus", "T_-", {std::log(1.2), std::log(19.0), std::log(20.0)}},
        {"T-plus", "T_+", {std::log(3.0), std::log(4.0), std::log(80.0)}},
        // The fourth branch has slope e^100, stored exactly as its log.
        {"T-minus-star", "T_-,*", {std::log(1.2), std::log(19.0), std::log(20.0), 100.0}},
        {"T-star", "T_*", {std::log(1.2), std::log(29.54276), std::log(200.0)}},
    };
}

inline PLMap builtin(const std::string& name)
{
    for (const auto& b : builtin_maps())
        if (name == b.name)
            return PLMap::from_log_slopes(b.log_slopes);
    throw Error(ErrorCode::InvalidArgument, "unknown built-in map '" + name + "'");
}

// ---------------------------------------------------------------- grids

struct Window {
    double lo;
    double hi;
};

/// [t_lo - 1, t_hi + 1] from the tail thresholds of H, clamped to [-60, 60].
inline Window default_window(const PLMap& map)
{
    if (map.branch_count() < 2 || is_degenerate(map))
        return {-1.0, 1.0};
    const TailThresholds tails = tail_thresholds(h_expsum(map));
    return {std::clamp(tails.lo - 1.0, -60.0, 60.0), std::clamp(tails.hi + 1.0, -60.0, 60.0)};
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.back() = hi;
    return out;
}

/// Uniform grid refined with the inflections and critical points of the
/// report, so every feature of G shows up as an exact sample.
inline std::vector<double> analysis_grid(const InflectionReport& report, Window w, std::size_t n)
{
    std::vector<double> grid = linspace(w.lo, w.hi, n);
    for (const auto& p : report.inflections)
        if (p.t > w.lo && p.t < w.hi)
            grid.push_back(p.t);
    for (double c : report.critical_points)
        if (c > w.lo && c < w.hi)
            grid.push_back(c);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

inline Window widen_to_cover(Window w, const InflectionReport& report)
{
    for (const auto& p : report.inflections) {
        w.lo = std::min(w.lo, p.t - 1.0);
        w.hi = std::max(w.hi, p.t + 1.0);
    }
    return {std::max(w.lo, -60.0), std::min(w.hi, 60.0)};
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
    InflectOptions inflect = {};
    std::optional<Window> window;
    std::size_t points = 2001;
    bool emit_svg = false;
};

struct AnalysisArtifacts {
    io::MapSpec spec;
    InflectionReport report;
    bool degenerate = false;
    fs::path report_path;
    fs::path spectrum_path;
    fs::path characteristic_path;
    std::vector<fs::path> svg_paths;
    Window window{0.0, 0.0};
};

inline std::vector<io::Marker> g_markers(const InflectionReport& r)
{
    std::vector<io::Marker> out;
    for (const auto& p : r.inflections)
        out.push_back({p.t, 0.0});
    return out;
}

inline std::vector<io::Marker> l_markers(const InflectionReport& r)
{
    std::vector<io::Marker> out;
    for (const auto& p : r.inflections)
        out.push_back({p.alpha, l_param(r.map, p.t)});
    return out;
}

/// Writes CSV (and optionally SVG) for the spectrum and characteristic
/// function of a non-degenerate map on the given grid.
inline void write_curves(const InflectionReport& report, const std::vector<double>& grid, const fs::path& spectrum_path,
                         const fs::path& characteristic_path, const std::string& title, bool emit_svg,
                         std::vector<fs::path>* svg_paths = nullptr)
{
    const auto spec = sample_spectrum(report.map, grid);
    const auto chr = sample_characteristic(report.map, grid);
    io::atomic_write_file(spectrum_path, io::spectrum_csv(spec));
    io::atomic_write_file(characteristic_path, io::characteristic_csv(chr));
    if (!emit_svg)
        return;
    std::vector<double> a, l, t, g;
    for (const auto& s : spec) {
        a.push_back(s.alpha);
        l.push_back(s.L);
    }
    double g_lo = 0.0, g_hi = 0.0;
    for (const auto& s : chr) {
        t.push_back(s.t);
        g.push_back(s.G);
        if (std::isfinite(s.G)) {
            g_lo = std::min(g_lo, s.G);
            g_hi = std::max(g_hi, s.G);
        }
    }
    // G runs off to -infinity in both tails; keep the interesting part visible.
    const double clip_lo = std::max(g_lo, -4.0 * std::max(1.0, g_hi));
    fs::path l_svg = spectrum_path, g_svg = characteristic_path;
    l_svg.replace_extension(".svg");
    g_svg.replace_extension(".svg");
    io::atomic_write_file(l_svg, io::svg_plot("L(alpha) for " + title, "alpha", "L", a, l, l_markers(report)));
    io::atomic_write_file(g_svg, io::svg_plot("G(t) for " + title, "t", "G", t, g, g_markers(report), clip_lo));
    if (svg_paths) {
        svg_paths->push_back(l_svg);
        svg_paths->push_back(g_svg);
    }
}

inline AnalysisArtifacts analyze(const io::MapSpec& spec, const fs::path& out_dir, const AnalyzeOptions& opt = {})
{
    fs::create_directories(out_dir);
    AnalysisArtifacts art{spec, InflectionReport(spec.map), false, {}, {}, {}, {}, {0.0, 0.0}};
    art.report_path = out_dir / "report.json";
    if (is_degenerate(spec.map)) {
        art.degenerate = true;
        art.report = io::degenerate_report(spec.map, opt.inflect);
        io::atomic_write_file(art.report_path, io::dump(io::report_to_json(art.report, spec.label)));
        return art;
    }
    art.report = find_inflections(spec.map, opt.inflect);
    art.window = opt.window ? *opt.window : widen_to_cover(default_window(spec.map), art.report);
    const auto grid = analysis_grid(art.report, art.window, opt.points);
    art.spectrum_path = out_dir / "spectrum.csv";
    art.characteristic_path = out_dir / "characteristic.csv";
    write_curves(art.report, grid, art.spectrum_path, art.characteristic_path,
                 spec.label.empty() ? std::string("map") : spec.label, opt.emit_svg, &art.svg_paths);
    io::atomic_write_file(art.report_path, io::dump(io::report_to_json(art.report, spec.label)));
    return art;
}

inline io::json analysis_summary(const AnalysisArtifacts& art)
{
    io::json j;
    j["degenerate"] = art.degenerate;
    j["branch_count"] = art.spec.map.branch_count();
    j["transversal_count"] = art.report.transversal_count;
    j["tangential_count"] = art.report.tangential_count;
    io::json pts = io::json::array();
    for (const auto& p : art.report.inflections)
        pts.push_back({{"t", p.t}, {"alpha", p.alpha}});
    j["inflections"] = pts;
    j["report"] = art.report_path.string();
    if (!art.degenerate) {
        j["spectrum_csv"] = art.spectrum_path.string();
        j["characteristic_csv"] = art.characteristic_path.string();
    }
    return j;
}

// ---------------------------------------------------------------- reproduce

struct Comparison {
    std::string quantity;
    double expected;
    double computed;
    double delta;     // absolute, or relative when relative == true
    double tolerance;
    bool relative;
    bool pass;
};

struct CaseResult {
    std::string name;
    std::vector<Comparison> comparisons;
    double seconds = 0.0;

    [[nodiscard]] bool pass() const
    {
        return std::all_of(comparisons.begin(), comparisons.end(), [](const Comparison& c) { return c.pass; });
    }
};

inline Comparison compare_abs(std::string q, double expected, double computed, double tol)
{
    const double d = std::abs(computed - expected);
    return {std::move(q), expected, computed, d, tol, false, d <= tol};
}

inline Comparison compare_rel(std::string q, double expected, double computed, double tol)
{
    const double d = std::abs(computed - expected) / std::abs(expected);
    return {std::move(q), expected, computed, d, tol, true, d <= tol};
}

inline Comparison compare_flag(std::string q, bool expected, bool computed)
{
    return {std::move(q), expected ? 1.0 : 0.0, computed ? 1.0 : 0.0, expected == computed ? 0.0 : 1.0, 0.0, false,
            expected == computed};
}

/// Four-decimal reference values for the bundled example maps.
struct ReferenceValues {
    std::vector<double> t;
    std::vector<double> alpha;
    bool alpha_relative;
};

inline void compare_points(CaseResult& out, const InflectionReport& r, const ReferenceValues& pub)
{
    out.comparisons.push_back(
        {"count", static_cast<double>(pub.t.size()), static_cast<double>(r.transversal_count),
         std::abs(static_cast<double>(r.transversal_count) - static_cast<double>(pub.t.size())), 0.0, false,
         r.transversal_count == pub.t.size()});
    for (std::size_t i = 0; i < pub.t.size() && i < r.inflections.size(); ++i) {
        const auto& p = r.inflections[i];
        out.comparisons.push_back(compare_abs("t" + std::to_string(i + 1), pub.t[i], p.t, 5e-4));
        out.comparisons.push_back(pub.alpha_relative
                                      ? compare_rel("alpha" + std::to_string(i + 1), pub.alpha[i], p.alpha, 1e-3)
                                      : compare_abs("alpha" + std::to_string(i + 1), pub.alpha[i], p.alpha, 5e-4));
    }
}

inline CaseResult reproduce_t_minus(const InflectOptions& opt = {})
{
    CaseResult c{"T-minus", {}};
    compare_points(c, find_inflections(builtin("T-minus"), opt), {{-0.3378, -0.1706}, {1.4038, 1.7272}, false});
    return c;
}

inline CaseResult reproduce_t_plus(const InflectOptions& opt = {})
{
    CaseResult c{"T-plus", {}};
    compare_points(c, find_inflections(builtin("T-plus"), opt), {{0.0881, 0.3289}, {2.4910, 3.0781}, false});
    return c;
}

inline CaseResult reproduce_t_minus_star(const InflectOptions& opt = {})
{
    CaseResult c{"T-minus-star", {}};
    const InflectionReport r = find_inflections(builtin("T-minus-star"), opt);
    compare_points(c, r, {{-0.3378, -0.1703, -0.1147, 0.0293}, {1.4038, 1.7278, 1.8338, 85.7605}, true});
    c.comparisons.push_back(compare_flag("negative_parameter_pattern", true, r.predicates.negative_parameter_pattern));
    return c;
}

inline CaseResult reproduce_coincidence(double tol = 1e-12, const InflectOptions& opt = {})
{
    CaseResult c{"coincidence", {}};
    const CoincidenceResult res = milestone_coincidence_search(std::log(1.2), std::log(200.0), 29.542, 29.543, tol, opt);
    c.comparisons.push_back(compare_abs("x_star", 29.54276, res.x_star, 1e-3));
    compare_points(c, res.report, {{-0.4218, 0.1008}, {1.2159, 3.3858}, false});
    const bool coincident = res.report.inflections.size() >= 2 && res.report.inflections[1].coincident_milestone;
    c.comparisons.push_back(compare_flag("second_inflection_on_milestone", true, coincident));
    return c;
}

struct FigureSpec {
    int g_figure;
    int l_figure;
    const char* map_name;
};

/// Captions pair G(t) and L(alpha) per map: 1/2 T+, 3/4 T-, 5/6 T-,*, 7/8 T*.
inline std::vector<FigureSpec> figure_specs()
{
    return {{1, 2, "T-plus"}, {3, 4, "T-minus"}, {5, 6, "T-minus-star"}, {7, 8, "T-star"}};
}

inline std::vector<fs::path> write_figures(const fs::path& out_dir, bool emit_svg, const InflectOptions& opt = {})
{
    fs::create_directories(out_dir);
    std::vector<fs::path> written;
    for (const FigureSpec& f : figure_specs()) {
        const PLMap map = builtin(f.map_name);
        const InflectionReport r = find_inflections(map, opt);
        const Window w = default_window(map);
        const auto grid = linspace(w.lo, w.hi, 2001);
        const fs::path g = out_dir / ("fig" + std::to_string(f.g_figure) + "_G_" + f.map_name + ".csv");
        const fs::path l = out_dir / ("fig" + std::to_string(f.l_figure) + "_L_" + f.map_name + ".csv");
        std::vector<fs::path> svgs;
        write_curves(r, grid, l, g, f.map_name, emit_svg, &svgs);
        written.push_back(g);
        written.push_back(l);
        written.insert(written.end(), svgs.begin(), svgs.end());
    }
    return written;
}

inline io::json case_to_json(const CaseResult& c)
{
    io::json rows = io::json::array();
    for (const auto& q : c.comparisons) {
        rows.push_back({{"quantity", q.quantity},
                        {"expected", q.expected},
                        {"computed", q.computed},
                        {"delta", q.delta},
                        {"tolerance", q.tolerance},
                        {"relative", q.relative},
                        {"pass", q.pass}});
    }
    return {{"case", c.name}, {"pass", c.pass()}, {"seconds", c.seconds}, {"comparisons", rows}};
}

inline std::string case_to_text(const CaseResult& c)
{
    std::ostringstream out;
    char buf[256];
    for (const auto& q : c.comparisons) {
        std::snprintf(buf, sizeof buf, "%-4s %-14s %-32s expected %-12.6g computed %-14.8g delta %.3g%s (tol %.1g)\n",
                      q.pass ? "PASS" : "FAIL", c.name.c_str(), q.quantity.c_str(), q.expected, q.computed, q.delta,
                      q.relative ? " rel" : "", q.tolerance);
        out << buf;
    }
    return out.str();
}

// ---------------------------------------------------------------- random maps

/// Hand-rolled draws on top of mt19937_64 so sequences do not depend on the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    std::size_t index(std::size_t lo, std::size_t hi) // inclusive
    {
        return lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1));
    }

private:
    std::mt19937_64 gen_;
};

/// n in [n_lo, n_hi], log-slopes log-uniform in (lam_lo, lam_hi).
inline PLMap random_map(Rng& rng, std::size_t n_lo = 2, std::size_t n_hi = 6, double lam_lo = 0.05,
                        double lam_hi = 10.0)
{
    const std::size_t n = std::min(rng.index(n_lo, n_hi), n_hi);
    std::vector<double> lam(n);
    for (double& l : lam)
        l = rng.log_uniform(lam_lo, lam_hi);
    return PLMap::from_log_slopes(lam);
}

/// Number of sign changes of G on a grid (band-zero samples skipped).
inline std::size_t grid_sign_changes(const PLMap& map, const std::vector<double>& grid)
{
    std::size_t changes = 0;
    int last = 0;
    for (double t : grid) {
        const ScaledQuad q = f_derivs(map, t);
        const double g = g_char(map, t);
        const int s = std::abs(g) <= g_zero_band(q.log_f()) ? 0 : (g > 0.0 ? 1 : -1);
        if (s == 0)
            continue;
        if (last != 0 && s != last)
            ++changes;
        last = s;
    }
    return changes;
}

} // namespace lyapinfl::app
