#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lyapinfl/app.hpp"
#include "lyapinfl/lyapinfl.hpp"

namespace {

using namespace lyapinfl;
namespace fs = std::filesystem;

struct Globals {
    double tol = 1e-12;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    bool json = false;
};

InflectOptions inflect_options(const Globals& g)
{
    InflectOptions o;
    o.tol = g.tol;
    return o;
}

void print_report(const InflectionReport& r)
{
    std::printf("branches %zu, essential %zu, inflections %zu (tangential candidates %zu)\n", r.map.branch_count(),
                essential_branch_number(r.map), r.transversal_count, r.tangential_count);
    for (const auto& p : r.inflections) {
        std::printf("  t = %+.10f  alpha = %.10f", p.t, p.alpha);
        if (p.coincident_milestone)
            std::printf("  (on milestone %zu)", *p.coincident_milestone);
        std::printf("\n");
    }
    for (const auto& b : r.bounds)
        if (b.applies)
            std::printf("  bound %-24s <= %lld : %s\n", b.name.c_str(), b.bound, b.satisfied ? "ok" : "VIOLATED");
}

int run_analyze(const Globals& g, const std::string& map_file, std::optional<double> t_lo, std::optional<double> t_hi,
                std::size_t points, bool svg)
{
    const io::MapSpec spec = io::load_map_file(map_file);
    if (!spec.map.geometry_ok())
        std::fprintf(stderr, "warning: sum of 1/x_i is %.6g > 1, branches cannot be disjoint in [0,1]\n",
                     spec.map.geometric_sum());
    app::AnalyzeOptions opt;
    opt.inflect = inflect_options(g);
    opt.points = points;
    opt.emit_svg = svg;
    if (t_lo || t_hi) {
        const app::Window w = app::default_window(spec.map);
        opt.window = app::Window{t_lo.value_or(w.lo), t_hi.value_or(w.hi)};
        if (!(opt.window->lo < opt.window->hi))
            throw Error(ErrorCode::InvalidArgument, "t window is empty");
    }
    const app::AnalysisArtifacts art = app::analyze(spec, g.out_dir, opt);
    if (g.json) {
        std::cout << io::dump(app::analysis_summary(art));
        return app::Ok;
    }
    if (art.degenerate) {
        std::printf("degenerate spectrum: every branch has log-slope %.17g, L is the single point (%.17g, %.17g)\n",
                    spec.map.min_log_slope(), spec.map.min_log_slope(),
                    std::log(static_cast<double>(spec.map.branch_count())) / spec.map.min_log_slope());
    } else {
        print_report(art.report);
    }
    std::printf("wrote %s\n", art.report_path.string().c_str());
    return app::Ok;
}

int run_surgery(const Globals& g, const std::string& base_file, std::size_t n_target, double growth, double cap)
{
    const PLMap base = base_file.empty() ? app::builtin("T-minus") : io::load_map_file(base_file).map;
    SearchOptions opt;
    opt.growth = growth;
    opt.lambda_cap = cap;
    opt.inflect = inflect_options(g);
    const SurgeryTrace trace = build_chain(base, n_target, opt);
    fs::create_directories(g.out_dir);
    const fs::path out = fs::path(g.out_dir) / "surgery.json";
    const io::json j = io::trace_to_json(trace);
    io::atomic_write_file(out, io::dump(j));
    if (g.json) {
        std::cout << io::dump(j);
        return app::Ok;
    }
    std::printf("base: %zu branches, %zu inflections\n", base.branch_count(), trace.base_count);
    for (const auto& s : trace.steps)
        std::printf("  -> %zu branches: added log-slope %g, %zu inflections, pattern %s\n", s.branches,
                    s.added_log_slope, s.transversal_count, s.pattern ? "yes" : "no");
    std::printf("wrote %s\n", out.string().c_str());
    return app::Ok;
}

int run_coincide(const Globals& g, double l1, double l3, double lo, double hi)
{
    const CoincidenceResult res = milestone_coincidence_search(l1, l3, lo, hi, g.tol, inflect_options(g));
    fs::create_directories(g.out_dir);
    const fs::path out = fs::path(g.out_dir) / "coincidence.json";
    const io::json j = io::coincidence_to_json(res);
    io::atomic_write_file(out, io::dump(j));
    if (g.json) {
        std::cout << io::dump(j);
        return app::Ok;
    }
    std::printf("x_* = %.12f  (t2 = %+.10f, G(t2) = %.3g)\n", res.x_star, res.t2, res.g_at_t2);
    print_report(res.report);
    std::printf("wrote %s\n", out.string().c_str());
    return app::Ok;
}

int run_reproduce(const Globals& g, const std::string& which, bool svg)
{
    const InflectOptions opt = inflect_options(g);
    std::vector<app::CaseResult> cases;
    const auto timed = [&](auto fn) {
        const auto t0 = std::chrono::steady_clock::now();
        app::CaseResult c = fn();
        c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        cases.push_back(std::move(c));
    };
    const bool all = which == "all";
    if (all || which == "T-minus")
        timed([&] { return app::reproduce_t_minus(opt); });
    if (all || which == "T-plus")
        timed([&] { return app::reproduce_t_plus(opt); });
    if (all || which == "T-minus-star")
        timed([&] { return app::reproduce_t_minus_star(opt); });
    if (all || which == "coincidence")
        timed([&] { return app::reproduce_coincidence(g.tol, opt); });
    std::vector<fs::path> figures;
    if (all || which == "figures")
        figures = app::write_figures(g.out_dir, svg, opt);

    bool pass = true;
    io::json summary = io::json::array();
    for (const auto& c : cases) {
        pass = pass && c.pass();
        if (g.json)
            summary.push_back(app::case_to_json(c));
        else
            std::cout << app::case_to_text(c);
    }
    if (g.json) {
        io::json files = io::json::array();
        for (const auto& f : figures)
            files.push_back(f.string());
        std::cout << io::dump({{"pass", pass}, {"cases", summary}, {"figures", files}});
    } else {
        for (const auto& f : figures)
            std::printf("wrote %s\n", f.string().c_str());
        std::printf("%s\n", pass ? "all comparisons within tolerance" : "some comparisons exceed tolerance");
    }
    return pass ? app::Ok : app::NumericFailure;
}

int run_scan(const Globals& g, const std::string& map_file, bool random_map, std::optional<double> t_lo,
             std::optional<double> t_hi, std::size_t points)
{
    if (map_file.empty() == !random_map)
        throw Error(ErrorCode::InvalidArgument, "scan needs exactly one of a map file or --random-map");
    PLMap map = PLMap::from_slopes(std::vector<double>{2.0});
    if (random_map) {
        app::Rng rng(g.seed);
        map = app::random_map(rng);
    } else {
        map = io::load_map_file(map_file).map;
    }
    require_nondegenerate(map, "scan");
    const app::Window w0 = app::default_window(map);
    const app::Window w{t_lo.value_or(w0.lo), t_hi.value_or(w0.hi)};
    if (!(w.lo < w.hi) || points < 2)
        throw Error(ErrorCode::InvalidArgument, "scan grid is empty");
    const auto grid = app::linspace(w.lo, w.hi, points);
    fs::create_directories(g.out_dir);
    const fs::path spec = fs::path(g.out_dir) / "spectrum.csv";
    const fs::path chr = fs::path(g.out_dir) / "characteristic.csv";
    io::atomic_write_file(spec, io::spectrum_csv(sample_spectrum(map, grid)));
    io::atomic_write_file(chr, io::characteristic_csv(sample_characteristic(map, grid)));
    const std::size_t changes = app::grid_sign_changes(map, grid);
    if (g.json) {
        std::cout << io::dump({{"map", io::map_to_json(map)},
                               {"t_lo", w.lo},
                               {"t_hi", w.hi},
                               {"points", points},
                               {"grid_sign_changes", changes},
                               {"spectrum_csv", spec.string()},
                               {"characteristic_csv", chr.string()}});
        return app::Ok;
    }
    std::printf("log-slopes:");
    for (double l : map.log_slopes())
        std::printf(" %.17g", l);
    std::printf("\n%zu samples on [%g, %g], %zu sign changes of G\n", points, w.lo, w.hi, changes);
    std::printf("wrote %s\nwrote %s\n", spec.string().c_str(), chr.string().c_str());
    return app::Ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App cli{"Lyapunov spectrum and inflection analysis for piecewise linear expanding maps"};
    cli.require_subcommand(1);
    Globals g;
    cli.add_option("--tol", g.tol, "bracket width for certified roots")->check(CLI::PositiveNumber);
    cli.add_option("--out-dir", g.out_dir, "directory for written files");
    cli.add_option("--seed", g.seed, "seed for randomized commands");
    cli.add_flag("--json", g.json, "machine-readable summary on stdout");

    std::string map_file;
    std::optional<double> t_lo, t_hi;
    std::size_t points = 2001;
    bool svg = false;
    auto* analyze = cli.add_subcommand("analyze", "certified inflection report, spectrum and characteristic CSV");
    analyze->add_option("map", map_file, "map JSON file")->required();
    analyze->add_option("--t-lo", t_lo, "override lower end of the t window");
    analyze->add_option("--t-hi", t_hi, "override upper end of the t window");
    analyze->add_option("--points", points, "uniform grid points")->check(CLI::Range(2, 10000000));
    analyze->add_flag("--svg", svg, "also write SVG plots");

    std::string base_file;
    std::size_t n_target = 4;
    double growth = 2.0, cap = 1e4;
    auto* surgery = cli.add_subcommand("surgery", "root-surgery chain from a base map (default T-minus)");
    surgery->add_option("base", base_file, "base map JSON file");
    surgery->add_option("--n-target", n_target, "branch count to reach")->check(CLI::Range(1, 64));
    surgery->add_option("--growth", growth, "log-slope growth factor per attempt");
    surgery->add_option("--lambda-cap", cap, "largest log-slope tried");

    double x1 = 1.2, x3 = 200.0;
    std::optional<double> l1, l3;
    std::vector<double> bracket{29.542, 29.543};
    auto* coincide = cli.add_subcommand("coincide", "middle slope whose milestone is an inflection");
    coincide->add_option("--x1", x1, "smallest slope");
    coincide->add_option("--x3", x3, "largest slope");
    auto* o_l1 = coincide->add_option("--lambda1", l1, "smallest log-slope (overrides --x1)");
    auto* o_l3 = coincide->add_option("--lambda3", l3, "largest log-slope (overrides --x3)");
    o_l1->excludes("--x1");
    o_l3->excludes("--x3");
    coincide->add_option("--bracket", bracket, "bracket for the middle slope x2")->expected(2);

    std::string which = "all";
    auto* reproduce = cli.add_subcommand("reproduce", "rerun the worked examples and emit figure data");
    reproduce->add_option("which", which, "all | T-minus | T-plus | T-minus-star | coincidence | figures")
        ->check(CLI::IsMember({"all", "T-minus", "T-plus", "T-minus-star", "coincidence", "figures"}));
    reproduce->add_flag("--svg", svg, "also write SVG plots");

    bool random_map = false;
    std::string scan_file;
    auto* scan = cli.add_subcommand("scan", "sample spectrum and G on a uniform grid");
    scan->add_option("map", scan_file, "map JSON file");
    scan->add_flag("--random-map", random_map, "draw a map from --seed");
    scan->add_option("--t-lo", t_lo, "lower end of the t window");
    scan->add_option("--t-hi", t_hi, "upper end of the t window");
    scan->add_option("--points", points, "grid points")->check(CLI::Range(2, 10000000));

    for (auto* sub : {analyze, surgery, coincide, reproduce, scan})
        sub->fallthrough();

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? app::Ok : app::Usage;
    }

    try {
        if (*analyze)
            return run_analyze(g, map_file, t_lo, t_hi, points, svg);
        if (*surgery)
            return run_surgery(g, base_file, n_target, growth, cap);
        if (*coincide)
            return run_coincide(g, l1.value_or(std::log(x1)), l3.value_or(std::log(x3)), bracket[0], bracket[1]);
        if (*reproduce)
            return run_reproduce(g, which, svg);
        if (*scan)
            return run_scan(g, scan_file, random_map, t_lo, t_hi, points);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return app::exit_code_for(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return app::ParseFailure;
    }
    return app::Usage;
}
