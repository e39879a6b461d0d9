#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "lyapinfl/characteristic.hpp"
#include "lyapinfl/error.hpp"
#include "lyapinfl/expsum.hpp"
#include "lyapinfl/inflect.hpp"
#include "lyapinfl/plmap.hpp"
#include "lyapinfl/spectrum.hpp"
#include "lyapinfl/surgery.hpp"

namespace lyapinfl::io {

using nlohmann::json;

inline constexpr int schema_version = 1;
inline constexpr const char* tool_version = "1.0.0";

// ---------------------------------------------------------------- map files

struct MapSpec {
    PLMap map;
    std::string label;
    bool strict_geometry = false;
    bool given_as_slopes = true;
};

/// Map file: an object with exactly one of "slopes" / "log_slopes" (arrays
/// of numbers), optional "label" (string) and "strict_geometry" (bool).
inline MapSpec parse_map_json(const json& j)
{
    if (!j.is_object())
        throw Error(ErrorCode::Parse, "map file must hold a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "slopes" && key != "log_slopes" && key != "label" && key != "strict_geometry")
            throw Error(ErrorCode::Parse, "unknown map field '" + key + "'");
    }
    const bool has_slopes = j.contains("slopes");
    const bool has_logs = j.contains("log_slopes");
    if (has_slopes == has_logs)
        throw Error(ErrorCode::Parse, "map file needs exactly one of 'slopes' or 'log_slopes'");
    const json& arr = has_slopes ? j.at("slopes") : j.at("log_slopes");
    if (!arr.is_array())
        throw Error(ErrorCode::Parse, "slope list must be an array");
    std::vector<double> values;
    for (const json& v : arr) {
        if (!v.is_number())
            throw Error(ErrorCode::Parse, "slope list must contain only numbers");
        values.push_back(v.get<double>());
    }
    std::string label;
    if (j.contains("label")) {
        if (!j.at("label").is_string())
            throw Error(ErrorCode::Parse, "'label' must be a string");
        label = j.at("label").get<std::string>();
    }
    bool strict = false;
    if (j.contains("strict_geometry")) {
        if (!j.at("strict_geometry").is_boolean())
            throw Error(ErrorCode::Parse, "'strict_geometry' must be a boolean");
        strict = j.at("strict_geometry").get<bool>();
    }
    PLMap map = has_slopes ? PLMap::from_slopes(values, strict) : PLMap::from_log_slopes(values, strict);
    return {std::move(map), std::move(label), strict, has_slopes};
}

inline json parse_json_text(std::string_view text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Parse, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline MapSpec load_map_file(const std::filesystem::path& path)
{
    return parse_map_json(parse_json_text(read_file(path)));
}

inline json map_to_json(const PLMap& map, const std::string& label = {})
{
    json j;
    j["log_slopes"] = std::vector<double>(map.log_slopes().begin(), map.log_slopes().end());
    if (!label.empty())
        j["label"] = label;
    return j;
}

// ---------------------------------------------------------------- numbers

/// 17 significant digits: enough to round-trip any binary64.
inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double number_or(const json& j, double fallback)
{
    return j.is_number() ? j.get<double>() : fallback;
}

// ---------------------------------------------------------------- report

inline json point_to_json(const InflectionPoint& p)
{
    json j;
    j["t"] = p.t;
    j["alpha"] = p.alpha;
    j["kind"] = p.kind == InflectionKind::Transversal ? "transversal" : "tangential";
    j["bracket"] = {p.bracket_lo, p.bracket_hi};
    j["G"] = finite_or_null(p.g_value);
    j["milestone_interval"] = p.milestone_interval ? json(*p.milestone_interval) : json(nullptr);
    j["coincident_milestone"] = p.coincident_milestone ? json(*p.coincident_milestone) : json(nullptr);
    return j;
}

inline InflectionPoint point_from_json(const json& j)
{
    InflectionPoint p;
    p.t = j.at("t").get<double>();
    p.alpha = j.at("alpha").get<double>();
    p.kind = j.at("kind").get<std::string>() == "transversal" ? InflectionKind::Transversal
                                                              : InflectionKind::Tangential;
    p.bracket_lo = j.at("bracket").at(0).get<double>();
    p.bracket_hi = j.at("bracket").at(1).get<double>();
    p.g_value = number_or(j.at("G"), std::numeric_limits<double>::quiet_NaN());
    if (!j.at("milestone_interval").is_null())
        p.milestone_interval = j.at("milestone_interval").get<std::size_t>();
    if (!j.at("coincident_milestone").is_null())
        p.coincident_milestone = j.at("coincident_milestone").get<std::size_t>();
    return p;
}

/// Report for a single-slope map: no inflections, a one-point spectrum.
inline InflectionReport degenerate_report(const PLMap& map, const InflectOptions& opt = {})
{
    InflectionReport r(map);
    r.options = opt;
    r.milestones = milestones(map);
    r.bounds = check_bounds(r);
    return r;
}

inline json report_to_json(const InflectionReport& r, const std::string& label = {})
{
    const PLMap& map = r.map;
    const bool degenerate = is_degenerate(map);
    json j;
    j["schema_version"] = schema_version;
    j["tool"] = {{"name", "lyapinfl"}, {"version", tool_version}};
    j["map"] = map_to_json(map, label);
    j["map"]["branch_count"] = map.branch_count();
    j["map"]["essential_branch_number"] = essential_branch_number(map);
    j["map"]["geometric_sum"] = map.geometric_sum();
    j["map"]["geometry_ok"] = map.geometry_ok();
    j["degenerate"] = degenerate;
    j["tolerances"] = {{"t_tol", r.options.tol},
                       {"zero_band", r.options.zero_band},
                       {"h_value_tol", r.options.h_value_tol},
                       {"coincide_tol", r.options.coincide_tol}};
    const Domain dom = spectrum_domain(map);
    j["domain"] = {dom.lo, dom.hi};
    const BowenResult bowen = bowen_dimension(map);
    j["bowen"] = {{"dimension", bowen.dimension}, {"alpha_at_max", bowen.alpha_at_max}};
    if (degenerate) {
        j["point_spectrum"] = {{"alpha", dom.lo},
                               {"L", std::log(static_cast<double>(map.branch_count())) / dom.lo}};
    }
    json ms = json::array();
    for (const auto& m : r.milestones)
        ms.push_back({{"index", m.least_index}, {"log_slope", m.log_slope}});
    j["milestones"] = ms;
    j["critical_points"] = r.critical_points;
    json infl = json::array();
    for (const auto& p : r.inflections)
        infl.push_back(point_to_json(p));
    j["inflections"] = infl;
    json tang = json::array();
    for (const auto& p : r.tangential_candidates)
        tang.push_back(point_to_json(p));
    j["tangential_candidates"] = tang;
    j["transversal_count"] = r.transversal_count;
    j["tangential_count"] = r.tangential_count;
    json prof = json::array();
    for (const auto& iv : r.convexity_profile)
        prof.push_back({{"t_lo", finite_or_null(iv.t_lo)}, {"t_hi", finite_or_null(iv.t_hi)}, {"sign", iv.sign}});
    j["convexity_profile"] = prof;
    json bounds = json::array();
    for (const auto& b : r.bounds)
        bounds.push_back({{"name", b.name}, {"bound", b.bound}, {"applies", b.applies}, {"satisfied", b.satisfied}});
    j["bounds"] = bounds;
    const Predicates& pr = r.predicates;
    j["predicates"] = {
        {"q_sign_class", pr.q_class ? json(to_string(*pr.q_class)) : json(nullptr)},
        {"q_consistent", pr.q_consistent},
        {"t_star", pr.t_star ? json(*pr.t_star) : json(nullptr)},
        {"t_star_straddles", pr.t_star_straddles},
        {"negative_parameter_pattern", pr.negative_parameter_pattern},
        {"all_parameters_negative", pr.all_parameters_negative},
        {"all_parameters_positive", pr.all_parameters_positive},
    };
    return j;
}

inline InflectionReport report_from_json(const json& j)
{
    try {
        if (j.at("schema_version").get<int>() != schema_version)
            throw Error(ErrorCode::Parse, "unsupported report schema_version");
        const auto lams = j.at("map").at("log_slopes").get<std::vector<double>>();
        InflectionReport r(PLMap::from_log_slopes(lams));
        const json& tol = j.at("tolerances");
        r.options = {tol.at("t_tol").get<double>(), tol.at("zero_band").get<double>(),
                     tol.at("h_value_tol").get<double>(), tol.at("coincide_tol").get<double>()};
        for (const json& m : j.at("milestones"))
            r.milestones.push_back({m.at("index").get<std::size_t>(), m.at("log_slope").get<double>()});
        r.critical_points = j.at("critical_points").get<std::vector<double>>();
        for (const json& p : j.at("inflections"))
            r.inflections.push_back(point_from_json(p));
        for (const json& p : j.at("tangential_candidates"))
            r.tangential_candidates.push_back(point_from_json(p));
        r.transversal_count = j.at("transversal_count").get<std::size_t>();
        r.tangential_count = j.at("tangential_count").get<std::size_t>();
        constexpr double inf = std::numeric_limits<double>::infinity();
        for (const json& iv : j.at("convexity_profile"))
            r.convexity_profile.push_back(
                {number_or(iv.at("t_lo"), -inf), number_or(iv.at("t_hi"), inf), iv.at("sign").get<int>()});
        for (const json& b : j.at("bounds"))
            r.bounds.push_back({b.at("name").get<std::string>(), b.at("bound").get<long long>(),
                                b.at("applies").get<bool>(), b.at("satisfied").get<bool>()});
        const json& pr = j.at("predicates");
        if (!pr.at("q_sign_class").is_null()) {
            const auto s = pr.at("q_sign_class").get<std::string>();
            r.predicates.q_class = s == "all_positive"   ? QSignClass::AllPositive
                                   : s == "all_negative" ? QSignClass::AllNegative
                                                         : QSignClass::Mixed;
        }
        r.predicates.q_consistent = pr.at("q_consistent").get<bool>();
        if (!pr.at("t_star").is_null())
            r.predicates.t_star = pr.at("t_star").get<double>();
        r.predicates.t_star_straddles = pr.at("t_star_straddles").get<bool>();
        r.predicates.negative_parameter_pattern = pr.at("negative_parameter_pattern").get<bool>();
        r.predicates.all_parameters_negative = pr.at("all_parameters_negative").get<bool>();
        r.predicates.all_parameters_positive = pr.at("all_parameters_positive").get<bool>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("malformed report: ") + e.what());
    }
}

// ---------------------------------------------------------------- surgery

inline json trace_to_json(const SurgeryTrace& tr)
{
    json steps = json::array();
    for (const auto& s : tr.steps) {
        steps.push_back({{"branches", s.branches},
                         {"added_log_slope", s.added_log_slope},
                         {"transversal_count", s.transversal_count},
                         {"negative_parameter_pattern", s.pattern},
                         {"tried_log_slopes", s.tried}});
    }
    json j;
    j["schema_version"] = schema_version;
    j["base"] = map_to_json(tr.base);
    j["base_transversal_count"] = tr.base_count;
    j["steps"] = steps;
    j["final_map"] = map_to_json(tr.final_map);
    j["final_report"] = report_to_json(tr.final_report);
    return j;
}

inline json coincidence_to_json(const CoincidenceResult& c)
{
    json j;
    j["schema_version"] = schema_version;
    j["x_star"] = c.x_star;
    j["log_x_star"] = std::log(c.x_star);
    j["t2"] = c.t2;
    j["G_at_t2"] = c.g_at_t2;
    j["report"] = report_to_json(c.report);
    return j;
}

/// Fixed layout: 2-space indent, keys in insertion-independent (sorted) order.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- CSV

inline std::string spectrum_csv(const std::vector<SpectrumSample>& samples)
{
    std::string out = "t,alpha,L,dL_dalpha\n";
    for (const auto& s : samples) {
        out += format_double(s.t) + ',' + format_double(s.alpha) + ',' + format_double(s.L) + ',' +
               format_double(s.dL_dalpha) + '\n';
    }
    return out;
}

inline std::string characteristic_csv(const std::vector<CharSample>& samples)
{
    std::string out = "t,G,H_sign,d2L\n";
    for (const auto& s : samples) {
        out += format_double(s.t) + ',' + format_double(s.G) + ',' + std::to_string(s.H_sign) + ',' +
               format_double(s.d2L_dalpha2) + '\n';
    }
    return out;
}

inline std::string expsum_csv(const ExpSum& s)
{
    std::string out = "b,c\n";
    for (const auto& t : s.terms())
        out += format_double(t.base) + ',' + format_double(t.coeff) + '\n';
    return out;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline CsvTable parse_csv(std::string_view text)
{
    CsvTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    const auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(l);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        return cells;
    };
    if (!std::getline(in, line))
        throw Error(ErrorCode::Parse, "empty CSV");
    table.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<double> row;
        for (const auto& c : split(line)) {
            try {
                row.push_back(std::stod(c));
            } catch (const std::exception&) {
                throw Error(ErrorCode::Parse, "bad CSV number '" + c + "'");
            }
        }
        if (row.size() != table.header.size())
            throw Error(ErrorCode::Parse, "CSV row width does not match header");
        table.rows.push_back(std::move(row));
    }
    return table;
}

// ---------------------------------------------------------------- SVG

struct Marker {
    double x;
    double y;
};

inline std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

/// Minimal polyline plot with axes labels and circle markers. Non-finite
/// points are skipped; the y-range is clipped to [y_clip_lo, y_clip_hi].
inline std::string svg_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                            const std::vector<double>& xs, const std::vector<double>& ys,
                            const std::vector<Marker>& markers = {},
                            double y_clip_lo = -std::numeric_limits<double>::infinity(),
                            double y_clip_hi = std::numeric_limits<double>::infinity())
{
    constexpr double width = 640, height = 420, margin = 60;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
            continue;
        const double y = std::clamp(ys[i], y_clip_lo, y_clip_hi);
        x0 = std::min(x0, xs[i]);
        x1 = std::max(x1, xs[i]);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    if (!(x1 > x0)) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (!(y1 > y0)) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const auto px = [&](double x) { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); };
    const auto py = [&](double y) {
        return height - margin - (std::clamp(y, y_clip_lo, y_clip_hi) - y0) / (y1 - y0) * (height - 2 * margin);
    };
    char buf[128];
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n";
    out += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    out += "<text x=\"320\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">" + xml_escape(title) + "</text>\n";
    out += "<line x1=\"60\" y1=\"360\" x2=\"580\" y2=\"360\" stroke=\"black\"/>\n";
    out += "<line x1=\"60\" y1=\"60\" x2=\"60\" y2=\"360\" stroke=\"black\"/>\n";
    out += "<text x=\"320\" y=\"400\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(x_label) + "</text>\n";
    out += "<text x=\"20\" y=\"210\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 210)\">" +
           xml_escape(y_label) + "</text>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"60\" y=\"378\" font-size=\"11\">%.4g</text>\n", x0);
    out += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"580\" y=\"378\" font-size=\"11\" text-anchor=\"end\">%.4g</text>\n", x1);
    out += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"56\" y=\"364\" font-size=\"11\" text-anchor=\"end\">%.4g</text>\n", y0);
    out += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"56\" y=\"64\" font-size=\"11\" text-anchor=\"end\">%.4g</text>\n", y1);
    out += buf;
    if (y0 < 0.0 && y1 > 0.0) {
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"60\" y1=\"%.2f\" x2=\"580\" y2=\"%.2f\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n",
                      py(0.0), py(0.0));
        out += buf;
    }
    out += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
            continue;
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(xs[i]), py(ys[i]));
        out += buf;
    }
    out += "\"/>\n";
    for (const Marker& m : markers) {
        if (!std::isfinite(m.x) || !std::isfinite(m.y))
            continue;
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"crimson\"/>\n", px(m.x),
                      py(m.y));
        out += buf;
    }
    out += "</svg>\n";
    return out;
}

// ---------------------------------------------------------------- files

/// Writes via a temporary sibling and rename, so readers never see a partial file.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::Parse, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            throw Error(ErrorCode::Parse, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace lyapinfl::io
