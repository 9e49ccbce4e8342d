#pragma once

// Parameter sweeps: one axis varied over an even grid, every other parameter
// fixed, a declared list of outputs evaluated per grid point. Results render
// as CSV (gnuplot-ready, 12 significant digits) and JSON (spec echo, rows,
// provenance).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "covert/config.hpp"
#include "covert/covertness_metrics.hpp"
#include "covert/error.hpp"
#include "covert/montecarlo.hpp"
#include "covert/noise_models.hpp"
#include "covert/thresholds_rates.hpp"
#include "covert/version.hpp"

namespace covert {

enum class Axis { rho_db, sigma_delta_db, epsilon, p_w };

enum class Output { xi_avg, p_out, threshold_approx, threshold_oracle, threshold_mc, rate, gamma_star, rate_worst_case };

inline std::string_view to_string(Axis a) {
    switch (a) {
        case Axis::rho_db: return "rho_db";
        case Axis::sigma_delta_db: return "sigma_delta_db";
        case Axis::epsilon: return "epsilon";
        case Axis::p_w: return "p_w";
    }
    return "";
}

inline std::string_view to_string(Output o) {
    switch (o) {
        case Output::xi_avg: return "xi_avg";
        case Output::p_out: return "p_out";
        case Output::threshold_approx: return "threshold_approx";
        case Output::threshold_oracle: return "threshold_oracle";
        case Output::threshold_mc: return "threshold_mc";
        case Output::rate: return "rate";
        case Output::gamma_star: return "gamma_star";
        case Output::rate_worst_case: return "rate_worst_case";
    }
    return "";
}

inline Axis parse_axis(std::string_view s) {
    for (Axis a : {Axis::rho_db, Axis::sigma_delta_db, Axis::epsilon, Axis::p_w}) {
        if (to_string(a) == s) return a;
    }
    throw DomainError("unknown sweep axis '" + std::string(s) + "' (expected rho_db, sigma_delta_db, epsilon, p_w)");
}

inline Output parse_output(std::string_view s) {
    for (Output o : {Output::xi_avg, Output::p_out, Output::threshold_approx, Output::threshold_oracle,
                     Output::threshold_mc, Output::rate, Output::gamma_star, Output::rate_worst_case}) {
        if (to_string(o) == s) return o;
    }
    throw DomainError("unknown sweep output '" + std::string(s) + "'");
}

/// Stochastic outputs carry an extra `<name>_ci` column.
inline bool has_ci(Output o) { return o == Output::threshold_mc; }

/// Parameter names usable in SweepSpec::fixed (and as the axis).
inline const std::vector<std::string>& sweep_parameters() {
    static const std::vector<std::string> names = {"sigma_n_db", "rho_db", "sigma_delta_db", "epsilon", "p_w",
                                                   "r_b",        "r_w",    "alpha",          "sigma_b_db"};
    return names;
}

struct SweepSpec {
    std::string name = "sweep";
    std::string model = "logu";  ///< logu | logn | logn-approx
    Axis axis = Axis::epsilon;
    double start = 0.0;
    double stop = 1.0;
    std::size_t points = 2;
    std::map<std::string, double> fixed;
    std::vector<Output> outputs;
    std::uint64_t seed = 1;
    std::uint64_t trials = 100000;

    bool operator==(const SweepSpec&) const = default;

    void validate() const {
        if (!(start < stop)) throw DomainError("sweep: start must be < stop");
        if (points < 2) throw DomainError("sweep: points must be >= 2");
        if (outputs.empty()) throw DomainError("sweep: no outputs requested");
        if (fixed.contains(std::string(to_string(axis))))
            throw DomainError("sweep: axis '" + std::string(to_string(axis)) + "' must not also be fixed");
        for (const auto& [k, v] : fixed) {
            if (std::find(sweep_parameters().begin(), sweep_parameters().end(), k) == sweep_parameters().end())
                throw DomainError("sweep: unknown fixed parameter '" + k + "'");
            if (!std::isfinite(v)) throw DomainError("sweep: fixed parameter '" + k + "' is not finite");
        }
        if (model != "logu" && model != "logn" && model != "logn-approx")
            throw DomainError("sweep: unknown model '" + model + "' (expected logu, logn, logn-approx)");
    }

    double axis_value(std::size_t i) const {
        if (i + 1 == points) return stop;
        return start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
};

namespace detail {

inline double require(const std::map<std::string, double>& params, const std::string& key) {
    auto it = params.find(key);
    if (it == params.end()) throw DomainError("missing required parameter '" + key + "'");
    return it->second;
}

inline double value_or(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

}  // namespace detail

/// Builds a noise model from named parameters (dB-valued nominal power).
inline NoiseModel make_model(const std::string& kind, const std::map<std::string, double>& params) {
    const double sigma_n_db = detail::value_or(params, "sigma_n_db", 0.0);
    if (kind == "logu") return LogUniformModel::from_db(sigma_n_db, detail::require(params, "rho_db"));
    if (kind == "logn" || kind == "logn-approx") {
        LogNormalModel m{sigma_n_db, detail::require(params, "sigma_delta_db")};
        m.validate();
        if (kind == "logn") return m;
        return GaussianApproxModel(m);
    }
    throw DomainError("unknown model '" + kind + "' (expected logu, logn, logn-approx)");
}

/// Link geometry from named parameters; Bob's noise defaults to the nominal Willie noise.
inline LinkGeometry make_geometry(const std::map<std::string, double>& params) {
    const double sigma_n_db = detail::value_or(params, "sigma_n_db", 0.0);
    LinkGeometry g{detail::value_or(params, "r_b", 1.0), detail::value_or(params, "r_w", 1.0),
                   detail::value_or(params, "alpha", 2.0),
                   db_to_linear(Decibel{detail::value_or(params, "sigma_b_db", sigma_n_db)})};
    g.validate();
    return g;
}

struct SweepRow {
    double axis_value = 0.0;
    std::vector<double> values;                  ///< one per declared output
    std::vector<std::optional<double>> ci;       ///< half-widths for stochastic outputs
};

struct Provenance {
    std::string tool_version = kVersion;
    std::uint64_t seed = 0;
    std::uint64_t trials = 0;
    std::string started_utc;
    std::string finished_utc;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepRow> rows;
    Provenance provenance;
};

namespace detail {

inline std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace detail

inline SweepRow evaluate_point(const SweepSpec& spec, double x) {
    auto params = spec.fixed;
    params[std::string(to_string(spec.axis))] = x;
    const NoiseModel model = make_model(spec.model, params);

    SweepRow row;
    row.axis_value = x;
    for (Output out : spec.outputs) {
        std::optional<double> ci;
        double v = 0.0;
        switch (out) {
            case Output::xi_avg: v = xi_avg(model, detail::require(params, "p_w")).xi_avg; break;
            case Output::p_out:
                v = p_out(model, detail::require(params, "p_w"), detail::require(params, "epsilon"));
                break;
            case Output::gamma_star: v = optimal_gamma(model, detail::require(params, "p_w")); break;
            case Output::threshold_approx: v = p_threshold_closed(model, detail::require(params, "epsilon")); break;
            case Output::threshold_oracle: v = p_threshold_oracle(model, detail::require(params, "epsilon")); break;
            case Output::threshold_mc: {
                const double eps = detail::require(params, "epsilon");
                MonteCarloConfig cfg;
                cfg.seed = spec.seed;
                cfg.trials = spec.trials;
                v = mc_threshold(model, eps, cfg);
                ci = mc_threshold_half_width(model, eps, v, cfg);
                break;
            }
            case Output::rate:
                v = covert_rate(p_threshold_closed(model, detail::require(params, "epsilon")), make_geometry(params));
                break;
            case Output::rate_worst_case: {
                const auto* m = std::get_if<LogUniformModel>(&model);
                if (!m) throw DomainError("rate_worst_case needs the bounded (logu) model");
                v = covert_rate(worst_case_power_bound(*m), make_geometry(params));
                break;
            }
        }
        row.values.push_back(v);
        row.ci.push_back(ci);
    }
    return row;
}

inline SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    SweepResult result;
    result.spec = spec;
    result.provenance.seed = spec.seed;
    result.provenance.trials = spec.trials;
    result.provenance.started_utc = detail::utc_now();
    for (std::size_t i = 0; i < spec.points; ++i) result.rows.push_back(evaluate_point(spec, spec.axis_value(i)));
    result.provenance.finished_utc = detail::utc_now();
    return result;
}

/// Built-in presets reproducing the published curves:
///   fig1   threshold approximation vs exact-prior oracle vs Monte Carlo,
///          sigma_n = -100 dB, one run per sigma_delta_db in {0.5, 2};
///   fig2a  covert rate vs rho_db (bounded prior), one run per epsilon;
///   fig2b  covert rate vs sigma_delta_db (log-normal prior), one run per epsilon.
/// Both fig2 presets use r_b = r_w and sigma_b = sigma_n = -100 dB.
inline std::vector<SweepSpec> figure_preset(std::string_view figure, std::vector<double> epsilons = {0.1, 0.3, 0.5},
                                            std::uint64_t seed = 1, std::uint64_t trials = 100000) {
    std::vector<SweepSpec> runs;
    auto label = [](double v) { return format_number(v, 6); };
    if (figure == "fig1") {
        for (double sd : {0.5, 2.0}) {
            SweepSpec s;
            s.name = "fig1_sd" + label(sd);
            s.model = "logn";
            s.axis = Axis::epsilon;
            s.start = 0.05;
            s.stop = 0.9;
            s.points = 18;
            s.fixed = {{"sigma_n_db", -100.0}, {"sigma_delta_db", sd}};
            s.outputs = {Output::threshold_approx, Output::threshold_oracle, Output::threshold_mc};
            s.seed = seed;
            s.trials = trials;
            runs.push_back(s);
        }
    } else if (figure == "fig2a" || figure == "fig2b") {
        const bool bounded = figure == "fig2a";
        for (double eps : epsilons) {
            SweepSpec s;
            s.name = std::string(figure) + "_eps" + label(eps);
            s.model = bounded ? "logu" : "logn";
            s.axis = bounded ? Axis::rho_db : Axis::sigma_delta_db;
            s.start = 0.0;
            s.stop = 5.0;
            s.points = 26;
            s.fixed = {{"sigma_n_db", -100.0}, {"sigma_b_db", -100.0}, {"r_b", 1.0}, {"r_w", 1.0}, {"alpha", 2.0},
                       {"epsilon", eps}};
            s.outputs = bounded ? std::vector{Output::rate, Output::rate_worst_case} : std::vector{Output::rate};
            s.seed = seed;
            s.trials = trials;
            runs.push_back(s);
        }
    } else {
        throw DomainError("unknown figure preset '" + std::string(figure) + "' (expected fig1, fig2a, fig2b)");
    }
    return runs;
}

inline std::vector<std::string> csv_columns(const SweepSpec& spec) {
    std::vector<std::string> cols{std::string(to_string(spec.axis))};
    for (Output o : spec.outputs) {
        cols.emplace_back(to_string(o));
        if (has_ci(o)) cols.push_back(std::string(to_string(o)) + "_ci");
    }
    return cols;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace detail

inline void write_csv(const SweepResult& result, std::ostream& out) {
    const auto cols = csv_columns(result.spec);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << detail::csv_field(cols[i]);
    out << '\n';
    for (const auto& row : result.rows) {
        out << format_number(row.axis_value, 12);
        for (std::size_t j = 0; j < row.values.size(); ++j) {
            out << ',' << format_number(row.values[j], 12);
            if (has_ci(result.spec.outputs[j])) out << ',' << format_number(row.ci[j].value_or(0.0), 12);
        }
        out << '\n';
    }
}

inline nlohmann::ordered_json spec_to_json(const SweepSpec& spec) {
    nlohmann::ordered_json j;
    j["name"] = spec.name;
    j["model"] = spec.model;
    j["axis"] = to_string(spec.axis);
    j["start"] = spec.start;
    j["stop"] = spec.stop;
    j["points"] = spec.points;
    j["fixed"] = spec.fixed;
    auto& outs = j["outputs"] = nlohmann::ordered_json::array();
    for (Output o : spec.outputs) outs.push_back(to_string(o));
    j["seed"] = spec.seed;
    j["trials"] = spec.trials;
    return j;
}

inline nlohmann::ordered_json to_json(const SweepResult& result) {
    nlohmann::ordered_json j;
    j["spec"] = spec_to_json(result.spec);
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : result.rows) {
        nlohmann::ordered_json r;
        r[std::string(to_string(result.spec.axis))] = row.axis_value;
        for (std::size_t k = 0; k < row.values.size(); ++k) {
            const std::string name(to_string(result.spec.outputs[k]));
            r[name] = row.values[k];
            if (row.ci[k]) r[name + "_ci"] = *row.ci[k];
        }
        rows.push_back(std::move(r));
    }
    j["provenance"] = {{"tool_version", result.provenance.tool_version},
                       {"seed", result.provenance.seed},
                       {"trials", result.provenance.trials},
                       {"started_utc", result.provenance.started_utc},
                       {"finished_utc", result.provenance.finished_utc}};
    return j;
}

/// Gnuplot script plotting every output column of each CSV against its axis.
inline std::string gnuplot_script(const std::vector<SweepResult>& results, const std::vector<std::string>& csv_paths,
                                  const std::string& image_path) {
    std::ostringstream gp;
    gp << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set terminal pngcairo size 900,600\n"
       << "set output '" << image_path << "'\n"
       << "set xlabel '" << (results.empty() ? "" : std::string(to_string(results.front().spec.axis))) << "'\n"
       << "plot ";
    bool first = true;
    for (std::size_t r = 0; r < results.size(); ++r) {
        const auto cols = csv_columns(results[r].spec);
        for (std::size_t c = 1; c < cols.size(); ++c) {
            if (cols[c].ends_with("_ci")) continue;
            gp << (first ? "" : ", \\\n     ") << "'" << csv_paths[r] << "' using 1:" << (c + 1) << " with lines title '"
               << results[r].spec.name << " " << cols[c] << "'";
            first = false;
        }
    }
    gp << '\n';
    return gp.str();
}

/// Config document equivalent to `spec` (round-trips through sweep_spec_from_config).
inline ConfigDocument to_config(const SweepSpec& spec) {
    ConfigDocument doc;
    doc.set("command", std::string("sweep"));
    doc.set("model", spec.model);
    static const std::map<std::string, std::string> param_keys = {
        {"sigma_n_db", "sigma_n_db"}, {"rho_db", "rho_db"},   {"sigma_delta_db", "sigma_delta_db"},
        {"epsilon", "epsilon"},       {"p_w", "pw"},          {"r_b", "link.rb"},
        {"r_w", "link.rw"},           {"alpha", "link.alpha"}, {"sigma_b_db", "link.sigma_b_db"}};
    for (const auto& [k, v] : spec.fixed) doc.set(param_keys.at(k), v);
    doc.set("sweep.name", spec.name);
    doc.set("sweep.axis", std::string(to_string(spec.axis)));
    doc.set("sweep.start", spec.start);
    doc.set("sweep.stop", spec.stop);
    doc.set("sweep.points", static_cast<double>(spec.points));
    std::vector<ConfigScalar> outs;
    for (Output o : spec.outputs) outs.emplace_back(std::string(to_string(o)));
    doc.set("sweep.outputs", outs);
    doc.set("mc.seed", static_cast<double>(spec.seed));
    doc.set("mc.trials", static_cast<double>(spec.trials));
    return doc;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) throw DomainError("parameter '" + key + "' is not a number: " + text);
    return v;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& text) {
    const double v = parse_double(key, text);
    if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) throw DomainError("parameter '" + key + "' must be a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

}  // namespace detail

/// Sweep spec from bare-key string parameters (config or CLI). Keys follow the
/// config schema: pw, rb, rw, alpha, sigma_b_db, axis, start, stop, points, ...
inline SweepSpec make_sweep_spec(const std::map<std::string, std::string>& kv) {
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw DomainError("missing required key '" + key + "'");
        return it->second;
    };
    SweepSpec s;
    if (auto it = kv.find("name"); it != kv.end()) s.name = it->second;
    if (auto it = kv.find("model"); it != kv.end()) s.model = it->second;
    s.axis = parse_axis(need("axis"));
    s.start = detail::parse_double("start", need("start"));
    s.stop = detail::parse_double("stop", need("stop"));
    s.points = detail::parse_count("points", need("points"));
    std::stringstream outs(need("outputs"));
    for (std::string item; std::getline(outs, item, ',');) {
        if (!item.empty()) s.outputs.push_back(parse_output(item));
    }
    if (auto it = kv.find("seed"); it != kv.end()) s.seed = detail::parse_count("seed", it->second);
    if (auto it = kv.find("trials"); it != kv.end()) s.trials = detail::parse_count("trials", it->second);

    static const std::map<std::string, std::string> params = {
        {"sigma_n_db", "sigma_n_db"}, {"rho_db", "rho_db"}, {"sigma_delta_db", "sigma_delta_db"},
        {"epsilon", "epsilon"},       {"pw", "p_w"},        {"rb", "r_b"},
        {"rw", "r_w"},                {"alpha", "alpha"},   {"sigma_b_db", "sigma_b_db"}};
    for (const auto& [key, param] : params) {
        if (param == to_string(s.axis)) continue;
        if (auto it = kv.find(key); it != kv.end()) s.fixed[param] = detail::parse_double(key, it->second);
    }
    s.validate();
    return s;
}

inline SweepSpec sweep_spec_from_config(const ConfigDocument& doc) { return make_sweep_spec(doc.flat_strings()); }

}  // namespace covert
