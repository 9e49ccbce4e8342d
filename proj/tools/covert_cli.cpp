// covert: command-line front end for the covertness library.
//
//   covert metrics   --model logu --sigma-n-db 0 --rho-db 3.0103 --pw 0.5
//   covert threshold --model logn --sigma-n-db -100 --sigma-delta-db 0.5 --epsilon 0.2 --method oracle
//   covert rate      --model logu --rho-db 3 --epsilon 0.5 --rb 1 --rw 1
//   covert sweep     --figure fig2a --out-dir results
//   covert simulate  --sigma-w-db 0 --pw 1 --n 100 --gamma 1.5
//
// Every subcommand also accepts --config FILE; flags given on the command
// line override values from the file. Exit codes: 0 success, 1 runtime or
// I/O failure, 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "covert/covert.hpp"

namespace {

using json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ModelArgs {
    std::string model = "logu";
    double sigma_n_db = 0.0;
    std::optional<double> rho_db;
    std::optional<double> sigma_delta_db;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--model", model, "Noise prior: logu, logn or logn-approx")
            ->check(CLI::IsMember({"logu", "logn", "logn-approx"}))
            ->capture_default_str();
        cmd.add_option("--sigma-n-db", sigma_n_db, "Nominal noise power at Willie [dB]")->capture_default_str();
        cmd.add_option("--rho-db", rho_db, "Bounded uncertainty size rho [dB] (logu)");
        cmd.add_option("--sigma-delta-db", sigma_delta_db, "Std of the dB noise offset (logn, logn-approx)");
    }

    std::map<std::string, double> params() const {
        std::map<std::string, double> p{{"sigma_n_db", sigma_n_db}};
        if (rho_db) p["rho_db"] = *rho_db;
        if (sigma_delta_db) p["sigma_delta_db"] = *sigma_delta_db;
        return p;
    }

    covert::NoiseModel build() const { return covert::make_model(model, params()); }
};

struct McArgs {
    std::uint64_t seed = 1;
    std::uint64_t trials = 100000;
    double confidence_z = 3.0;
    unsigned workers = 1;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--seed", seed, "Random seed")->capture_default_str();
        cmd.add_option("--trials", trials, "Monte Carlo trials")->capture_default_str();
        cmd.add_option("--confidence-z", confidence_z, "Confidence half-width multiplier")->capture_default_str();
        cmd.add_option("--workers", workers, "Worker threads (results do not depend on this)")->capture_default_str();
    }

    covert::MonteCarloConfig config() const {
        covert::MonteCarloConfig cfg{seed, trials, confidence_z, workers};
        cfg.validate();
        return cfg;
    }
};

struct LinkArgs {
    double rb = 1.0;
    double rw = 1.0;
    double alpha = 2.0;
    std::optional<double> sigma_b_db;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--rb", rb, "Alice-Bob distance")->capture_default_str();
        cmd.add_option("--rw", rw, "Alice-Willie distance")->capture_default_str();
        cmd.add_option("--alpha", alpha, "Path-loss exponent")->capture_default_str();
        cmd.add_option("--sigma-b-db", sigma_b_db, "Bob's noise power [dB] (default: nominal Willie noise)");
    }

    covert::LinkGeometry build(double sigma_n_db) const {
        covert::LinkGeometry g{rb, rw, alpha, covert::db_to_linear(covert::Decibel{sigma_b_db.value_or(sigma_n_db)})};
        g.validate();
        return g;
    }
};

std::optional<double> to_db(double linear) {
    if (!(linear > 0.0)) return std::nullopt;
    return covert::linear_to_db(linear).value_db;
}

json nullable(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

double threshold_by_method(const covert::NoiseModel& model, double epsilon, const std::string& method,
                           const McArgs& mc, json& detail) {
    if (method == "closed") return covert::p_threshold_closed(model, epsilon);
    if (method == "oracle") return covert::p_threshold_oracle(model, epsilon);
    const auto cfg = mc.config();
    const double t = covert::mc_threshold(model, epsilon, cfg);
    detail["half_width"] = covert::mc_threshold_half_width(model, epsilon, t, cfg);
    detail["seed"] = cfg.seed;
    detail["trials"] = cfg.trials;
    return t;
}

std::filesystem::path default_out_dir() {
    if (const char* env = std::getenv("COVERT_OUT_DIR"); env && *env) return env;
    return ".";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Moves `--config FILE` out of the argument list and splices the file's
/// settings in right after the subcommand, so later command-line flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw covert::ConfigError("--config requires a file path");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].starts_with("--config=")) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (!path) return args;

    const auto doc = covert::load_config(*path);
    static const std::vector<std::string> commands = {"metrics", "threshold", "rate", "sweep", "simulate"};
    std::size_t insert_at = 0;
    if (!args.empty() && std::find(commands.begin(), commands.end(), args[0]) != commands.end()) {
        insert_at = 1;
    } else if (const auto* cmd = doc.find("command")) {
        const auto* name = std::get_if<std::string>(&cmd->value);
        if (!name) throw covert::ConfigError("line " + std::to_string(cmd->line) + ": command must be a string");
        args.insert(args.begin(), *name);
        insert_at = 1;
    }
    const auto extra = doc.to_cli_args();
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(insert_at), extra.begin(), extra.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Covert communication under warden noise uncertainty"};
    app.set_version_flag("--version", std::string(covert::kVersion));
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // metrics
    auto* metrics = app.add_subcommand("metrics", "Average covert probability, outage probability and worst-case measure");
    ModelArgs metrics_model;
    McArgs metrics_mc;
    double metrics_pw = 0.0;
    std::optional<double> metrics_gamma;
    std::string metrics_method = "auto";
    double metrics_epsilon = 0.1;
    metrics_model.add_to(*metrics);
    metrics_mc.add_to(*metrics);
    metrics->add_option("--pw", metrics_pw, "Received signal power at Willie (linear)")->required();
    metrics->add_option("--gamma", metrics_gamma, "Fixed detection threshold (default: Willie's optimum)");
    metrics->add_option("--epsilon", metrics_epsilon, "Covertness level used by p_out")->capture_default_str();
    metrics->add_option("--method", metrics_method, "auto, closed, quadrature or mc")
        ->check(CLI::IsMember({"auto", "closed", "quadrature", "mc"}))
        ->capture_default_str();

    // threshold
    auto* threshold = app.add_subcommand("threshold", "Largest received power at Willie meeting xi_avg >= 1 - epsilon");
    ModelArgs threshold_model;
    McArgs threshold_mc;
    double threshold_epsilon = 0.0;
    std::string threshold_method = "closed";
    threshold_model.add_to(*threshold);
    threshold_mc.add_to(*threshold);
    threshold->add_option("--epsilon", threshold_epsilon, "Covertness requirement epsilon in (0, 1)")->required();
    threshold->add_option("--method", threshold_method, "closed, oracle or mc")
        ->check(CLI::IsMember({"closed", "oracle", "mc"}))
        ->capture_default_str();

    // rate
    auto* rate = app.add_subcommand("rate", "Covert rate in bits per channel use");
    ModelArgs rate_model;
    McArgs rate_mc;
    LinkArgs rate_link;
    double rate_epsilon = 0.0;
    std::string rate_method = "closed";
    rate_model.add_to(*rate);
    rate_mc.add_to(*rate);
    rate_link.add_to(*rate);
    rate->add_option("--epsilon", rate_epsilon, "Covertness requirement epsilon in (0, 1)")->required();
    rate->add_option("--method", rate_method, "Threshold method: closed, oracle or mc")
        ->check(CLI::IsMember({"closed", "oracle", "mc"}))
        ->capture_default_str();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Parameter sweep written as CSV + JSON");
    ModelArgs sweep_model;
    McArgs sweep_mc;
    LinkArgs sweep_link;
    std::optional<std::string> sweep_figure;
    std::optional<std::string> sweep_axis;
    std::optional<double> sweep_start;
    std::optional<double> sweep_stop;
    std::optional<std::size_t> sweep_points;
    std::vector<std::string> sweep_outputs;
    std::vector<double> sweep_epsilons{0.1, 0.3, 0.5};
    std::optional<double> sweep_epsilon;
    std::optional<double> sweep_pw;
    std::string sweep_name = "sweep";
    std::string sweep_out_dir = default_out_dir().string();
    bool sweep_plot = false;
    sweep_model.add_to(*sweep);
    sweep_mc.add_to(*sweep);
    sweep_link.add_to(*sweep);
    sweep->add_option("--figure", sweep_figure, "Preset: fig1, fig2a or fig2b")
        ->check(CLI::IsMember({"fig1", "fig2a", "fig2b"}));
    sweep->add_option("--axis", sweep_axis, "rho_db, sigma_delta_db, epsilon or p_w");
    sweep->add_option("--start", sweep_start, "First axis value");
    sweep->add_option("--stop", sweep_stop, "Last axis value");
    sweep->add_option("--points", sweep_points, "Grid points (>= 2)");
    sweep->add_option("--outputs", sweep_outputs, "Comma-separated outputs")->delimiter(',');
    sweep->add_option("--epsilons", sweep_epsilons, "Epsilon family: one run per value (fig2 presets, or a custom axis without --epsilon)")->delimiter(',');
    sweep->add_option("--epsilon", sweep_epsilon, "Fixed epsilon");
    sweep->add_option("--pw", sweep_pw, "Fixed received power at Willie (linear)");
    sweep->add_option("--name", sweep_name, "Output file stem")->capture_default_str();
    sweep->add_option("--out-dir", sweep_out_dir, "Output directory (env COVERT_OUT_DIR)")->capture_default_str();
    sweep->add_flag("--plot", sweep_plot, "Also write a gnuplot script");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Sample-level radiometer trials vs the CLT approximation");
    McArgs simulate_mc;
    double simulate_sigma_w_db = 0.0;
    double simulate_pw = 0.0;
    std::uint64_t simulate_n = 100;
    double simulate_gamma = 0.0;
    simulate_mc.add_to(*simulate);
    simulate->add_option("--sigma-w-db", simulate_sigma_w_db, "Actual noise power at Willie [dB]")->capture_default_str();
    simulate->add_option("--pw", simulate_pw, "Received signal power at Willie (linear)")->required();
    simulate->add_option("--n", simulate_n, "Samples per observation")->capture_default_str();
    simulate->add_option("--gamma", simulate_gamma, "Detection threshold")->required();

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return 2;
    } catch (const covert::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (metrics->parsed()) {
            const auto model = metrics_model.build();
            covert::CovertnessReport report;
            json out;
            out["model"] = covert::model_kind(model);
            out["p_w"] = metrics_pw;
            if (metrics_method == "mc") {
                const auto cfg = metrics_mc.config();
                const auto est = covert::estimate_xi_avg(model, metrics_pw, metrics_gamma, cfg);
                report.gamma_star = metrics_gamma.value_or(covert::optimal_gamma(model, metrics_pw));
                report.xi_avg = est.estimate;
                report.p_out = covert::estimate_p_out(model, metrics_pw, metrics_epsilon, cfg).estimate;
                report.xi_up = covert::xi_up(model, metrics_pw);
                report.method = covert::Method::monte_carlo;
                out["xi_avg_ci"] = est.half_width;
            } else if (metrics_gamma) {
                report.gamma_star = *metrics_gamma;
                report.xi_avg = metrics_method == "quadrature"
                                    ? covert::xi_avg_at_gamma_quadrature(model, metrics_pw, *metrics_gamma)
                                    : covert::xi_avg_at_gamma(model, metrics_pw, *metrics_gamma);
                report.p_out = 1.0 - report.xi_avg;
                report.xi_up = covert::xi_up(model, metrics_pw);
                report.method = metrics_method == "quadrature" ? covert::Method::quadrature : covert::Method::closed_form;
            } else if (metrics_method == "quadrature") {
                report = covert::xi_avg_numeric(model, metrics_pw);
            } else {
                if (metrics_method == "closed" && std::holds_alternative<covert::LogNormalModel>(model))
                    throw covert::DomainError("no closed form for the exact log-normal prior; use --method quadrature or --model logn-approx");
                report = covert::xi_avg(model, metrics_pw);
            }
            covert::p_out(model, metrics_pw, metrics_epsilon);  // validates epsilon
            out["gamma_star"] = report.gamma_star;
            out["xi_avg"] = report.xi_avg;
            out["p_out"] = report.p_out;
            out["xi_up"] = report.xi_up;
            out["method"] = covert::to_string(report.method);
            std::cout << out.dump(2) << "\n";
        } else if (threshold->parsed()) {
            const auto model = threshold_model.build();
            json detail;
            const double t = threshold_by_method(model, threshold_epsilon, threshold_method, threshold_mc, detail);
            detail["model"] = covert::model_kind(model);
            detail["epsilon"] = threshold_epsilon;
            detail["method"] = threshold_method;
            detail["threshold"] = t;
            detail["threshold_db"] = nullable(to_db(t));
            detail["threshold_db_rel_nominal"] = nullable(to_db(t / covert::nominal_power(model)));
            std::cout << covert::format_number(t, 12) << "\n" << detail.dump(2) << "\n";
        } else if (rate->parsed()) {
            const auto model = rate_model.build();
            const auto geometry = rate_link.build(rate_model.sigma_n_db);
            json ignored;
            const double t = threshold_by_method(model, rate_epsilon, rate_method, rate_mc, ignored);
            std::cout << covert::format_number(covert::covert_rate(t, geometry), 12) << "\n";
        } else if (sweep->parsed()) {
            std::vector<covert::SweepSpec> runs;
            if (sweep_figure) {
                runs = covert::figure_preset(*sweep_figure, sweep_epsilons, sweep_mc.seed, sweep_mc.trials);
            } else {
                std::map<std::string, std::string> kv;
                auto put = [&](const std::string& k, const auto& v) {
                    if (v) kv[k] = covert::format_number(static_cast<double>(*v));
                };
                kv["model"] = sweep_model.model;
                kv["name"] = sweep_name;
                if (sweep_axis) kv["axis"] = *sweep_axis;
                put("start", sweep_start);
                put("stop", sweep_stop);
                put("points", sweep_points);
                if (!sweep_outputs.empty()) {
                    std::string joined;
                    for (const auto& o : sweep_outputs) joined += (joined.empty() ? "" : ",") + o;
                    kv["outputs"] = joined;
                }
                kv["sigma_n_db"] = covert::format_number(sweep_model.sigma_n_db);
                put("rho_db", sweep_model.rho_db);
                put("sigma_delta_db", sweep_model.sigma_delta_db);
                put("epsilon", sweep_epsilon);
                put("pw", sweep_pw);
                if (sweep->count("--rb")) kv["rb"] = covert::format_number(sweep_link.rb);
                if (sweep->count("--rw")) kv["rw"] = covert::format_number(sweep_link.rw);
                if (sweep->count("--alpha")) kv["alpha"] = covert::format_number(sweep_link.alpha);
                put("sigma_b_db", sweep_link.sigma_b_db);
                kv["seed"] = std::to_string(sweep_mc.seed);
                kv["trials"] = std::to_string(sweep_mc.trials);
                // An epsilon family without a fixed epsilon gives one run per value.
                if (!sweep_epsilon && sweep->count("--epsilons") && kv["axis"] != "epsilon") {
                    for (double eps : sweep_epsilons) {
                        kv["epsilon"] = covert::format_number(eps);
                        kv["name"] = sweep_name + "_eps" + covert::format_number(eps, 6);
                        runs.push_back(covert::make_sweep_spec(kv));
                    }
                } else {
                    runs.push_back(covert::make_sweep_spec(kv));
                }
            }

            const std::filesystem::path dir(sweep_out_dir);
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (!std::filesystem::is_directory(dir)) throw IoError("output directory '" + dir.string() + "' is not usable");

            std::vector<covert::SweepResult> results;
            std::vector<std::string> csv_paths;
            json all = json::array();
            for (const auto& spec : runs) {
                auto result = covert::run_sweep(spec);
                std::ostringstream csv;
                covert::write_csv(result, csv);
                const auto csv_path = dir / (spec.name + ".csv");
                write_file(csv_path, csv.str());
                std::cout << csv_path.string() << "\n";
                csv_paths.push_back(csv_path.filename().string());
                all.push_back(covert::to_json(result));
                results.push_back(std::move(result));
            }
            const std::string stem = sweep_figure ? *sweep_figure : sweep_name;
            const auto json_path = dir / (stem + ".json");
            write_file(json_path, all.dump(2) + "\n");
            std::cout << json_path.string() << "\n";
            if (sweep_plot) {
                const auto gp_path = dir / (stem + ".gp");
                write_file(gp_path, covert::gnuplot_script(results, csv_paths, stem + ".png"));
                std::cout << gp_path.string() << "\n";
            }
        } else if (simulate->parsed()) {
            const auto cfg = simulate_mc.config();
            const double sigma_w_sq = covert::db_to_linear(covert::Decibel{simulate_sigma_w_db});
            const auto est = covert::simulate_detector(sigma_w_sq, simulate_pw, simulate_n, simulate_gamma, cfg);
            const auto clt = covert::finite_n_errors(sigma_w_sq, simulate_gamma, {simulate_pw, simulate_n});
            json out;
            out["sigma_w_sq"] = sigma_w_sq;
            out["p_w"] = simulate_pw;
            out["n"] = simulate_n;
            out["gamma"] = simulate_gamma;
            out["p_fa"] = est.p_fa.estimate;
            out["p_fa_ci"] = est.p_fa.half_width;
            out["p_md"] = est.p_md.estimate;
            out["p_md_ci"] = est.p_md.half_width;
            out["p_fa_clt"] = clt.p_fa;
            out["p_md_clt"] = clt.p_md;
            out["seed"] = cfg.seed;
            out["trials"] = cfg.trials;
            std::cout << out.dump(2) << "\n";
        }
    } catch (const covert::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const covert::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
