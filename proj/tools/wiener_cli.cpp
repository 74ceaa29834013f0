// Command-line front end: simulate, fit, predict, spectrum, autocorr,
// experiment <name>, oracle <subcheck>.
//
// Exit codes: 0 success, 1 usage error, 2 numerical degeneracy, 3 I/O failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wiener/experiments.hpp"
#include "wiener/io.hpp"
#include "wiener/suites.hpp"
#include "wiener/wiener.hpp"

namespace {

using namespace wiener;
namespace fs = std::filesystem;

enum Exit { ok = 0, usage = 1, degenerate = 2, io_failure = 3 };

struct Globals {
    std::uint64_t seed = default_seed;
    std::string out;
    std::string config;
};

struct SystemOptions {
    std::string system = "torus";
    std::string observable;
    double b = 1.0;
    double flow_time = 0.05;
    double rk4_step = 5e-4;

    void add_to(CLI::App* app) {
        app->add_option("--system", system, "torus | twist | odometer | lorenz")
            ->check(CLI::IsMember({"torus", "twist", "odometer", "lorenz"}));
        app->add_option("--observable", observable, "f1 | f2 | exptrig | expsin | x1 | bump (default per system)")
            ->check(CLI::IsMember({"f1", "f2", "exptrig", "expsin", "x1", "bump"}));
        app->add_option("--b", b, "twist: weight of the cos(6 pi x2) term");
        app->add_option("--flow-time", flow_time, "lorenz: flow time per sample");
        app->add_option("--rk4-step", rk4_step, "lorenz: integrator step");
    }

    [[nodiscard]] SystemSpec make_system() const {
        if (system == "torus") return standard_torus_rotation();
        if (system == "twist") return standard_affine_twist();
        if (system == "odometer") return Odometer{};
        Lorenz63 l;
        l.flow_time = flow_time;
        l.rk4_step = rk4_step;
        return l;
    }

    [[nodiscard]] ObservableSpec make_observable() const {
        std::string o = observable;
        if (o.empty()) {
            o = system == "torus" ? "f1" : system == "twist" ? "exptrig" : system == "odometer" ? "expsin" : "x1";
        }
        if (o == "f1") return torus_f1();
        if (o == "f2") return torus_f2();
        if (o == "exptrig") return twist_observable(b);
        if (o == "expsin") return odometer_observable();
        if (o == "x1") return lorenz_f1();
        Lorenz63 l;
        return lorenz_bump(l);
    }
};

fs::path output_or(const Globals& g, const std::string& fallback) { return g.out.empty() ? fs::path(fallback) : fs::path(g.out); }

void emit(const Globals& g, const std::string& text) {
    if (g.out.empty() || g.out == "-") std::cout << text;
    else io::write_text(g.out, text);
}

std::size_t positive(std::size_t v, const char* what) {
    if (v == 0) throw InvalidArgument(std::string(what) + " must be positive");
    return v;
}

int run(int argc, char** argv) {
    CLI::App app{"Least-squares linear (Wiener) filter for measure-preserving dynamics"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--out", g.out, "output file or run directory");
    app.add_option("--config", g.config, "key = value configuration file");

    // simulate
    auto* sim = app.add_subcommand("simulate", "sample an observable along one orbit")->fallthrough();
    SystemOptions sim_sys;
    sim_sys.add_to(sim);
    std::size_t sim_length = 0;
    sim->add_option("--length", sim_length, "number of samples")->required();

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "fit a filter to a series CSV")->fallthrough();
    std::string fit_input;
    std::size_t fit_d = 0;
    std::optional<std::size_t> fit_row_start;
    std::string fit_method = "qr";
    fit_cmd->add_option("--input", fit_input, "series CSV (first column)")->required();
    fit_cmd->add_option("-d,--depth", fit_d, "delay depth")->required();
    fit_cmd->add_option("--row-start", fit_row_start, "first training row (common window)");
    fit_cmd->add_option("--method", fit_method, "qr | normal")->check(CLI::IsMember({"qr", "normal"}));

    // predict
    auto* pred = app.add_subcommand("predict", "iterate a fitted filter")->fallthrough();
    std::string pred_model, pred_window;
    std::size_t pred_steps = 0;
    pred->add_option("--model", pred_model, "model file")->required();
    pred->add_option("--window", pred_window, "seed window CSV, oldest first")->required();
    pred->add_option("--steps", pred_steps, "number of predicted values")->required();

    // spectrum
    auto* spec = app.add_subcommand("spectrum", "eigenvalues of the companion matrix")->fallthrough();
    std::string spec_model;
    spec->add_option("--model", spec_model, "model file")->required();

    // autocorr
    auto* ac = app.add_subcommand("autocorr", "true vs filter autocorrelation over a snippet ensemble")->fallthrough();
    SystemOptions ac_sys;
    ac_sys.add_to(ac);
    std::string ac_model;
    std::size_t ac_n = 10000, ac_nmax = 0;
    ac->add_option("--model", ac_model, "model file")->required();
    ac->add_option("--N", ac_n, "ensemble size")->capture_default_str();
    ac->add_option("--n-max", ac_nmax, "largest lag")->required();

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a registered experiment")->fallthrough();
    std::string exp_name;
    std::optional<std::size_t> exp_m, exp_n, exp_dac, exp_nmax;
    std::vector<std::size_t> exp_depths;
    bool exp_force = false, exp_no_plots = false;
    exp->add_option("name", exp_name, "experiment name")->check(CLI::IsMember(registered_experiments()));
    exp->add_option("--m", exp_m, "training length");
    exp->add_option("--N", exp_n, "test length and ensemble size");
    exp->add_option("--depths", exp_depths, "depth grid")->delimiter(',');
    exp->add_option("--d-autocorr", exp_dac, "depth of the autocorrelation filter");
    exp->add_option("--n-max", exp_nmax, "largest autocorrelation lag");
    exp->add_flag("--force", exp_force, "replace an existing run directory");
    exp->add_flag("--no-plots", exp_no_plots, "skip the SVG plots");

    // oracle
    auto* orc = app.add_subcommand("oracle", "run an oracle property suite")->fallthrough();
    std::string orc_name;
    std::size_t orc_n = 16, orc_trials = 100;
    bool orc_force = false;
    orc->add_option("subcheck", orc_name, "suite name")->required()->check(CLI::IsMember(registered_subchecks()));
    orc->add_option("--N", orc_n, "state count")->capture_default_str();
    orc->add_option("--trials", orc_trials, "prevalence trials")->capture_default_str();
    orc->add_flag("--force", orc_force, "replace an existing report directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    if (sim->parsed()) {
        const auto sys = sim_sys.make_system();
        const auto obs = sim_sys.make_observable();
        const auto x0 = sample_initials(sys, 1, g.seed)[0];
        const auto y = observe_orbit(obs, sys, x0, positive(sim_length, "--length"), g.seed);
        emit(g, io::to_csv(io::series_table(y.values)));
    } else if (fit_cmd->parsed()) {
        const auto y = io::read_series(fit_input);
        const auto r = fit(y, positive(fit_d, "--depth"), fit_row_start,
                           fit_method == "qr" ? FitMethod::qr : FitMethod::normal_equations);
        std::string report = "objective = " + io::format_double(r.objective) + "\n";
        report += "degenerate = " + std::string(r.model.degenerate_fit ? "true" : "false") + "\n";
        report += "rows = " + std::to_string(r.rows) + "\n";
        if (g.out.empty() || g.out == "-") {
            std::cout << io::serialize_model(r.model);
        } else {
            io::write_model(g.out, r.model);
            io::write_text(g.out + ".report", report);
        }
        std::cerr << report;
    } else if (pred->parsed()) {
        const auto model = io::read_model(pred_model);
        const auto window = io::read_csv(pred_window);
        const auto w = window.rows.empty() ? std::vector<double>{} : window.column(0);
        const auto z = predict_iterated(model, w, pred_steps);
        emit(g, io::to_csv(io::series_table(z)));
    } else if (spec->parsed()) {
        const auto model = io::read_model(spec_model);
        emit(g, io::to_csv(spectrum_table(spectrum(model))));
    } else if (ac->parsed()) {
        const auto model = io::read_model(ac_model);
        const auto rep = autocorr_protocol(ac_sys.make_system(), ac_sys.make_observable(), model, positive(ac_n, "--N"),
                                           ac_nmax, g.seed);
        emit(g, io::to_csv(autocorr_table(rep)));
    } else if (exp->parsed()) {
        ExperimentConfig cfg;
        fs::path out_dir;
        if (!g.config.empty()) {
            const auto kv = io::parse_key_values(io::read_text(g.config), g.config);
            apply_settings(cfg, kv);
            if (const auto it = kv.find("output_dir"); it != kv.end()) out_dir = it->second;
        }
        if (!exp_name.empty()) cfg.experiment = exp_name;
        if (cfg.experiment.empty()) throw InvalidArgument("experiment name required (argument or config key)");
        if (app.get_option("--seed")->count() > 0 || g.config.empty()) cfg.seed = g.seed;
        if (exp_m) cfg.m = positive(*exp_m, "--m");
        if (exp_n) cfg.n = positive(*exp_n, "--N");
        if (!exp_depths.empty()) cfg.depths = exp_depths;
        if (exp_dac) cfg.d_autocorr = positive(*exp_dac, "--d-autocorr");
        if (exp_nmax) cfg.n_max = positive(*exp_nmax, "--n-max");
        if (exp_no_plots) cfg.plots = false;
        if (!g.out.empty()) out_dir = g.out;
        if (out_dir.empty()) out_dir = fs::path("runs") / cfg.experiment;
        const auto r = run_experiment(cfg, out_dir, exp_force);
        std::printf("wrote %s (max eigenvalue modulus %.17g)\n", out_dir.string().c_str(), r.max_modulus);
    } else if (orc->parsed()) {
        const auto rep = run_subcheck(orc_name, orc_n, orc_trials, g.seed);
        const auto dir = output_or(g, "oracle-" + orc_name);
        write_run_directory(dir, {{orc_name + ".csv", io::to_csv(rep.cases)}, {orc_name + ".txt", rep.text()}}, orc_force);
        std::cout << rep.text();
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const wiener::NumericalDegeneracy& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return degenerate;
    } catch (const wiener::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return io_failure;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return io_failure;
    } catch (const wiener::InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return usage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return usage;
    }
}
