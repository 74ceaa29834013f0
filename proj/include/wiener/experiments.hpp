#pragma once

// Registered numerical experiments: error curves, autocorrelation comparison
// and companion spectra for each test system, with CSV/SVG output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wiener/diagnostics.hpp"
#include "wiener/dynamics.hpp"
#include "wiener/errors.hpp"
#include "wiener/filter.hpp"
#include "wiener/io.hpp"
#include "wiener/observables.hpp"
#include "wiener/svg.hpp"

namespace wiener {

inline constexpr std::uint64_t default_seed = 42;

/// Independent stream seed from a base seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Zero / empty fields mean "use the experiment default".
struct ExperimentConfig {
    std::string experiment;
    std::size_t m = 0;  // training length (the fit sees y_0..y_m)
    std::size_t n = 0;  // test length and ensemble size
    std::vector<std::size_t> depths;
    std::size_t d_autocorr = 0;
    std::size_t n_max = 0;
    std::uint64_t seed = default_seed;
    std::vector<double> flow_times;  // Lorenz only
    double horizon = 0.0;            // Lorenz multistep horizon in time units
    std::vector<double> dt_grid;     // Lorenz depth grid in units of d*t
    double rk4_step = 0.0;
    std::optional<double> b;  // twist: weight of the cos(6 pi x2) term
    std::vector<std::size_t> spectrum_depths;
    bool plots = true;
};

inline const std::vector<std::string>& registered_experiments() {
    static const std::vector<std::string> names{"torus-f1",          "torus-f2",  "twist",      "twist-weak", "twist-x1",
                                                "odometer",          "odometer-spectrum", "lorenz-x1", "lorenz-bump"};
    return names;
}

inline bool is_lorenz_experiment(const std::string& name) { return name.starts_with("lorenz"); }

namespace detail {

inline std::vector<std::size_t> range_depths(std::size_t lo, std::size_t hi, std::size_t stride = 1) {
    std::vector<std::size_t> d;
    for (std::size_t k = lo; k <= hi; k += stride) d.push_back(k);
    return d;
}

inline std::size_t whole_steps(double ratio, const char* what) {
    const double r = std::round(ratio);
    if (r < 1.0 || std::abs(ratio - r) > 1e-9 * std::max(1.0, ratio))
        throw InvalidArgument(std::string(what) + " must be a positive integer multiple");
    return static_cast<std::size_t>(r);
}

}  // namespace detail

/// Fills every unset field with the experiment default and validates the result.
inline ExperimentConfig resolve(ExperimentConfig c) {
    const auto& names = registered_experiments();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end())
        throw InvalidArgument("unknown experiment '" + c.experiment + "'");
    const std::string& e = c.experiment;
    auto set = [](auto& field, auto value) {
        if (field == decltype(field + 0){}) field = value;
    };
    auto set_list = [](auto& field, auto value) {
        if (field.empty()) field = std::move(value);
    };
    if (e == "torus-f1" || e == "torus-f2") {
        set(c.m, 10000), set(c.n, 10000), set(c.d_autocorr, 21), set(c.n_max, 63);
        set_list(c.depths, detail::range_depths(1, 40));
    } else if (e.starts_with("twist")) {
        set(c.m, 10000), set(c.n, 10000), set(c.d_autocorr, 21), set(c.n_max, 63);
        set_list(c.depths, detail::range_depths(1, 100));
        if (!c.b) c.b = e == "twist" ? 1.0 : e == "twist-weak" ? 0.01 : 0.0;
    } else if (e == "odometer") {
        set(c.m, 10000), set(c.n, 100000), set(c.d_autocorr, 51), set(c.n_max, 153);
        set_list(c.depths, detail::range_depths(1, 40));
    } else if (e == "odometer-spectrum") {
        set(c.m, 10000), set(c.n, 10000), set(c.d_autocorr, 64), set(c.n_max, 192);
        set_list(c.spectrum_depths, std::vector<std::size_t>{64, 250});
        set_list(c.depths, c.spectrum_depths);
    } else if (e == "lorenz-x1") {
        set(c.m, 20000), set(c.n, 10000), set(c.d_autocorr, 21), set(c.n_max, 63);
        set(c.horizon, 0.4), set(c.rk4_step, 5e-4);
        set_list(c.flow_times, std::vector<double>{0.05, 0.1, 0.2, 0.4});
        std::vector<double> grid;
        for (int k = 1; k <= 25; ++k) grid.push_back(0.4 * k);
        set_list(c.dt_grid, grid);
    } else if (e == "lorenz-bump") {
        set(c.m, 20000), set(c.n, 10000), set(c.d_autocorr, 21), set(c.n_max, 80), set(c.rk4_step, 5e-4);
        set_list(c.flow_times, std::vector<double>{0.05});
        auto d = detail::range_depths(1, 4);
        for (std::size_t k = 5; k <= 100; k += 5) d.push_back(k);
        set_list(c.depths, d);
    }
    set_list(c.spectrum_depths, std::vector<std::size_t>{c.d_autocorr});

    if (c.m == 0 || c.n == 0 || c.d_autocorr == 0 || c.n_max == 0)
        throw InvalidArgument("experiment counts must be positive");
    for (std::size_t d : c.depths)
        if (d == 0) throw InvalidArgument("depths must be positive");
    if (is_lorenz_experiment(e)) {
        if (!(c.rk4_step > 0.0)) throw InvalidArgument("rk4_step must be positive");
        for (double t : c.flow_times) {
            if (!(t > 0.0)) throw InvalidArgument("flow times must be positive");
            detail::lorenz_substeps(t, c.rk4_step);
            if (e == "lorenz-x1") detail::whole_steps(c.horizon / t, "horizon / flow_time");
        }
        if (c.flow_times.empty()) throw InvalidArgument("need at least one flow time");
    }
    return c;
}

/// Depth grid of a Lorenz multistep curve: d = round(dt / t), deduplicated.
inline std::vector<std::size_t> lorenz_depths(const ExperimentConfig& c, double t) {
    std::vector<std::size_t> d;
    for (double dt : c.dt_grid) {
        const auto k = static_cast<std::size_t>(std::max(1.0, std::round(dt / t)));
        if (d.empty() || d.back() != k) d.push_back(k);
    }
    return d;
}

struct SpectrumResult {
    std::size_t d = 0;
    ComplexSpectrum spectrum;
};

struct ExperimentResult {
    ExperimentConfig config;           // resolved
    std::vector<double> flow_times;    // one per curve (0 for maps)
    std::vector<ErrorCurve> curves;
    AutocorrReport autocorr;
    std::vector<SpectrumResult> spectra;
    double max_modulus = 0.0;          // over every fitted model
    std::vector<std::pair<std::string, std::string>> manifest;
};

namespace detail {

inline SystemSpec experiment_system(const ExperimentConfig& c, double flow_time) {
    const auto& e = c.experiment;
    if (e.starts_with("torus")) return standard_torus_rotation();
    if (e.starts_with("twist")) return standard_affine_twist();
    if (e.starts_with("odometer")) return Odometer{};
    Lorenz63 l;
    l.flow_time = flow_time;
    l.rk4_step = c.rk4_step;
    return l;
}

inline ObservableSpec experiment_observable(const ExperimentConfig& c) {
    const auto& e = c.experiment;
    if (e == "torus-f1") return torus_f1();
    if (e == "torus-f2") return torus_f2();
    if (e.starts_with("twist")) return twist_observable(*c.b);
    if (e.starts_with("odometer")) return odometer_observable();
    if (e == "lorenz-x1") return lorenz_f1();
    return lorenz_bump();
}

inline std::string join(const auto& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        if constexpr (std::is_floating_point_v<std::decay_t<decltype(v[i])>>) s += io::format_double(v[i]);
        else s += std::to_string(v[i]);
    }
    return s;
}

}  // namespace detail

/// Runs the experiment in memory. Streams: 1 training start, 2 test start, 3 ensemble.
inline ExperimentResult compute_experiment(const ExperimentConfig& raw) {
    ExperimentResult r;
    r.config = resolve(raw);
    const auto& c = r.config;
    const bool lorenz = is_lorenz_experiment(c.experiment);
    const std::vector<double> times = lorenz ? c.flow_times : std::vector<double>{0.0};
    const auto obs = detail::experiment_observable(c);

    auto track = [&r](const FilterModel& m) { r.max_modulus = std::max(r.max_modulus, spectrum(m).max_modulus()); };

    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        const auto sys = detail::experiment_system(c, t);
        const bool multistep = c.experiment == "lorenz-x1";
        const std::size_t steps = multistep ? detail::whole_steps(c.horizon / t, "horizon / flow_time") : 1;
        const auto depths = multistep ? lorenz_depths(c, t) : c.depths;
        const std::size_t dmax = std::max(*std::max_element(depths.begin(), depths.end()),
                                          k == 0 ? std::max(c.d_autocorr, *std::max_element(c.spectrum_depths.begin(),
                                                                                             c.spectrum_depths.end()))
                                                 : std::size_t{0});
        if (c.m < dmax + 1 || c.n < dmax + steps)
            throw InvalidArgument("training or test length too short for depth " + std::to_string(dmax));

        const auto x_train = sample_initials(sys, 1, derive_seed(c.seed, 1))[0];
        const auto x_test = sample_initials(sys, 1, derive_seed(c.seed, 2))[0];
        const auto train = observe_orbit(obs, sys, x_train, c.m + 1, c.seed);
        const auto test = observe_orbit(obs, sys, x_test, c.n, c.seed);

        auto curve = error_curve(train, test, depths, steps);
        for (const auto& m : curve.models) track(m);
        r.flow_times.push_back(t);
        r.curves.push_back(std::move(curve));

        if (k == 0) {
            const auto model = fit(train, c.d_autocorr).model;
            track(model);
            r.autocorr = autocorr_protocol(sys, obs, model, c.n, c.n_max, derive_seed(c.seed, 3));
            for (std::size_t d : c.spectrum_depths) {
                const auto m = fit(train, d).model;
                track(m);
                r.spectra.push_back({d, spectrum(m)});
            }
        }
    }

    auto& mf = r.manifest;
    mf.emplace_back("experiment", c.experiment);
    mf.emplace_back("seed", std::to_string(c.seed));
    mf.emplace_back("m", std::to_string(c.m));
    mf.emplace_back("N", std::to_string(c.n));
    if (lorenz) {
        mf.emplace_back("flow_times", detail::join(c.flow_times));
        mf.emplace_back("rk4_step", io::format_double(c.rk4_step));
        mf.emplace_back("lorenz_sampling", "warmup=1000 points at flow 40*5.3e-4, start (4,7,16) +- U(0.1)");
    }
    if (c.experiment == "lorenz-x1") {
        mf.emplace_back("horizon", io::format_double(c.horizon));
        mf.emplace_back("dt_grid", detail::join(c.dt_grid));
        for (std::size_t k = 0; k < times.size(); ++k)
            mf.emplace_back("curve_steps_" + std::to_string(r.curves[k].steps),
                            "flow_time=" + io::format_double(times[k]));
    } else {
        mf.emplace_back("depths", detail::join(c.depths));
    }
    if (c.b) mf.emplace_back("b", io::format_double(*c.b));
    mf.emplace_back("d_autocorr", std::to_string(c.d_autocorr));
    mf.emplace_back("n_max", std::to_string(c.n_max));
    mf.emplace_back("spectrum_depths", detail::join(c.spectrum_depths));
    mf.emplace_back("max_eigenvalue_modulus", io::format_double(r.max_modulus));
    mf.emplace_back("streams", "train=derive(seed,1) test=derive(seed,2) ensemble=derive(seed,3)");
    return r;
}

inline io::CsvTable error_curve_table(const ExperimentResult& r) {
    io::CsvTable t{{"d", "steps", "mse"}, {}};
    for (const auto& c : r.curves)
        for (std::size_t i = 0; i < c.depths.size(); ++i)
            t.rows.push_back({static_cast<double>(c.depths[i]), static_cast<double>(c.steps), c.mse[i]});
    return t;
}

inline io::CsvTable autocorr_table(const AutocorrReport& a) {
    io::CsvTable t{{"lag", "a_true", "a_filter"}, {}};
    for (std::size_t n = 0; n < a.a_true.size(); ++n) t.rows.push_back({static_cast<double>(n), a.a_true[n], a.a_filter[n]});
    return t;
}

inline io::CsvTable spectrum_table(const ComplexSpectrum& s) {
    io::CsvTable t{{"re", "im", "residual"}, {}};
    for (std::size_t i = 0; i < s.values.size(); ++i) t.rows.push_back({s.values[i].real(), s.values[i].imag(), s.residuals[i]});
    return t;
}

/// Every output file of a run, name -> contents.
inline std::vector<std::pair<std::string, std::string>> render_outputs(const ExperimentResult& r) {
    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("error_curve.csv", io::to_csv(error_curve_table(r)));
    files.emplace_back("autocorr.csv", io::to_csv(autocorr_table(r.autocorr)));
    files.emplace_back("spectrum.csv", io::to_csv(spectrum_table(r.spectra.front().spectrum)));
    if (r.spectra.size() > 1)
        for (const auto& s : r.spectra)
            files.emplace_back("spectrum_d" + std::to_string(s.d) + ".csv", io::to_csv(spectrum_table(s.spectrum)));
    std::string manifest;
    for (const auto& [k, v] : r.manifest) manifest += k + " = " + v + "\n";
    files.emplace_back("manifest.txt", manifest);

    if (r.config.plots) {
        const bool lorenz = r.config.experiment == "lorenz-x1";
        std::vector<svg::Series> curves;
        for (std::size_t k = 0; k < r.curves.size(); ++k) {
            svg::Series s;
            s.label = lorenz ? "t = " + io::format_double(r.flow_times[k]) : r.config.experiment;
            for (std::size_t i = 0; i < r.curves[k].depths.size(); ++i) {
                const double d = static_cast<double>(r.curves[k].depths[i]);
                s.x.push_back(lorenz ? d * r.flow_times[k] : d);
                s.y.push_back(r.curves[k].mse[i]);
            }
            curves.push_back(std::move(s));
        }
        files.emplace_back("error_curve.svg",
                           svg::render(curves, {r.config.experiment + ": forecast error", lorenz ? "d t" : "d",
                                                "mean squared error", true, false, false}));
        svg::Series at{"A(n)", {}, r.autocorr.a_true, false}, af{"A_d(n)", {}, r.autocorr.a_filter, false};
        for (std::size_t n = 0; n < r.autocorr.a_true.size(); ++n) {
            at.x.push_back(static_cast<double>(n));
            af.x.push_back(static_cast<double>(n));
        }
        files.emplace_back("autocorr.svg",
                           svg::render({at, af}, {r.config.experiment + ": autocorrelation, d = " +
                                                      std::to_string(r.autocorr.d),
                                                  "n", "A(n)", false, false, false}));
        std::vector<svg::Series> spec;
        for (const auto& s : r.spectra) {
            svg::Series p{"d = " + std::to_string(s.d), {}, {}, true};
            for (const auto& z : s.spectrum.values) {
                p.x.push_back(z.real());
                p.y.push_back(z.imag());
            }
            spec.push_back(std::move(p));
        }
        files.emplace_back("spectrum.svg", svg::render(spec, {r.config.experiment + ": spectrum of U_d", "Re", "Im",
                                                              false, true, true}));
    }
    return files;
}

/// Writes into a sibling temporary directory, then renames it into place.
/// An existing run directory is replaced only with `force`.
inline void write_run_directory(const std::filesystem::path& out,
                                const std::vector<std::pair<std::string, std::string>>& files, bool force) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::exists(out) && !force)
        throw IoError("output directory '" + out.string() + "' exists (use --force to replace it)");
    const auto parent = out.has_parent_path() ? out.parent_path() : fs::path(".");
    fs::create_directories(parent, ec);
    if (ec) throw IoError("cannot create '" + parent.string() + "': " + ec.message());
    const auto tmp = parent / ("." + out.filename().string() + ".partial");
    fs::remove_all(tmp, ec);
    if (!fs::create_directory(tmp, ec) || ec) throw IoError("cannot create '" + tmp.string() + "'");
    for (const auto& [name, text] : files) io::write_text(tmp / name, text);
    if (fs::exists(out)) {
        fs::remove_all(out, ec);
        if (ec) throw IoError("cannot replace '" + out.string() + "': " + ec.message());
    }
    fs::rename(tmp, out, ec);
    if (ec) throw IoError("cannot move run directory into '" + out.string() + "': " + ec.message());
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out, bool force) {
    auto r = compute_experiment(cfg);
    write_run_directory(out, render_outputs(r), force);
    return r;
}

namespace detail {

inline std::size_t parse_count(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw InvalidArgument("config '" + key + "': expected a nonnegative integer, got '" + v + "'");
    try {
        return static_cast<std::size_t>(std::stoull(v));
    } catch (const std::exception&) {
        throw InvalidArgument("config '" + key + "': integer out of range");
    }
}

inline double parse_real(const std::string& key, const std::string& v) {
    double x = 0.0;
    if (!io::parse_double(v, x) || !std::isfinite(x))
        throw InvalidArgument("config '" + key + "': expected a number, got '" + v + "'");
    return x;
}

}  // namespace detail

/// Applies flat key = value settings. Unknown keys are rejected.
inline void apply_settings(ExperimentConfig& c, const io::KeyValues& kv) {
    using detail::parse_count, detail::parse_real;
    auto counts = [](const std::string& k, const std::string& v) {
        std::vector<std::size_t> out;
        for (const auto& s : io::split(v, ',')) out.push_back(parse_count(k, s));
        return out;
    };
    auto reals = [](const std::string& k, const std::string& v) {
        std::vector<double> out;
        for (const auto& s : io::split(v, ',')) out.push_back(parse_real(k, s));
        return out;
    };
    for (const auto& [k, v] : kv) {
        if (k == "experiment") c.experiment = v;
        else if (k == "m") c.m = parse_count(k, v);
        else if (k == "N") c.n = parse_count(k, v);
        else if (k == "depths") c.depths = counts(k, v);
        else if (k == "d_autocorr") c.d_autocorr = parse_count(k, v);
        else if (k == "n_max") c.n_max = parse_count(k, v);
        else if (k == "seed") c.seed = parse_count(k, v);
        else if (k == "flow_time" || k == "flow_times") c.flow_times = reals(k, v);
        else if (k == "horizon") c.horizon = parse_real(k, v);
        else if (k == "dt_grid") c.dt_grid = reals(k, v);
        else if (k == "rk4_step") c.rk4_step = parse_real(k, v);
        else if (k == "b") c.b = parse_real(k, v);
        else if (k == "spectrum_depths") c.spectrum_depths = counts(k, v);
        else if (k == "plots") {
            if (v != "true" && v != "false") throw InvalidArgument("config 'plots': expected true or false");
            c.plots = v == "true";
        } else if (k == "output_dir") {
            // handled by the caller
        } else {
            throw InvalidArgument("unknown config key '" + k + "'");
        }
    }
}

}  // namespace wiener
