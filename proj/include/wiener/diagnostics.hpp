#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "wiener/dynamics.hpp"
#include "wiener/errors.hpp"
#include "wiener/filter.hpp"
#include "wiener/numerics.hpp"
#include "wiener/observables.hpp"
#include "wiener/oracle.hpp"

namespace wiener {

/// Mean squared error of the `steps`-ahead rollout over every window of the test buffer.
inline double forecast_mse(const FilterModel& model, const TrajectoryBuffer& test, std::size_t steps) {
    model.validate();
    const std::size_t d = model.depth();
    if (steps == 0) throw InvalidArgument("forecast_mse: steps must be positive");
    if (test.size() < d + steps) throw InvalidArgument("forecast_mse: test buffer shorter than depth + steps");
    const auto& y = test.values;
    const std::size_t last = y.size() - 1 - steps;  // window ends at t = d-1 .. last
    double ss = 0.0;
    for (std::size_t t = d - 1; t <= last; ++t) {
        const std::span<const double> window(y.data() + t + 1 - d, d);
        const double z = steps == 1 ? predict_one(model, window) : predict_iterated(model, window, steps).back();
        const double e = y[t + steps] - z;
        ss += e * e;
    }
    return ss / static_cast<double>(last - d + 2);
}

struct ErrorCurve {
    std::vector<std::size_t> depths;
    std::vector<double> mse;
    std::size_t steps = 1;
    std::vector<double> objective;      // training objective per depth
    std::vector<FilterModel> models;
};

/// Fits at each depth on y_train and evaluates on y_test. With `row_start` set,
/// every depth uses the same training rows.
inline ErrorCurve error_curve(const TrajectoryBuffer& y_train, const TrajectoryBuffer& y_test,
                              std::span<const std::size_t> depths, std::size_t steps,
                              std::optional<std::size_t> row_start = std::nullopt) {
    if (depths.empty()) throw InvalidArgument("error_curve: empty depth list");
    ErrorCurve out;
    out.steps = steps;
    for (std::size_t d : depths) {
        auto r = fit(y_train, d, row_start);
        out.depths.push_back(d);
        out.mse.push_back(forecast_mse(r.model, y_test, steps));
        out.objective.push_back(r.objective);
        out.models.push_back(std::move(r.model));
    }
    return out;
}

struct AutocorrReport {
    std::vector<double> a_true;
    std::vector<double> a_filter;
    std::size_t d = 0;
    std::size_t n = 0;  // ensemble size

    [[nodiscard]] std::size_t n_max() const noexcept { return a_true.empty() ? 0 : a_true.size() - 1; }
};

/// Snippet ensemble from explicit initial points: x_1 = initial, snippet x_1..x_d,
/// A(n) = mean f(x_d) f(x_{d+n}) and A_d(n) = mean z_d z_{d+n} with z the filter rollout.
inline AutocorrReport autocorr_ensemble(const SystemSpec& sys, const ObservableSpec& obs, const FilterModel& model,
                                        std::span<const State> initials, std::size_t n_max) {
    model.validate();
    validate(obs);
    if (n_max == 0) throw InvalidArgument("autocorr_protocol: n_max must be at least 1");
    if (initials.empty()) throw InvalidArgument("autocorr_protocol: empty ensemble");
    const std::size_t d = model.depth();
    AutocorrReport rep;
    rep.d = d;
    rep.n = initials.size();
    rep.a_true.assign(n_max + 1, 0.0);
    rep.a_filter.assign(n_max + 1, 0.0);
    std::vector<double> snippet(d);
    for (const auto& x1 : initials) {
        State x = x1;
        snippet[0] = evaluate(obs, x);
        for (std::size_t i = 1; i < d; ++i) {
            x = step(sys, x);
            snippet[i] = evaluate(obs, x);
        }
        const double fd = snippet[d - 1];
        const auto z = predict_iterated(model, snippet, n_max);
        rep.a_true[0] += fd * fd;
        rep.a_filter[0] += fd * fd;
        for (std::size_t n = 1; n <= n_max; ++n) {
            x = step(sys, x);
            rep.a_true[n] += fd * evaluate(obs, x);
            rep.a_filter[n] += fd * z[n - 1];
        }
    }
    const double inv = 1.0 / static_cast<double>(rep.n);
    for (std::size_t n = 0; n <= n_max; ++n) {
        rep.a_true[n] *= inv;
        rep.a_filter[n] *= inv;
    }
    return rep;
}

inline AutocorrReport autocorr_protocol(const SystemSpec& sys, const ObservableSpec& obs, const FilterModel& model,
                                        std::size_t n, std::size_t n_max, std::uint64_t seed,
                                        const LorenzSampling& lorenz = {}) {
    if (n == 0) throw InvalidArgument("autocorr_protocol: ensemble size must be positive");
    const auto initials = sample_initials(sys, n, seed, lorenz);
    return autocorr_ensemble(sys, obs, model, initials, n_max);
}

/// Birkhoff estimate A^(n) = (1/(m-n+1)) sum_{t=0}^{m-n} y_t y_{t+n} for y_0..y_m.
inline std::vector<double> autocorr_time_average(const TrajectoryBuffer& y, std::size_t n_max) {
    if (y.size() <= n_max) throw InvalidArgument("autocorr_time_average: buffer must be longer than n_max");
    const auto& v = y.values;
    std::vector<double> a(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) {
        double s = 0.0;
        const std::size_t count = v.size() - n;
        for (std::size_t t = 0; t < count; ++t) s += v[t] * v[t + n];
        a[n] = s / static_cast<double>(count);
    }
    return a;
}

struct ProjectionResiduals {
    double numerator = 0.0;    // |Pi_perp_{K_d} U f|
    double denominator = 0.0;  // |Pi_perp_{K_d^-} f|
    [[nodiscard]] double epsilon() const { return numerator / denominator; }
};

namespace detail {

// A(0) - b^T G^-1 b, clamped at zero against round-off.
inline double projection_residual_sq(std::span<const double> autocorr, std::size_t dim, std::span<const double> b) {
    const double a0 = autocorr[0];
    if (dim == 0) return a0;
    const auto gram = toeplitz_gram(autocorr, dim);
    const auto x = spd_solve(gram, b).x;
    double r = a0;
    for (std::size_t i = 0; i < dim; ++i) r -= b[i] * x[i];
    if (r < 0.0) {
        if (r < -1e-12 * std::max(1.0, a0))
            throw NumericalDegeneracy("pseudospec_epsilon: projection residual is negative beyond round-off");
        r = 0.0;
    }
    return r;
}

}  // namespace detail

inline ProjectionResiduals projection_residuals(const GramSummary& g, std::size_t d) {
    if (d == 0) throw InvalidArgument("pseudospec_epsilon: depth must be at least 1");
    if (g.autocorr.size() < d + 1) throw InvalidArgument("pseudospec_epsilon: need autocorrelations A(0..d)");
    if (!(g.autocorr[0] > 0.0)) throw InvalidArgument("pseudospec_epsilon: A(0) must be positive");
    const std::span<const double> a(g.autocorr);
    const double num2 = detail::projection_residual_sq(a, d, a.subspan(1, d));
    const double den2 = detail::projection_residual_sq(a, d - 1, a.subspan(1, d - 1));
    if (den2 <= 1e-12 * a[0])
        throw NumericalDegeneracy("pseudospec_epsilon: f lies in the span of its past delays (degenerate basis)");
    return {std::sqrt(num2), std::sqrt(den2)};
}

inline double pseudospec_epsilon(const GramSummary& g, std::size_t d) { return projection_residuals(g, d).epsilon(); }

struct PseudospectrumReport {
    double epsilon = 0.0;
    std::vector<Complex> eigenvalues;
    std::vector<double> residuals;  // |U phi - lambda phi| for unit phi
    bool holds = true;
};

/// Exact check of |U phi - lambda phi| <= epsilon for every eigenpair of the
/// compressed operator on a permutation oracle.
inline PseudospectrumReport verify_pseudospectrum(const FiniteSystem& sys, std::span<const double> f, std::size_t d) {
    const std::size_t n = sys.size();
    if (d == 0 || d > n) throw InvalidArgument("verify_pseudospectrum: need 1 <= d <= N");
    const auto g = exact_autocorr(sys, f, d);
    PseudospectrumReport rep;
    rep.epsilon = pseudospec_epsilon(g, d);
    const auto model = fit_from_gram(g, d);

    // basis[j] = f o T^-j
    std::vector<std::vector<double>> basis;
    basis.emplace_back(f.begin(), f.end());
    for (std::size_t j = 1; j < d; ++j) basis.push_back(sys.apply_inverse(std::span<const double>(basis.back())));

    const auto spec = spectrum(model);
    std::vector<Complex> phi(n), uphi(n);
    for (const Complex lambda : spec.values) {
        const auto v = companion_eigenvector(model.coeffs, lambda);
        std::fill(phi.begin(), phi.end(), Complex{});
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t i = 0; i < n; ++i) phi[i] += v[j] * basis[j][i];
        const double norm = uniform_norm(phi);
        for (std::size_t i = 0; i < n; ++i) uphi[i] = phi[sys.perm()[i]] - lambda * phi[i];
        const double r = uniform_norm(uphi) / norm;
        rep.eigenvalues.push_back(lambda);
        rep.residuals.push_back(r);
        if (r > rep.epsilon + 1e-8) rep.holds = false;
    }
    return rep;
}

struct AutocorrBoundCheck {
    std::vector<double> deviation;  // |A(n) - A_d(n)|
    std::vector<double> bound;
    std::vector<bool> pass;

    [[nodiscard]] bool all() const { return std::all_of(pass.begin(), pass.end(), [](bool b) { return b; }); }
};

/// Three-branch bound |A(n) - A_d(n)| <= 0 (n <= d), |U_d f - U f| |f| (n = d+1),
/// (n-d) eps |f|^2 (n >= d+2). Empirical sources get slack 3 A(0)/sqrt(N).
inline AutocorrBoundCheck autocorr_bound_check(const AutocorrReport& report, const GramSummary& g, double fnorm,
                                               double abs_tol = 1e-10) {
    const std::size_t d = report.d;
    AutocorrBoundCheck out;
    double numerator = std::numeric_limits<double>::infinity();
    double eps = std::numeric_limits<double>::infinity();
    try {
        const auto r = projection_residuals(g, d);
        numerator = r.numerator;
        eps = r.epsilon();
    } catch (const NumericalDegeneracy&) {
    }
    double slack = abs_tol;
    if (g.source != GramSource::exact_oracle && !g.autocorr.empty() && report.n > 0)
        slack += 3.0 * g.autocorr[0] / std::sqrt(static_cast<double>(report.n));
    for (std::size_t n = 0; n < report.a_true.size(); ++n) {
        double b = 0.0;
        if (n == d + 1) b = numerator * fnorm;
        else if (n >= d + 2) b = static_cast<double>(n - d) * eps * fnorm * fnorm;
        const double dev = std::abs(report.a_true[n] - report.a_filter[n]);
        out.deviation.push_back(dev);
        out.bound.push_back(b);
        out.pass.push_back(dev <= b + slack);
    }
    return out;
}

struct StabilityProbe {
    std::vector<std::size_t> lengths;  // prefix lengths, increasing
    std::vector<double> distances;     // |c(lengths[k+1]) - c(lengths[k])|
    bool degenerate = false;
};

/// Fits on prefixes L/2^k, ..., L/2, L and reports successive coefficient distances.
inline StabilityProbe filter_stability_probe(const TrajectoryBuffer& y, std::size_t d) {
    if (d == 0) throw InvalidArgument("filter_stability_probe: depth must be at least 1");
    if (y.size() < 4 * d) throw InvalidArgument("filter_stability_probe: buffer shorter than 4d");
    StabilityProbe out;
    for (std::size_t len = y.size(); len >= 2 * d && len >= d + 2; len /= 2) out.lengths.push_back(len);
    std::reverse(out.lengths.begin(), out.lengths.end());
    std::vector<double> prev;
    for (std::size_t len : out.lengths) {
        const auto prefix = TrajectoryBuffer::from_values({y.values.begin(), y.values.begin() + static_cast<std::ptrdiff_t>(len)});
        auto r = fit(prefix, d);
        out.degenerate = out.degenerate || r.model.degenerate_fit;
        if (!prev.empty()) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += (r.model.coeffs[j] - prev[j]) * (r.model.coeffs[j] - prev[j]);
            out.distances.push_back(std::sqrt(s));
        }
        prev = std::move(r.model.coeffs);
    }
    return out;
}

}  // namespace wiener
