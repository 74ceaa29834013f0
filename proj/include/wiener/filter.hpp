#pragma once

// Least-squares linear (Wiener) filter, a.k.a. Hankel DMD.
//
// Coefficient convention: the stored vector c predicts
//     y_{t+1} = sum_{j=0}^{d-1} c_j y_{t-j},
// so c_j weights the observation j steps in the past. A forward-indexed
// vector c~ (c~_i weights y_{t-d+1+i}) relates by c_j = c~_{d-1-j}. This is the
// convention of the companion matrix, whose first column is c.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wiener/errors.hpp"
#include "wiener/numerics.hpp"
#include "wiener/observables.hpp"

namespace wiener {

struct FilterModel {
    std::vector<double> coeffs;
    bool degenerate_fit = false;
    std::string provenance;

    [[nodiscard]] std::size_t depth() const noexcept { return coeffs.size(); }

    void validate() const {
        if (coeffs.empty()) throw InvalidArgument("FilterModel: depth must be at least 1");
        if (!all_finite(coeffs)) throw InvalidArgument("FilterModel: non-finite coefficients");
    }
};

enum class GramSource { empirical_time_average, snippet_ensemble, exact_oracle };

/// Autocorrelations A(0..n_max), A(n) = <U^n f, f>.
struct GramSummary {
    std::vector<double> autocorr;
    GramSource source = GramSource::empirical_time_average;
    std::size_t sample_size = 0;

    [[nodiscard]] std::size_t max_lag() const noexcept { return autocorr.empty() ? 0 : autocorr.size() - 1; }
};

/// Toeplitz Gram matrix G_ij = A(|i-j|), i, j < d.
inline RealMatrix toeplitz_gram(std::span<const double> autocorr, std::size_t d) {
    if (autocorr.size() < d) throw InvalidArgument("toeplitz_gram: not enough lags");
    RealMatrix g(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) g(i, j) = autocorr[i > j ? i - j : j - i];
    return g;
}

struct HankelSystem {
    RealMatrix matrix;        // row for time t: (y_t, y_{t-1}, ..., y_{t-d+1})
    std::vector<double> rhs;  // y_{t+1}
    std::size_t first_row = 0;
};

/// Rows t = max(d-1, row_start) .. m-1 of the delay system for y_0..y_m.
inline HankelSystem build_hankel(const TrajectoryBuffer& y, std::size_t d,
                                 std::optional<std::size_t> row_start = std::nullopt) {
    if (d == 0) throw InvalidArgument("build_hankel: depth must be at least 1");
    if (y.size() < d + 1) throw InvalidArgument("build_hankel: trajectory too short for the delay depth");
    if (!all_finite(y.values)) throw InvalidArgument("build_hankel: non-finite observations");
    const std::size_t m = y.size() - 1;
    std::size_t first = d - 1;
    if (row_start) {
        if (*row_start < d - 1) throw InvalidArgument("build_hankel: row_start must be at least d-1");
        first = *row_start;
    }
    if (first > m - 1) throw InvalidArgument("build_hankel: no rows left after windowing");
    const std::size_t rows = m - first;
    HankelSystem h{RealMatrix(rows, d), std::vector<double>(rows), first};
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = first + r;
        for (std::size_t j = 0; j < d; ++j) h.matrix(r, j) = y.values[t - j];
        h.rhs[r] = y.values[t + 1];
    }
    return h;
}

enum class FitMethod { qr, normal_equations };

struct FitResult {
    FilterModel model;
    double objective = 0.0;      // mean squared one-step residual over the training rows
    double last_residual = 0.0;  // y_m - prediction from the final training window
    std::size_t rows = 0;
};

inline FitResult fit(const TrajectoryBuffer& y, std::size_t d, std::optional<std::size_t> row_start = std::nullopt,
                     FitMethod method = FitMethod::qr) {
    const auto h = build_hankel(y, d, row_start);
    FitResult out;
    out.rows = h.rhs.size();
    if (method == FitMethod::qr) {
        auto sol = least_squares_solve(h.matrix, h.rhs);
        out.model.coeffs = std::move(sol.x);
        out.model.degenerate_fit = sol.degenerate;
    } else {
        RealMatrix g(d, d);
        std::vector<double> b(d, 0.0);
        for (std::size_t r = 0; r < out.rows; ++r) {
            auto row = h.matrix.row(r);
            for (std::size_t i = 0; i < d; ++i) {
                b[i] += row[i] * h.rhs[r];
                for (std::size_t j = i; j < d; ++j) g(i, j) += row[i] * row[j];
            }
        }
        const double inv = 1.0 / static_cast<double>(out.rows);
        for (std::size_t i = 0; i < d; ++i) {
            b[i] *= inv;
            for (std::size_t j = i; j < d; ++j) g(j, i) = g(i, j) = g(i, j) * inv;
        }
        auto sol = spd_solve(g, b);
        out.model.coeffs = std::move(sol.x);
        out.model.degenerate_fit = sol.jittered;
    }
    const auto pred = matvec(h.matrix, std::span<const double>(out.model.coeffs));
    double ss = 0.0;
    for (std::size_t r = 0; r < out.rows; ++r) {
        const double e = h.rhs[r] - pred[r];
        ss += e * e;
    }
    out.objective = ss / static_cast<double>(out.rows);
    out.last_residual = h.rhs.back() - pred.back();
    out.model.provenance = y.provenance.system + "|" + y.provenance.observable + "|" +
                           std::to_string(y.provenance.seed) + "|" + std::to_string(y.provenance.length);
    return out;
}

/// Solves the Toeplitz normal equations G c = b, b_i = A(i+1).
inline FilterModel fit_from_gram(const GramSummary& g, std::size_t d) {
    if (d == 0) throw InvalidArgument("fit_from_gram: depth must be at least 1");
    if (g.autocorr.size() < d + 1) throw InvalidArgument("fit_from_gram: need autocorrelations A(0..d)");
    const auto gram = toeplitz_gram(g.autocorr, d);
    const std::span<const double> b(g.autocorr.data() + 1, d);
    auto sol = spd_solve(gram, b);
    FilterModel m;
    m.coeffs = std::move(sol.x);
    m.degenerate_fit = sol.jittered;
    m.provenance = "gram";
    return m;
}

/// sum_j c_j window[d-1-j]; the window is stored oldest first.
inline double predict_one(const FilterModel& model, std::span<const double> window) {
    const std::size_t d = model.depth();
    if (window.size() != d) throw InvalidArgument("predict_one: window length must equal the delay depth");
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += model.coeffs[j] * window[d - 1 - j];
    return s;
}

/// Autoregressive rollout; returns the `steps` generated values.
inline std::vector<double> predict_iterated(const FilterModel& model, std::span<const double> seed_window,
                                            std::size_t steps) {
    const std::size_t d = model.depth();
    if (seed_window.size() != d) throw InvalidArgument("predict_iterated: seed length must equal the delay depth");
    // Ring buffer; head is the slot of the newest value.
    std::vector<double> ring(seed_window.begin(), seed_window.end());
    std::size_t head = d - 1;
    std::vector<double> out;
    out.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        double z = 0.0;
        std::size_t idx = head;
        for (std::size_t j = 0; j < d; ++j) {
            z += model.coeffs[j] * ring[idx];
            idx = idx == 0 ? d - 1 : idx - 1;
        }
        head = head + 1 == d ? 0 : head + 1;
        ring[head] = z;
        out.push_back(z);
    }
    return out;
}

/// Matrix of the compressed Koopman operator in the delay basis
/// (f, f o T^-1, ..., f o T^-(d-1)): first column c, ones on the first superdiagonal.
inline RealMatrix companion(const FilterModel& model) {
    model.validate();
    const std::size_t d = model.depth();
    RealMatrix u(d, d);
    for (std::size_t i = 0; i < d; ++i) u(i, 0) = model.coeffs[i];
    for (std::size_t i = 1; i < d; ++i) u(i - 1, i) = 1.0;
    return u;
}

inline ComplexSpectrum spectrum(const FilterModel& model) {
    model.validate();
    return companion_eigenvalues(model.coeffs);
}

/// Eigenvector of the companion matrix for eigenvalue lambda, in delay-basis
/// coordinates, normalized so the first entry is 1.
inline std::vector<Complex> companion_eigenvector(std::span<const double> c, Complex lambda) {
    const std::size_t d = c.size();
    std::vector<Complex> v(d);
    v[0] = 1.0;
    if (std::abs(lambda) <= 1.0 || d == 1) {
        for (std::size_t i = 0; i + 1 < d; ++i) v[i + 1] = lambda * v[i] - c[i];
    } else {
        // Backward recursion v_i = (c_i + v_{i+1}) / lambda, then rescale to v_0 = 1.
        std::vector<Complex> w(d);
        w[d - 1] = c[d - 1] / lambda;
        for (std::size_t i = d - 1; i-- > 0;) w[i] = (c[i] + w[i + 1]) / lambda;
        for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / w[0];
    }
    return v;
}

}  // namespace wiener
