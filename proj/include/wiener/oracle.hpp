#pragma once

// Exact finite-state measure-preserving systems: a permutation of N atoms
// with uniform weights 1/N. Koopman matrix, autocorrelations, cyclicity,
// trace measure and the Vandermonde weak-predictiveness certificate are all
// computed exactly (up to rounding), so this is the ground truth for the
// property tests of the filter and the diagnostics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wiener/dynamics.hpp"
#include "wiener/errors.hpp"
#include "wiener/filter.hpp"
#include "wiener/numerics.hpp"
#include "wiener/random.hpp"

namespace wiener {

class FiniteSystem {
public:
    explicit FiniteSystem(std::vector<std::size_t> perm) : perm_(std::move(perm)) {
        if (perm_.empty()) throw InvalidArgument("FiniteSystem: needs at least one atom");
        if (!detail::is_bijection(perm_)) throw InvalidArgument("FiniteSystem: perm is not a bijection");
        inverse_.resize(perm_.size());
        for (std::size_t i = 0; i < perm_.size(); ++i) inverse_[perm_[i]] = i;
    }

    /// Shift i -> i + r mod n.
    static FiniteSystem shift(std::size_t n, std::size_t r = 1) { return FiniteSystem(cyclic_shift(n, r).perm); }

    [[nodiscard]] std::size_t size() const noexcept { return perm_.size(); }
    [[nodiscard]] const std::vector<std::size_t>& perm() const noexcept { return perm_; }
    [[nodiscard]] const std::vector<std::size_t>& inverse() const noexcept { return inverse_; }
    [[nodiscard]] SystemSpec as_system() const { return FinitePermutation{perm_}; }

    /// (U g)(i) = g(perm(i)).
    template <typename T>
    [[nodiscard]] std::vector<T> apply(std::span<const T> g) const {
        std::vector<T> out(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[perm_[i]];
        return out;
    }

    /// (U^-1 g)(i) = g(perm^-1(i)).
    template <typename T>
    [[nodiscard]] std::vector<T> apply_inverse(std::span<const T> g) const {
        std::vector<T> out(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[inverse_[i]];
        return out;
    }

private:
    std::vector<std::size_t> perm_;
    std::vector<std::size_t> inverse_;
};

/// <g, h> = (1/N) sum_i g(i) conj(h(i)).
inline double uniform_inner(std::span<const double> g, std::span<const double> h) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * h[i];
    return s / static_cast<double>(g.size());
}

inline double uniform_norm(std::span<const Complex> g) {
    double s = 0.0;
    for (const auto& v : g) s += std::norm(v);
    return std::sqrt(s / static_cast<double>(g.size()));
}

inline void require_atom_vector(const FiniteSystem& sys, std::span<const double> f, const char* what) {
    if (f.size() != sys.size()) throw InvalidArgument(std::string(what) + ": observable length must equal atom count");
    if (!all_finite(f)) throw InvalidArgument(std::string(what) + ": non-finite observable");
}

/// Permutation matrix with entry (i, perm(i)) = 1, so (U f)(i) = f(perm(i)).
inline RealMatrix koopman_matrix(const FiniteSystem& sys) {
    const std::size_t n = sys.size();
    RealMatrix u(n, n);
    for (std::size_t i = 0; i < n; ++i) u(i, sys.perm()[i]) = 1.0;
    return u;
}

/// A(n) = (1/N) sum_i f(perm^n(i)) f(i), n = 0..n_max.
inline GramSummary exact_autocorr(const FiniteSystem& sys, std::span<const double> f, std::size_t n_max) {
    require_atom_vector(sys, f, "exact_autocorr");
    GramSummary g;
    g.source = GramSource::exact_oracle;
    g.sample_size = sys.size();
    g.autocorr.reserve(n_max + 1);
    std::vector<double> shifted(f.begin(), f.end());
    for (std::size_t n = 0; n <= n_max; ++n) {
        g.autocorr.push_back(uniform_inner(shifted, f));
        shifted = sys.apply(std::span<const double>(shifted));
    }
    return g;
}

/// Rank test of the Krylov matrix [f, Uf, ..., U^(N-1) f] with pivoted QR at
/// relative threshold 1e-10.
inline bool is_cyclic(const FiniteSystem& sys, std::span<const double> f) {
    require_atom_vector(sys, f, "is_cyclic");
    const std::size_t n = sys.size();
    RealMatrix krylov(n, n);
    std::vector<double> col(f.begin(), f.end());
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) krylov(i, k) = col[i];
        col = sys.apply(std::span<const double>(col));
    }
    const PivotedQr qr(krylov);
    if (qr.max_column_norm() == 0.0) return false;
    return qr.rank(1e-10 * qr.max_column_norm()) == n;
}

namespace detail {

inline bool dft_all_nonzero(std::span<const double> f) {
    const auto spec = dft(f);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& c : spec) {
        lo = std::min(lo, std::abs(c));
        hi = std::max(hi, std::abs(c));
    }
    return hi > 0.0 && lo > 1e-10 * hi;
}

}  // namespace detail

/// f is cyclic for the shift by r on Z_N iff every DFT coefficient of f is nonzero.
inline bool dft_cyclicity(std::size_t n, std::size_t r, std::span<const double> f) {
    if (n == 0 || f.size() != n) throw InvalidArgument("dft_cyclicity: observable length must equal N");
    if (std::gcd(r, n) != 1) throw InvalidArgument("dft_cyclicity: r must be coprime to N (shift not ergodic)");
    return detail::dft_all_nonzero(f);
}

/// Fraction of lambda ~ U[-1, 1] for which f + lambda p is cyclic on the shift by r.
inline double prevalence_probe(std::size_t n, std::size_t r, std::span<const double> f, std::span<const double> p,
                               std::size_t trials, std::uint64_t seed) {
    if (trials == 0) throw InvalidArgument("prevalence_probe: trials must be positive");
    if (std::gcd(r, n) != 1) throw InvalidArgument("prevalence_probe: r must be coprime to N");
    if (f.size() != n || p.size() != n) throw InvalidArgument("prevalence_probe: vectors must have length N");
    if (!detail::dft_all_nonzero(p)) throw InvalidArgument("prevalence_probe: probe needs all DFT coefficients nonzero");
    const auto sys = FiniteSystem::shift(n, r);
    Rng rng(seed);
    std::size_t hits = 0;
    std::vector<double> g(n);
    for (std::size_t t = 0; t < trials; ++t) {
        const double lambda = rng.uniform(-1.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) g[i] = f[i] + lambda * p[i];
        if (is_cyclic(sys, g)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

struct TraceAtom {
    Complex lambda;
    double weight = 0.0;
};

/// Spectral measure nu = sum_i w_i delta_{lambda_i} of U with respect to f.
struct TraceMeasure {
    std::vector<TraceAtom> atoms;

    [[nodiscard]] double total_weight() const noexcept {
        double s = 0.0;
        for (const auto& a : atoms) s += a.weight;
        return s;
    }

    /// int lambda^n d nu = <U^n f, f>.
    [[nodiscard]] Complex moment(long n) const {
        Complex s = 0.0;
        for (const auto& a : atoms) s += a.weight * std::pow(a.lambda, static_cast<double>(n));
        return s;
    }
};

/// Exact diagonalization through the cycle decomposition: a cycle of length L
/// contributes eigenvalues exp(2 pi i j / L) with eigenvectors given by the DFT
/// along the cycle. Coincident eigenvalues (equal reduced fractions j/L) merge.
inline TraceMeasure trace_measure(const FiniteSystem& sys, std::span<const double> f) {
    require_atom_vector(sys, f, "trace_measure");
    const std::size_t n = sys.size();
    std::map<std::pair<std::size_t, std::size_t>, double> merged;  // (j/g, L/g) -> weight
    std::vector<bool> seen(n, false);
    for (std::size_t start = 0; start < n; ++start) {
        if (seen[start]) continue;
        std::vector<double> along;
        for (std::size_t a = start; !seen[a]; a = sys.perm()[a]) {
            seen[a] = true;
            along.push_back(f[a]);
        }
        const std::size_t len = along.size();
        const auto coeffs = dft(std::span<const double>(along));
        for (std::size_t j = 0; j < len; ++j) {
            const double w = std::norm(coeffs[j]) / (static_cast<double>(n) * static_cast<double>(len));
            const std::size_t g = std::gcd(j, len);
            merged[{j / g, len / g}] += w;
        }
    }
    TraceMeasure nu;
    for (const auto& [key, w] : merged) {
        if (w < 1e-14) continue;
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(key.first) / static_cast<double>(key.second);
        nu.atoms.push_back({std::polar(1.0, angle), w});
    }
    return nu;
}

inline Complex evaluate_polynomial(std::span<const Complex> ascending, Complex z) {
    Complex s = 0.0;
    for (std::size_t i = ascending.size(); i-- > 0;) s = s * z + ascending[i];
    return s;
}

/// Coefficients (ascending) of the degree k-1 polynomial with p(lambda_i) = 1/lambda_i
/// on the k atoms of nu.
inline std::vector<Complex> weak_pred_vandermonde(const TraceMeasure& nu) {
    const std::size_t k = nu.atoms.size();
    if (k == 0) throw InvalidArgument("weak_pred_vandermonde: measure has no atoms");
    if (k > 64) throw InvalidArgument("weak_pred_vandermonde: too many atoms for a stable Vandermonde solve");
    for (std::size_t i = 0; i < k; ++i) {
        if (std::abs(nu.atoms[i].lambda) == 0.0) throw InvalidArgument("weak_pred_vandermonde: zero atom");
        for (std::size_t j = i + 1; j < k; ++j)
            if (std::abs(nu.atoms[i].lambda - nu.atoms[j].lambda) <= 1e-8)
                throw InvalidArgument("weak_pred_vandermonde: coincident atoms");
    }
    ComplexMatrix v(k, k);
    std::vector<Complex> rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
        Complex pw = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            v(i, j) = pw;
            pw *= nu.atoms[i].lambda;
        }
        rhs[i] = 1.0 / nu.atoms[i].lambda;
    }
    return lu_solve(std::move(v), std::move(rhs));
}

enum class SzegoVerdict { holds, fails, inconclusive };

inline const char* to_string(SzegoVerdict v) {
    switch (v) {
        case SzegoVerdict::holds: return "szego-holds";
        case SzegoVerdict::fails: return "szego-fails";
        default: return "inconclusive";
    }
}

struct SzegoResult {
    double value = 0.0;
    SzegoVerdict verdict = SzegoVerdict::inconclusive;
};

/// Periodic trapezoid rule for int_0^{2 pi} log(max(w, floor)) d theta, plus a
/// heuristic verdict: holds if w vanishes on a cyclic arc of at least two grid
/// samples, fails if w >= floor everywhere, inconclusive otherwise.
inline SzegoResult szego_log_integral(std::span<const double> w, double floor) {
    if (w.size() < 8) throw InvalidArgument("szego_log_integral: need at least 8 grid samples");
    if (!(floor > 0.0)) throw InvalidArgument("szego_log_integral: floor must be positive");
    for (double x : w)
        if (!(x >= 0.0)) throw InvalidArgument("szego_log_integral: density samples must be nonnegative");
    const std::size_t m = w.size();
    double s = 0.0;
    double lo = w[0];
    for (double x : w) {
        s += std::log(std::max(x, floor));
        lo = std::min(lo, x);
    }
    SzegoResult out;
    out.value = 2.0 * std::numbers::pi / static_cast<double>(m) * s;

    std::size_t run = 0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < 2 * m && best < m; ++i) {
        run = w[i % m] == 0.0 ? run + 1 : 0;
        best = std::max(best, std::min(run, m));
    }
    if (best >= 2) out.verdict = SzegoVerdict::holds;
    else if (lo >= floor) out.verdict = SzegoVerdict::fails;
    else out.verdict = SzegoVerdict::inconclusive;
    return out;
}

}  // namespace wiener
