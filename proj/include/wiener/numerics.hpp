#pragma once

// Dense linear algebra kernel: pivoted QR least squares, SPD solves with
// jitter fallback, companion-polynomial roots and a direct DFT.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "wiener/errors.hpp"

namespace wiener {

using Complex = std::complex<double>;

/// Row-major dense matrix of real or complex scalars.
template <typename T>
class DenseMatrix {
public:
    using value_type = T;

    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }

    T& operator()(std::size_t i, std::size_t j) noexcept { return entries_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * cols_ + j]; }

    [[nodiscard]] std::span<T> row(std::size_t i) noexcept { return {entries_.data() + i * cols_, cols_}; }
    [[nodiscard]] std::span<const T> row(std::size_t i) const noexcept {
        return {entries_.data() + i * cols_, cols_};
    }
    [[nodiscard]] std::span<const T> entries() const noexcept { return entries_; }

    [[nodiscard]] bool all_finite() const noexcept {
        return std::all_of(entries_.begin(), entries_.end(), [](const T& v) {
            if constexpr (std::is_same_v<T, Complex>) {
                return std::isfinite(v.real()) && std::isfinite(v.imag());
            } else {
                return std::isfinite(v);
            }
        });
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> entries_;
};

using RealMatrix = DenseMatrix<double>;
using ComplexMatrix = DenseMatrix<Complex>;

template <typename T, typename V>
std::vector<V> matvec(const DenseMatrix<T>& a, std::span<const V> x) {
    std::vector<V> out(a.rows(), V{});
    for (std::size_t i = 0; i < a.rows(); ++i) {
        V s{};
        auto r = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) s += r[j] * x[j];
        out[i] = s;
    }
    return out;
}

inline bool all_finite(std::span<const double> v) noexcept {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline double norm2(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Householder QR with column pivoting (Businger-Golub), column-major storage.

class PivotedQr {
public:
    explicit PivotedQr(const RealMatrix& a) : m_(a.rows()), n_(a.cols()), qr_(m_ * n_), tau_(), perm_(n_) {
        for (std::size_t i = 0; i < m_; ++i) {
            auto r = a.row(i);
            for (std::size_t j = 0; j < n_; ++j) qr_[j * m_ + i] = r[j];
        }
        factor();
    }

    [[nodiscard]] std::size_t rows() const noexcept { return m_; }
    [[nodiscard]] std::size_t cols() const noexcept { return n_; }
    [[nodiscard]] std::size_t steps() const noexcept { return tau_.size(); }
    [[nodiscard]] double max_column_norm() const noexcept { return max_col_norm_; }
    [[nodiscard]] const std::vector<std::size_t>& permutation() const noexcept { return perm_; }

    /// Entry (i, j) of R, i <= j, in permuted column order.
    [[nodiscard]] double r(std::size_t i, std::size_t j) const noexcept { return qr_[j * m_ + i]; }

    /// y <- Q^T y.
    void apply_qt(std::span<double> y) const noexcept {
        for (std::size_t k = 0; k < tau_.size(); ++k) {
            if (tau_[k] == 0.0) continue;
            const double* v = &qr_[k * m_];
            double s = y[k];
            for (std::size_t i = k + 1; i < m_; ++i) s += v[i] * y[i];
            s *= tau_[k];
            y[k] -= s;
            for (std::size_t i = k + 1; i < m_; ++i) y[i] -= s * v[i];
        }
    }

    /// Number of diagonal entries with |R_kk| > threshold.
    [[nodiscard]] std::size_t rank(double threshold) const noexcept {
        std::size_t k = 0;
        while (k < tau_.size() && std::abs(r(k, k)) > threshold) ++k;
        return k;
    }

private:
    void factor() {
        const std::size_t steps = std::min(m_, n_);
        tau_.assign(steps, 0.0);
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
        std::vector<double> norms(n_), ref(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            norms[j] = column_norm(j, 0);
            ref[j] = norms[j];
            max_col_norm_ = std::max(max_col_norm_, norms[j]);
        }
        for (std::size_t k = 0; k < steps; ++k) {
            const auto best = static_cast<std::size_t>(
                std::max_element(norms.begin() + static_cast<std::ptrdiff_t>(k), norms.end()) - norms.begin());
            if (best != k) {
                std::swap_ranges(qr_.begin() + static_cast<std::ptrdiff_t>(k * m_),
                                 qr_.begin() + static_cast<std::ptrdiff_t>((k + 1) * m_),
                                 qr_.begin() + static_cast<std::ptrdiff_t>(best * m_));
                std::swap(norms[k], norms[best]);
                std::swap(ref[k], ref[best]);
                std::swap(perm_[k], perm_[best]);
            }
            double* col = &qr_[k * m_];
            const double alpha = col[k];
            double xnorm2 = 0.0;
            for (std::size_t i = k + 1; i < m_; ++i) xnorm2 += col[i] * col[i];
            if (xnorm2 == 0.0) {
                tau_[k] = 0.0;
            } else {
                const double nrm = std::hypot(alpha, std::sqrt(xnorm2));
                const double beta = alpha >= 0.0 ? -nrm : nrm;
                tau_[k] = (beta - alpha) / beta;
                const double scale = 1.0 / (alpha - beta);
                for (std::size_t i = k + 1; i < m_; ++i) col[i] *= scale;
                col[k] = beta;
                for (std::size_t j = k + 1; j < n_; ++j) {
                    double* cj = &qr_[j * m_];
                    double s = cj[k];
                    for (std::size_t i = k + 1; i < m_; ++i) s += col[i] * cj[i];
                    s *= tau_[k];
                    cj[k] -= s;
                    for (std::size_t i = k + 1; i < m_; ++i) cj[i] -= s * col[i];
                }
            }
            // Downdate the trailing column norms; recompute on cancellation.
            for (std::size_t j = k + 1; j < n_; ++j) {
                if (norms[j] == 0.0) continue;
                const double ratio = qr_[j * m_ + k] / norms[j];
                const double t = std::max(0.0, 1.0 - ratio * ratio);
                const double rel = norms[j] / ref[j];
                if (t * rel * rel <= 1e-8) {
                    norms[j] = column_norm(j, k + 1);
                    ref[j] = norms[j];
                } else {
                    norms[j] *= std::sqrt(t);
                }
            }
        }
    }

    [[nodiscard]] double column_norm(std::size_t j, std::size_t from) const noexcept {
        double s = 0.0;
        for (std::size_t i = from; i < m_; ++i) s += qr_[j * m_ + i] * qr_[j * m_ + i];
        return std::sqrt(s);
    }

    std::size_t m_;
    std::size_t n_;
    std::vector<double> qr_;
    std::vector<double> tau_;
    std::vector<std::size_t> perm_;
    double max_col_norm_ = 0.0;
};

namespace detail {

// Solves R z = rhs for the leading n x n upper triangle of a full-rank QR.
inline std::vector<double> back_substitute(const PivotedQr& qr, std::span<const double> rhs) {
    const std::size_t n = qr.cols();
    std::vector<double> z(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = rhs[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= qr.r(ii, j) * z[j];
        z[ii] = s / qr.r(ii, ii);
    }
    std::vector<double> x(n);
    const auto& perm = qr.permutation();
    for (std::size_t j = 0; j < n; ++j) x[perm[j]] = z[j];
    return x;
}

}  // namespace detail

struct LeastSquaresSolution {
    std::vector<double> x;
    bool degenerate = false;  // rank deficient at the ridge tolerance
    std::size_t rank = 0;
    double ridge = 0.0;       // Tikhonov parameter actually applied (0 when full rank)
};

/// Minimizes ||A x - y||_2. When A is rank deficient at
/// tau = 1e-12 * (largest column norm)^2 (i.e. some |R_kk|^2 <= tau), returns
/// the minimizer of ||A x - y||^2 + tau ||x||^2 instead and flags it.
inline LeastSquaresSolution least_squares_solve(const RealMatrix& a, std::span<const double> y) {
    if (a.rows() == 0 || a.cols() == 0) throw InvalidArgument("least_squares_solve: empty matrix");
    if (y.size() != a.rows()) throw InvalidArgument("least_squares_solve: rhs length does not match rows");
    if (!a.all_finite() || !all_finite(y)) throw InvalidArgument("least_squares_solve: non-finite input");

    const PivotedQr qr(a);
    std::vector<double> qty(y.begin(), y.end());
    qr.apply_qt(qty);

    const std::size_t n = a.cols();
    const double tau = 1e-12 * qr.max_column_norm() * qr.max_column_norm();
    LeastSquaresSolution out;
    out.rank = qr.rank(std::sqrt(tau));
    if (out.rank == n) {
        out.x = detail::back_substitute(qr, qty);
        return out;
    }

    out.degenerate = true;
    out.ridge = tau;
    if (tau == 0.0) {  // A == 0
        out.x.assign(n, 0.0);
        return out;
    }
    // min ||R z - Q^T y||^2 + tau ||z||^2 through the stacked system [R; sqrt(tau) I].
    const std::size_t k = qr.steps();
    RealMatrix stacked(k + n, n);
    std::vector<double> rhs(k + n, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < n; ++j) stacked(i, j) = qr.r(i, j);
        rhs[i] = qty[i];
    }
    const double s = std::sqrt(tau);
    for (std::size_t j = 0; j < n; ++j) stacked(k + j, j) = s;
    const PivotedQr ridge_qr(stacked);
    ridge_qr.apply_qt(rhs);
    const auto z = detail::back_substitute(ridge_qr, rhs);
    out.x.assign(n, 0.0);
    const auto& perm = qr.permutation();
    for (std::size_t j = 0; j < n; ++j) out.x[perm[j]] = z[j];
    return out;
}

// ---------------------------------------------------------------------------
// Symmetric positive-definite solves.

struct SpdSolution {
    std::vector<double> x;
    bool jittered = false;
    double jitter = 0.0;
};

namespace detail {

inline bool cholesky_in_place(RealMatrix& l) {
    const std::size_t n = l.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(l(i, i)));
    // Pivots below this are round-off of a singular matrix, not information.
    const double floor = std::max(static_cast<double>(n) * std::numeric_limits<double>::epsilon(), 1e-12) * max_diag;
    for (std::size_t j = 0; j < n; ++j) {
        double d = l(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > floor)) return false;
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = l(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return true;
}

inline std::vector<double> cholesky_solve(const RealMatrix& l, std::span<const double> b) {
    const std::size_t n = l.rows();
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) x[i] -= l(i, k) * x[k];
        x[i] /= l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) x[i] -= l(k, i) * x[k];
        x[i] /= l(i, i);
    }
    return x;
}

}  // namespace detail

/// Solves G x = b by Cholesky. On factorization failure retries with diagonal
/// jitter 1e-12 * trace(G) / n, escalated at most three times by x100.
inline SpdSolution spd_solve(const RealMatrix& g, std::span<const double> b) {
    const std::size_t n = g.rows();
    if (n == 0 || g.cols() != n) throw InvalidArgument("spd_solve: matrix must be square and nonempty");
    if (b.size() != n) throw InvalidArgument("spd_solve: rhs length does not match");
    if (!g.all_finite() || !all_finite(b)) throw InvalidArgument("spd_solve: non-finite input");
    double max_abs = 0.0;
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        trace += g(i, i);
        for (std::size_t j = 0; j < n; ++j) max_abs = std::max(max_abs, std::abs(g(i, j)));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(g(i, j) - g(j, i)) > 1e-12 * max_abs)
                throw InvalidArgument("spd_solve: matrix is not symmetric");

    RealMatrix l = g;
    if (detail::cholesky_in_place(l)) return {detail::cholesky_solve(l, b), false, 0.0};

    double jitter = 1e-12 * std::abs(trace) / static_cast<double>(n);
    if (jitter == 0.0) jitter = 1e-12;
    for (int attempt = 0; attempt < 4; ++attempt, jitter *= 100.0) {
        l = g;
        for (std::size_t i = 0; i < n; ++i) l(i, i) += jitter;
        if (detail::cholesky_in_place(l)) return {detail::cholesky_solve(l, b), true, jitter};
    }
    throw NumericalDegeneracy("spd_solve: factorization failed after jitter escalation");
}

/// Gaussian elimination with partial pivoting for small complex systems.
inline std::vector<Complex> lu_solve(ComplexMatrix a, std::vector<Complex> b) {
    const std::size_t n = a.rows();
    if (n == 0 || a.cols() != n || b.size() != n) throw InvalidArgument("lu_solve: bad dimensions");
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
        if (a(p, k) == Complex{}) throw NumericalDegeneracy("lu_solve: singular matrix");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(b[k], b[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex f = a(i, k) / a(k, k);
            if (f == Complex{}) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        Complex s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * b[j];
        b[i] = s / a(i, i);
    }
    return b;
}

// ---------------------------------------------------------------------------
// Companion polynomial roots.

struct ComplexSpectrum {
    std::vector<Complex> values;
    std::vector<double> residuals;  // |p(lambda)| / (1 + |lambda|^d)

    [[nodiscard]] double max_modulus() const noexcept {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }
    [[nodiscard]] double max_residual() const noexcept {
        double m = 0.0;
        for (double r : residuals) m = std::max(m, r);
        return m;
    }
};

namespace detail {

// Polynomial with ascending coefficients a[0] + a[1] z + ... + a[n] z^n.
struct AscendingPoly {
    std::vector<double> a;

    [[nodiscard]] std::size_t degree() const noexcept { return a.size() - 1; }

    // Newton correction p(z)/p'(z); evaluates the reversed polynomial outside the unit disk.
    [[nodiscard]] Complex newton_ratio(Complex z) const noexcept {
        const std::size_t n = degree();
        if (std::abs(z) <= 1.0) {
            Complex p = a[n];
            Complex dp = 0.0;
            for (std::size_t i = n; i-- > 0;) {
                dp = dp * z + p;
                p = p * z + a[i];
            }
            if (p == Complex{}) return 0.0;
            return p / dp;
        }
        const Complex w = 1.0 / z;
        Complex q = a[0];
        Complex dq = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            dq = dq * w + q;
            q = q * w + a[i];
        }
        if (q == Complex{}) return 0.0;
        return z / (static_cast<double>(n) - w * dq / q);
    }

    // |p(z)| / (1 + |z|^n), overflow free.
    [[nodiscard]] double scaled_residual(Complex z) const noexcept {
        const std::size_t n = degree();
        if (std::abs(z) <= 1.0) {
            Complex p = a[n];
            for (std::size_t i = n; i-- > 0;) p = p * z + a[i];
            return std::abs(p) / (1.0 + std::pow(std::abs(z), static_cast<double>(n)));
        }
        const Complex w = 1.0 / z;
        Complex q = a[0];
        for (std::size_t i = 1; i <= n; ++i) q = q * w + a[i];
        return std::abs(q) / (std::pow(std::abs(w), static_cast<double>(n)) + 1.0);
    }
};

// Starting points from the upper convex hull of (i, log|a_i|) (Newton polygon).
inline std::vector<Complex> newton_polygon_start(const AscendingPoly& p) {
    const std::size_t n = p.degree();
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i <= n; ++i) {
        if (p.a[i] == 0.0) continue;
        const double yi = std::log(std::abs(p.a[i]));
        while (hull.size() >= 2) {
            const std::size_t i1 = hull[hull.size() - 2];
            const std::size_t i2 = hull.back();
            const double y1 = std::log(std::abs(p.a[i1]));
            const double y2 = std::log(std::abs(p.a[i2]));
            const double cross = (static_cast<double>(i2) - static_cast<double>(i1)) * (yi - y1) -
                                 (y2 - y1) * (static_cast<double>(i) - static_cast<double>(i1));
            if (cross >= 0.0) hull.pop_back();
            else break;
        }
        hull.push_back(i);
    }
    std::vector<Complex> z;
    z.reserve(n);
    constexpr double sigma = 0.7;
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t s = 1; s < hull.size(); ++s) {
        const std::size_t lo = hull[s - 1];
        const std::size_t hi = hull[s];
        const std::size_t len = hi - lo;
        const double radius =
            std::pow(std::abs(p.a[lo]) / std::abs(p.a[hi]), 1.0 / static_cast<double>(len));
        for (std::size_t j = 0; j < len; ++j) {
            const double angle = two_pi * static_cast<double>(j) / static_cast<double>(len) +
                                 two_pi * static_cast<double>(s) / static_cast<double>(n) + sigma;
            z.push_back(std::polar(radius, angle));
        }
    }
    return z;
}

// Aberth-Ehrlich simultaneous iteration, Gauss-Seidel updates.
inline std::vector<Complex> aberth_roots(const AscendingPoly& p) {
    const std::size_t n = p.degree();
    auto z = newton_polygon_start(p);
    std::vector<bool> done(n, false);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int sweep = 0; sweep < 2000; ++sweep) {
        bool all_done = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i]) continue;
            const Complex ratio = p.newton_ratio(z[i]);
            if (ratio == Complex{}) {
                done[i] = true;
                continue;
            }
            Complex s = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) s += 1.0 / (z[i] - z[j]);
            const Complex w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            if (std::abs(w) <= 2.0 * eps * std::abs(z[i])) done[i] = true;
            else all_done = false;
        }
        if (all_done) break;
    }
    return z;
}

}  // namespace detail

/// Roots of p(lambda) = lambda^d - sum_j c_j lambda^(d-1-j), the characteristic
/// polynomial of the companion matrix with first column c and ones on the
/// first superdiagonal.
inline ComplexSpectrum companion_eigenvalues(std::span<const double> c) {
    if (c.empty()) throw InvalidArgument("companion_eigenvalues: empty coefficient vector");
    if (!all_finite(c)) throw InvalidArgument("companion_eigenvalues: non-finite coefficients");
    const std::size_t d = c.size();
    detail::AscendingPoly full{std::vector<double>(d + 1)};
    full.a[d] = 1.0;
    for (std::size_t j = 0; j < d; ++j) full.a[d - 1 - j] = -c[j];

    ComplexSpectrum out;
    // Exact zero roots from vanishing trailing coefficients.
    std::size_t zeros = 0;
    while (zeros < d && full.a[zeros] == 0.0) ++zeros;
    detail::AscendingPoly reduced{std::vector<double>(full.a.begin() + static_cast<std::ptrdiff_t>(zeros), full.a.end())};
    for (std::size_t k = 0; k < zeros; ++k) out.values.emplace_back(0.0, 0.0);
    if (reduced.degree() == 1) {
        out.values.emplace_back(-reduced.a[0] / reduced.a[1], 0.0);
    } else if (reduced.degree() > 1) {
        auto roots = detail::aberth_roots(reduced);
        out.values.insert(out.values.end(), roots.begin(), roots.end());
    }
    out.residuals.reserve(d);
    for (const auto& z : out.values) out.residuals.push_back(full.scaled_residual(z));
    return out;
}

// ---------------------------------------------------------------------------
// Discrete Fourier transform, (F v)(k) = sum_n v(n) exp(-2 pi i k n / N).

namespace detail {

inline std::vector<Complex> twiddles(std::size_t n, double sign) {
    std::vector<Complex> tw(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        tw[j] = Complex(std::cos(angle), sign * std::sin(angle));
    }
    return tw;
}

inline std::vector<Complex> direct_transform(std::span<const Complex> v, double sign) {
    const std::size_t n = v.size();
    const auto tw = twiddles(n, sign);
    std::vector<Complex> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        Complex s = 0.0;
        std::size_t idx = 0;
        for (std::size_t j = 0; j < n; ++j) {
            s += v[j] * tw[idx];
            idx += k;
            if (idx >= n) idx -= n;
        }
        out[k] = s;
    }
    return out;
}

}  // namespace detail

inline std::vector<Complex> dft(std::span<const Complex> v) {
    if (v.empty()) throw InvalidArgument("dft: empty input");
    return detail::direct_transform(v, -1.0);
}

inline std::vector<Complex> dft(std::span<const double> v) {
    std::vector<Complex> c(v.begin(), v.end());
    return dft(std::span<const Complex>(c));
}

/// Inverse of dft: conjugate-sign transform divided by N.
inline std::vector<Complex> inverse_dft(std::span<const Complex> v) {
    if (v.empty()) throw InvalidArgument("inverse_dft: empty input");
    auto out = detail::direct_transform(v, 1.0);
    const double inv = 1.0 / static_cast<double>(v.size());
    for (auto& x : out) x *= inv;
    return out;
}

}  // namespace wiener
