#pragma once

// Property suites over the finite-state oracle; each returns per-case data
// and an overall verdict.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "wiener/diagnostics.hpp"
#include "wiener/io.hpp"
#include "wiener/oracle.hpp"
#include "wiener/random.hpp"

namespace wiener {

struct SuiteReport {
    std::string name;
    bool passed = true;
    io::CsvTable cases;
    std::vector<std::pair<std::string, std::string>> summary;

    [[nodiscard]] std::string text() const {
        std::string s = "subcheck = " + name + "\nresult = " + (passed ? "pass" : "fail") + "\n";
        for (const auto& [k, v] : summary) s += k + " = " + v + "\n";
        return s;
    }
};

inline const std::vector<std::string>& registered_subchecks() {
    static const std::vector<std::string> names{"cyclicity-agreement", "moment-identity", "pseudospectrum-verify",
                                                "vandermonde", "prevalence-probe"};
    return names;
}

namespace detail {

inline std::vector<double> random_vector(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

/// Uniformly random permutation (Fisher-Yates on the project generator).
inline std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    return p;
}

/// Test vectors with known structure on Z_n: impulses, constants, pure and
/// mixed Fourier modes, and band-limited signals (which miss DFT coefficients).
inline std::vector<std::pair<std::string, std::vector<double>>> structured_vectors(std::size_t n) {
    std::vector<std::pair<std::string, std::vector<double>>> out;
    const double w = 2.0 * std::numbers::pi / static_cast<double>(n);
    auto make = [&](const std::string& name, auto fn) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = fn(static_cast<double>(i));
        out.emplace_back(name, std::move(v));
    };
    make("impulse", [](double i) { return i == 0.0 ? 1.0 : 0.0; });
    make("constant", [](double) { return 1.0; });
    make("ramp", [](double i) { return i; });
    make("impulse-plus-constant", [](double i) { return i == 0.0 ? 2.0 : 1.0; });
    make("cos1", [&](double i) { return std::cos(w * i); });
    make("one-plus-cos1", [&](double i) { return 1.0 + std::cos(w * i); });
    make("exp-sin", [&](double i) { return std::exp(std::sin(w * i)); });
    make("two-impulses", [&](double i) { return i == 0.0 || i == 1.0 ? 1.0 : 0.0; });
    if (n % 2 == 0) {
        make("alternating", [](double i) { return std::fmod(i, 2.0) == 0.0 ? 1.0 : -1.0; });
        make("period-two-indicator", [](double i) { return std::fmod(i, 2.0) == 0.0 ? 1.0 : 0.0; });
    }
    make("lowpass", [&](double i) {
        double s = 0.0;
        for (int k = 0; k <= 2; ++k) s += std::cos(w * k * i) / (1.0 + k);
        return s;
    });
    return out;
}

}  // namespace detail

/// dft_cyclicity against the Krylov-rank oracle on shifts of Z_n by every r
/// coprime to n (structured vectors) and by 1 (random vectors).
inline SuiteReport suite_cyclicity_agreement(std::size_t n, std::uint64_t seed, std::size_t random_count = 500) {
    if (n < 2) throw InvalidArgument("cyclicity-agreement: N must be at least 2");
    SuiteReport rep{"cyclicity-agreement", true, {{"case", "r", "dft_cyclic", "krylov_cyclic", "agree"}, {}}, {}};
    std::size_t agree = 0, total = 0, cyclic = 0;
    auto check = [&](std::size_t r, std::span<const double> f) {
        const bool a = dft_cyclicity(n, r, f);
        const bool b = is_cyclic(FiniteSystem::shift(n, r), f);
        rep.cases.rows.push_back({static_cast<double>(total), static_cast<double>(r), a ? 1.0 : 0.0, b ? 1.0 : 0.0,
                                  a == b ? 1.0 : 0.0});
        ++total;
        agree += a == b;
        cyclic += b;
    };
    const auto structured = detail::structured_vectors(n);
    for (std::size_t r = 1; r < n; ++r) {
        if (std::gcd(r, n) != 1) continue;
        for (const auto& [name, f] : structured) check(r, f);
    }
    Rng rng(seed);
    for (std::size_t k = 0; k < random_count; ++k) check(1, detail::random_vector(rng, n));
    rep.passed = agree == total;
    rep.summary = {{"N", std::to_string(n)},
                   {"cases", std::to_string(total)},
                   {"cyclic_cases", std::to_string(cyclic)},
                   {"agreement", io::format_double(static_cast<double>(agree) / static_cast<double>(total))}};
    return rep;
}

/// Trace-measure moments against directly computed autocorrelations on random
/// permutations (random cycle structure) with random observables.
inline SuiteReport suite_moment_identity(std::size_t n, std::uint64_t seed, std::size_t systems = 20,
                                         double tol = 1e-10) {
    if (n < 1) throw InvalidArgument("moment-identity: N must be positive");
    SuiteReport rep{"moment-identity", true, {{"case", "cycles", "max_deviation"}, {}}, {}};
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t s = 0; s < systems; ++s) {
        const FiniteSystem sys(s == 0 ? cyclic_shift(n).perm : detail::random_permutation(rng, n));
        const auto f = detail::random_vector(rng, n);
        const auto exact = exact_autocorr(sys, f, 2 * n);
        const auto nu = trace_measure(sys, f);
        double dev = 0.0;
        for (std::size_t k = 0; k <= 2 * n; ++k) {
            const Complex mk = nu.moment(static_cast<long>(k));
            dev = std::max(dev, std::abs(mk - exact.autocorr[k]));
        }
        std::size_t cycles = 0;
        std::vector<bool> seen(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            if (seen[i]) continue;
            ++cycles;
            for (std::size_t a = i; !seen[a]; a = sys.perm()[a]) seen[a] = true;
        }
        rep.cases.rows.push_back({static_cast<double>(s), static_cast<double>(cycles), dev});
        worst = std::max(worst, dev);
    }
    rep.passed = worst <= tol;
    rep.summary = {{"N", std::to_string(n)}, {"systems", std::to_string(systems)},
                   {"max_deviation", io::format_double(worst)}, {"tolerance", io::format_double(tol)}};
    return rep;
}

/// |U phi - lambda phi| <= epsilon for every eigenpair of U_d, d = 1..N, on
/// random observables of the shift on Z_N.
inline SuiteReport suite_pseudospectrum(std::size_t n, std::uint64_t seed, std::size_t observables = 5) {
    if (n < 1) throw InvalidArgument("pseudospectrum-verify: N must be positive");
    SuiteReport rep{"pseudospectrum-verify", true, {{"case", "d", "epsilon", "max_residual", "holds"}, {}}, {}};
    Rng rng(seed);
    const auto sys = FiniteSystem::shift(n);
    double worst_defect = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < observables; ++k) {
        const auto f = detail::random_vector(rng, n);
        for (std::size_t d = 1; d <= n; ++d) {
            const auto r = verify_pseudospectrum(sys, f, d);
            const double mr = *std::max_element(r.residuals.begin(), r.residuals.end());
            worst_defect = std::max(worst_defect, mr - r.epsilon);
            rep.cases.rows.push_back({static_cast<double>(k), static_cast<double>(d), r.epsilon, mr, r.holds ? 1.0 : 0.0});
            rep.passed = rep.passed && r.holds;
        }
    }
    rep.summary = {{"N", std::to_string(n)}, {"max_residual_minus_epsilon", io::format_double(worst_defect)},
                   {"tolerance", "1e-08"}};
    return rep;
}

/// Vandermonde certificate on random well-separated atoms plus the Szego classifier
/// on a flat density and a purely atomic one.
inline SuiteReport suite_vandermonde(std::uint64_t seed, std::size_t max_atoms = 12, double tol = 1e-16) {
    SuiteReport rep{"vandermonde", true, {{"case", "atoms", "weighted_defect"}, {}}, {}};
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t k = 1; k <= max_atoms; ++k) {
        // Jittered equispaced angles keep atoms at least pi/k apart.
        TraceMeasure nu;
        const double offset = rng.uniform01();
        for (std::size_t i = 0; i < k; ++i) {
            const double a = (static_cast<double>(i) + offset + 0.5 * rng.uniform01()) / static_cast<double>(k);
            nu.atoms.push_back({std::polar(1.0, 2.0 * std::numbers::pi * a), rng.uniform(0.1, 1.0)});
        }
        const auto p = weak_pred_vandermonde(nu);
        double defect = 0.0;
        for (const auto& a : nu.atoms) defect += a.weight * std::norm(evaluate_polynomial(p, a.lambda) - 1.0 / a.lambda);
        rep.cases.rows.push_back({static_cast<double>(k), static_cast<double>(k), defect});
        worst = std::max(worst, defect);
    }
    const std::size_t grid = 1024;
    const std::vector<double> flat(grid, 1.0);
    std::vector<double> atomic(grid, 0.0);
    for (std::size_t i = 0; i < grid; i += grid / 8) atomic[i] = 1.0;
    const auto flat_v = szego_log_integral(flat, 1e-300);
    const auto atomic_v = szego_log_integral(atomic, 1e-300);
    rep.passed = worst <= tol && flat_v.verdict == SzegoVerdict::fails && atomic_v.verdict == SzegoVerdict::holds;
    rep.summary = {{"max_weighted_defect", io::format_double(worst)},
                   {"tolerance", io::format_double(tol)},
                   {"flat_density", to_string(flat_v.verdict)},
                   {"flat_log_integral", io::format_double(flat_v.value)},
                   {"atomic_density", to_string(atomic_v.verdict)}};
    return rep;
}

/// Perturbations f + lambda p of a non-cyclic f by a probe with full DFT support.
inline SuiteReport suite_prevalence(std::size_t n, std::size_t trials, std::uint64_t seed) {
    if (n < 3) throw InvalidArgument("prevalence-probe: N must be at least 3");
    // f = 1 + cos(2 pi i / n) has only three nonzero Fourier coefficients.
    std::vector<double> f(n), p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) f[i] = 1.0 + std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    p[0] = 1.0;
    const double frac = prevalence_probe(n, 1, f, p, trials, seed);
    SuiteReport rep{"prevalence-probe", frac == 1.0, {{"N", "trials", "cyclic_fraction", "base_cyclic"}, {}}, {}};
    const bool base = is_cyclic(FiniteSystem::shift(n), f);
    rep.cases.rows.push_back({static_cast<double>(n), static_cast<double>(trials), frac, base ? 1.0 : 0.0});
    rep.summary = {{"N", std::to_string(n)}, {"trials", std::to_string(trials)},
                   {"cyclic_fraction", io::format_double(frac)}, {"base_cyclic", base ? "true" : "false"}};
    return rep;
}

inline SuiteReport run_subcheck(const std::string& name, std::size_t n, std::size_t trials, std::uint64_t seed) {
    if (name == "cyclicity-agreement") return suite_cyclicity_agreement(n, seed);
    if (name == "moment-identity") return suite_moment_identity(n, seed);
    if (name == "pseudospectrum-verify") return suite_pseudospectrum(n, seed);
    if (name == "vandermonde") return suite_vandermonde(seed);
    if (name == "prevalence-probe") return suite_prevalence(n, trials, seed);
    throw InvalidArgument("unknown oracle subcheck '" + name + "'");
}

}  // namespace wiener
