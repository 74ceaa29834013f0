#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "wiener/oracle.hpp"
#include "wiener/suites.hpp"

using namespace wiener;

namespace {

std::vector<double> random_atoms(Rng& rng, std::size_t n) {
    std::vector<double> f(n);
    for (auto& v : f) v = rng.uniform(-1.0, 1.0);
    return f;
}

// Krylov rank through an SVD, independent of the pivoted QR used by is_cyclic.
bool svd_cyclic(const FiniteSystem& sys, const std::vector<double>& f) {
    const auto n = static_cast<Eigen::Index>(sys.size());
    Eigen::MatrixXd k(n, n);
    std::vector<double> col = f;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) k(i, j) = col[static_cast<std::size_t>(i)];
        col = sys.apply(std::span<const double>(col));
    }
    const Eigen::VectorXd sv = k.jacobiSvd().singularValues();
    return sv(n - 1) > 1e-10 * sv(0);
}

}  // namespace

TEST(FiniteSystem, ConstructionAndApply) {
    const FiniteSystem s({1, 2, 0});
    const std::vector<double> g{10, 20, 30};
    EXPECT_EQ(s.apply(std::span<const double>(g)), (std::vector<double>{20, 30, 10}));
    EXPECT_EQ(s.apply_inverse(std::span<const double>(g)), (std::vector<double>{30, 10, 20}));
    EXPECT_THROW(FiniteSystem({0, 0}), InvalidArgument);
    EXPECT_THROW(FiniteSystem(std::vector<std::size_t>{}), InvalidArgument);
    const auto u = koopman_matrix(s);
    EXPECT_EQ(u(0, 1), 1.0);
    EXPECT_EQ(u(2, 0), 1.0);
}

TEST(ExactAutocorr, MatchesDirectSums) {
    const auto sys = FiniteSystem::shift(3);
    const auto g = exact_autocorr(sys, std::vector<double>{1, 0, 0}, 6);
    EXPECT_EQ(g.source, GramSource::exact_oracle);
    const double expect[] = {1.0 / 3, 0, 0, 1.0 / 3, 0, 0, 1.0 / 3};
    for (std::size_t n = 0; n <= 6; ++n) EXPECT_DOUBLE_EQ(g.autocorr[n], expect[n]);
    EXPECT_THROW(exact_autocorr(sys, std::vector<double>{1, 0}, 2), InvalidArgument);
}

TEST(IsCyclic, SmallCases) {
    const auto z3 = FiniteSystem::shift(3);
    EXPECT_TRUE(is_cyclic(z3, std::vector<double>{1, 0, 0}));
    EXPECT_FALSE(is_cyclic(z3, std::vector<double>{1, 1, 1}));
    EXPECT_FALSE(is_cyclic(z3, std::vector<double>{0, 0, 0}));
    // Identity permutation: the Krylov space of any f is one-dimensional.
    EXPECT_FALSE(is_cyclic(FiniteSystem({0, 1}), std::vector<double>{1, 2}));
}

TEST(DftCyclicity, AgreesWithSvdOracle) {
    Rng rng(77);
    for (std::size_t n : {2u, 5u, 8u, 12u, 16u, 31u}) {
        const auto sys = FiniteSystem::shift(n);
        for (const auto& [name, f] : detail::structured_vectors(n))
            EXPECT_EQ(dft_cyclicity(n, 1, f), svd_cyclic(sys, f)) << name << " n=" << n;
        for (int k = 0; k < 30; ++k) {
            const auto f = random_atoms(rng, n);
            EXPECT_EQ(dft_cyclicity(n, 1, f), svd_cyclic(sys, f));
            EXPECT_EQ(is_cyclic(sys, f), svd_cyclic(sys, f));
        }
    }
    EXPECT_THROW(dft_cyclicity(6, 2, std::vector<double>(6, 1.0)), InvalidArgument);
    EXPECT_THROW(dft_cyclicity(4, 1, std::vector<double>(3, 1.0)), InvalidArgument);
}

TEST(DftCyclicity, CoprimeShiftsShareTheCriterion) {
    const std::vector<double> f{1, 2, 0, 0, 0};
    for (std::size_t r = 1; r < 5; ++r) EXPECT_EQ(dft_cyclicity(5, r, f), is_cyclic(FiniteSystem::shift(5, r), f));
}

TEST(PrevalenceProbe, GenericPerturbationsAreCyclic) {
    std::vector<double> f(16), p(16, 0.0);
    for (std::size_t i = 0; i < 16; ++i) f[i] = 1.0 + std::cos(2.0 * std::numbers::pi * double(i) / 16.0);
    p[0] = 1.0;
    EXPECT_FALSE(is_cyclic(FiniteSystem::shift(16), f));
    EXPECT_EQ(prevalence_probe(16, 1, f, p, 100, 3), 1.0);
    EXPECT_THROW(prevalence_probe(16, 1, f, p, 0, 3), InvalidArgument);
    EXPECT_THROW(prevalence_probe(16, 2, f, p, 10, 3), InvalidArgument);
    EXPECT_THROW(prevalence_probe(16, 1, f, f, 10, 3), InvalidArgument);
}

TEST(TraceMeasure, ShiftOfDeltaIsUniformOnRootsOfUnity) {
    std::vector<double> f(4, 0.0);
    f[0] = 1.0;
    const auto nu = trace_measure(FiniteSystem::shift(4), f);
    ASSERT_EQ(nu.atoms.size(), 4u);
    for (const auto& a : nu.atoms) {
        EXPECT_NEAR(a.weight, 1.0 / 16.0, 1e-15);
        EXPECT_NEAR(std::abs(std::pow(a.lambda, 4.0) - 1.0), 0.0, 1e-12);
    }
    EXPECT_NEAR(nu.total_weight(), 0.25, 1e-15);
}

TEST(TraceMeasure, CoincidentEigenvaluesMerge) {
    // Two 2-cycles: eigenvalues +-1 each appear twice and merge.
    const FiniteSystem s({1, 0, 3, 2});
    const auto nu = trace_measure(s, std::vector<double>{1, 2, 3, 5});
    EXPECT_EQ(nu.atoms.size(), 2u);
    // Fixed points contribute only the eigenvalue 1.
    const auto id = trace_measure(FiniteSystem({0, 1, 2}), std::vector<double>{1, 2, 3});
    ASSERT_EQ(id.atoms.size(), 1u);
    EXPECT_NEAR(id.atoms[0].weight, 14.0 / 3.0, 1e-14);
}

TEST(TraceMeasure, MomentsEqualAutocorrelationsAndEigenDecomposition) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + rng.below(20);
        const FiniteSystem sys(detail::random_permutation(rng, n));
        const auto f = random_atoms(rng, n);
        const auto nu = trace_measure(sys, f);
        const auto g = exact_autocorr(sys, f, 2 * n);
        for (std::size_t k = 0; k <= 2 * n; ++k) EXPECT_NEAR(std::abs(nu.moment(long(k)) - g.autocorr[k]), 0.0, 1e-10);

        // Every atom is an eigenvalue of the permutation matrix.
        const auto u = koopman_matrix(sys);
        Eigen::MatrixXd e(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) e(long(i), long(j)) = u(i, j);
        const Eigen::VectorXcd ev = e.eigenvalues();
        for (const auto& a : nu.atoms) {
            double best = 1e9;
            for (Eigen::Index i = 0; i < ev.size(); ++i) best = std::min(best, std::abs(ev(i) - a.lambda));
            EXPECT_LT(best, 1e-8);
        }
    }
}

TEST(Vandermonde, CertificateOnSmallMeasures) {
    TraceMeasure nu;
    nu.atoms = {{Complex(1.0, 0.0), 0.5}};
    auto p = weak_pred_vandermonde(nu);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_NEAR(std::abs(p[0] - 1.0), 0.0, 1e-15);

    nu.atoms = {{Complex(1.0, 0.0), 0.5}, {Complex(-1.0, 0.0), 0.5}};
    p = weak_pred_vandermonde(nu);
    for (const auto& a : nu.atoms) EXPECT_NEAR(std::abs(evaluate_polynomial(p, a.lambda) - 1.0 / a.lambda), 0.0, 1e-14);

    const auto suite = suite_vandermonde(9);
    EXPECT_TRUE(suite.passed);
}

TEST(Vandermonde, RejectsIllPosedMeasures) {
    TraceMeasure nu;
    EXPECT_THROW(weak_pred_vandermonde(nu), InvalidArgument);
    nu.atoms = {{Complex(1.0, 0.0), 1.0}, {Complex(1.0, 1e-12), 1.0}};
    EXPECT_THROW(weak_pred_vandermonde(nu), InvalidArgument);
    nu.atoms = {{Complex(0.0, 0.0), 1.0}};
    EXPECT_THROW(weak_pred_vandermonde(nu), InvalidArgument);
}

TEST(Vandermonde, PolynomialOfTheCompressedOperatorInvertsTheShift) {
    // At full depth U_d is U on the cyclic subspace, so p(U_d) e_0 = U^-1 f = e_1.
    Rng rng(40);
    const std::size_t n = 7;
    const auto sys = FiniteSystem::shift(n);
    const auto f = random_atoms(rng, n);
    const auto p = weak_pred_vandermonde(trace_measure(sys, f));
    const auto u = companion(fit_from_gram(exact_autocorr(sys, f, n), n));
    // Horner on vectors: v = p(U) e_0.
    std::vector<Complex> v(n, 0.0);
    for (std::size_t k = p.size(); k-- > 0;) {
        std::vector<Complex> w(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) w[i] += u(i, j) * v[j];
        w[0] += p[k];
        v = w;
    }
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(std::abs(v[i] - (i == 1 ? 1.0 : 0.0)), 0.0, 1e-8) << i;
}

TEST(Szego, ClassifierVerdicts) {
    EXPECT_EQ(szego_log_integral(std::vector<double>(64, 1.0), 1e-12).verdict, SzegoVerdict::fails);
    EXPECT_NEAR(szego_log_integral(std::vector<double>(64, 1.0), 1e-12).value, 0.0, 1e-15);
    EXPECT_NEAR(szego_log_integral(std::vector<double>(64, std::exp(1.0)), 1e-12).value, 2.0 * std::numbers::pi, 1e-12);

    std::vector<double> atomic(64, 0.0);
    atomic[3] = atomic[40] = 1.0;
    EXPECT_EQ(szego_log_integral(atomic, 1e-12).verdict, SzegoVerdict::holds);

    // Zero arc wrapping around the end of the grid.
    std::vector<double> wrap(64, 1.0);
    wrap[0] = wrap[63] = 0.0;
    EXPECT_EQ(szego_log_integral(wrap, 1e-12).verdict, SzegoVerdict::holds);

    // Isolated zeros and tiny values: not decidable on the grid.
    std::vector<double> isolated(64, 1.0);
    isolated[10] = 0.0;
    EXPECT_EQ(szego_log_integral(isolated, 1e-12).verdict, SzegoVerdict::inconclusive);

    // Smooth density 1 + cos with a single zero: log-integrable, Szego fails,
    // and the integral converges to 2 pi log(1/2) as the grid refines.
    std::vector<double> w(4096);
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = 1.0 + std::cos(2.0 * std::numbers::pi * (double(i) + 0.5) / double(w.size()));
    EXPECT_NEAR(szego_log_integral(w, 1e-300).value, 2.0 * std::numbers::pi * std::log(0.5), 1e-2);

    EXPECT_THROW(szego_log_integral(std::vector<double>(4, 1.0), 1e-12), InvalidArgument);
    EXPECT_THROW(szego_log_integral(std::vector<double>(16, 1.0), 0.0), InvalidArgument);
    EXPECT_THROW(szego_log_integral(std::vector<double>(16, -1.0), 1e-12), InvalidArgument);
}

TEST(Suites, AllPassOnSmallSizes) {
    EXPECT_TRUE(suite_cyclicity_agreement(16, 1, 100).passed);
    EXPECT_TRUE(suite_moment_identity(12, 2).passed);
    EXPECT_TRUE(suite_pseudospectrum(8, 3, 3).passed);
    EXPECT_TRUE(suite_prevalence(16, 100, 4).passed);
    EXPECT_THROW(run_subcheck("nope", 8, 10, 1), InvalidArgument);
}
