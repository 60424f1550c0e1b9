#include "relax/relax.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace relax;

namespace {

Eigen::VectorXd gaussian_levels(int d, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> n;
    Eigen::VectorXd e(d);
    for (auto& x : e) x = n(rng);
    std::sort(e.begin(), e.end());
    return e;
}

Eigen::MatrixXcd staggered(int d) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = i % 2 == 0 ? 1.0 : -1.0;
    return v.cast<cplx>().asDiagonal();
}

Eigen::VectorXcd unit(int d, int i) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
    v[i] = 1.0;
    return v;
}

/// Direct sums over the rotated eigenbasis, no shared code with the library.
std::pair<double, double> dense_g_parts(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& a,
                                        const Eigen::VectorXcd& phi) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const auto& v = es.eigenvectors();
    const auto& e = es.eigenvalues();
    double f = 0.0, g = 0.0;
    for (Eigen::Index j = 0; j < e.size(); ++j)
        for (Eigen::Index k = 0; k < e.size(); ++k) {
            const double w = std::norm(v.col(j).dot(phi)) * std::norm(v.col(k).dot(phi)) *
                             std::norm(v.col(j).dot(a * v.col(k)));
            f += w * (e[j] - e[k]) * (e[j] - e[k]);
            g += w;
        }
    return {f, g};
}

}  // namespace

TEST(Haar, Unitarity) {
    Rng rng(11);
    for (int d : {1, 2, 5, 32}) {
        const auto u = sample_haar_unitary(d, rng);
        EXPECT_LT(max_abs(u.adjoint() * u - Eigen::MatrixXcd::Identity(d, d)), 1e-12);
    }
    EXPECT_THROW(sample_haar_unitary(0, rng), Error);
}

TEST(Haar, DeterministicForSeed) {
    Rng a(42), b(42);
    EXPECT_EQ(sample_haar_unitary(6, a), sample_haar_unitary(6, b));
}

TEST(Haar, FirstEntryMeanSquareIsHalfAtTwo) {
    Rng rng(5);
    RunningStats s;
    for (int i = 0; i < 100000; ++i) s.add(std::norm(sample_haar_unitary(2, rng)(0, 0)));
    EXPECT_LT(std::abs(s.mean() - 0.5), 3.0 * s.standard_error());
}

TEST(Haar, PhaseUniformity) {
    Rng rng(9);
    cplx acc{};
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const cplx z = sample_haar_unitary(3, rng)(1, 2);
        acc += z / std::abs(z);
    }
    EXPECT_LT(std::abs(acc) / n, 4.0 / std::sqrt(n));
}

TEST(SampleRates, IdentityUnitaryHasNoKuboRateOnDiagonalObservable) {
    const int d = 8;
    const auto e = gaussian_levels(d, 1);
    const auto a = staggered(d);
    const auto s = rmt_rates_one_sample(e, a, unit(d, 0), Eigen::MatrixXcd::Identity(d, d));
    EXPECT_EQ(s.sigma_K_sq, 0.0);
}

TEST(SampleRates, ShiftInvarianceOfKuboNumerator) {
    const int d = 10;
    const auto e = gaussian_levels(d, 2);
    Rng rng(3);
    const auto u = sample_haar_unitary(d, rng);
    const Eigen::VectorXcd phi = unit(d, 0);
    Eigen::VectorXd diag(d);
    for (int i = 0; i < d; ++i) diag[i] = 0.3 * i - 1.0;
    const Eigen::MatrixXcd a = diag.cast<cplx>().asDiagonal();
    const Eigen::MatrixXcd shifted = a + 0.7 * Eigen::MatrixXcd::Identity(d, d);
    const auto s0 = rmt_rates_one_sample(e, a, phi, u);
    const auto s1 = rmt_rates_one_sample(e, shifted, phi, u);
    EXPECT_NEAR(s0.sigma_K_sq * a.cwiseAbs2().sum(), s1.sigma_K_sq * shifted.cwiseAbs2().sum(), 1e-10);
    EXPECT_NEAR(s0.sigma_G_num, s1.sigma_G_num, 1e-10);
}

TEST(SampleRates, DenseRouteMatchesDirectSums) {
    const int d = 16;
    Rng rng(17);
    const auto u = sample_haar_unitary(d, rng);
    const auto e = gaussian_levels(d, 4);
    const auto a = staggered(d);
    const auto phi = unit(d, 0);
    const auto s = rmt_rates_one_sample(e, a, phi, u);
    const Eigen::MatrixXcd h = u * e.cast<cplx>().asDiagonal() * u.adjoint();
    const auto [f, g] = dense_g_parts(h, a, phi);
    EXPECT_NEAR(s.sigma_G_num, f, 1e-9);
    EXPECT_NEAR(s.sigma_G_den, g, 1e-9);
}

TEST(SampleRates, SigmaAMatchesCommutatorForm) {
    // Minus the second time derivative of <A(t)> at t = 0, over <A>.
    const int d = 12;
    Rng rng(23);
    const auto u = sample_haar_unitary(d, rng);
    const auto e = gaussian_levels(d, 8);
    const auto a = staggered(d);
    const auto phi = unit(d, 0);
    const Eigen::MatrixXcd h = u * e.cast<cplx>().asDiagonal() * u.adjoint();
    const Eigen::MatrixXcd m = h * h * a - 2.0 * h * a * h + a * h * h;
    const double want = phi.dot(m * phi).real() / phi.dot(a * phi).real();
    EXPECT_NEAR(rmt_rates_one_sample(e, a, phi, u).sigma_A_sq, want, 1e-10);
}

TEST(SampleRates, HaarInvarianceOfDenseVariant) {
    const int d = 6;
    Rng rng(31);
    const auto v = sample_haar_unitary(d, rng);
    const auto w = sample_haar_unitary(d, rng);
    const auto e = gaussian_levels(d, 12);
    const Eigen::MatrixXcd h0 = e.cast<cplx>().asDiagonal();
    const Eigen::MatrixXcd h = v * h0 * v.adjoint();
    const auto a = staggered(d);
    const auto phi = unit(d, 1);
    const auto x = rmt_rates_one_sample_dense(h, a, phi, w);
    const auto y = rmt_rates_one_sample(e, a, phi, Eigen::MatrixXcd(w * v));
    EXPECT_NEAR(x.sigma_A_sq, y.sigma_A_sq, 1e-10);
    EXPECT_NEAR(x.sigma_G_sq(), y.sigma_G_sq(), 1e-10);
    EXPECT_NEAR(x.sigma_K_sq, y.sigma_K_sq, 1e-10);
}

TEST(SampleRates, DimensionChecks) {
    const auto e = gaussian_levels(4, 1);
    EXPECT_THROW(rmt_rates_one_sample(e, staggered(3), unit(4, 0), Eigen::MatrixXcd::Identity(4, 4)), Error);
}

TEST(ClosedForms, TwoLevelKubo) {
    Eigen::VectorXd e(2);
    e << 0.0, 1.0;
    const auto m = microcanonical_moments(e, staggered(2), unit(2, 0));
    EXPECT_NEAR(haar_closed_forms(m).sigma_K_sq, 2.0 / 3.0, 1e-15);
}

TEST(ClosedForms, Degenerate) {
    const int d = 8;
    const auto e = gaussian_levels(d, 3);
    const auto id = Eigen::MatrixXcd::Identity(d, d);
    const auto phi = unit(d, 2);
    const auto r = haar_closed_forms(microcanonical_moments(e, id, phi));
    EXPECT_NEAR(r.sigma_K_sq, 0.0, 1e-15);
    EXPECT_NEAR(r.sigma_A_sq, 0.0, 1e-15);
    EXPECT_NEAR(r.sigma_G_num, 0.0, 1e-14);

    const auto c = haar_closed_forms(microcanonical_moments(Eigen::VectorXd::Constant(d, 1.5), staggered(d), phi));
    EXPECT_EQ(c.sigma_K_sq, 0.0);
    EXPECT_EQ(c.sigma_A_sq, 0.0);
    EXPECT_EQ(c.universal, 0.0);

    EXPECT_THROW(haar_closed_forms(microcanonical_moments(Eigen::VectorXd::Zero(1), id.topLeftCorner(1, 1), unit(1, 0))),
                 Error);
}

TEST(ClosedForms, LeadingOrderRelation) {
    const int d = 20;
    const auto r = haar_closed_forms(microcanonical_moments(gaussian_levels(d, 6), staggered(d), unit(d, 0)));
    EXPECT_NEAR(r.sigma_A_sq, r.sigma_A_sq_leading * d * d / (d * d - 1.0), 1e-14);
    EXPECT_NEAR(r.sigma_A_sq_leading, r.universal, 1e-14);  // traceless A: (a0 - a1)/a0 = 1
}

TEST(Ensemble, MonteCarloMatchesClosedFormsWithTraceOffset) {
    const int d = 10;
    const auto e = gaussian_levels(d, 21);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) diag[i] = i < 3 ? 1.0 : 0.0;
    const Eigen::MatrixXcd a = diag.cast<cplx>().asDiagonal();
    const auto st = haar_ensemble(e, a, unit(d, 0), 20000, 99, 4);
    ASSERT_EQ(st.discarded, 0u);
    EXPECT_NE(st.moments.a1, 0.0);
    EXPECT_LT(std::abs(st.mean_sigma_A_sq - st.closed.sigma_A_sq), 4.0 * st.stderr_sigma_A_sq);
    EXPECT_LT(std::abs(st.mean_sigma_K_sq - st.closed.sigma_K_sq), 4.0 * st.stderr_sigma_K_sq);
    EXPECT_LT(std::abs(st.mean_sigma_G_num - st.closed.sigma_G_num), 4.0 * st.stderr_sigma_G_num);
    EXPECT_LT(std::abs(st.mean_sigma_G_den - st.closed.sigma_G_den), 4.0 * st.stderr_sigma_G_den);
}

TEST(Ensemble, ThreadCountIndependent) {
    const int d = 8;
    const auto e = gaussian_levels(d, 2);
    const auto one = haar_ensemble(e, staggered(d), unit(d, 0), 200, 7, 1);
    const auto four = haar_ensemble(e, staggered(d), unit(d, 0), 200, 7, 4);
    EXPECT_EQ(one.mean_sigma_A_sq, four.mean_sigma_A_sq);
    EXPECT_EQ(one.mean_sigma_G_sq, four.mean_sigma_G_sq);
    EXPECT_EQ(one.stderr_sigma_K_sq, four.stderr_sigma_K_sq);
}

TEST(Ensemble, StandardErrorDefinition) {
    const int d = 4;
    const auto st = haar_ensemble(gaussian_levels(d, 1), staggered(d), unit(d, 0), 50, 3, 1, true);
    ASSERT_EQ(st.samples.size(), 50u);
    double mean = 0.0;
    for (const auto& s : st.samples) mean += s.sigma_K_sq;
    mean /= 50.0;
    double var = 0.0;
    for (const auto& s : st.samples) var += (s.sigma_K_sq - mean) * (s.sigma_K_sq - mean);
    var /= 49.0;
    EXPECT_NEAR(st.mean_sigma_K_sq, mean, 1e-13);
    EXPECT_NEAR(st.stderr_sigma_K_sq, std::sqrt(var / 50.0), 1e-13);
    EXPECT_THROW(haar_ensemble(gaussian_levels(d, 1), staggered(d), unit(d, 0), 1, 3), Error);
}

TEST(Annealed, ConstantDenominatorGivesZero) {
    const std::vector<double> f{1.0, 2.0, 4.0};
    const std::vector<double> g{2.0, 2.0, 2.0};
    const auto r = annealed_statistics(f, g);
    EXPECT_NEAR(r.abs_difference, 0.0, 1e-15);
    EXPECT_NEAR(r.mean_of_ratio, 7.0 / 6.0, 1e-15);
}

TEST(Annealed, TwoSamples) {
    const std::vector<double> f{1.0, 3.0};
    const std::vector<double> g{1.0, 2.0};
    const auto r = annealed_statistics(f, g);
    EXPECT_DOUBLE_EQ(r.mean_of_ratio, 1.25);
    EXPECT_DOUBLE_EQ(r.ratio_of_means, 4.0 / 3.0);
    EXPECT_THROW(annealed_statistics(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST(Annealed, DifferenceShrinksWithDimension) {
    auto median_gap = [](int d) {
        std::vector<double> v;
        for (std::uint64_t r = 0; r < 10; ++r) {
            const auto e = gaussian_levels(d, 100 + r);
            v.push_back(annealed_check(e, staggered(d), unit(d, 0), 400, 1000 + r, 4).normalized_difference);
        }
        std::nth_element(v.begin(), v.begin() + 5, v.end());
        return v[5];
    };
    const double small = median_gap(8);
    const double large = median_gap(64);
    RecordProperty("d8", std::to_string(small));
    RecordProperty("d64", std::to_string(large));
    EXPECT_LT(large, small);
}
