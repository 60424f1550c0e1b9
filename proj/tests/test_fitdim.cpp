#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace relax;
using harness::PaperPair;

namespace {

std::vector<double> sample(const std::function<double(double)>& f, double dt, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(f(dt * i));
    return v;
}

/// Full-space reference: eigenvalues of the Kronecker Hamiltonian grouped into
/// degenerate levels, state projected onto each level.
EffectiveDimensions full_space_dimensions(int L, const oracle::Vec& psi, const oracle::Mat& a) {
    const CouplingVector g{};
    Eigen::SelfAdjointEigenSolver<oracle::Mat> es(oracle::full_hamiltonian(L, g.J1, g.gamma1, g.J2, g.gamma2));
    const auto& e = es.eigenvalues();
    const auto& v = es.eigenvectors();
    std::vector<oracle::Vec> levels;
    Eigen::Index start = 0;
    for (Eigen::Index j = 1; j <= e.size(); ++j) {
        if (j < e.size() && e[j] - e[j - 1] < 1e-8) continue;
        const oracle::Mat block = v.middleCols(start, j - start);
        levels.push_back(block * (block.adjoint() * psi));
        start = j;
    }
    EffectiveDimensions d;
    for (std::size_t x = 0; x < levels.size(); ++x) {
        d.d_phi_inv += std::pow(levels[x].squaredNorm(), 2);
        for (std::size_t y = 0; y < levels.size(); ++y)
            if (x != y) d.d_phi_A_inv += std::norm(levels[x].dot(a * levels[y]));
    }
    return d;
}

}  // namespace

TEST(Fit, ExactGaussianSelfFit) {
    const double dt = 0.01;
    const auto s = sample([](double t) { return std::exp(-2.0 * t * t); }, dt, 201);
    FitOptions opt;
    opt.tau_fit = 1.0;
    opt.tau_grid = {0.3, 0.5, 1.0};
    const auto f = fit_early_decay(s, 0.0, FitModel::Gaussian, opt);
    EXPECT_NEAR(f.rate_sq, 4.0, 1e-6);
    for (double d : f.dbar) EXPECT_LT(d, 1e-9);
    EXPECT_FALSE(f.sign_flip);
}

TEST(Fit, ConstantSeries) {
    const std::vector<double> s(100, 0.3);
    for (auto m : {FitModel::Gaussian, FitModel::Quadratic}) {
        const auto f = fit_early_decay(s, 0.3, m);
        EXPECT_EQ(f.rate_sq, 0.0);
        EXPECT_EQ(f.dbar[0], 0.0);
    }
}

TEST(Fit, QuadraticRecoversExactParabola) {
    const auto s = sample([](double t) { return 0.1 + 0.9 * (1.0 - 3.0 * t * t / 2.0); }, 0.01, 100);
    const auto f = fit_early_decay(s, 0.1, FitModel::Quadratic);
    EXPECT_NEAR(f.rate_sq, 3.0, 1e-10);
    EXPECT_NEAR(f.amplitude, 0.9, 1e-14);
}

TEST(Fit, TooFewPoints) {
    const std::vector<double> s(100, 1.0);
    FitOptions opt;
    opt.tau_fit = 0.035;
    try {
        fit_early_decay(s, 0.0, FitModel::Gaussian, opt);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TooFewPoints);
    }
    opt.tau_fit = 0.04;
    EXPECT_NO_THROW(fit_early_decay(s, 0.0, FitModel::Gaussian, opt));
}

TEST(Fit, SignFlipFallsBackToNonlinearFit) {
    const auto s = sample([](double t) { return std::cos(3.0 * t); }, 0.01, 200);
    FitOptions opt;
    opt.tau_fit = 1.0;
    const auto f = fit_early_decay(s, 0.0, FitModel::Gaussian, opt);
    EXPECT_TRUE(f.sign_flip);
    EXPECT_GT(f.rate_sq, 0.0);
    EXPECT_TRUE(std::isfinite(f.dbar[0]));
}

TEST(Fit, DiscrepancyMatchesDefinitionOnSubgrid) {
    const auto q = fixture::pair_quench(8, PaperPair::NeelA1);
    const auto s = expectation_timeseries(q, fixture::grid(0.0, 0.01, 200));
    FitOptions opt;
    opt.tau_grid = {0.1, 0.3, 0.5, 1.0};
    for (auto m : {FitModel::Gaussian, FitModel::Quadratic}) {
        const auto f = fit_early_decay(s, diagonal_ensemble_value(q), m, opt);
        if (m == FitModel::Gaussian) {
            EXPECT_GE(f.rate_sq, 0.0);
        }
        for (std::size_t i = 0; i < f.tau.size(); ++i) {
            const std::size_t n = static_cast<std::size_t>(std::lround(f.tau[i] / 0.01)) + 1;
            double num = 0.0, den = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                num += std::abs(s[k] - f.model_value(0.01 * k));
                den += std::abs(s[k]);
            }
            EXPECT_DOUBLE_EQ(f.dbar[i], num / den);
            EXPECT_GE(f.dbar[i], 0.0);
        }
    }
}

TEST(Fit, GaussianRateNearSigmaAAtEightSites) {
    const auto q = fixture::pair_quench(8, PaperPair::NeelA1);
    const auto s = expectation_timeseries(q, fixture::grid(0.0, 0.01, 101));
    FitOptions opt;
    opt.tau_fit = 0.5;
    const auto f = fit_early_decay(s, diagonal_ensemble_value(q), FitModel::Gaussian, opt);
    const double sa = sigma_A_sq(q);
    RecordProperty("fitted_rate_sq", std::to_string(f.rate_sq));
    RecordProperty("sigma_A_sq", std::to_string(sa));
    EXPECT_LT(std::abs(f.rate_sq - sa) / sa, 0.05);
}

TEST(Fit, GaussianVersusQuadraticReported) {
    // Expectation only: the Gaussian is at least as close at the largest tau.
    for (int L : {8, 10})
        for (auto pair : harness::all_pairs()) {
            const auto q = fixture::pair_quench(L, pair);
            const auto s = expectation_timeseries(q, fixture::grid(0.0, 0.01, 101));
            FitOptions opt;
            opt.tau_grid = {1.0};
            const double ainf = diagonal_ensemble_value(q);
            const double g = fit_early_decay(s, ainf, FitModel::Gaussian, opt).dbar[0];
            const double quad = fit_early_decay(s, ainf, FitModel::Quadratic, opt).dbar[0];
            RecordProperty("L" + std::to_string(L) + "_" + harness::to_string(pair),
                           std::to_string(g) + (g <= quad ? " <= " : " > ") + std::to_string(quad));
        }
}

TEST(EffectiveDimensions, TrivialCases) {
    const auto b = build_symmetric_basis(6, {0, std::nullopt, std::nullopt});
    const auto s = diagonalize(build_hamiltonian(6, {}, b));
    const auto a = build_observable(6, ObservableSpec::a2(), b);
    const auto eig = make_quench_data(s, s.vectors.col(5), a);
    EXPECT_NEAR(effective_dimensions(eig).d_phi_inv, 1.0, 1e-12);
    EXPECT_NEAR(effective_dimensions(eig).d_phi_A_inv, 0.0, 1e-12);

    const int d = 7;
    Eigen::VectorXcd uni = Eigen::VectorXcd::Zero(s.size());
    for (int j = 0; j < d; ++j) uni += s.vectors.col(2 * j) / std::sqrt(static_cast<double>(d));
    EXPECT_NEAR(effective_dimensions(make_quench_data(s, uni, a)).d_phi_inv, 1.0 / d, 1e-12);
}

TEST(EffectiveDimensions, BoundAndRange) {
    for (auto pair : harness::all_pairs()) {
        const auto q = fixture::pair_quench(8, pair);
        const auto d = effective_dimensions(q);
        EXPECT_GE(d.d_phi_inv, 1.0 / static_cast<double>(q.size()) - 1e-15);
        EXPECT_LE(d.d_phi_inv, 1.0 + 1e-12);
        EXPECT_GE(d.d_phi_A_inv, 0.0);
        EXPECT_LE(d.d_phi_A_inv, operator_norm(q.obs_elements) * operator_norm(q.obs_elements) * d.d_phi_inv);
        EXPECT_THROW(effective_dimensions(q, 1e-6), Error);
    }
}

TEST(EffectiveDimensions, MatchFullSpaceOracle) {
    for (int L : {6, 8}) {
        const std::map<PaperPair, std::pair<oracle::Vec, oracle::Mat>> states{
            {PaperPair::NeelA1, {oracle::neel(L), oracle::full_sz(L, 0)}},
            {PaperPair::DomainWallA2, {oracle::domain_wall(L), oracle::full_a2(L)}},
            {PaperPair::NeelCatA2, {oracle::neel_cat(L), oracle::full_a2(L)}},
        };
        for (const auto& [pair, sa] : states) {
            const auto q = fixture::pair_quench(L, pair);
            ASSERT_EQ(count_energy_degeneracies(q.energies, 1e-8), 0u);
            const auto lib = effective_dimensions(q);
            const auto ref = full_space_dimensions(L, sa.first, sa.second);
            EXPECT_NEAR(lib.d_phi_inv, ref.d_phi_inv, 1e-10) << harness::to_string(pair) << " L=" << L;
            EXPECT_NEAR(lib.d_phi_A_inv, ref.d_phi_A_inv, 1e-10) << harness::to_string(pair) << " L=" << L;
        }
    }
}

TEST(EffectiveDimensions, OrderingAtSixSitesReported) {
    const double neel = effective_dimensions(fixture::pair_quench(6, PaperPair::NeelA1)).d_phi_inv;
    const double cat = effective_dimensions(fixture::pair_quench(6, PaperPair::NeelCatA2)).d_phi_inv;
    const double dw = effective_dimensions(fixture::pair_quench(6, PaperPair::DomainWallA2)).d_phi_inv;
    RecordProperty("ordering", std::to_string(neel) + " " + std::to_string(cat) + " " + std::to_string(dw));
    EXPECT_LT(neel, dw);
}
