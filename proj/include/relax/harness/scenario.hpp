#pragma once

// One quench point: build the sector state and observable, diagonalize on
// the blocks the state occupies (or the whole sector), and reduce to quench
// data and a rate report.

#include "relax/fitdim.hpp"
#include "relax/harness/config.hpp"
#include "relax/lattice_basis.hpp"
#include "relax/model.hpp"
#include "relax/sector_spectrum.hpp"
#include "relax/spectral.hpp"
#include "relax/spectral_cache.hpp"
#include "relax/timescales.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace relax::harness {

enum class Route { Blocks, Full };

struct QuenchSetup {
    int L = 8;
    CouplingVector couplings;
    InitialStateSpec state = InitialStateSpec::neel();
    ObservableSpec observable = ObservableSpec::a1(0);
    Route route = Route::Blocks;
    double support_threshold = 1e-12;
    std::size_t cap = kDefaultDimensionCap;
    const SpectralCache* cache = nullptr;
};

inline QuenchSetup pair_setup(int L, const CouplingVector& g, PaperPair pair, const RunConfig* cfg = nullptr,
                              const SpectralCache* cache = nullptr) {
    QuenchSetup s;
    s.L = L;
    s.couplings = g;
    s.state = pair_state(pair);
    s.observable = pair_observable(pair);
    s.cache = cache;
    if (cfg) {
        s.route = cfg->route == "full" ? Route::Full : Route::Blocks;
        s.support_threshold = cfg->support_threshold;
        s.cap = cfg->max_dim;
    }
    return s;
}

struct PreparedQuench {
    QuenchData data;
    std::size_t sector_dim = 0;
    std::size_t solved_dim = 0;  // eigenvectors computed
    std::vector<SectorLabels> blocks;
};

inline PreparedQuench prepare_quench(const QuenchSetup& s) {
    const SymmetricBasis sector = build_symmetric_basis(s.L, {0, std::nullopt, std::nullopt}, s.cap);
    const Eigen::VectorXcd psi = build_initial_state(s.L, s.state, sector);
    const Eigen::VectorXd obs = observable_diagonal(s.L, s.observable, sector);
    PreparedQuench out;
    out.sector_dim = sector.sector_dim();
    SpectralDecomposition spec;
    if (s.route == Route::Full) {
        spec = solve_basis(s.L, s.couplings, sector, s.cache);
    } else {
        out.blocks = support_blocks(s.L, 0, psi, true, 1e-12, s.cap);
        BlockSolveOptions opt;
        opt.cap = s.cap;
        opt.cache = s.cache;
        spec = diagonalize_blocks(s.L, s.couplings, 0, out.blocks, opt);
    }
    out.solved_dim = static_cast<std::size_t>(spec.size());
    out.data = make_quench_data_on_support(spec, psi, obs, s.support_threshold);
    return out;
}

/// All rates for quench data. Rates that are undefined for this input are
/// reported as NaN and the reason collected in `notes`.
inline RateReport compute_rate_report(const QuenchData& q, double kubo_threshold, std::string* notes = nullptr) {
    RateReport r;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto note = [&](const Error& e) {
        if (notes) *notes += (notes->empty() ? "" : "; ") + std::string(e.what());
    };
    r.a_zero = initial_expectation(q);
    r.a_infinity = diagonal_ensemble_value(q);
    r.mean_energy = q.mean_energy;
    r.energy_variance = q.energy_variance;
    r.support_size = static_cast<std::size_t>(q.size());
    r.gap_degeneracies = count_gap_degeneracies(q.energies);
    try {
        r.sigma_A_sq = sigma_A_sq(q);
    } catch (const Error& e) {
        r.sigma_A_sq = nan;
        note(e);
    }
    try {
        r.sigma_G_sq = sigma_G_sq(q);
    } catch (const Error& e) {
        r.sigma_G_sq = nan;
        note(e);
    }
    try {
        const KuboContext ctx = make_kubo_context(q, kubo_threshold);
        r.beta = ctx.beta;
        r.sigma_K_sq = sigma_K_sq(q, ctx);
    } catch (const Error& e) {
        r.beta = nan;
        r.sigma_K_sq = nan;
        note(e);
    }
    const EffectiveDimensions d = effective_dimensions(q);
    r.eff_dim_inv = d.d_phi_inv;
    r.state_obs_eff_dim_inv = d.d_phi_A_inv;
    return r;
}

}  // namespace relax::harness
