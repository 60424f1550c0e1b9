#pragma once

#include "relax/harness/scenario.hpp"
#include "relax/relax.hpp"

#include <vector>

namespace fixture {

using namespace relax;

/// Quench data on the whole m_z = 0 sector, dense observable, no support cut.
inline QuenchData sector_quench(int L, const InitialStateSpec& state, const ObservableSpec& obs,
                                const CouplingVector& g = {}) {
    const auto basis = build_symmetric_basis(L, {0, std::nullopt, std::nullopt});
    const auto spec = diagonalize(build_hamiltonian(L, g, basis));
    return make_quench_data(spec, build_initial_state(L, state, basis), build_observable(L, obs, basis));
}

/// Production route: support blocks plus support restriction.
inline QuenchData pair_quench(int L, harness::PaperPair pair, const CouplingVector& g = {},
                              harness::Route route = harness::Route::Blocks) {
    auto s = harness::pair_setup(L, g, pair);
    s.route = route;
    return harness::prepare_quench(s).data;
}

inline std::vector<double> grid(double t0, double dt, int n) {
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = t0 + dt * i;
    return t;
}

}  // namespace fixture
