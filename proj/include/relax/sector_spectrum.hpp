#pragma once

// Eigendecomposition of the chain Hamiltonian on a plain m_z sector, either
// directly or assembled from translation / spin-flip blocks whose
// eigenvectors are embedded back into the sector basis.

#include "relax/error.hpp"
#include "relax/lattice_basis.hpp"
#include "relax/model.hpp"
#include "relax/spectral.hpp"
#include "relax/spectral_cache.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

namespace relax {

struct BlockSolveOptions {
    bool use_spin_flip = true;
    std::size_t cap = kDefaultDimensionCap;
    const SpectralCache* cache = nullptr;
};

/// Diagonalizes H on one basis, reading and filling the cache when given.
inline SpectralDecomposition solve_basis(int length, const CouplingVector& g, const SymmetricBasis& basis,
                                         const SpectralCache* cache = nullptr) {
    if (cache) {
        if (auto hit = cache->load(length, basis.labels, g);
            hit && hit->vectors.rows() == static_cast<Eigen::Index>(basis.dim()))
            return *hit;
    }
    SpectralDecomposition spec = diagonalize(build_hamiltonian(length, g, basis), basis.labels);
    if (cache) cache->store(length, basis.labels, g, spec);
    return spec;
}

/// Direct diagonalization of the full m_z sector.
inline SpectralDecomposition diagonalize_sector(int length, const CouplingVector& g, int m_z,
                                                std::size_t cap = kDefaultDimensionCap,
                                                const SpectralCache* cache = nullptr) {
    const SymmetricBasis basis = build_symmetric_basis(length, {m_z, std::nullopt, std::nullopt}, cap);
    return solve_basis(length, g, basis, cache);
}

/// Blocks in which a plain-sector vector has squared weight above tol.
inline std::vector<SectorLabels> support_blocks(int length, int m_z, const Eigen::VectorXcd& sector_state,
                                                bool use_spin_flip = true, double tol = 1e-12,
                                                std::size_t cap = kDefaultDimensionCap) {
    std::vector<SectorLabels> out;
    for (const auto& labels : sector_block_labels(length, m_z, use_spin_flip)) {
        const SymmetricBasis basis = build_symmetric_basis(length, labels, cap);
        if (basis.dim() == 0) continue;
        if (project_vector(sector_state, basis).squaredNorm() > tol) out.push_back(labels);
    }
    return out;
}

/// Sector-basis eigendecomposition restricted to the given blocks, sorted by
/// energy. With every block of the sector listed this spans the whole sector.
inline SpectralDecomposition diagonalize_blocks(int length, const CouplingVector& g, int m_z,
                                                std::span<const SectorLabels> blocks,
                                                const BlockSolveOptions& opt = {}) {
    std::vector<SpectralDecomposition> parts;
    std::vector<SymmetricBasis> bases;
    Eigen::Index total = 0;
    std::size_t sector_dim = 0;
    for (const auto& labels : blocks) {
        if (labels.m_z != m_z) throw Error(ErrorKind::InvalidArgument, "block " + to_string(labels) + " is outside m_z");
        bases.push_back(build_symmetric_basis(length, labels, opt.cap));
        sector_dim = bases.back().sector_dim();
        if (bases.back().dim() == 0) {
            bases.pop_back();
            continue;
        }
        parts.push_back(solve_basis(length, g, bases.back(), opt.cache));
        total += parts.back().size();
    }
    if (bases.empty()) sector_dim = enumerate_sector(length, m_z, opt.cap).size();

    std::vector<std::pair<std::size_t, Eigen::Index>> cols;
    for (std::size_t b = 0; b < parts.size(); ++b)
        for (Eigen::Index j = 0; j < parts[b].size(); ++j) cols.emplace_back(b, j);
    std::stable_sort(cols.begin(), cols.end(), [&](const auto& x, const auto& y) {
        return parts[x.first].energies[x.second] < parts[y.first].energies[y.second];
    });

    SpectralDecomposition out;
    out.block_labels = {m_z, std::nullopt, std::nullopt};
    out.energies.resize(total);
    out.vectors = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(sector_dim), total);
    out.column_labels.reserve(static_cast<std::size_t>(total));
    for (Eigen::Index c = 0; c < total; ++c) {
        const auto [b, j] = cols[static_cast<std::size_t>(c)];
        out.energies[c] = parts[b].energies[j];
        out.column_labels.push_back(parts[b].block_labels);
        const SymmetricBasis& basis = bases[b];
        for (std::size_t i = 0; i < basis.sector_dim(); ++i)
            if (basis.block_index[i] >= 0) out.vectors(static_cast<Eigen::Index>(i), c) =
                basis.amplitude[i] * parts[b].vectors(basis.block_index[i], j);
    }
    return out;
}

/// Every block of the sector.
inline SpectralDecomposition diagonalize_all_blocks(int length, const CouplingVector& g, int m_z,
                                                    const BlockSolveOptions& opt = {}) {
    const auto labels = sector_block_labels(length, m_z, opt.use_spin_flip);
    return diagonalize_blocks(length, g, m_z, labels, opt);
}

}  // namespace relax
