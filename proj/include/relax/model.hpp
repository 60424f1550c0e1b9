#pragma once

// Next-nearest-neighbour Heisenberg chain with periodic boundaries,
//
//   H = sum_j J1 (S+_j S-_{j+1} + h.c.) + g1 Z_j Z_{j+1}
//           + J2 (S+_j S-_{j+2} + h.c.) + g2 Z_j Z_{j+2},
//
// with Z = |up><up| - |dn><dn| (eigenvalues +-1) and S+ = |up><dn|, plus the
// two observables and three initial states used for the quench study.

#include "relax/error.hpp"
#include "relax/lattice_basis.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>

namespace relax {

struct CouplingVector {
    double J1 = -1.0;
    double gamma1 = 1.0;
    double J2 = -0.2;
    double gamma2 = 0.5;

    /// Parameter-sweep rule: (J1, J1 Delta / 2, J2, J2 Delta / 2) with J2 = J1 / 2.7.
    static CouplingVector sweep_point(double j1, double delta) {
        const double j2 = j1 / 2.7;
        return {j1, j1 * delta / 2.0, j2, j2 * delta / 2.0};
    }

    CouplingVector scaled(double c) const { return {c * J1, c * gamma1, c * J2, c * gamma2}; }

    bool finite() const {
        return std::isfinite(J1) && std::isfinite(gamma1) && std::isfinite(J2) && std::isfinite(gamma2);
    }

    friend bool operator==(const CouplingVector&, const CouplingVector&) = default;
};

/// Calls emit(target, amplitude) for every nonzero <target|H|c>, diagonal included.
template <typename Emit>
void apply_hamiltonian(Bits c, int length, const CouplingVector& g, Emit&& emit) {
    double diagonal = 0.0;
    const double hop[2] = {g.J1, g.J2};
    const double zz[2] = {g.gamma1, g.gamma2};
    for (int j = 0; j < length; ++j) {
        for (int range = 1; range <= 2; ++range) {
            const int i = (j + range) % length;
            const bool a = (c >> j) & 1U;
            const bool b = (c >> i) & 1U;
            diagonal += zz[range - 1] * (a == b ? 1.0 : -1.0);
            if (a != b && hop[range - 1] != 0.0) {
                emit(c ^ ((Bits{1} << j) | (Bits{1} << i)), hop[range - 1]);
            }
        }
    }
    if (diagonal != 0.0) emit(c, diagonal);
}

inline Eigen::MatrixXcd build_hamiltonian(int length, const CouplingVector& g, const SymmetricBasis& basis) {
    if (length < 4) throw Error(ErrorKind::InvalidArgument, "Hamiltonian needs L >= 4");
    if (length != basis.length) throw Error(ErrorKind::DimensionMismatch, "basis built for a different L");
    if (!g.finite()) throw Error(ErrorKind::InvalidArgument, "couplings must be finite");
    const auto dim = static_cast<Eigen::Index>(basis.dim());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t i = 0; i < basis.sector_dim(); ++i) {
        const auto col = basis.block_index[i];
        if (col < 0) continue;
        const cplx a_in = basis.amplitude[i];
        apply_hamiltonian(basis.sector_states[i], length, g, [&](Bits target, double amp) {
            const auto j = basis.sector_index(target);
            const auto row = basis.block_index[j];
            if (row < 0) return;
            h(row, col) += std::conj(basis.amplitude[j]) * amp * a_in;
        });
    }
    return h;
}

enum class ObservableKind { A1Site, A2NearestZZ, Custom };

struct ObservableSpec {
    ObservableKind kind = ObservableKind::A1Site;
    int site = 0;  // A1Site only; site 0 is the first site of the chain
    std::function<Eigen::MatrixXcd(const SymmetricBasis&)> custom;

    static ObservableSpec a1(int site = 0) { return {ObservableKind::A1Site, site, {}}; }
    static ObservableSpec a2() { return {ObservableKind::A2NearestZZ, 0, {}}; }
};

inline std::string to_string(const ObservableSpec& spec) {
    switch (spec.kind) {
        case ObservableKind::A1Site: return "A1(site=" + std::to_string(spec.site) + ")";
        case ObservableKind::A2NearestZZ: return "A2";
        case ObservableKind::Custom: return "custom";
    }
    return "?";
}

/// Value of a diagonal observable on one configuration.
inline double observable_value(const ObservableSpec& spec, Bits c, int length) {
    switch (spec.kind) {
        case ObservableKind::A1Site:
            return ((c >> spec.site) & 1U) ? 1.0 : -1.0;
        case ObservableKind::A2NearestZZ: {
            int sum = 0;
            for (int j = 0; j < length; ++j) {
                const int i = (j + 1) % length;
                sum += (((c >> j) & 1U) == ((c >> i) & 1U)) ? 1 : -1;
            }
            return static_cast<double>(sum) / length;
        }
        case ObservableKind::Custom: break;
    }
    throw Error(ErrorKind::InvalidArgument, "custom observables have no configuration-diagonal form");
}

inline void check_observable_fits_basis(int length, const ObservableSpec& spec, const SymmetricBasis& basis) {
    if (length != basis.length) throw Error(ErrorKind::DimensionMismatch, "basis built for a different L");
    if (spec.kind == ObservableKind::A1Site) {
        if (spec.site < 0 || spec.site >= length)
            throw Error(ErrorKind::InvalidArgument, "A1 site out of range");
        if (!basis.is_plain_sector())
            throw Error(ErrorKind::SymmetryMismatch,
                        "single-site observable breaks translation/spin-flip symmetry; use a plain m_z basis");
    }
}

/// Diagonal of a configuration-diagonal observable in the given basis. Only
/// valid for observables commuting with the basis symmetries (checked).
inline Eigen::VectorXd observable_diagonal(int length, const ObservableSpec& spec, const SymmetricBasis& basis) {
    check_observable_fits_basis(length, spec, basis);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.dim()));
    for (std::size_t i = 0; i < basis.sector_dim(); ++i) {
        const auto b = basis.block_index[i];
        if (b < 0) continue;
        diag[b] += std::norm(basis.amplitude[i]) * observable_value(spec, basis.sector_states[i], length);
    }
    return diag;
}

inline Eigen::MatrixXcd build_observable(int length, const ObservableSpec& spec, const SymmetricBasis& basis) {
    if (spec.kind == ObservableKind::Custom) {
        if (!spec.custom) throw Error(ErrorKind::InvalidArgument, "custom observable has no matrix provider");
        Eigen::MatrixXcd m = spec.custom(basis);
        if (m.rows() != static_cast<Eigen::Index>(basis.dim()) || m.cols() != m.rows())
            throw Error(ErrorKind::DimensionMismatch, "custom observable has the wrong shape");
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
            throw Error(ErrorKind::NonHermitian, "custom observable is not Hermitian");
        return m;
    }
    return observable_diagonal(length, spec, basis).cast<cplx>().asDiagonal();
}

enum class InitialStateKind { Neel, NeelCat, DomainWallTI, Custom };

struct InitialStateSpec {
    InitialStateKind kind = InitialStateKind::Neel;
    std::function<Eigen::VectorXcd(const SymmetricBasis&)> custom;

    static InitialStateSpec neel() { return {InitialStateKind::Neel, {}}; }
    static InitialStateSpec neel_cat() { return {InitialStateKind::NeelCat, {}}; }
    static InitialStateSpec domain_wall() { return {InitialStateKind::DomainWallTI, {}}; }
};

inline std::string to_string(const InitialStateSpec& spec) {
    switch (spec.kind) {
        case InitialStateKind::Neel: return "neel";
        case InitialStateKind::NeelCat: return "neel_cat";
        case InitialStateKind::DomainWallTI: return "domain_wall";
        case InitialStateKind::Custom: return "custom";
    }
    return "?";
}

/// |up dn up dn ...> with the first site up.
inline Bits neel_bits(int length) {
    Bits c = 0;
    for (int j = 0; j < length; j += 2) c |= Bits{1} << j;
    return c;
}

/// |up ... up dn ... dn> with the first L/2 sites up.
inline Bits domain_wall_bits(int length) { return (Bits{1} << (length / 2)) - 1; }

/// Amplitudes of a paper initial state in the plain m_z = 0 sector.
inline Eigen::VectorXcd sector_initial_state(int length, InitialStateKind kind, const SymmetricBasis& basis) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.sector_dim()));
    auto add = [&](Bits c, double amp) {
        const auto i = basis.sector_index(c);
        if (i < 0) throw Error(ErrorKind::SupportOutsideBasis, "initial state leaves the m_z sector of the basis");
        v[i] += amp;
    };
    switch (kind) {
        case InitialStateKind::Neel:
            add(neel_bits(length), 1.0);
            break;
        case InitialStateKind::NeelCat:
            add(neel_bits(length), 1.0 / std::sqrt(2.0));
            add(flip_all(neel_bits(length), length), 1.0 / std::sqrt(2.0));
            break;
        case InitialStateKind::DomainWallTI:
            for (int r = 0; r < length; ++r) add(translate(domain_wall_bits(length), length, r), 1.0 / std::sqrt(length));
            break;
        case InitialStateKind::Custom:
            throw Error(ErrorKind::InvalidArgument, "custom states are supplied by their provider");
    }
    return v;
}

inline Eigen::VectorXcd build_initial_state(int length, const InitialStateSpec& spec, const SymmetricBasis& basis) {
    if (length != basis.length) throw Error(ErrorKind::DimensionMismatch, "basis built for a different L");
    Eigen::VectorXcd v;
    if (spec.kind == InitialStateKind::Custom) {
        if (!spec.custom) throw Error(ErrorKind::InvalidArgument, "custom state has no provider");
        v = spec.custom(basis);
        if (v.size() != static_cast<Eigen::Index>(basis.dim()))
            throw Error(ErrorKind::DimensionMismatch, "custom state has the wrong length");
        if (std::abs(v.norm() - 1.0) > 1e-10) throw Error(ErrorKind::InvalidArgument, "custom state is not normalized");
        return v;
    }
    if (length % 2 != 0) throw Error(ErrorKind::InvalidArgument, "paper initial states need even L");
    if (basis.labels.m_z != 0)
        throw Error(ErrorKind::SupportOutsideBasis, "paper initial states live in the m_z = 0 sector");
    const Eigen::VectorXcd full = sector_initial_state(length, spec.kind, basis);
    v = project_vector(full, basis);
    if (std::abs(v.norm() - 1.0) > 1e-10)
        throw Error(ErrorKind::SupportOutsideBasis, to_string(spec) + " has weight outside block " +
                                                         to_string(basis.labels) + " (captured norm " +
                                                         std::to_string(v.norm()) + ")");
    return v;
}

}  // namespace relax
