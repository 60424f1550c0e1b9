#pragma once

// Hermitian eigendecomposition, the energy-eigenbasis quench data (E_j, c_j,
// A_jk) every rate formula consumes, and exact time evolution by spectral
// phases.

#include "relax/error.hpp"
#include "relax/lattice_basis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace relax {

struct SpectralDecomposition {
    Eigen::VectorXd energies;           // ascending
    Eigen::MatrixXcd vectors;           // columns are eigenvectors
    SectorLabels block_labels;          // basis the vectors are expressed in
    std::vector<SectorLabels> column_labels;  // symmetry block each eigenvector came from

    Eigen::Index size() const { return energies.size(); }
};

inline double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline SpectralDecomposition diagonalize(const Eigen::MatrixXcd& h, const SectorLabels& labels = {}) {
    if (h.rows() != h.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix is not square");
    const double scale = std::max(1.0, max_abs(h));
    if (max_abs(h - h.adjoint()) > 1e-10 * scale)
        throw Error(ErrorKind::NonHermitian, "matrix for block " + to_string(labels) + " is not Hermitian");

    SpectralDecomposition out;
    out.block_labels = labels;
    if (h.size() == 0) return out;
    if (h.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.real());
        if (solver.info() != Eigen::Success)
            throw Error(ErrorKind::EigensolverFailure, "real eigensolver failed for block " + to_string(labels));
        out.energies = solver.eigenvalues();
        out.vectors = solver.eigenvectors().cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
        if (solver.info() != Eigen::Success)
            throw Error(ErrorKind::EigensolverFailure, "complex eigensolver failed for block " + to_string(labels));
        out.energies = solver.eigenvalues();
        out.vectors = solver.eigenvectors();
    }
    out.column_labels.assign(static_cast<std::size_t>(out.energies.size()), labels);
    return out;
}

/// Quench substrate in the energy eigenbasis. When built on the support of
/// the state only, `eigen_index` maps rows back to decomposition columns.
struct QuenchData {
    Eigen::VectorXd energies;
    Eigen::VectorXcd coeffs;       // c_j = <E_j|Psi>
    Eigen::MatrixXcd obs_elements; // A_jk = <E_j|A|E_k>
    double mean_energy = 0.0;
    double energy_variance = 0.0;
    std::vector<Eigen::Index> eigen_index;

    Eigen::Index size() const { return energies.size(); }
    Eigen::VectorXd weights() const { return coeffs.cwiseAbs2(); }
};

struct DiagonalEnsemble {
    Eigen::VectorXd weights;
};

inline DiagonalEnsemble diagonal_ensemble(const QuenchData& q) { return {q.weights()}; }

namespace detail {

inline void fill_energy_moments(QuenchData& q) {
    const Eigen::VectorXd w = q.weights();
    q.mean_energy = w.dot(q.energies);
    const double second = w.dot(q.energies.cwiseAbs2());
    q.energy_variance = std::max(0.0, second - q.mean_energy * q.mean_energy);
}

inline void check_state(const SpectralDecomposition& spec, const Eigen::VectorXcd& state) {
    if (state.size() != spec.vectors.rows())
        throw Error(ErrorKind::DimensionMismatch, "state length " + std::to_string(state.size()) +
                                                      " != eigenvector length " + std::to_string(spec.vectors.rows()));
}

inline Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace detail

inline QuenchData make_quench_data(const SpectralDecomposition& spec, const Eigen::VectorXcd& state,
                                   const Eigen::MatrixXcd& obs) {
    detail::check_state(spec, state);
    if (obs.rows() != spec.vectors.rows() || obs.cols() != obs.rows())
        throw Error(ErrorKind::DimensionMismatch, "observable shape does not match eigenvectors");
    QuenchData q;
    q.energies = spec.energies;
    q.coeffs = spec.vectors.adjoint() * state;
    q.obs_elements = detail::hermitize(spec.vectors.adjoint() * obs * spec.vectors);
    q.eigen_index.resize(static_cast<std::size_t>(spec.size()));
    std::iota(q.eigen_index.begin(), q.eigen_index.end(), Eigen::Index{0});
    detail::fill_energy_moments(q);
    return q;
}

/// Indices of eigenstates with |c_j|^2 > rel_threshold * max_j |c_j|^2.
inline std::vector<Eigen::Index> support_indices(const Eigen::VectorXcd& coeffs, double rel_threshold = 1e-12) {
    std::vector<Eigen::Index> idx;
    if (coeffs.size() == 0) return idx;
    const Eigen::VectorXd w = coeffs.cwiseAbs2();
    const double cut = rel_threshold * w.maxCoeff();
    for (Eigen::Index j = 0; j < w.size(); ++j)
        if (w[j] > cut) idx.push_back(j);
    return idx;
}

/// Quench data restricted to the eigenstates the state actually populates.
/// Every rate formula weights pairs by c_j c_k, so dropped rows contribute
/// nothing beyond the threshold. `obs_diagonal` is the observable's diagonal
/// in the basis of spec.vectors (configuration-diagonal observables).
inline QuenchData make_quench_data_on_support(const SpectralDecomposition& spec, const Eigen::VectorXcd& state,
                                              const Eigen::VectorXd& obs_diagonal,
                                              double rel_threshold = 1e-12) {
    detail::check_state(spec, state);
    if (obs_diagonal.size() != spec.vectors.rows())
        throw Error(ErrorKind::DimensionMismatch, "observable diagonal length does not match eigenvectors");
    const Eigen::VectorXcd all = spec.vectors.adjoint() * state;
    const auto idx = support_indices(all, rel_threshold);
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXcd vs(spec.vectors.rows(), m);
    QuenchData q;
    q.energies.resize(m);
    q.coeffs.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        vs.col(j) = spec.vectors.col(idx[j]);
        q.energies[j] = spec.energies[idx[j]];
        q.coeffs[j] = all[idx[j]];
    }
    q.obs_elements = detail::hermitize(vs.adjoint() * (obs_diagonal.cast<cplx>().asDiagonal() * vs));
    q.eigen_index = idx;
    detail::fill_energy_moments(q);
    return q;
}

/// Dense-observable variant of make_quench_data_on_support.
inline QuenchData make_quench_data_on_support(const SpectralDecomposition& spec, const Eigen::VectorXcd& state,
                                              const Eigen::MatrixXcd& obs, double rel_threshold = 1e-12) {
    detail::check_state(spec, state);
    if (obs.rows() != spec.vectors.rows() || obs.cols() != obs.rows())
        throw Error(ErrorKind::DimensionMismatch, "observable shape does not match eigenvectors");
    const Eigen::VectorXcd all = spec.vectors.adjoint() * state;
    const auto idx = support_indices(all, rel_threshold);
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXcd vs(spec.vectors.rows(), m);
    QuenchData q;
    q.energies.resize(m);
    q.coeffs.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        vs.col(j) = spec.vectors.col(idx[j]);
        q.energies[j] = spec.energies[idx[j]];
        q.coeffs[j] = all[idx[j]];
    }
    q.obs_elements = detail::hermitize(vs.adjoint() * obs * vs);
    q.eigen_index = idx;
    detail::fill_energy_moments(q);
    return q;
}

/// Drops eigenstates below the weight threshold from existing quench data.
inline QuenchData restrict_to_support(const QuenchData& q, double rel_threshold = 1e-12) {
    const auto idx = support_indices(q.coeffs, rel_threshold);
    const auto m = static_cast<Eigen::Index>(idx.size());
    QuenchData r;
    r.energies.resize(m);
    r.coeffs.resize(m);
    r.obs_elements.resize(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        r.energies[a] = q.energies[idx[a]];
        r.coeffs[a] = q.coeffs[idx[a]];
        for (Eigen::Index b = 0; b < m; ++b) r.obs_elements(a, b) = q.obs_elements(idx[a], idx[b]);
        r.eigen_index.push_back(q.eigen_index.empty() ? idx[a] : q.eigen_index[idx[a]]);
    }
    detail::fill_energy_moments(r);
    return r;
}

/// <A(t)> = <Psi| e^{-iHt} A e^{iHt} |Psi> = sum_jk c_j^* c_k A_jk e^{-i(E_j - E_k)t}.
inline std::vector<double> expectation_timeseries(const QuenchData& q, std::span<const double> times) {
    std::vector<double> out;
    out.reserve(times.size());
    const double scale = std::max(1.0, max_abs(q.obs_elements));
    Eigen::VectorXcd w(q.size());
    for (double t : times) {
        for (Eigen::Index j = 0; j < q.size(); ++j) w[j] = q.coeffs[j] * std::polar(1.0, q.energies[j] * t);
        const cplx value = w.dot(q.obs_elements * w);
        if (std::abs(value.imag()) > 1e-9 * scale)
            throw Error(ErrorKind::Numerical, "expectation value has imaginary part " + std::to_string(value.imag()));
        out.push_back(value.real());
    }
    return out;
}

/// <A(0)> = <Psi|A|Psi>.
inline double initial_expectation(const QuenchData& q) { return q.coeffs.dot(q.obs_elements * q.coeffs).real(); }

/// Diagonal-ensemble value sum_j |c_j|^2 A_jj.
inline double diagonal_ensemble_value(const QuenchData& q) {
    return q.weights().dot(q.obs_elements.diagonal().real());
}

/// Number of adjacent eigenvalue pairs closer than tol.
inline std::size_t count_energy_degeneracies(const Eigen::VectorXd& energies, double tol = 1e-9) {
    std::vector<double> e(energies.data(), energies.data() + energies.size());
    std::sort(e.begin(), e.end());
    std::size_t n = 0;
    for (std::size_t i = 1; i < e.size(); ++i)
        if (e[i] - e[i - 1] < tol) ++n;
    return n;
}

/// Number of coincident positive gaps E_k - E_j (j < k), adjacent in sorted
/// order and closer than tol. Zero means the nondegenerate-gap assumption holds.
inline std::size_t count_gap_degeneracies(const Eigen::VectorXd& energies, double tol = 1e-9) {
    std::vector<double> e(energies.data(), energies.data() + energies.size());
    std::sort(e.begin(), e.end());
    std::vector<double> gaps;
    gaps.reserve(e.size() * (e.size() - (e.empty() ? 0 : 1)) / 2);
    for (std::size_t j = 0; j < e.size(); ++j)
        for (std::size_t k = j + 1; k < e.size(); ++k) gaps.push_back(e[k] - e[j]);
    std::sort(gaps.begin(), gaps.end());
    std::size_t n = 0;
    for (std::size_t i = 1; i < gaps.size(); ++i)
        if (gaps[i] - gaps[i - 1] < tol) ++n;
    return n;
}

}  // namespace relax
