#pragma once

// Random-basis Hamiltonians H_U = U H U^+ with U Haar distributed: per-sample
// rates, Monte Carlo ensemble statistics, the exact finite-d Haar averages
// and the annealed (ratio of means) comparison.

#include "relax/error.hpp"
#include "relax/lattice_basis.hpp"
#include "relax/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <random>
#include <vector>

namespace relax {

/// SplitMix64 mixing step.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of sample `index` under a master seed.
inline std::uint64_t sample_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index));
}

using Rng = std::mt19937_64;

/// QR of a complex Ginibre matrix, columns rephased by diag(R)/|diag(R)|.
inline Eigen::MatrixXcd sample_haar_unitary(int d, Rng& rng) {
    if (d < 1) throw Error(ErrorKind::InvalidArgument, "unitary dimension must be positive");
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    Eigen::MatrixXcd z(d, d);
    for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r) {
            const double re = normal(rng);
            const double im = normal(rng);
            z(r, c) = cplx{re, im};
        }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(d, d);
    const Eigen::MatrixXcd& r = qr.matrixQR();
    for (int c = 0; c < d; ++c) {
        const double mag = std::abs(r(c, c));
        if (mag > 0.0) q.col(c) *= r(c, c) / mag;
    }
    return q;
}

struct SampleRates {
    double sigma_A_sq = 0.0;
    double sigma_G_num = 0.0;  // f = sum_jk p_j p_k |A'_jk|^2 (E_j - E_k)^2
    double sigma_G_den = 0.0;  // g = sum_jk p_j p_k |A'_jk|^2
    double sigma_K_sq = 0.0;
    double sigma_G_sq() const { return sigma_G_num / sigma_G_den; }
};

/// Rates for H_U = U diag(E) U^+, observable A and state phi (all in the
/// reference basis). Eigenvectors of H_U are the columns of U.
inline SampleRates rmt_rates_one_sample(const Eigen::VectorXd& energies, const Eigen::MatrixXcd& obs,
                                        const Eigen::VectorXcd& phi, const Eigen::MatrixXcd& u) {
    const Eigen::Index d = energies.size();
    if (obs.rows() != d || obs.cols() != d || phi.size() != d || u.rows() != d || u.cols() != d)
        throw Error(ErrorKind::DimensionMismatch, "Haar sample inputs disagree in dimension");
    const Eigen::VectorXcd c = u.adjoint() * phi;
    const Eigen::MatrixXcd a = u.adjoint() * obs * u;
    const Eigen::VectorXd p = c.cwiseAbs2();
    const double a0 = phi.dot(obs * phi).real();
    const double tr_a2 = obs.cwiseAbs2().sum();

    SampleRates s;
    cplx num_a{};
    double k_num = 0.0;
    for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index j = 0; j < d; ++j) {
            const double gap = energies[j] - energies[k];
            const double w2 = gap * gap;
            const double a2 = std::norm(a(j, k));
            num_a += std::conj(c[j]) * c[k] * a(j, k) * w2;
            s.sigma_G_num += p[j] * p[k] * a2 * w2;
            s.sigma_G_den += p[j] * p[k] * a2;
            k_num += a2 * w2;
        }
    if (std::abs(a0) < 1e-300 || s.sigma_G_den <= 0.0 || tr_a2 <= 0.0)
        throw Error(ErrorKind::SingularDenominator, "Haar sample has a vanishing rate denominator");
    s.sigma_A_sq = num_a.real() / a0;
    s.sigma_K_sq = k_num / tr_a2;
    return s;
}

/// Dense-Hamiltonian variant: H = V diag(E) V^+, so H_U has eigenvectors U V.
inline SampleRates rmt_rates_one_sample_dense(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& obs,
                                              const Eigen::VectorXcd& phi, const Eigen::MatrixXcd& u) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::EigensolverFailure, "reference Hamiltonian");
    return rmt_rates_one_sample(solver.eigenvalues(), obs, phi, Eigen::MatrixXcd(u * solver.eigenvectors()));
}

struct MicrocanonicalMoments {
    double h1 = 0.0, h2 = 0.0;  // tr H / d, tr H^2 / d
    double a1 = 0.0, a2 = 0.0;  // tr A / d, tr A^2 / d
    double a0 = 0.0;            // <Phi|A|Phi>
    double a0sq = 0.0;          // <Phi|A^2|Phi>
    int d = 0;

    double energy_variance() const { return h2 - h1 * h1; }
};

inline MicrocanonicalMoments microcanonical_moments(const Eigen::VectorXd& energies, const Eigen::MatrixXcd& obs,
                                                    const Eigen::VectorXcd& phi) {
    MicrocanonicalMoments m;
    m.d = static_cast<int>(energies.size());
    const double d = m.d;
    m.h1 = energies.sum() / d;
    m.h2 = energies.squaredNorm() / d;
    m.a1 = obs.trace().real() / d;
    m.a2 = obs.cwiseAbs2().sum() / d;
    const Eigen::VectorXcd ap = obs * phi;
    m.a0 = phi.dot(ap).real();
    m.a0sq = ap.squaredNorm();
    return m;
}

struct HaarClosedForms {
    double sigma_A_sq = 0.0;          // exact finite-d average
    double sigma_A_sq_leading = 0.0;  // leading order, O(1/d^2) dropped
    double sigma_G_num = 0.0;         // exact <f>_U
    double sigma_G_den = 0.0;         // exact <g>_U
    double sigma_G_sq_annealed = 0.0; // <f>_U / <g>_U
    double sigma_G_sq_leading = 0.0;
    double sigma_K_sq = 0.0;          // exact
    double universal = 0.0;           // 2 (<H^2>_MC - <H>_MC^2)
};

inline HaarClosedForms haar_closed_forms(const MicrocanonicalMoments& m) {
    if (m.d < 2) throw Error(ErrorKind::InvalidArgument, "closed forms need d >= 2");
    const double d = m.d;
    const double var = m.energy_variance();
    const double a0 = m.a0, a0sq = m.a0sq, a1 = m.a1, a2 = m.a2;
    HaarClosedForms r;
    r.universal = 2.0 * var;
    if (a0 != 0.0) {
        r.sigma_A_sq_leading = 2.0 * var * (a0 - a1) / a0;
        r.sigma_A_sq = d * d / (d * d - 1.0) * r.sigma_A_sq_leading;
        r.sigma_G_sq_leading = r.sigma_A_sq_leading;
    }
    r.sigma_G_num = 2.0 * var / ((d - 1.0) * (d + 1.0) * (d + 2.0) * (d + 3.0)) *
                    (2.0 * (d * d - 1.0) * a0sq + a0 * a0 * (d * d + d + 2.0) - 2.0 * a0 * a1 * d * (3.0 * d + 1.0) +
                     d * ((d + 1.0) * (d + 1.0) * a2 - a1 * a1 * (d - 1.0) * d));
    r.sigma_G_den = (d * (a1 * a1 * d * (d + 1.0) + a2 * (d * (d + 4.0) + 1.0) + 2.0 * (d + 4.0) * a0sq) +
                     a0 * a0 * (d * (d + 5.0) + 2.0) + 2.0 * a0 * a1 * (d - 1.0) * d - 2.0 * a0sq) /
                    (d * (d + 1.0) * (d + 2.0) * (d + 3.0));
    if (r.sigma_G_den != 0.0) r.sigma_G_sq_annealed = r.sigma_G_num / r.sigma_G_den;
    if (a2 != 0.0) r.sigma_K_sq = 2.0 * d * d * (a2 - a1 * a1) * var / ((d * d - 1.0) * a2);
    return r;
}

/// Mean and standard error by Welford accumulation.
class RunningStats {
public:
    void add(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double standard_error() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct HaarEnsembleStats {
    std::size_t n_samples = 0;
    std::size_t discarded = 0;
    std::uint64_t seed = 0;
    int d = 0;
    double mean_sigma_A_sq = 0.0, stderr_sigma_A_sq = 0.0;
    double mean_sigma_G_sq = 0.0, stderr_sigma_G_sq = 0.0;  // mean of f/g
    double mean_sigma_K_sq = 0.0, stderr_sigma_K_sq = 0.0;
    double mean_sigma_G_num = 0.0, stderr_sigma_G_num = 0.0;
    double mean_sigma_G_den = 0.0, stderr_sigma_G_den = 0.0;
    HaarClosedForms closed;
    MicrocanonicalMoments moments;
    std::vector<SampleRates> samples;  // kept when requested
};

/// Monte Carlo over n Haar samples. Sample i uses its own generator seeded by
/// sample_seed(seed, i), so results do not depend on the thread count.
inline HaarEnsembleStats haar_ensemble(const Eigen::VectorXd& energies, const Eigen::MatrixXcd& obs,
                                       const Eigen::VectorXcd& phi, std::size_t n, std::uint64_t seed,
                                       int threads = 1, bool keep_samples = false) {
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 Haar samples");
    const int d = static_cast<int>(energies.size());
    std::vector<SampleRates> rates(n);
    std::vector<char> ok(n, 0);
    parallel_for(n, threads, [&](std::size_t i) {
        Rng rng(sample_seed(seed, i));
        const Eigen::MatrixXcd u = sample_haar_unitary(d, rng);
        try {
            rates[i] = rmt_rates_one_sample(energies, obs, phi, u);
            ok[i] = 1;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SingularDenominator) throw;
        }
    });
    HaarEnsembleStats st;
    st.seed = seed;
    st.d = d;
    RunningStats sa, sg, sk, gn, gd;
    for (std::size_t i = 0; i < n; ++i) {
        if (!ok[i]) {
            ++st.discarded;
            continue;
        }
        sa.add(rates[i].sigma_A_sq);
        sg.add(rates[i].sigma_G_sq());
        sk.add(rates[i].sigma_K_sq);
        gn.add(rates[i].sigma_G_num);
        gd.add(rates[i].sigma_G_den);
    }
    st.n_samples = sa.count();
    st.mean_sigma_A_sq = sa.mean();
    st.stderr_sigma_A_sq = sa.standard_error();
    st.mean_sigma_G_sq = sg.mean();
    st.stderr_sigma_G_sq = sg.standard_error();
    st.mean_sigma_K_sq = sk.mean();
    st.stderr_sigma_K_sq = sk.standard_error();
    st.mean_sigma_G_num = gn.mean();
    st.stderr_sigma_G_num = gn.standard_error();
    st.mean_sigma_G_den = gd.mean();
    st.stderr_sigma_G_den = gd.standard_error();
    st.moments = microcanonical_moments(energies, obs, phi);
    st.closed = haar_closed_forms(st.moments);
    if (keep_samples) {
        for (std::size_t i = 0; i < n; ++i)
            if (ok[i]) st.samples.push_back(rates[i]);
    }
    return st;
}

struct AnnealedReport {
    double mean_of_ratio = 0.0;
    double ratio_of_means = 0.0;
    double abs_difference = 0.0;
    double normalized_difference = 0.0;
};

/// <f/g> against <f>/<g> over paired samples.
inline AnnealedReport annealed_statistics(std::span<const double> f, std::span<const double> g) {
    if (f.size() != g.size() || f.empty()) throw Error(ErrorKind::InvalidArgument, "need paired nonempty samples");
    double sr = 0.0, sf = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        sr += f[i] / g[i];
        sf += f[i];
        sg += g[i];
    }
    const double n = static_cast<double>(f.size());
    AnnealedReport r;
    r.mean_of_ratio = sr / n;
    r.ratio_of_means = sf / sg;
    r.abs_difference = std::abs(r.mean_of_ratio - r.ratio_of_means);
    r.normalized_difference = r.ratio_of_means != 0.0 ? r.abs_difference / std::abs(r.ratio_of_means) : 0.0;
    return r;
}

inline AnnealedReport annealed_check(const Eigen::VectorXd& energies, const Eigen::MatrixXcd& obs,
                                     const Eigen::VectorXcd& phi, std::size_t n, std::uint64_t seed, int threads = 1) {
    const HaarEnsembleStats st = haar_ensemble(energies, obs, phi, n, seed, threads, true);
    std::vector<double> f, g;
    for (const auto& s : st.samples) {
        f.push_back(s.sigma_G_num);
        g.push_back(s.sigma_G_den);
    }
    return annealed_statistics(f, g);
}

}  // namespace relax
