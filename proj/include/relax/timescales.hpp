#pragma once

// Decay rates of <A(t)>, the Srednicki function C(t) and the Kubo function,
// the energy-matched inverse temperature, speed limits, time-averaged
// fluctuations and the spectral form factor.
//
// Conventions. C(t) and C_Kubo(t) are normalized to 1 at t = 0 and are
// cosine series over energy gaps. sigma_G^2 = -C''(0) and
// sigma_K^2 = -C_Kubo''(0); sigma_A^2 is the curvature of the centered
// <A(t)> divided by its initial value, i.e. the rate of a Gaussian
// exp(-sigma^2 t^2 / 2).

#include "relax/error.hpp"
#include "relax/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace relax {

struct RateReport {
    double sigma_A_sq = 0.0;
    double sigma_G_sq = 0.0;
    double sigma_K_sq = 0.0;
    double beta = 0.0;
    double a_zero = 0.0;
    double a_infinity = 0.0;
    double eff_dim_inv = 0.0;
    double state_obs_eff_dim_inv = 0.0;
    double mean_energy = 0.0;
    double energy_variance = 0.0;
    std::size_t support_size = 0;
    std::size_t gap_degeneracies = 0;
};

/// -<[H,[H,A]]> / (<A(0)> - <A(inf)>) in the eigenbasis.
inline double sigma_A_sq(const QuenchData& q) {
    const Eigen::VectorXcd& c = q.coeffs;
    const Eigen::VectorXcd ec = q.energies.cast<cplx>().cwiseProduct(c);
    const Eigen::VectorXcd e2c = q.energies.cast<cplx>().cwiseProduct(ec);
    // sum_jk c_j^* c_k A_jk (E_j - E_k)^2 = c^+ E^2 A c - 2 (Ec)^+ A (Ec) + c^+ A E^2 c
    const cplx num = e2c.dot(q.obs_elements * c) - 2.0 * ec.dot(q.obs_elements * ec) + c.dot(q.obs_elements * e2c);
    const double scale = std::max(1.0, max_abs(q.obs_elements));
    const double spread = q.size() ? q.energies.cwiseAbs().maxCoeff() : 0.0;
    if (std::abs(num.imag()) > 1e-9 * scale * std::max(1.0, spread * spread))
        throw Error(ErrorKind::Numerical, "double commutator has imaginary part " + std::to_string(num.imag()));
    const double den = initial_expectation(q) - diagonal_ensemble_value(q);
    if (std::abs(den) <= 1e-12 * scale)
        throw Error(ErrorKind::DegenerateStart, "<A(0)> equals <A(inf)>; sigma_A is undefined");
    return num.real() / den;
}

/// f(t) = sum_a w_a cos(g_a t) / norm, the shape of both correlation functions.
struct CosineSeries {
    std::vector<double> gaps;
    std::vector<double> weights;
    double norm = 1.0;

    double value(double t) const {
        double s = 0.0;
        for (std::size_t a = 0; a < gaps.size(); ++a) s += weights[a] * std::cos(gaps[a] * t);
        return s / norm;
    }
    double derivative(double t) const {
        double s = 0.0;
        for (std::size_t a = 0; a < gaps.size(); ++a) s -= weights[a] * gaps[a] * std::sin(gaps[a] * t);
        return s / norm;
    }
    /// -f''(0).
    double curvature() const {
        double s = 0.0;
        for (std::size_t a = 0; a < gaps.size(); ++a) s += weights[a] * gaps[a] * gaps[a];
        return s / norm;
    }
    std::vector<double> values(std::span<const double> times) const {
        std::vector<double> out;
        out.reserve(times.size());
        for (double t : times) out.push_back(value(t));
        return out;
    }
};

/// Off-diagonal weights P_jk = |c_j|^2 |c_k|^2 |A_jk|^2 collected as a cosine series.
inline CosineSeries srednicki_series(const QuenchData& q) {
    const Eigen::VectorXd p = q.weights();
    CosineSeries s;
    double total = 0.0;
    for (Eigen::Index j = 0; j < q.size(); ++j)
        for (Eigen::Index k = j + 1; k < q.size(); ++k) {
            const double w = 2.0 * p[j] * p[k] * std::norm(q.obs_elements(j, k));
            if (w == 0.0) continue;
            s.gaps.push_back(q.energies[k] - q.energies[j]);
            s.weights.push_back(w);
            total += w;
        }
    const double diagonal = p.cwiseAbs2().dot(q.obs_elements.diagonal().cwiseAbs2());
    if (total == 0.0 || total <= 1e-14 * (total + diagonal))
        throw Error(ErrorKind::ZeroWeight, "no off-diagonal weight; observable is diagonal on the populated levels");
    s.norm = total;
    return s;
}

inline std::vector<double> srednicki_correlation(const QuenchData& q, std::span<const double> times) {
    return srednicki_series(q).values(times);
}

inline double sigma_G_sq(const QuenchData& q) { return srednicki_series(q).curvature(); }

/// Trace route: tr{D[A,H] D[H,A]} / (tr{(DA)^2} - sum_j p_j^2 A_jj^2), with
/// D = diag(|c_j|^2), built from dense matrix products.
inline double sigma_G_sq_trace(const QuenchData& q) {
    const Eigen::MatrixXcd h = q.energies.cast<cplx>().asDiagonal();
    const Eigen::MatrixXcd d = q.weights().cast<cplx>().asDiagonal();
    const Eigen::MatrixXcd& a = q.obs_elements;
    const Eigen::MatrixXcd ah = a * h - h * a;
    const Eigen::MatrixXcd ha = -ah;
    const double num = (d * ah * d * ha).trace().real();
    const Eigen::MatrixXcd da = d * a;
    double den = (da * da).trace().real();
    for (Eigen::Index j = 0; j < q.size(); ++j) den -= std::norm(d(j, j) * a(j, j));
    if (den <= 0.0) throw Error(ErrorKind::ZeroWeight, "no off-diagonal weight");
    return num / den;
}

struct KuboContext {
    double beta = 0.0;
    Eigen::VectorXd weights;                // e^{-beta E_j} / Z on the restricted set
    std::vector<Eigen::Index> restricted_set;
};

namespace detail {

inline double spectral_width(std::span<const double> e) {
    const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
    return *hi - *lo;
}

/// Normalized Boltzmann weights by log-sum-exp.
inline std::vector<double> boltzmann(std::span<const double> e, double beta) {
    double shift = std::numeric_limits<double>::infinity();
    for (double x : e) shift = std::min(shift, beta * x);
    std::vector<double> w(e.size());
    double z = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) z += (w[j] = std::exp(-(beta * e[j] - shift)));
    for (double& x : w) x /= z;
    return w;
}

inline double thermal_energy(std::span<const double> e, double beta) {
    const auto w = boltzmann(e, beta);
    double s = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) s += w[j] * e[j];
    return s;
}

}  // namespace detail

/// Inverse temperature at which the Gibbs state on the restricted levels has
/// the target energy.
inline double solve_beta(const Eigen::VectorXd& energies, const std::vector<Eigen::Index>& restricted_set,
                         double target_energy) {
    if (restricted_set.empty()) throw Error(ErrorKind::EmptyRestriction, "restricted set is empty");
    std::vector<double> e;
    e.reserve(restricted_set.size());
    for (auto j : restricted_set) e.push_back(energies[j]);
    const double width = detail::spectral_width(e);
    const double lo_e = *std::min_element(e.begin(), e.end());
    const double hi_e = *std::max_element(e.begin(), e.end());
    if (!(target_energy > lo_e && target_energy < hi_e))
        throw Error(ErrorKind::TargetOutOfRange, "target energy " + std::to_string(target_energy) +
                                                     " outside the open interval of restricted energies");
    const double tol = 1e-13 * width;
    const double mean = detail::thermal_energy(e, 0.0);
    if (std::abs(mean - target_energy) <= tol) return 0.0;

    // Thermal energy decreases in beta; sign of beta follows the side of the mean.
    const double sign = target_energy < mean ? 1.0 : -1.0;
    const double beta_max = 1e3 / width;
    double inner = 0.0;
    double outer = 1.0 / width;
    auto past = [&](double b) { return sign * (detail::thermal_energy(e, sign * b) - target_energy) <= 0.0; };
    while (!past(outer)) {
        inner = outer;
        outer *= 2.0;
        if (outer > beta_max) {
            if (!past(beta_max))
                throw Error(ErrorKind::BetaOverflow, "target needs |beta| beyond " + std::to_string(beta_max));
            outer = beta_max;
            break;
        }
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (inner + outer);
        const double r = detail::thermal_energy(e, sign * mid) - target_energy;
        if (std::abs(r) <= tol) return sign * mid;
        (sign * r <= 0.0 ? outer : inner) = mid;
        if (outer - inner <= 1e-17 * outer) break;
    }
    return sign * 0.5 * (inner + outer);
}

/// Restricted set and matched beta for quench data.
inline KuboContext make_kubo_context(const QuenchData& q, double rel_threshold = 1e-12) {
    KuboContext ctx;
    ctx.restricted_set = support_indices(q.coeffs, rel_threshold);
    ctx.beta = solve_beta(q.energies, ctx.restricted_set, q.mean_energy);
    std::vector<double> e;
    for (auto j : ctx.restricted_set) e.push_back(q.energies[j]);
    const auto w = detail::boltzmann(e, ctx.beta);
    ctx.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    return ctx;
}

/// Context with a prescribed beta.
inline KuboContext make_kubo_context(const Eigen::VectorXd& energies, std::vector<Eigen::Index> restricted_set,
                                     double beta) {
    if (restricted_set.empty()) throw Error(ErrorKind::EmptyRestriction, "restricted set is empty");
    KuboContext ctx;
    ctx.beta = beta;
    ctx.restricted_set = std::move(restricted_set);
    std::vector<double> e;
    for (auto j : ctx.restricted_set) e.push_back(energies[j]);
    const auto w = detail::boltzmann(e, beta);
    ctx.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    return ctx;
}

/// Kubo pair weight divided by beta: (rho_j - rho_k) / (beta (E_k - E_j)).
/// Regular at beta = 0 (uniform weights) and at coincident levels (rho_j).
/// The factor 1/beta cancels in the normalized correlation function.
inline double kubo_pair_weight(double beta, double rho_j, double rho_k, double e_j, double e_k, double width) {
    const double x = beta * (e_k - e_j);
    if (std::abs(e_k - e_j) <= 1e-14 * std::max(1.0, width) || std::abs(x) < 1e-300) return rho_j;
    // rho_k = rho_j e^{-x}; pick the form that cannot overflow.
    if (x > 0.0) return -rho_j * std::expm1(-x) / x;
    return rho_k * std::expm1(x) / x;
}

/// Pairs j != k of the restricted set with weights w_jk |A_jk|^2.
inline CosineSeries kubo_series(const Eigen::VectorXd& energies, const Eigen::MatrixXcd& obs, const KuboContext& ctx) {
    const auto& s = ctx.restricted_set;
    if (s.empty()) throw Error(ErrorKind::EmptyRestriction, "restricted set is empty");
    std::vector<double> e;
    for (auto j : s) e.push_back(energies[j]);
    const double width = detail::spectral_width(e);
    CosineSeries out;
    double total = 0.0;
    for (std::size_t a = 0; a < s.size(); ++a)
        for (std::size_t b = a + 1; b < s.size(); ++b) {
            const double w = 2.0 *
                             kubo_pair_weight(ctx.beta, ctx.weights[static_cast<Eigen::Index>(a)],
                                              ctx.weights[static_cast<Eigen::Index>(b)], e[a], e[b], width) *
                             std::norm(obs(s[a], s[b]));
            if (w == 0.0) continue;
            out.gaps.push_back(e[b] - e[a]);
            out.weights.push_back(w);
            total += w;
        }
    if (total == 0.0 || !std::isfinite(total))
        throw Error(ErrorKind::ZeroWeight, "Kubo function vanishes at t = 0 on the restricted set");
    out.norm = total;
    return out;
}

inline std::vector<double> kubo_correlation(const Eigen::VectorXd& energies, const Eigen::MatrixXcd& obs,
                                            const KuboContext& ctx, std::span<const double> times) {
    return kubo_series(energies, obs, ctx).values(times);
}

/// tr{[A, rho][A, H]} / C_Kubo(0) on the restricted set; returns 0 when A
/// commutes with H there.
inline double sigma_K_sq(const Eigen::VectorXd& energies, const Eigen::MatrixXcd& obs, const KuboContext& ctx) {
    try {
        return kubo_series(energies, obs, ctx).curvature();
    } catch (const Error& err) {
        if (err.kind() == ErrorKind::ZeroWeight) return 0.0;
        throw;
    }
}

inline double sigma_K_sq(const QuenchData& q, const KuboContext& ctx) {
    return sigma_K_sq(q.energies, q.obs_elements, ctx);
}

struct SpeedLimitReport {
    double sigma_G = 0.0;
    double sigma_K = 0.0;
    double max_ratio_G = 0.0;  // max_t |dC/dt| / sigma_G
    double max_ratio_K = 0.0;  // max_t |dC_Kubo/dt| / sigma_K
};

inline SpeedLimitReport speed_limit_checks(const QuenchData& q, const KuboContext& ctx, std::span<const double> times) {
    const CosineSeries c = srednicki_series(q);
    const CosineSeries k = kubo_series(q.energies, q.obs_elements, ctx);
    SpeedLimitReport r;
    r.sigma_G = std::sqrt(c.curvature());
    r.sigma_K = std::sqrt(k.curvature());
    for (double t : times) {
        if (r.sigma_G > 0.0) r.max_ratio_G = std::max(r.max_ratio_G, std::abs(c.derivative(t)) / r.sigma_G);
        if (r.sigma_K > 0.0) r.max_ratio_K = std::max(r.max_ratio_K, std::abs(k.derivative(t)) / r.sigma_K);
    }
    return r;
}

/// f(t) = sum_a q_a e^{-i G_a t}.
struct GapSeries {
    std::vector<double> gaps;
    std::vector<cplx> weights;
};

/// <A(t)> as a gap series: G = E_j - E_k, q = c_j^* c_k A_jk.
inline GapSeries expectation_gap_series(const QuenchData& q) {
    GapSeries s;
    for (Eigen::Index j = 0; j < q.size(); ++j)
        for (Eigen::Index k = 0; k < q.size(); ++k) {
            const cplx w = std::conj(q.coeffs[j]) * q.coeffs[k] * q.obs_elements(j, k);
            if (w == cplx{}) continue;
            s.gaps.push_back(q.energies[j] - q.energies[k]);
            s.weights.push_back(w);
        }
    return s;
}

/// C(t) as a gap series over ordered pairs j != k.
inline GapSeries srednicki_gap_series(const QuenchData& q) {
    const CosineSeries c = srednicki_series(q);
    GapSeries s;
    for (std::size_t a = 0; a < c.gaps.size(); ++a) {
        const double half = 0.5 * c.weights[a] / c.norm;
        s.gaps.push_back(c.gaps[a]);
        s.weights.push_back(half);
        s.gaps.push_back(-c.gaps[a]);
        s.weights.push_back(half);
    }
    return s;
}

namespace detail {

/// Merges gaps closer than tol (after sorting), dropping the zero-gap group.
inline GapSeries group_gaps(const GapSeries& s, double tol) {
    std::vector<std::size_t> order(s.gaps.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s.gaps[a] < s.gaps[b]; });
    GapSeries out;
    for (std::size_t i : order) {
        if (std::abs(s.gaps[i]) <= tol) continue;
        if (!out.gaps.empty() && s.gaps[i] - out.gaps.back() <= tol) {
            out.weights.back() += s.weights[i];
        } else {
            out.gaps.push_back(s.gaps[i]);
            out.weights.push_back(s.weights[i]);
        }
    }
    return out;
}

}  // namespace detail

/// (1/T) int_0^T |f(t) - f(inf)|^2 dt where f(inf) is the zero-gap part.
/// T = +infinity gives sum over distinct gaps of |sum of their weights|^2.
inline double time_averaged_fluctuation(const GapSeries& series, double T, double gap_tol = 1e-10) {
    if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "averaging time must be positive");
    const GapSeries g = detail::group_gaps(series, gap_tol);
    double total = 0.0;
    if (std::isinf(T)) {
        for (const auto& w : g.weights) total += std::norm(w);
        return total;
    }
    const std::size_t n = g.gaps.size();
    for (std::size_t a = 0; a < n; ++a) {
        total += std::norm(g.weights[a]);
        for (std::size_t b = a + 1; b < n; ++b) {
            const double x = 0.5 * T * (g.gaps[a] - g.gaps[b]);
            const double sinc = std::sin(x) / x;
            // pair (a,b) plus its mirror (b,a): 2 Re[q_a q_b^* e^{-ix}] sinc(x)
            total += 2.0 * (g.weights[a] * std::conj(g.weights[b]) * std::polar(1.0, -x)).real() * sinc;
        }
    }
    return total;
}

/// |sum_j e^{-i t E_j}|^2 / n^2.
inline std::vector<double> spectral_form_factor(const Eigen::VectorXd& energies, std::span<const double> times) {
    std::vector<double> out;
    out.reserve(times.size());
    const double n = static_cast<double>(energies.size());
    for (double t : times) {
        cplx s{};
        for (Eigen::Index j = 0; j < energies.size(); ++j) s += std::polar(1.0, -t * energies[j]);
        out.push_back(n > 0 ? std::norm(s) / (n * n) : 0.0);
    }
    return out;
}

}  // namespace relax
