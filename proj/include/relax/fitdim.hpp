#pragma once

// Early-time fits of <A(t)> with the normalized L1 discrepancy
// Dbar(tau) = ||<A(t)> - f(t)||_1 / ||<A(t)>||_1 on the grid t = n dt <= tau,
// and the two effective dimensions of a quench.

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

enum class FitModel { Gaussian, Quadratic };

inline const char* to_string(FitModel m) { return m == FitModel::Gaussian ? "gaussian" : "quadratic"; }

struct FitResult {
    FitModel model = FitModel::Gaussian;
    double rate_sq = 0.0;    // sigma^2
    double amplitude = 0.0;  // <A(0)> - <A(inf)>
    double offset = 0.0;     // <A(inf)>
    std::vector<double> tau;
    std::vector<double> dbar;
    bool sign_flip = false;  // centered series changed sign in the fit window
    int iterations = 0;

    /// a_inf + amp exp(-s t^2/2), or a_inf + amp (1 - s t^2/2).
    double model_value(double t) const {
        const double x = 0.5 * t * t;
        return offset + amplitude * (model == FitModel::Gaussian ? std::exp(-rate_sq * x) : 1.0 - rate_sq * x);
    }
};

struct FitOptions {
    double dt = 0.01;
    double tau_fit = 0.5;
    std::vector<double> tau_grid;  // empty -> {tau_fit}
};

/// Number of grid points t = n dt with t <= tau.
inline std::size_t points_up_to(double tau, double dt, std::size_t available) {
    const auto n = static_cast<std::size_t>(std::floor(tau / dt + 1e-9)) + 1;
    return std::min(n, available);
}

/// Dbar on the first n points.
inline double fit_discrepancy(std::span<const double> series, double dt, std::size_t n, const FitResult& fit) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += std::abs(series[i] - fit.model_value(dt * static_cast<double>(i)));
        den += std::abs(series[i]);
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

namespace detail {

inline double gaussian_objective(std::span<const double> u, std::span<const double> x, double amp, double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = u[i] - amp * std::exp(-s * x[i]);
        acc += r * r;
    }
    return acc;
}

}  // namespace detail

/// Least-squares fit of the amplitude-pinned Gaussian or quadratic on
/// [0, tau_fit]. The series starts at t = 0 and is sampled every dt.
inline FitResult fit_early_decay(std::span<const double> series, double a_inf, FitModel model,
                                 const FitOptions& opt = {}) {
    if (!(opt.dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
    const std::size_t n = points_up_to(opt.tau_fit, opt.dt, series.size());
    if (n < 5)
        throw Error(ErrorKind::TooFewPoints, "fit window holds " + std::to_string(n) + " points, need at least 5");

    FitResult fit;
    fit.model = model;
    fit.offset = a_inf;
    fit.amplitude = series[0] - a_inf;
    const double amp = fit.amplitude;

    std::vector<double> u(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = opt.dt * static_cast<double>(i);
        u[i] = series[i] - a_inf;
        x[i] = 0.5 * t * t;
        if (amp != 0.0 && u[i] / amp <= 0.0) fit.sign_flip = true;
    }

    if (amp != 0.0) {
        // Quadratic: u = amp (1 - s x), linear in s.
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sxy += (amp - u[i]) * amp * x[i];
            sxx += amp * x[i] * amp * x[i];
        }
        const double s_quad = sxx > 0.0 ? sxy / sxx : 0.0;
        if (model == FitModel::Quadratic) {
            fit.rate_sq = s_quad;
        } else {
            double s = std::max(0.0, s_quad);
            if (!fit.sign_flip) {
                // Log-linear seed: ln(u/amp) = -s x.
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    num -= std::log(u[i] / amp) * x[i];
                    den += x[i] * x[i];
                }
                if (den > 0.0) s = std::max(0.0, num / den);
            }
            double obj = detail::gaussian_objective(u, x, amp, s);
            for (int it = 0; it < 200; ++it) {
                fit.iterations = it + 1;
                double g = 0.0, h = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double e = amp * std::exp(-s * x[i]);
                    const double r = u[i] - e;
                    const double dr = x[i] * e;  // d r / d s
                    g += dr * r;
                    h += dr * dr;
                }
                if (h == 0.0) break;
                double step = -g / h;
                double trial = std::max(0.0, s + step);
                double trial_obj = detail::gaussian_objective(u, x, amp, trial);
                int halvings = 0;
                while (trial_obj > obj && halvings < 60) {
                    step *= 0.5;
                    trial = std::max(0.0, s + step);
                    trial_obj = detail::gaussian_objective(u, x, amp, trial);
                    ++halvings;
                }
                if (trial_obj > obj) break;
                const double moved = std::abs(trial - s);
                s = trial;
                obj = trial_obj;
                if (moved <= 1e-15 * std::max(1.0, s)) break;
            }
            fit.rate_sq = s;
        }
    }

    fit.tau = opt.tau_grid.empty() ? std::vector<double>{opt.tau_fit} : opt.tau_grid;
    for (double tau : fit.tau) {
        const std::size_t m = points_up_to(tau, opt.dt, series.size());
        fit.dbar.push_back(fit_discrepancy(series, opt.dt, m, fit));
    }
    return fit;
}

struct EffectiveDimensions {
    double d_phi_inv = 0.0;    // sum_j |c_j|^4
    double d_phi_A_inv = 0.0;  // sum_{j != k} |c_j|^2 |c_k|^2 |A_jk|^2
};

/// Largest |eigenvalue| of a Hermitian matrix.
inline double operator_norm(const Eigen::MatrixXcd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Both effective dimensions. The bound d_phi_A_inv <= ||A||^2 d_phi_inv is
/// checked with ||A|| taken from obs_norm, or from the stored block of A when
/// obs_norm is negative (a compression never exceeds the full norm).
inline EffectiveDimensions effective_dimensions(const QuenchData& q, double obs_norm = -1.0) {
    const Eigen::VectorXd p = q.weights();
    EffectiveDimensions d;
    d.d_phi_inv = p.squaredNorm();
    for (Eigen::Index j = 0; j < q.size(); ++j)
        for (Eigen::Index k = 0; k < q.size(); ++k)
            if (j != k) d.d_phi_A_inv += p[j] * p[k] * std::norm(q.obs_elements(j, k));
    const double norm = obs_norm >= 0.0 ? obs_norm : operator_norm(q.obs_elements);
    if (d.d_phi_A_inv > norm * norm * d.d_phi_inv * (1.0 + 1e-10) + 1e-300)
        throw Error(ErrorKind::Numerical, "state-observable effective dimension violates its norm bound");
    return d;
}

}  // namespace relax
