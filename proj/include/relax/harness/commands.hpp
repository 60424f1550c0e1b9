#pragma once

// CLI subcommands as library functions. Each writes one or more CSV tables
// into cfg.out and returns their paths; rows are assembled in grid order
// whatever the worker count.

#include "relax/fitdim.hpp"
#include "relax/harness/config.hpp"
#include "relax/harness/csv.hpp"
#include "relax/harness/scenario.hpp"
#include "relax/parallel.hpp"
#include "relax/rmt.hpp"
#include "relax/sector_spectrum.hpp"
#include "relax/timescales.hpp"
#include "relax/version.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace relax::harness {

struct CommandResult {
    std::vector<std::string> files;
    bool ok = true;  // false when a checked property failed
    std::string message;
};

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline void stamp(CsvTable& t, const RunConfig& cfg, const std::string& command) {
    t.meta("command", command);
    t.meta("config_hash", config_hash(cfg));
    t.meta("code_version", kCodeVersion);
    t.meta("seed", std::to_string(cfg.seed));
}

inline std::unique_ptr<SpectralCache> open_cache(const RunConfig& cfg) {
    if (cfg.cache.empty()) return nullptr;
    return std::make_unique<SpectralCache>(cfg.cache);
}

inline std::string emit(const CsvTable& t, const RunConfig& cfg, const std::string& name) {
    const auto path = std::filesystem::path(cfg.out) / name;
    t.write(path);
    return path.string();
}

inline std::vector<double> time_grid(double t_max, double dt) {
    const auto n = static_cast<long>(std::floor(t_max / dt + 1e-9));
    std::vector<double> t;
    t.reserve(static_cast<std::size_t>(n) + 1);
    for (long i = 0; i <= n; ++i) t.push_back(dt * static_cast<double>(i));
    return t;
}

inline long long as_ll(std::size_t x) { return static_cast<long long>(x); }

}  // namespace detail

inline CommandResult cmd_quench(const RunConfig& cfg) {
    using namespace detail;
    const auto cache = open_cache(cfg);
    const auto times = time_grid(cfg.t_max, cfg.dt);

    CsvTable series({"pair", "t", "A", "C", "C_kubo"});
    CsvTable fits({"pair", "model", "tau", "rate_sq", "amplitude", "offset", "dbar", "sign_flip"});
    CsvTable rates({"pair", "L", "sigma_A_sq", "sigma_G_sq", "sigma_K_sq", "beta", "a_zero", "a_infinity",
                    "eff_dim_inv", "state_obs_eff_dim_inv", "mean_energy", "energy_variance", "support_size",
                    "gap_degeneracies", "notes"});
    for (auto* t : {&series, &fits, &rates}) stamp(*t, cfg, "quench");
    std::string failures;

    for (PaperPair pair : cfg.pairs) {
        const PreparedQuench pq = prepare_quench(pair_setup(cfg.L, cfg.couplings, pair, &cfg, cache.get()));
        const QuenchData& q = pq.data;
        std::string notes;
        const RateReport r = compute_rate_report(q, cfg.support_threshold, &notes);

        const auto a = expectation_timeseries(q, times);
        std::vector<double> c(times.size(), kNaN), k(times.size(), kNaN);
        try {
            c = srednicki_correlation(q, times);
        } catch (const Error&) {
        }
        try {
            const KuboContext ctx = make_kubo_context(q, cfg.support_threshold);
            k = kubo_correlation(q.energies, q.obs_elements, ctx, times);
        } catch (const Error&) {
        }
        for (std::size_t i = 0; i < times.size(); ++i) series.row({to_string(pair), times[i], a[i], c[i], k[i]});

        FitOptions fo;
        fo.dt = cfg.dt;
        fo.tau_fit = cfg.tau_fit;
        fo.tau_grid = cfg.tau;
        for (FitModel m : {FitModel::Gaussian, FitModel::Quadratic}) {
            const FitResult f = fit_early_decay(a, r.a_infinity, m, fo);
            for (std::size_t i = 0; i < f.tau.size(); ++i)
                fits.row({to_string(pair), std::string(to_string(m)), f.tau[i], f.rate_sq, f.amplitude, f.offset,
                          f.dbar[i], static_cast<long long>(f.sign_flip)});
        }
        if (!notes.empty()) failures += std::string(to_string(pair)) + ": " + notes + "; ";
        rates.row({to_string(pair), static_cast<long long>(cfg.L), r.sigma_A_sq, r.sigma_G_sq, r.sigma_K_sq, r.beta,
                   r.a_zero, r.a_infinity, r.eff_dim_inv, r.state_obs_eff_dim_inv, r.mean_energy, r.energy_variance,
                   as_ll(r.support_size), as_ll(r.gap_degeneracies), notes});
    }
    CommandResult res;
    res.files.push_back(emit(series, cfg, "quench_timeseries.csv"));
    res.files.push_back(emit(fits, cfg, "quench_fits.csv"));
    res.files.push_back(emit(rates, cfg, "quench_rates.csv"));
    if (!failures.empty()) {
        res.ok = false;
        res.message = "undefined rates: " + failures;
    }
    return res;
}

inline CommandResult cmd_sweep(const RunConfig& cfg) {
    using namespace detail;
    const auto cache = open_cache(cfg);
    const auto j1s = cfg.sweep.j1.values();
    const auto deltas = cfg.sweep.delta.values();
    struct Point {
        PaperPair pair;
        double j1, delta;
        RateReport r;
        std::string error;
    };
    std::vector<Point> pts;
    for (PaperPair pair : cfg.pairs)
        for (double j1 : j1s)
            for (double dl : deltas) pts.push_back({pair, j1, dl, {}, {}});

    parallel_for(pts.size(), cfg.threads, [&](std::size_t i) {
        Point& p = pts[i];
        try {
            const auto g = CouplingVector::sweep_point(p.j1, p.delta);
            const PreparedQuench pq = prepare_quench(pair_setup(cfg.L, g, p.pair, &cfg, cache.get()));
            p.r = compute_rate_report(pq.data, cfg.support_threshold, &p.error);
        } catch (const Error& e) {
            p.r.sigma_A_sq = p.r.sigma_G_sq = p.r.sigma_K_sq = kNaN;
            p.error = e.what();
        }
    });

    CsvTable grid({"pair", "L", "J1", "Delta", "sigma_A_sq", "sigma_G_sq", "sigma_K_sq", "error"});
    CsvTable cut({"pair", "J1", "Delta", "sigma_A_sq", "delta_sigma_A_sq", "normalized_sigma_A_sq"});
    stamp(grid, cfg, "sweep");
    stamp(cut, cfg, "sweep");
    for (const auto& p : pts)
        grid.row({to_string(p.pair), static_cast<long long>(cfg.L), p.j1, p.delta, p.r.sigma_A_sq, p.r.sigma_G_sq,
                  p.r.sigma_K_sq, p.error});

    // Nearest grid J1 to the requested cut.
    double cut_j1 = j1s.front();
    for (double j1 : j1s)
        if (std::abs(j1 - cfg.sweep.cut_j1) < std::abs(cut_j1 - cfg.sweep.cut_j1)) cut_j1 = j1;
    for (PaperPair pair : cfg.pairs) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& p : pts)
            if (p.pair == pair && std::isfinite(p.r.sigma_A_sq)) {
                lo = std::min(lo, p.r.sigma_A_sq);
                hi = std::max(hi, p.r.sigma_A_sq);
            }
        const double spread = hi >= lo ? hi - lo : kNaN;
        for (const auto& p : pts)
            if (p.pair == pair && p.j1 == cut_j1)
                cut.row({to_string(pair), p.j1, p.delta, p.r.sigma_A_sq, spread,
                         spread > 0.0 ? p.r.sigma_A_sq / spread : kNaN});
    }
    CommandResult res;
    res.files.push_back(emit(grid, cfg, "sweep_grid.csv"));
    res.files.push_back(emit(cut, cfg, "sweep_cut.csv"));
    return res;
}

struct LScanPoint {
    int L = 0;
    PaperPair pair = PaperPair::NeelA1;
    RateReport r;
    std::size_t sector_dim = 0;
    std::string notes;
};

inline std::vector<LScanPoint> scan_lengths(const RunConfig& cfg, bool rates) {
    const auto cache = detail::open_cache(cfg);
    std::vector<LScanPoint> pts;
    for (int L : cfg.l_list)
        for (PaperPair pair : cfg.pairs) pts.push_back({L, pair, {}, 0, {}});
    parallel_for(pts.size(), cfg.threads, [&](std::size_t i) {
        auto& p = pts[i];
        const PreparedQuench pq = prepare_quench(pair_setup(p.L, cfg.couplings, p.pair, &cfg, cache.get()));
        p.sector_dim = pq.sector_dim;
        if (rates) {
            p.r = compute_rate_report(pq.data, cfg.support_threshold, &p.notes);
        } else {
            const EffectiveDimensions d = effective_dimensions(pq.data);
            p.r.eff_dim_inv = d.d_phi_inv;
            p.r.state_obs_eff_dim_inv = d.d_phi_A_inv;
            p.r.support_size = static_cast<std::size_t>(pq.data.size());
        }
    });
    return pts;
}

inline CommandResult cmd_ratios(const RunConfig& cfg) {
    using namespace detail;
    CsvTable t({"L", "pair", "sigma_A_sq", "sigma_G_sq", "sigma_K_sq", "ratio_G_A", "ratio_G_K", "eff_dim_inv",
                "state_obs_eff_dim_inv", "beta", "support_size", "gap_degeneracies", "notes"});
    stamp(t, cfg, "ratios");
    CommandResult res;
    for (const auto& p : scan_lengths(cfg, true)) {
        if (!p.notes.empty()) {
            res.ok = false;
            res.message += "L=" + std::to_string(p.L) + " " + to_string(p.pair) + ": " + p.notes + "; ";
        }
        t.row({static_cast<long long>(p.L), to_string(p.pair), p.r.sigma_A_sq, p.r.sigma_G_sq, p.r.sigma_K_sq,
               p.r.sigma_G_sq / p.r.sigma_A_sq, p.r.sigma_G_sq / p.r.sigma_K_sq, p.r.eff_dim_inv,
               p.r.state_obs_eff_dim_inv, p.r.beta, as_ll(p.r.support_size), as_ll(p.r.gap_degeneracies), p.notes});
    }
    res.files.push_back(emit(t, cfg, "ratios.csv"));
    return res;
}

inline CommandResult cmd_effdim(const RunConfig& cfg) {
    using namespace detail;
    CsvTable t({"L", "pair", "eff_dim_inv", "state_obs_eff_dim_inv", "support_size", "sector_dim"});
    stamp(t, cfg, "effdim");
    for (const auto& p : scan_lengths(cfg, false))
        t.row({static_cast<long long>(p.L), to_string(p.pair), p.r.eff_dim_inv, p.r.state_obs_eff_dim_inv,
               as_ll(p.r.support_size), as_ll(p.sector_dim)});
    return {{emit(t, cfg, "effdim.csv")}, true, {}};
}

inline CommandResult cmd_check_bounds(const RunConfig& cfg) {
    using namespace detail;
    const auto cache = open_cache(cfg);
    const auto times = time_grid(cfg.bounds_t_max, cfg.bounds_dt);
    struct Row {
        int L;
        PaperPair pair;
        SpeedLimitReport s;
    };
    std::vector<Row> rows;
    for (int L : cfg.l_list)
        for (PaperPair pair : cfg.pairs) rows.push_back({L, pair, {}});
    parallel_for(rows.size(), cfg.threads, [&](std::size_t i) {
        auto& r = rows[i];
        const PreparedQuench pq = prepare_quench(pair_setup(r.L, cfg.couplings, r.pair, &cfg, cache.get()));
        const KuboContext ctx = make_kubo_context(pq.data, cfg.support_threshold);
        r.s = speed_limit_checks(pq.data, ctx, times);
    });
    CsvTable t({"L", "pair", "sigma_G", "sigma_K", "max_ratio_G", "max_ratio_K", "within_bounds"});
    stamp(t, cfg, "check-bounds");
    CommandResult res;
    for (const auto& r : rows) {
        const bool ok = r.s.max_ratio_G <= 1.0 + 1e-9 && r.s.max_ratio_K <= 1.0 + 1e-9;
        if (!ok) {
            res.ok = false;
            res.message += "speed limit violated at L=" + std::to_string(r.L) + " " + to_string(r.pair) + "; ";
        }
        t.row({static_cast<long long>(r.L), to_string(r.pair), r.s.sigma_G, r.s.sigma_K, r.s.max_ratio_G,
               r.s.max_ratio_K, static_cast<long long>(ok)});
    }
    res.files.push_back(emit(t, cfg, "check_bounds.csv"));
    return res;
}

struct RmtProblem {
    Eigen::VectorXd energies;
    Eigen::MatrixXcd obs;
    Eigen::VectorXcd phi;
};

/// Reference spectrum, observable and state for the Haar ensemble. Gaussian
/// levels are drawn from the generator seeded by splitmix64(seed), disjoint
/// from the per-sample streams; phi is the first reference basis vector.
inline RmtProblem rmt_problem(const RunConfig& cfg) {
    RmtProblem p;
    std::vector<double> site_values;
    if (cfg.rmt.spectrum == "chain") {
        const SymmetricBasis sector = build_symmetric_basis(cfg.L, {0, std::nullopt, std::nullopt}, cfg.max_dim);
        p.energies = diagonalize(build_hamiltonian(cfg.L, cfg.couplings, sector), sector.labels).energies;
        const Eigen::VectorXd a1 = observable_diagonal(cfg.L, ObservableSpec::a1(0), sector);
        site_values.assign(a1.data(), a1.data() + a1.size());
    } else {
        if (static_cast<std::size_t>(cfg.rmt.d) > cfg.max_dim)
            throw Error(ErrorKind::SizeLimit, "rmt.d exceeds max_dim");
        Rng rng(splitmix64(cfg.seed));
        std::normal_distribution<double> normal(0.0, 1.0);
        p.energies.resize(cfg.rmt.d);
        for (int j = 0; j < cfg.rmt.d; ++j) p.energies[j] = normal(rng);
    }
    const auto d = p.energies.size();
    Eigen::VectorXd a(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (cfg.rmt.observable == "site") {
            if (site_values.empty()) throw Error(ErrorKind::Config, "rmt.observable 'site' needs rmt.spectrum 'chain'");
            a[j] = site_values[static_cast<std::size_t>(j)];
        } else {
            a[j] = (j % 2 == 0) ? 1.0 : -1.0;
        }
    }
    p.obs = a.cast<cplx>().asDiagonal();
    p.phi = Eigen::VectorXcd::Zero(d);
    p.phi[0] = 1.0;
    return p;
}

inline CommandResult cmd_rmt(const RunConfig& cfg) {
    using namespace detail;
    const RmtProblem p = rmt_problem(cfg);
    const HaarEnsembleStats st = haar_ensemble(p.energies, p.obs, p.phi, cfg.rmt.samples, cfg.seed, cfg.threads, true);
    std::vector<double> f, g;
    for (const auto& s : st.samples) {
        f.push_back(s.sigma_G_num);
        g.push_back(s.sigma_G_den);
    }
    const AnnealedReport an = annealed_statistics(f, g);
    CsvTable t({"quantity", "mc_mean", "mc_stderr", "closed_form", "z_score"});
    stamp(t, cfg, "rmt");
    t.meta("d", std::to_string(st.d));
    t.meta("n_samples", std::to_string(st.n_samples));
    t.meta("discarded", std::to_string(st.discarded));
    auto row = [&](const std::string& name, double mean, double se, double closed) {
        t.row({name, mean, se, closed, se > 0.0 ? (mean - closed) / se : kNaN});
    };
    row("sigma_A_sq", st.mean_sigma_A_sq, st.stderr_sigma_A_sq, st.closed.sigma_A_sq);
    row("sigma_G_sq", st.mean_sigma_G_sq, st.stderr_sigma_G_sq, st.closed.sigma_G_sq_annealed);
    row("sigma_K_sq", st.mean_sigma_K_sq, st.stderr_sigma_K_sq, st.closed.sigma_K_sq);
    row("sigma_G_num", st.mean_sigma_G_num, st.stderr_sigma_G_num, st.closed.sigma_G_num);
    row("sigma_G_den", st.mean_sigma_G_den, st.stderr_sigma_G_den, st.closed.sigma_G_den);
    row("universal", kNaN, kNaN, st.closed.universal);
    row("sigma_A_sq_leading", kNaN, kNaN, st.closed.sigma_A_sq_leading);
    row("annealed_mean_of_ratio", an.mean_of_ratio, kNaN, an.ratio_of_means);
    return {{emit(t, cfg, "rmt.csv")}, true, {}};
}

}  // namespace relax::harness
