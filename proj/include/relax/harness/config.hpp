#pragma once

// Run configuration: a JSON document validated field by field. Unknown keys
// are rejected so typos surface as errors instead of silent defaults.

#include "relax/error.hpp"
#include "relax/lattice_basis.hpp"
#include "relax/model.hpp"
#include "relax/spectral_cache.hpp"

#include "json.hpp"

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace relax::harness {

using Json = nlohmann::json;

enum class PaperPair { NeelA1, DomainWallA2, NeelCatA2 };

inline const std::vector<PaperPair>& all_pairs() {
    static const std::vector<PaperPair> pairs{PaperPair::NeelA1, PaperPair::DomainWallA2, PaperPair::NeelCatA2};
    return pairs;
}

inline const char* to_string(PaperPair p) {
    switch (p) {
        case PaperPair::NeelA1: return "neel_A1";
        case PaperPair::DomainWallA2: return "domainwall_A2";
        case PaperPair::NeelCatA2: return "neelcat_A2";
    }
    return "?";
}

inline std::optional<PaperPair> parse_pair(const std::string& s) {
    for (auto p : all_pairs())
        if (s == to_string(p)) return p;
    return std::nullopt;
}

inline InitialStateSpec pair_state(PaperPair p) {
    switch (p) {
        case PaperPair::NeelA1: return InitialStateSpec::neel();
        case PaperPair::DomainWallA2: return InitialStateSpec::domain_wall();
        case PaperPair::NeelCatA2: return InitialStateSpec::neel_cat();
    }
    return {};
}

inline ObservableSpec pair_observable(PaperPair p) {
    return p == PaperPair::NeelA1 ? ObservableSpec::a1(0) : ObservableSpec::a2();
}

struct Range {
    double min = 0.0;
    double max = 0.0;
    double step = 1.0;

    std::vector<double> values() const {
        std::vector<double> out;
        const auto n = static_cast<long>(std::floor((max - min) / step + 1e-9));
        for (long i = 0; i <= n; ++i) out.push_back(min + static_cast<double>(i) * step);
        return out;
    }
};

struct SweepGrid {
    Range j1{-2.0, -1.0, 0.25};
    Range delta{0.1, 1.1, 0.25};
    std::string rule = "fig2";  // (J1, J1 D/2, J1/2.7, J1 D/5.4)
    double cut_j1 = -1.8;
};

struct RmtSettings {
    std::string spectrum = "gaussian";  // "gaussian" or "chain"
    int d = 16;
    std::size_t samples = 2000;
    std::string observable = "staggered";  // "staggered" or "site"
};

struct RunConfig {
    int L = 8;
    CouplingVector couplings;
    std::vector<PaperPair> pairs = all_pairs();
    double t_max = 5.0;
    double dt = 0.01;
    double tau_fit = 0.5;
    std::vector<double> tau{0.3, 0.5, 1.0};
    std::string route = "blocks";  // "blocks" or "full"
    double support_threshold = 1e-12;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out = "out";
    std::string cache;
    std::size_t max_dim = kDefaultDimensionCap;
    std::vector<int> l_list{6, 8, 10};
    double bounds_t_max = 20.0;
    double bounds_dt = 0.01;
    SweepGrid sweep;
    RmtSettings rmt;

    Json source = Json::object();  // effective document, used for the config hash
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::Config, path + ": " + msg);
}

inline void check_keys(const Json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) config_error(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) config_error(path.empty() ? key : path + "." + key, "unknown key");
}

inline double get_number(const Json& obj, const std::string& key, const std::string& path, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) config_error(path + key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) config_error(path + key, "must be finite");
    return x;
}

inline long long get_integer(const Json& obj, const std::string& key, const std::string& path, long long fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) config_error(path + key, "expected an integer");
    return v.get<long long>();
}

inline std::string get_string(const Json& obj, const std::string& key, const std::string& path,
                              const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) config_error(path + key, "expected a string");
    return v.get<std::string>();
}

inline Range get_range(const Json& obj, const std::string& key, const std::string& path, Range fallback) {
    if (!obj.contains(key)) return fallback;
    const std::string p = path + key;
    check_keys(obj.at(key), p, {"min", "max", "step"});
    Range r;
    r.min = get_number(obj.at(key), "min", p + ".", fallback.min);
    r.max = get_number(obj.at(key), "max", p + ".", fallback.max);
    r.step = get_number(obj.at(key), "step", p + ".", fallback.step);
    if (!(r.step > 0.0)) config_error(p + ".step", "must be positive");
    if (r.max < r.min) config_error(p, "max must be >= min");
    return r;
}

}  // namespace detail

/// Validates a parsed document into a RunConfig.
inline RunConfig config_from_json(const Json& doc) {
    using namespace detail;
    check_keys(doc, "", {"L", "couplings", "pairs", "time", "fit", "route", "support_threshold", "seed", "threads",
                         "out", "cache", "max_dim", "L_list", "bounds", "sweep", "rmt"});
    RunConfig c;
    c.source = doc;
    c.L = static_cast<int>(get_integer(doc, "L", "", c.L));
    if (c.L < 4 || c.L > kMaxLength) config_error("L", "must lie in [4, 62]");
    if (c.L % 2 != 0) config_error("L", "paper initial states need even L");

    if (doc.contains("couplings")) {
        const auto& g = doc.at("couplings");
        check_keys(g, "couplings", {"J1", "gamma1", "J2", "gamma2"});
        c.couplings.J1 = get_number(g, "J1", "couplings.", c.couplings.J1);
        c.couplings.gamma1 = get_number(g, "gamma1", "couplings.", c.couplings.gamma1);
        c.couplings.J2 = get_number(g, "J2", "couplings.", c.couplings.J2);
        c.couplings.gamma2 = get_number(g, "gamma2", "couplings.", c.couplings.gamma2);
    }
    if (doc.contains("pairs")) {
        const auto& v = doc.at("pairs");
        if (!v.is_array() || v.empty()) config_error("pairs", "expected a nonempty array of pair names");
        c.pairs.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string p = "pairs[" + std::to_string(i) + "]";
            if (!v[i].is_string()) config_error(p, "expected a string");
            const auto pair = parse_pair(v[i].get<std::string>());
            if (!pair) config_error(p, "unknown pair '" + v[i].get<std::string>() +
                                           "' (neel_A1, domainwall_A2, neelcat_A2)");
            c.pairs.push_back(*pair);
        }
    }
    if (doc.contains("time")) {
        check_keys(doc.at("time"), "time", {"t_max", "dt"});
        c.t_max = get_number(doc.at("time"), "t_max", "time.", c.t_max);
        c.dt = get_number(doc.at("time"), "dt", "time.", c.dt);
    }
    if (!(c.dt > 0.0)) config_error("time.dt", "must be positive");
    if (c.t_max < c.dt) config_error("time.t_max", "must be >= dt");
    if (doc.contains("fit")) {
        const auto& f = doc.at("fit");
        check_keys(f, "fit", {"tau_fit", "tau"});
        c.tau_fit = get_number(f, "tau_fit", "fit.", c.tau_fit);
        if (f.contains("tau")) {
            if (!f.at("tau").is_array() || f.at("tau").empty()) config_error("fit.tau", "expected a nonempty array");
            c.tau.clear();
            for (std::size_t i = 0; i < f.at("tau").size(); ++i) {
                const auto& x = f.at("tau")[i];
                if (!x.is_number() || !(x.get<double>() > 0.0))
                    config_error("fit.tau[" + std::to_string(i) + "]", "expected a positive number");
                c.tau.push_back(x.get<double>());
            }
        }
    }
    if (!(c.tau_fit > 0.0)) config_error("fit.tau_fit", "must be positive");
    c.route = get_string(doc, "route", "", c.route);
    if (c.route != "blocks" && c.route != "full") config_error("route", "expected 'blocks' or 'full'");
    c.support_threshold = get_number(doc, "support_threshold", "", c.support_threshold);
    if (!(c.support_threshold >= 0.0 && c.support_threshold < 1.0))
        config_error("support_threshold", "must lie in [0, 1)");
    const long long seed = get_integer(doc, "seed", "", static_cast<long long>(c.seed));
    if (seed < 0) config_error("seed", "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(seed);
    c.threads = static_cast<int>(get_integer(doc, "threads", "", c.threads));
    if (c.threads < 1) config_error("threads", "must be >= 1");
    c.out = get_string(doc, "out", "", c.out);
    c.cache = get_string(doc, "cache", "", c.cache);
    const long long max_dim = get_integer(doc, "max_dim", "", static_cast<long long>(c.max_dim));
    if (max_dim < 1) config_error("max_dim", "must be positive");
    c.max_dim = static_cast<std::size_t>(max_dim);

    if (doc.contains("L_list")) {
        const auto& v = doc.at("L_list");
        if (!v.is_array() || v.empty()) config_error("L_list", "expected a nonempty array of integers");
        c.l_list.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string p = "L_list[" + std::to_string(i) + "]";
            if (!v[i].is_number_integer()) config_error(p, "expected an integer");
            const int l = v[i].get<int>();
            if (l < 4 || l > kMaxLength || l % 2 != 0) config_error(p, "must be even and in [4, 62]");
            c.l_list.push_back(l);
        }
    }
    if (doc.contains("bounds")) {
        check_keys(doc.at("bounds"), "bounds", {"t_max", "dt"});
        c.bounds_t_max = get_number(doc.at("bounds"), "t_max", "bounds.", c.bounds_t_max);
        c.bounds_dt = get_number(doc.at("bounds"), "dt", "bounds.", c.bounds_dt);
        if (!(c.bounds_dt > 0.0)) config_error("bounds.dt", "must be positive");
        if (c.bounds_t_max < 0.0) config_error("bounds.t_max", "must be nonnegative");
    }
    if (doc.contains("sweep")) {
        const auto& s = doc.at("sweep");
        check_keys(s, "sweep", {"J1", "Delta", "rule", "cut_J1"});
        c.sweep.j1 = get_range(s, "J1", "sweep.", c.sweep.j1);
        c.sweep.delta = get_range(s, "Delta", "sweep.", c.sweep.delta);
        c.sweep.rule = get_string(s, "rule", "sweep.", c.sweep.rule);
        if (c.sweep.rule != "fig2") config_error("sweep.rule", "only 'fig2' is defined");
        c.sweep.cut_j1 = get_number(s, "cut_J1", "sweep.", c.sweep.cut_j1);
    }
    if (doc.contains("rmt")) {
        const auto& r = doc.at("rmt");
        check_keys(r, "rmt", {"spectrum", "d", "samples", "observable"});
        c.rmt.spectrum = get_string(r, "spectrum", "rmt.", c.rmt.spectrum);
        if (c.rmt.spectrum != "gaussian" && c.rmt.spectrum != "chain")
            config_error("rmt.spectrum", "expected 'gaussian' or 'chain'");
        c.rmt.d = static_cast<int>(get_integer(r, "d", "rmt.", c.rmt.d));
        if (c.rmt.d < 2) config_error("rmt.d", "must be >= 2");
        const long long n = get_integer(r, "samples", "rmt.", static_cast<long long>(c.rmt.samples));
        if (n < 2) config_error("rmt.samples", "must be >= 2");
        c.rmt.samples = static_cast<std::size_t>(n);
        c.rmt.observable = get_string(r, "observable", "rmt.", c.rmt.observable);
        if (c.rmt.observable != "staggered" && c.rmt.observable != "site")
            config_error("rmt.observable", "expected 'staggered' or 'site'");
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config file " + path);
    Json doc;
    try {
        doc = Json::parse(in, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::Config, path + ": " + e.what());
    }
    return config_from_json(doc);
}

/// Command-line overrides; they are written into the effective document so
/// the config hash reflects them.
struct Overrides {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> cache;
    std::optional<std::size_t> max_dim;
};

inline RunConfig apply_overrides(const Json& base, const Overrides& o) {
    Json doc = base;
    if (o.out) doc["out"] = *o.out;
    if (o.seed) doc["seed"] = *o.seed;
    if (o.threads) doc["threads"] = *o.threads;
    if (o.max_dim) doc["max_dim"] = *o.max_dim;
    if (o.cache) {
        doc["cache"] = *o.cache;
    } else if (const char* env = std::getenv("RELAX_CACHE_DIR"); env && *env) {
        doc["cache"] = std::string(env);
    }
    return config_from_json(doc);
}

/// FNV-1a of the canonical dump of the effective document, leaving out keys
/// that cannot change results (output path, thread count, cache location).
inline std::string config_hash(const RunConfig& c) {
    Json doc = c.source;
    for (const char* key : {"out", "threads", "cache"}) doc.erase(key);
    Fnv1a h;
    h.text(doc.dump());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.digest()));
    return buf;
}

}  // namespace relax::harness
