// relax: quench rates, sweeps and random-matrix checks for the J1-J2 XXZ chain.
//
// Exit codes: 0 ok, 2 configuration or usage error, 3 numerical failure or
// failed check, 4 I/O error.

#include "relax/harness/commands.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

int exit_code_for(const relax::Error& e) {
    switch (e.kind()) {
        case relax::ErrorKind::Config:
        case relax::ErrorKind::InvalidArgument:
        case relax::ErrorKind::InvalidParity:
        case relax::ErrorKind::SizeLimit: return kExitConfig;
        case relax::ErrorKind::Io: return kExitIo;
        default: return kExitNumerical;
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace relax::harness;
    CLI::App app{"Early-time relaxation rates of quenched spin chains"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::string> out, cache;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::size_t> max_dim;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--cache", cache, "spectral cache directory (else $RELAX_CACHE_DIR)");
    app.add_option("--max-dim", max_dim, "largest sector dimension to diagonalize")->check(CLI::PositiveNumber);

    const std::map<std::string, std::pair<std::string, std::function<CommandResult(const RunConfig&)>>> commands{
        {"quench", {"time series, fits and rates for each pair at L", cmd_quench}},
        {"sweep", {"rates over the coupling grid", cmd_sweep}},
        {"ratios", {"rate ratios and effective dimensions over L_list", cmd_ratios}},
        {"rmt", {"Haar ensemble against the closed forms", cmd_rmt}},
        {"effdim", {"effective dimensions over L_list", cmd_effdim}},
        {"check-bounds", {"speed-limit checks on C(t) and the Kubo function", cmd_check_bounds}},
    };
    for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        Json doc = Json::object();
        if (!config_path.empty()) doc = load_config(config_path).source;
        const RunConfig cfg = apply_overrides(doc, {out, seed, threads, cache, max_dim});
        const std::string name = app.get_subcommands().front()->get_name();
        const CommandResult res = commands.at(name).second(cfg);
        for (const auto& f : res.files) std::cout << f << '\n';
        if (!res.ok) {
            std::cerr << "relax " << name << ": " << res.message << '\n';
            return kExitNumerical;
        }
        return kExitOk;
    } catch (const relax::Error& e) {
        std::cerr << "relax: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "relax: io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "relax: " << e.what() << '\n';
        return kExitNumerical;
    }
}
