#include "lightchain/config.hpp"
#include "lightchain/metrics.hpp"
#include "lightchain/simulation.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace lightchain;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitStalled = 4;
constexpr int kExitRuntime = 5;

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Deterministic LightChain network simulator"};
    std::string config_path;
    std::string out_path = "simulation.csv";
    std::uint64_t seed = 42;
    std::string samples_path;
    double median = LatencyModel{}.median_ms;
    double sigma = LatencyModel{}.sigma;
    bool summary_only = false;
    std::uint64_t check_every = 0;
    std::string dump_path;

    app.add_option("--config", config_path, "simulation.config file")->required();
    app.add_option("--out", out_path, "CSV output path")->capture_default_str();
    app.add_option("--seed", seed, "run-wide seed")->capture_default_str();
    auto* samples = app.add_option("--latency-samples", samples_path, "pairwise latency samples, one ms value per line");
    app.add_option("--latency-median", median, "median of the builtin latency model (ms)")
        ->capture_default_str()
        ->excludes(samples)
        ->check(CLI::PositiveNumber);
    app.add_option("--latency-sigma", sigma, "log-normal shape of the builtin latency model")
        ->capture_default_str()
        ->excludes(samples)
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--summary-only", summary_only, "print the summary without writing the CSV");
    app.add_option("--check-invariants", check_every, "run structural checks every N events");
    app.add_option("--dump-overlay", dump_path, "write the final overlay vertex list to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    SimulationConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    SimulationOptions options;
    options.seed = seed;
    options.check_invariants_every = check_every;
    try {
        if (!samples_path.empty()) {
            options.latency.kind = LatencySource::Kind::samples;
            options.latency.samples_ms = load_latency_samples(samples_path);
        } else {
            options.latency.model.median_ms = median;
            options.latency.model.sigma = sigma;
        }
    } catch (const NetworkError& e) {
        std::cerr << "latency samples: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        Simulation sim(cfg, options);
        SimulationResult result = sim.run();
        if (!summary_only) write_csv_file(out_path, result.records);
        if (!dump_path.empty()) {
            std::ofstream dump(dump_path);
            if (!dump) throw OutputUnwritable("cannot open " + dump_path);
            sim.overlay().dump(dump);
        }
        print_report(std::cout, result.report);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StalledSimulation& e) {
        std::cerr << "stalled: " << e.what() << "\n";
        return kExitStalled;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
