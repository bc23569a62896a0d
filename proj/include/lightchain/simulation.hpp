#pragma once

#include "lightchain/chain_view.hpp"
#include "lightchain/config.hpp"
#include "lightchain/consensus.hpp"
#include "lightchain/event_queue.hpp"
#include "lightchain/metrics.hpp"
#include "lightchain/node.hpp"
#include "lightchain/overlay.hpp"
#include "lightchain/simnet.hpp"

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace lightchain {

struct LatencySource {
    enum class Kind { builtin, samples, constant };
    Kind kind = Kind::builtin;
    LatencyModel model;
    std::vector<double> samples_ms;
    VirtualMs constant_ms = 50;
};

struct SimulationOptions {
    std::uint64_t seed = 42;
    LatencySource latency;
    /// Run structural checks every N processed events (0 = off).
    std::uint64_t check_invariants_every = 0;

    // Hooks for scripted scenarios; defaults give the standard pipeline.
    std::optional<std::vector<std::uint32_t>> malicious_nodes;
    bool generate_transactions = true;
    double corrupt_probability = 0.5;
    std::uint32_t max_attempts = 256;
};

class StalledSimulation : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimulationResult {
    std::vector<MetricRecord> records;
    SimulationReport report;
};

inline constexpr VirtualMs kBlockBackoffMs = 500;
inline constexpr std::uint32_t kBlockRetries = 3;
inline constexpr std::uint32_t kReplicationFactor = 3;

/// The master process: owns the event queue, network, overlay, economy and
/// every node, and drives the pipeline to termination.
class Simulation {
public:
    Simulation(SimulationConfig cfg, SimulationOptions options = {});
    ~Simulation();

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Keys, malicious set, latency matrix, controller announcements, genesis
    /// and first transaction timers. Called by run() if not done yet.
    void bootstrap();
    bool bootstrapped() const { return bootstrapped_; }

    /// Processes events until termination. Throws StalledSimulation.
    SimulationResult run();

    /// Processes events until the queue is empty, without drain handling.
    void run_until_idle();

    /// Every node generated its quota, every finalized transaction sits in
    /// the canonical chain, and nothing is in flight.
    bool check_termination() const;

    void check_invariants() const;

    const SimulationConfig& config() const { return cfg_; }
    const SimulationOptions& options() const { return options_; }
    EventQueue& queue() { return queue_; }
    const EventQueue& queue() const { return queue_; }
    Network& network() { return *network_; }
    const Network& network() const { return *network_; }
    Overlay& overlay() { return overlay_; }
    const Overlay& overlay() const { return overlay_; }
    EconomyLedger& economy() { return economy_; }
    const EconomyLedger& economy() const { return economy_; }
    Node& node(std::uint32_t i) { return *nodes_.at(i); }
    const Node& node(std::uint32_t i) const { return *nodes_.at(i); }
    std::uint32_t node_count() const { return static_cast<std::uint32_t>(nodes_.size()); }
    const Block& genesis() const { return genesis_; }
    const ChainView& global_view() const { return global_view_; }
    const std::set<Identifier>& finalized_transactions() const { return finalized_txs_; }
    std::uint64_t finalized_block_count() const { return finalized_blocks_; }
    /// Engine-side record of which nodes store each entity.
    const std::map<Identifier, std::set<std::uint32_t>>& replica_ledger() const { return replica_ledger_; }

    bool drain_mode() const { return drain_mode_; }
    void enter_drain_mode() { drain_mode_ = true; }
    VirtualMs validation_timeout_ms() const { return timeout_ms_; }
    std::uint32_t replication_factor() const { return std::min(kReplicationFactor, cfg_.nodes); }

    /// Records with message/byte counters filled from the network.
    std::vector<MetricRecord> collect_records() const;
    SimulationReport report() const;

    // Called by nodes.
    void on_finalized(const Entity& entity, const Identifier& context, std::size_t validators, std::size_t approvals);
    void on_stored(const Identifier& id, std::uint32_t node);
    void flag_stall(const std::string& why);
    /// One shared copy per finalized transaction id, with a dense index.
    std::uint32_t intern(const Transaction& tx);
    const Transaction& interned(std::uint32_t index) const { return interned_txs_.at(index); }
    std::optional<std::uint32_t> interned_index(const Identifier& tx_id) const;
    std::shared_ptr<const Block> intern(const Block& block);

    /// Sends one envelope per inter-owner step of `trace`, each after the
    /// previous one is delivered; with reply, the terminal owner answers the
    /// origin. `done` runs at the origin afterwards.
    void send_route(const RouteTrace& trace, bool reply, MessageTag tag, std::optional<Identifier> context,
                    std::size_t hop_bytes, std::function<void()> done);

private:
    void hop(std::shared_ptr<std::vector<Address>> owners, std::size_t i, MessageTag tag,
             std::optional<Identifier> context, std::size_t hop_bytes, std::function<void()> done);

    SimulationConfig cfg_;
    SimulationOptions options_;
    EventQueue queue_;
    std::unique_ptr<Network> network_;
    Overlay overlay_;
    EconomyLedger economy_;
    Block genesis_;
    ChainView global_view_;
    std::unordered_map<Identifier, std::uint32_t> tx_index_;
    std::deque<Transaction> interned_txs_;
    std::unordered_map<Identifier, std::shared_ptr<const Block>> interned_blocks_;
    std::vector<std::unique_ptr<Node>> nodes_;

    bool bootstrapped_ = false;
    bool drain_mode_ = false;
    VirtualMs timeout_ms_ = 0;
    std::optional<std::string> stall_;

    std::vector<MetricRecord> records_;
    std::set<Identifier> finalized_txs_;
    std::uint64_t finalized_blocks_ = 0;
    std::map<Identifier, std::set<std::uint32_t>> replica_ledger_;
    double wall_clock_s_ = 0.0;
};

SimulationResult run_simulation(const SimulationConfig& cfg, const SimulationOptions& options = {});

}  // namespace lightchain
