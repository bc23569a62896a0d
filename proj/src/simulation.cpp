#include "lightchain/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <unordered_set>

namespace lightchain {

namespace {

std::size_t object_capacity(const SimulationConfig& cfg)
{
    const std::size_t txs = std::size_t{cfg.nodes} * cfg.transactions_per_node;
    const std::size_t blocks = cfg.block_size_min == 0 ? txs : txs / cfg.block_size_min + 1;
    return txs + blocks + 1;
}

LatencyMatrix build_matrix(std::size_t n, std::uint64_t seed, const LatencySource& src)
{
    switch (src.kind) {
    case LatencySource::Kind::samples:
        return LatencyMatrix::from_samples(n, seed, src.samples_ms);
    case LatencySource::Kind::constant:
        return LatencyMatrix::constant(n, src.constant_ms);
    case LatencySource::Kind::builtin:
        break;
    }
    return LatencyMatrix::builtin(n, seed, src.model);
}

}  // namespace

Simulation::Simulation(SimulationConfig cfg, SimulationOptions options)
    : cfg_(cfg),
      options_(std::move(options)),
      overlay_(cfg.nodes, object_capacity(cfg)),
      economy_(cfg.nodes, cfg.initial_balance),
      genesis_(make_genesis(options_.seed)),
      global_view_(genesis_)
{
    validate_config(cfg_);
}

Simulation::~Simulation() = default;

void Simulation::bootstrap()
{
    if (bootstrapped_) return;
    bootstrapped_ = true;
    const std::uint32_t n = cfg_.nodes;

    std::vector<bool> malicious(n, false);
    if (options_.malicious_nodes) {
        for (auto i : *options_.malicious_nodes) malicious.at(i) = true;
    } else {
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0U);
        RandomStream rng(options_.seed, "malicious");
        for (std::uint32_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_below(i)]);
        const std::uint32_t m = malicious_count(cfg_);
        for (std::uint32_t i = 0; i < m; ++i) malicious[order[i]] = true;
    }

    network_ = std::make_unique<Network>(queue_, build_matrix(n, options_.seed, options_.latency));
    timeout_ms_ = 10 * std::max<VirtualMs>(1, n >= 2 ? network_->latencies().percentile(0.99) : 1);

    std::unordered_set<Identifier> ids;
    nodes_.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        nodes_.push_back(std::make_unique<Node>(*this, i, malicious[i]));
        if (!ids.insert(nodes_.back()->identifier()).second) {
            throw std::runtime_error("node identifier collision at node " + std::to_string(i));
        }
        network_->register_address(nodes_.back()->address());
    }

    for (const auto& node : nodes_) {
        Announcement a = overlay_.announce(node->identifier(), node->address(), VertexKind::controller);
        send_route(a.trace, false, MessageTag::announce, std::nullopt, 40, [] {});
    }

    nodes_.front()->store_and_announce(genesis_, genesis_.id);

    if (!options_.generate_transactions) return;
    const VirtualMs delay = cfg_.inter_tx_delay_ms();
    for (std::uint32_t i = 0; i < n; ++i) {
        RandomStream rng(options_.seed, "timer-offset", i);
        nodes_[i]->start_generation(delay == 0 ? 0 : rng.uniform_below(delay));
    }
}

void Simulation::send_route(const RouteTrace& trace, bool reply, MessageTag tag, std::optional<Identifier> context,
                            std::size_t hop_bytes, std::function<void()> done)
{
    auto owners = std::make_shared<std::vector<Address>>(trace.owners);
    if (reply && owners->size() > 1 && owners->back() != owners->front()) owners->push_back(owners->front());
    hop(std::move(owners), 0, tag, context, hop_bytes, std::move(done));
}

void Simulation::hop(std::shared_ptr<std::vector<Address>> owners, std::size_t i, MessageTag tag,
                     std::optional<Identifier> context, std::size_t hop_bytes, std::function<void()> done)
{
    if (i + 1 >= owners->size()) {
        done();
        return;
    }
    Envelope env;
    env.src = (*owners)[i];
    env.dst = (*owners)[i + 1];
    env.tag = tag;
    env.payload = Bytes(hop_bytes, 0);
    env.context = context;
    network_->send(std::move(env), [this, owners, i, tag, context, hop_bytes, done = std::move(done)](const Envelope&) {
        hop(owners, i + 1, tag, context, hop_bytes, done);
    });
}

void Simulation::on_finalized(const Entity& entity, const Identifier& context, std::size_t validators,
                              std::size_t approvals)
{
    MetricRecord r;
    r.entity_id = entity_id(entity);
    r.context = context;
    r.owner = entity_owner(entity);
    r.finalized_at = queue_.now();
    r.memory_bytes = canonical_bytes(entity).size();
    r.validators_contacted = static_cast<std::uint32_t>(validators);
    r.approvals = static_cast<std::uint32_t>(approvals);
    if (const auto* b = std::get_if<Block>(&entity)) {
        r.type = EntityType::block;
        r.created_at = b->created_at;
        r.height = b->height;
        r.size = b->tx_ids.size();
        r.drain = b->drain;
        ++finalized_blocks_;
        global_view_.add_block(intern(*b));
    } else {
        const auto& tx = std::get<Transaction>(entity);
        r.type = EntityType::tx;
        r.created_at = tx.created_at;
        if (!finalized_txs_.insert(tx.id).second) throw std::logic_error("transaction finalized twice");
    }
    records_.push_back(r);
    economy_.check_conservation();
}

void Simulation::on_stored(const Identifier& id, std::uint32_t node)
{
    replica_ledger_[id].insert(node);
}

void Simulation::flag_stall(const std::string& why)
{
    if (!stall_) stall_ = why;
}

std::uint32_t Simulation::intern(const Transaction& tx)
{
    auto [it, inserted] = tx_index_.try_emplace(tx.id, static_cast<std::uint32_t>(interned_txs_.size()));
    if (inserted) {
        interned_txs_.push_back(tx);
    } else if (interned_txs_[it->second].signatures != tx.signatures) {
        throw std::logic_error("two finalized copies of one transaction disagree");
    }
    return it->second;
}

std::optional<std::uint32_t> Simulation::interned_index(const Identifier& tx_id) const
{
    auto it = tx_index_.find(tx_id);
    if (it == tx_index_.end()) return std::nullopt;
    return it->second;
}

std::shared_ptr<const Block> Simulation::intern(const Block& block)
{
    auto& slot = interned_blocks_[block.id];
    if (!slot) {
        slot = std::make_shared<const Block>(block);
    } else if (slot->signatures != block.signatures) {
        throw std::logic_error("two finalized copies of one block disagree");
    }
    return slot;
}

bool Simulation::check_termination() const
{
    for (const auto& node : nodes_) {
        if (node->tx_generated() != cfg_.transactions_per_node) return false;
        if (node->tx_finalized() != cfg_.transactions_per_node) return false;
    }
    if (finalized_txs_.size() != std::size_t{cfg_.nodes} * cfg_.transactions_per_node) return false;
    if (global_view_.chain_tx_count() != finalized_txs_.size()) return false;
    return queue_.empty() && network_->in_flight() == 0;
}

void Simulation::check_invariants() const
{
    overlay_.check_invariants();
    network_->check_invariants();
    economy_.check_conservation();
    global_view_.check_integrity();
    for (const auto& node : nodes_) node->check_invariants();
    for (const auto& r : records_) {
        if (r.finalized_at < r.created_at) throw std::logic_error("record finalized before creation");
        if (r.approvals < cfg_.signature_threshold) throw std::logic_error("record below signature threshold");
    }
}

void Simulation::run_until_idle()
{
    bootstrap();
    std::uint64_t last_check = queue_.processed();
    while (queue_.run_instant()) {
        if (stall_) throw StalledSimulation(*stall_);
        if (options_.check_invariants_every > 0 && queue_.processed() - last_check >= options_.check_invariants_every) {
            check_invariants();
            last_check = queue_.processed();
        }
    }
}

SimulationResult Simulation::run()
{
    const auto wall_start = std::chrono::steady_clock::now();
    constexpr int kMaxIdleKicks = 100;

    int idle_kicks = 0;
    std::size_t last_progress = 0;
    while (true) {
        run_until_idle();
        if (check_termination()) break;

        bool generating = std::any_of(nodes_.begin(), nodes_.end(), [&](const auto& node) {
            return node->tx_finalized() != cfg_.transactions_per_node;
        });
        if (generating) throw StalledSimulation("event queue drained with transactions still unfinalized");

        enter_drain_mode();
        const std::size_t progress = global_view_.chain_tx_count() + finalized_blocks_;
        idle_kicks = progress == last_progress ? idle_kicks + 1 : 0;
        last_progress = progress;
        if (idle_kicks > kMaxIdleKicks) throw StalledSimulation("drain mode made no progress");

        bool kicked = false;
        for (auto& node : nodes_) kicked = node->maybe_trigger_block() || kicked;
        if (!kicked) throw StalledSimulation("finalized transactions missing from the chain and no node holds them");
    }
    if (options_.check_invariants_every > 0) check_invariants();

    wall_clock_s_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return {collect_records(), report()};
}

std::vector<MetricRecord> Simulation::collect_records() const
{
    std::vector<MetricRecord> out = records_;
    for (auto& r : out) {
        TrafficCounters c = network_->context_traffic(r.context);
        r.messages = c.messages;
        r.bytes = c.bytes;
    }
    return out;
}

SimulationReport Simulation::report() const
{
    SimulationReport rep = summarize(collect_records());
    rep.chain_height = global_view_.tail_height();
    if (network_) {
        rep.total_messages = network_->totals().messages;
        rep.total_bytes = network_->totals().bytes;
    }
    rep.total_minted = economy_.minted_total();
    rep.negative_balance_events = economy_.negative_balance_events();
    for (const auto& node : nodes_) rep.storage_per_node.push_back(node->store().entity_count());
    rep.virtual_end_ms = queue_.now();
    rep.wall_clock_s = wall_clock_s_;
    return rep;
}

SimulationResult run_simulation(const SimulationConfig& cfg, const SimulationOptions& options)
{
    Simulation sim(cfg, options);
    return sim.run();
}

}  // namespace lightchain
