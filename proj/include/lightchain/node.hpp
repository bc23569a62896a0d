#pragma once

#include "lightchain/chain_view.hpp"
#include "lightchain/consensus.hpp"
#include "lightchain/ledger.hpp"
#include "lightchain/rng.hpp"
#include "lightchain/simnet.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

namespace lightchain {

class Simulation;

/// What the owner learns when a validation round closes.
struct ProposalOutcome {
    Identifier entity_id;
    bool finalized = false;
    std::size_t approvals = 0;
    std::vector<ValidationTicket> tickets;
};

using ProposalCallback = std::function<void(const ProposalOutcome&)>;

/// Controller layer of one node: transaction generation, validation duty,
/// pool observation, block assembly and replica storage.
class Node {
public:
    Node(Simulation& sim, std::uint32_t index, bool malicious);

    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;

    std::uint32_t index() const { return index_; }
    const Address& address() const { return address_; }
    const NodeKey& key() const { return key_; }
    const Identifier& identifier() const { return identifier_; }
    bool malicious() const { return malicious_; }

    const ReplicaStore& store() const { return store_; }
    const ChainView& view() const { return view_; }
    const FinalizedSeqs& finalized_seqs() const { return finalized_seqs_; }

    std::uint32_t tx_generated() const { return tx_generated_; }
    std::uint32_t tx_finalized() const { return tx_finalized_; }
    VirtualMs next_tx_due() const { return next_tx_due_; }
    bool timer_armed() const { return timer_armed_; }
    std::size_t pool_size() const { return pool_.size(); }
    /// Pending finalized transactions, oldest first.
    std::vector<Identifier> pool_order() const;
    bool block_attempt_active() const { return attempt_active_; }
    /// created_at of this node's finalized transactions, by seq.
    const std::vector<VirtualMs>& finalized_created_at() const { return finalized_created_at_; }

    /// Schedules the first transaction timer.
    void start_generation(VirtualMs first_due);
    void on_tx_timer();

    /// Records a finalized transaction learned from any source.
    void learn_transaction(const Transaction& tx);
    /// Records a finalized block and its transactions.
    void learn_block(const BlockBundle& bundle);

    /// Starts a block attempt if eligible and none is running.
    bool maybe_trigger_block();

    /// Proposes an already built entity for validation (scripted scenarios).
    void submit(Entity entity, std::optional<BlockBundle> bundle, ProposalCallback done);
    /// Next block attempt uses `parent` instead of the current tail; retries
    /// refresh from the view as usual.
    void force_parent_once(const Identifier& parent) { forced_parent_ = parent; }

    /// Stores a finalized entity locally and announces it as a data object.
    void store_and_announce(const Entity& entity, const Identifier& context);

    void check_invariants() const;

private:
    struct Proposal;
    struct LogicalTx {
        std::uint64_t seq = 0;
        std::uint32_t recipient = 0;
        VirtualMs created_at = 0;
        bool corrupt = false;
    };

    void start_tx_attempt(const LogicalTx& ltx, std::uint32_t attempt, std::optional<Identifier> context);
    void attempt_block(std::uint32_t attempt, std::optional<Identifier> context, VirtualMs first_created);
    bool eligible() const;

    void propose(Entity entity, std::optional<BlockBundle> bundle, const Identifier& context, ProposalCallback done);
    void resolve_ticket(const std::shared_ptr<Proposal>& p, std::size_t slot, std::size_t search);
    void dispatch_requests(const std::shared_ptr<Proposal>& p);
    void on_validate_reply(const Identifier& entity_id, std::size_t slot, Decision decision, const Identifier& token);
    void conclude(const std::shared_ptr<Proposal>& p);
    void replicate(const Entity& entity, const std::optional<BlockBundle>& bundle, const Identifier& context);
    void disseminate(const Entity& entity, const std::optional<BlockBundle>& bundle,
                     const std::vector<ValidationTicket>& tickets, const Identifier& context);

    void on_validate_request(const Envelope& env, std::uint32_t owner, std::size_t slot);
    void evaluate(const Bytes& payload, const Identifier& context, std::function<void(Identifier, Decision)> done);
    void ensure_block_known(const Identifier& block_id, const Identifier& context, std::function<void(bool)> done);
    void fetch_from(const Address& holder, const Identifier& block_id, const Identifier& context,
                    std::function<void(bool)> done);

    void remember(const Transaction& tx);
    std::optional<VirtualMs> learned_at(const Identifier& tx_id) const;
    std::optional<VirtualMs> learned_at(std::uint32_t index) const;
    void apply(const ChainView::ChainUpdate& update);
    ValidationRules rules() const;

    Simulation& sim_;
    std::uint32_t index_;
    Address address_;
    NodeKey key_;
    Identifier identifier_;
    bool malicious_;

    ReplicaStore store_;
    ChainView view_;
    static constexpr VirtualMs kNotLearned = std::numeric_limits<VirtualMs>::max();
    // Indexed by the simulation's dense transaction index.
    std::vector<VirtualMs> learned_at_;
    std::set<std::pair<VirtualMs, Identifier>> pool_;
    FinalizedSeqs finalized_seqs_;

    std::uint32_t tx_generated_ = 0;
    std::uint32_t tx_finalized_ = 0;
    VirtualMs next_tx_due_ = 0;
    bool timer_armed_ = false;
    std::vector<VirtualMs> finalized_created_at_;

    bool attempt_active_ = false;
    std::optional<Identifier> forced_parent_;
    std::unordered_map<Identifier, std::shared_ptr<Proposal>> active_;

    RandomStream recipient_rng_;
    RandomStream backoff_rng_;
    RandomStream corrupt_rng_;
};

}  // namespace lightchain
