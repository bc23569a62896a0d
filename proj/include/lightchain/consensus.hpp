#pragma once

#include "lightchain/chain_view.hpp"
#include "lightchain/config.hpp"
#include "lightchain/ledger.hpp"
#include "lightchain/overlay.hpp"

#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lightchain {

class ConsensusError : public std::runtime_error {
public:
    enum class Kind { InsufficientDistinctValidators };
    ConsensusError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// One validator slot of an entity under validation.
struct ValidationTicket {
    Identifier entity_id;
    std::uint32_t slot = 0;
    Identifier target;  // final probe hash after any re-hashing
    std::uint32_t validator = 0;
    Address validator_address;
    Address router;  // terminal owner of the resolving search
    Decision decision = Decision::silent;
    Identifier token;
    std::vector<RouteTrace> searches;  // every probe, in order
};

/// Probe hash for slot k: H(entity_id || k).
Identifier slot_target(const Identifier& entity_id, std::uint32_t slot);

/// Maps a probe hash to a controller rank other than the owner's, uniformly.
std::size_t probe_rank(const Identifier& probe, std::size_t owner_rank, std::size_t controller_count);

/// Resolves `count` distinct non-owner controllers for `first_probes`,
/// re-hashing a probe (target <- H(target)) while it lands on an already
/// chosen controller. Every resolution is an overlay search from the owner.
std::vector<ValidationTicket> select_distinct_controllers(const Overlay& overlay, const Address& owner,
                                                          const Identifier& entity_id,
                                                          const std::vector<Identifier>& first_probes);

/// Proof-of-Validation committee of size `count` for entity_id.
std::vector<ValidationTicket> select_validators(const Overlay& overlay, const Address& owner,
                                                const Identifier& entity_id, std::uint32_t count);

/// r-1 replica holders besides the owner, probes H(id || "rep" || k).
std::vector<ValidationTicket> select_replica_holders(const Overlay& overlay, const Address& owner,
                                                     const Identifier& entity_id, std::uint32_t replication_factor);

struct ValidationRules {
    std::uint32_t node_count = 0;
    std::uint32_t signature_threshold = 0;
    std::uint32_t block_size_min = 0;
    bool drain_mode = false;
};

/// (owner, seq) pairs already finalized. Dense per-owner bitmaps, with a set
/// for sequence numbers too large to index.
class FinalizedSeqs {
public:
    using Key = std::pair<std::uint32_t, std::uint64_t>;

    void insert(const Key& key);
    bool contains(const Key& key) const;
    void clear();

private:
    static constexpr std::uint64_t kDenseLimit = 1u << 20;

    std::vector<std::vector<bool>> dense_;
    std::set<Key> sparse_;
};

/// Honest validation of a transaction. prev_block_id must already be known
/// to `view` for approval; callers fetch it first.
Decision validate_transaction(const Transaction& tx, const ChainView& view, const FinalizedSeqs& finalized,
                              const ValidationRules& rules);

/// Honest validation of a block proposal with its referenced transactions.
Decision validate_block(const BlockBundle& bundle, const ChainView& view, const ValidationRules& rules);

/// Malicious validators invert approve/reject.
Decision apply_behavior(Decision honest, bool malicious);

/// Per-node balances. Fees are transfers; block rewards are minted.
class EconomyLedger {
public:
    EconomyLedger(std::uint32_t nodes, std::int64_t initial_balance);

    void transfer(std::uint32_t from, std::uint32_t to, std::int64_t amount);
    void mint(std::uint32_t to, std::int64_t amount);

    std::int64_t balance(std::uint32_t node) const { return balances_.at(node); }
    const std::vector<std::int64_t>& balances() const { return balances_; }
    std::int64_t total() const;
    std::int64_t minted_total() const { return minted_; }
    std::uint64_t negative_balance_events() const { return negative_events_; }

    /// Sum of balances == nodes * initial + minted; throws std::logic_error.
    void check_conservation() const;

private:
    std::vector<std::int64_t> balances_;
    std::int64_t initial_;
    std::int64_t minted_ = 0;
    std::uint64_t negative_events_ = 0;
};

struct FinalizeOutcome {
    bool finalized = false;
    std::size_t approvals = 0;
};

/// Decides finalization (approvals >= signature_threshold) and, only then,
/// moves fees: validation_fee from owner to each approver, routing_fee to
/// each ticket's router, and block_reward minted to a block owner.
FinalizeOutcome finalize(bool is_block, std::uint32_t owner, std::span<const ValidationTicket> tickets,
                         EconomyLedger& ledger, const SimulationConfig& cfg);

}  // namespace lightchain
