#include "lightchain/consensus.hpp"

#include <algorithm>
#include <unordered_set>

namespace lightchain {

Identifier slot_target(const Identifier& entity_id, std::uint32_t slot)
{
    return Hasher().update(entity_id).update_u32(slot).finish();
}

std::size_t probe_rank(const Identifier& probe, std::size_t owner_rank, std::size_t controller_count)
{
    // high64 mod (n-1) has bias below 2^-50 for any simulated population.
    const std::size_t offset = 1 + static_cast<std::size_t>(probe.high64() % (controller_count - 1));
    return (owner_rank + offset) % controller_count;
}

std::vector<ValidationTicket> select_distinct_controllers(const Overlay& overlay, const Address& owner,
                                                          const Identifier& entity_id,
                                                          const std::vector<Identifier>& first_probes)
{
    const std::size_t n = overlay.controller_count();
    if (first_probes.empty()) return {};
    if (n < 2 || n - 1 < first_probes.size()) {
        throw ConsensusError(ConsensusError::Kind::InsufficientDistinctValidators,
                             "need " + std::to_string(first_probes.size()) + " distinct controllers besides the owner, have " +
                                 std::to_string(n == 0 ? 0 : n - 1));
    }
    const std::size_t owner_rank = overlay.controller_rank(owner);

    std::vector<ValidationTicket> tickets;
    tickets.reserve(first_probes.size());
    std::unordered_set<std::uint32_t> chosen{owner.node_index};
    for (std::uint32_t slot = 0; slot < first_probes.size(); ++slot) {
        ValidationTicket t;
        t.entity_id = entity_id;
        t.slot = slot;
        t.target = first_probes[slot];
        while (true) {
            SearchResult r = overlay.search_rank(owner, probe_rank(t.target, owner_rank, n));
            t.searches.push_back(std::move(r.trace));
            if (!chosen.contains(r.terminal.node_index)) {
                t.validator = r.terminal.node_index;
                t.validator_address = r.terminal;
                t.router = r.terminal;
                chosen.insert(t.validator);
                break;
            }
            t.target = sha256(std::span<const std::uint8_t>(t.target.bytes()));
        }
        tickets.push_back(std::move(t));
    }
    return tickets;
}

std::vector<ValidationTicket> select_validators(const Overlay& overlay, const Address& owner,
                                                const Identifier& entity_id, std::uint32_t count)
{
    std::vector<Identifier> probes;
    probes.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) probes.push_back(slot_target(entity_id, k));
    return select_distinct_controllers(overlay, owner, entity_id, probes);
}

std::vector<ValidationTicket> select_replica_holders(const Overlay& overlay, const Address& owner,
                                                     const Identifier& entity_id, std::uint32_t replication_factor)
{
    std::vector<Identifier> probes;
    for (std::uint32_t k = 0; k + 1 < replication_factor; ++k) {
        probes.push_back(Hasher().update(entity_id).update("rep").update_u32(k).finish());
    }
    return select_distinct_controllers(overlay, owner, entity_id, probes);
}

void FinalizedSeqs::insert(const Key& key)
{
    const auto [owner, seq] = key;
    if (seq >= kDenseLimit) {
        sparse_.insert(key);
        return;
    }
    if (dense_.size() <= owner) dense_.resize(std::size_t{owner} + 1);
    auto& bits = dense_[owner];
    if (bits.size() <= seq) bits.resize(seq + 1);
    bits[seq] = true;
}

bool FinalizedSeqs::contains(const Key& key) const
{
    const auto [owner, seq] = key;
    if (seq >= kDenseLimit) return sparse_.contains(key);
    return owner < dense_.size() && seq < dense_[owner].size() && dense_[owner][seq];
}

void FinalizedSeqs::clear()
{
    dense_.clear();
    sparse_.clear();
}

Decision validate_transaction(const Transaction& tx, const ChainView& view, const FinalizedSeqs& finalized,
                              const ValidationRules& rules)
{
    if (tx.id != expected_id(tx)) return Decision::reject;
    if (tx.owner == tx.recipient) return Decision::reject;
    if (tx.owner >= rules.node_count || tx.recipient >= rules.node_count) return Decision::reject;
    if (tx.amount != 1) return Decision::reject;
    if (!view.knows(tx.prev_block_id)) return Decision::reject;
    if (finalized.contains({tx.owner, tx.seq})) return Decision::reject;
    return Decision::approve;
}

Decision validate_block(const BlockBundle& bundle, const ChainView& view, const ValidationRules& rules)
{
    const Block& b = bundle.block;
    if (b.owner >= rules.node_count) return Decision::reject;
    if (b.tx_ids.size() < rules.block_size_min && !(b.drain && rules.drain_mode)) return Decision::reject;
    if (b.tx_ids.empty()) return Decision::reject;
    if (b.drain && b.tx_ids.size() >= rules.block_size_min) return Decision::reject;

    const ChainView::BlockInfo* parent = view.block(b.prev_block_id);
    if (!parent) return Decision::reject;
    if (b.height != parent->height + 1) return Decision::reject;
    // Stale parent: a finalized child already extends it.
    if (view.has_child(b.prev_block_id)) return Decision::reject;

    if (bundle.transactions.size() != b.tx_ids.size()) return Decision::reject;
    std::unordered_set<Identifier> seen;
    for (std::size_t i = 0; i < b.tx_ids.size(); ++i) {
        const Identifier& id = b.tx_ids[i];
        const Transaction& tx = bundle.transactions[i];
        if (!seen.insert(id).second) return Decision::reject;
        if (tx.id != id || expected_id(tx) != id) return Decision::reject;
        if (count_approvals(tx.signatures, id) < rules.signature_threshold) return Decision::reject;
        if (view.tx_in_ancestry(id, b.prev_block_id)) return Decision::reject;
    }
    return Decision::approve;
}

Decision apply_behavior(Decision honest, bool malicious)
{
    if (!malicious) return honest;
    if (honest == Decision::approve) return Decision::reject;
    if (honest == Decision::reject) return Decision::approve;
    return honest;
}

EconomyLedger::EconomyLedger(std::uint32_t nodes, std::int64_t initial_balance)
    : balances_(nodes, initial_balance), initial_(initial_balance)
{
}

void EconomyLedger::transfer(std::uint32_t from, std::uint32_t to, std::int64_t amount)
{
    if (from == to || amount == 0) return;
    std::int64_t& payer = balances_.at(from);
    payer -= amount;
    balances_.at(to) += amount;
    if (payer < 0) ++negative_events_;
}

void EconomyLedger::mint(std::uint32_t to, std::int64_t amount)
{
    balances_.at(to) += amount;
    minted_ += amount;
}

std::int64_t EconomyLedger::total() const
{
    std::int64_t sum = 0;
    for (auto b : balances_) sum += b;
    return sum;
}

void EconomyLedger::check_conservation() const
{
    const std::int64_t expected = static_cast<std::int64_t>(balances_.size()) * initial_ + minted_;
    if (total() != expected) throw std::logic_error("economy: balances do not sum to initial supply plus minted");
}

FinalizeOutcome finalize(bool is_block, std::uint32_t owner, std::span<const ValidationTicket> tickets,
                         EconomyLedger& ledger, const SimulationConfig& cfg)
{
    FinalizeOutcome out;
    for (const auto& t : tickets) {
        if (t.decision == Decision::approve) ++out.approvals;
    }
    out.finalized = out.approvals >= cfg.signature_threshold;
    if (!out.finalized) return out;

    for (const auto& t : tickets) {
        if (t.decision == Decision::approve) ledger.transfer(owner, t.validator, cfg.validation_fee);
        ledger.transfer(owner, t.router.node_index, cfg.routing_fee);
    }
    if (is_block) ledger.mint(owner, cfg.block_reward);
    return out;
}

}  // namespace lightchain
