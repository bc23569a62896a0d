#pragma once

#include "lightchain/ledger.hpp"

#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

namespace lightchain {

/// A node's knowledge of finalized blocks: the block tree, the canonical
/// chain picked by the fork rule, and which transactions that chain holds.
///
/// Fork rule: greatest height wins, ties go to the smaller numeric id.
class ChainView {
public:
    struct BlockInfo {
        Identifier id;
        Identifier parent;
        std::uint64_t height = 0;
        std::uint32_t owner = 0;
        bool drain = false;
        std::shared_ptr<const Block> body;

        const std::vector<Identifier>& tx_ids() const { return body->tx_ids; }
    };

    /// Transactions that entered / left the canonical chain.
    struct ChainUpdate {
        std::vector<Identifier> added;
        std::vector<Identifier> removed;
        bool tail_changed = false;
    };

    explicit ChainView(const Block& genesis);

    /// Idempotent. Blocks whose parent is unknown are parked and attached once
    /// the parent arrives.
    ChainUpdate add_block(const Block& block);
    ChainUpdate add_block(std::shared_ptr<const Block> block);

    bool knows(const Identifier& block_id) const { return blocks_.contains(block_id); }
    bool is_parked(const Identifier& block_id) const;
    const BlockInfo* block(const Identifier& block_id) const;
    bool has_child(const Identifier& block_id) const;

    const Identifier& genesis() const { return canonical_.front(); }
    const Identifier& tail() const { return canonical_.back(); }
    std::uint64_t tail_height() const { return canonical_.size() - 1; }
    const std::vector<Identifier>& canonical() const { return canonical_; }
    bool is_canonical(const Identifier& block_id) const;

    bool in_chain(const Identifier& tx_id) const { return chain_txs_.contains(tx_id); }
    std::size_t chain_tx_count() const { return chain_txs_.size(); }
    std::size_t block_count() const { return blocks_.size(); }

    /// True if tx_id is in `block_id` or any of its ancestors.
    bool tx_in_ancestry(const Identifier& tx_id, const Identifier& block_id) const;

    /// Walks prev links from the tail; throws std::logic_error unless genesis
    /// is reached in exactly tail_height() steps.
    void check_integrity() const;

private:
    bool better_tail(const BlockInfo& candidate) const;
    void attach(std::shared_ptr<const Block> block, ChainUpdate& update);
    void switch_tail(const Identifier& new_tail, ChainUpdate& update);

    std::unordered_map<Identifier, BlockInfo> blocks_;
    std::unordered_map<Identifier, std::vector<Identifier>> children_;
    std::multimap<Identifier, std::shared_ptr<const Block>> parked_;  // keyed by missing parent
    std::vector<Identifier> canonical_;
    std::unordered_map<Identifier, std::uint64_t> chain_txs_;  // tx -> height
};

}  // namespace lightchain
