#include "lightchain/chain_view.hpp"

#include <algorithm>
#include <stdexcept>

namespace lightchain {

ChainView::ChainView(const Block& genesis)
{
    blocks_.emplace(genesis.id, BlockInfo{genesis.id, genesis.prev_block_id, 0, genesis.owner, false, std::make_shared<const Block>(genesis)});
    canonical_.push_back(genesis.id);
}

const ChainView::BlockInfo* ChainView::block(const Identifier& block_id) const
{
    auto it = blocks_.find(block_id);
    return it == blocks_.end() ? nullptr : &it->second;
}

bool ChainView::is_parked(const Identifier& block_id) const
{
    return std::any_of(parked_.begin(), parked_.end(), [&](const auto& kv) { return kv.second->id == block_id; });
}

bool ChainView::has_child(const Identifier& block_id) const
{
    auto it = children_.find(block_id);
    return it != children_.end() && !it->second.empty();
}

bool ChainView::is_canonical(const Identifier& block_id) const
{
    const BlockInfo* info = block(block_id);
    return info && info->height < canonical_.size() && canonical_[info->height] == block_id;
}

bool ChainView::better_tail(const BlockInfo& candidate) const
{
    const BlockInfo& cur = blocks_.at(tail());
    if (candidate.height != cur.height) return candidate.height > cur.height;
    return candidate.id < cur.id;
}

ChainView::ChainUpdate ChainView::add_block(const Block& block)
{
    if (knows(block.id)) return {};
    return add_block(std::make_shared<const Block>(block));
}

ChainView::ChainUpdate ChainView::add_block(std::shared_ptr<const Block> block)
{
    ChainUpdate update;
    if (knows(block->id) || is_parked(block->id)) return update;
    if (!knows(block->prev_block_id)) {
        const Identifier parent = block->prev_block_id;
        parked_.emplace(parent, std::move(block));
        return update;
    }
    attach(std::move(block), update);
    return update;
}

void ChainView::attach(std::shared_ptr<const Block> block, ChainUpdate& update)
{
    const BlockInfo& parent = blocks_.at(block->prev_block_id);
    if (block->height != parent.height + 1) {
        throw std::logic_error("finalized block " + block->id.hex() + " has an inconsistent height");
    }
    const Identifier id = block->id;
    auto [it, inserted] =
        blocks_.emplace(id, BlockInfo{id, block->prev_block_id, block->height, block->owner, block->drain, block});
    if (!inserted) return;
    children_[it->second.parent].push_back(id);
    if (better_tail(it->second)) switch_tail(id, update);

    auto range = parked_.equal_range(id);
    std::vector<std::shared_ptr<const Block>> waiting;
    for (auto p = range.first; p != range.second; ++p) waiting.push_back(p->second);
    parked_.erase(range.first, range.second);
    for (const auto& child : waiting) attach(child, update);
}

void ChainView::switch_tail(const Identifier& new_tail, ChainUpdate& update)
{
    update.tail_changed = true;
    // Collect the new branch back to the first block already canonical.
    std::vector<Identifier> branch;
    Identifier cur = new_tail;
    while (!is_canonical(cur)) {
        branch.push_back(cur);
        cur = blocks_.at(cur).parent;
    }
    const std::uint64_t fork_height = blocks_.at(cur).height;

    while (canonical_.size() - 1 > fork_height) {
        for (const auto& tx : blocks_.at(canonical_.back()).tx_ids()) {
            chain_txs_.erase(tx);
            update.removed.push_back(tx);
        }
        canonical_.pop_back();
    }
    for (auto b = branch.rbegin(); b != branch.rend(); ++b) {
        const BlockInfo& info = blocks_.at(*b);
        canonical_.push_back(*b);
        for (const auto& tx : info.tx_ids()) {
            chain_txs_[tx] = info.height;
            update.added.push_back(tx);
        }
    }
}

bool ChainView::tx_in_ancestry(const Identifier& tx_id, const Identifier& block_id) const
{
    Identifier cur = block_id;
    while (!is_canonical(cur)) {
        const BlockInfo* info = block(cur);
        if (!info) return false;
        if (std::ranges::find(info->tx_ids(), tx_id) != info->tx_ids().end()) return true;
        cur = info->parent;
    }
    auto it = chain_txs_.find(tx_id);
    return it != chain_txs_.end() && it->second <= blocks_.at(cur).height;
}

void ChainView::check_integrity() const
{
    Identifier cur = tail();
    std::uint64_t steps = 0;
    while (cur != genesis()) {
        const BlockInfo* info = block(cur);
        if (!info) throw std::logic_error("chain walk reached an unknown block");
        cur = info->parent;
        ++steps;
        if (steps > canonical_.size()) throw std::logic_error("chain walk does not terminate");
    }
    if (steps != tail_height()) throw std::logic_error("chain height disagrees with prev-link walk");
}

}  // namespace lightchain
