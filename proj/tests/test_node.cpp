#include "lightchain/simulation.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace lightchain;
using lightchain::testing::small_config;

namespace {

SimulationOptions scripted(std::vector<std::uint32_t> malicious = {})
{
    SimulationOptions o;
    o.latency.kind = LatencySource::Kind::constant;
    o.latency.constant_ms = 10;
    o.generate_transactions = false;
    o.malicious_nodes = std::move(malicious);
    return o;
}

void drain_queue(Simulation& sim)
{
    while (sim.queue().run_instant()) {
    }
}

// A transaction carrying enough valid approvals to be blocked.
Transaction signed_tx(const Simulation& sim, std::uint32_t owner, std::uint64_t seq)
{
    Transaction tx;
    tx.owner = owner;
    tx.recipient = (owner + 1) % sim.node_count();
    tx.amount = 1;
    tx.prev_block_id = sim.genesis().id;
    tx.seq = seq;
    seal(tx);
    for (std::uint32_t v = 0; v < sim.config().signature_threshold; ++v) {
        tx.signatures.push_back({v, Decision::approve, signature_token(tx.id, v, Decision::approve)});
    }
    return tx;
}

std::vector<const Block*> finalized_blocks(const Simulation& sim)
{
    std::vector<const Block*> out;
    for (const auto& [id, holders] : sim.replica_ledger()) {
        const Entity* e = sim.node(*holders.begin()).store().fetch(id);
        if (e && std::holds_alternative<Block>(*e) && std::get<Block>(*e).height > 0) out.push_back(&std::get<Block>(*e));
    }
    return out;
}

}  // namespace

TEST(Node, ApprovalsEqualHonestTickets)
{
    const std::vector<std::uint32_t> bad{1, 2, 3, 4, 5, 6};
    Simulation sim(small_config(20, 1, 1), scripted(bad));
    sim.bootstrap();

    Transaction tx;
    tx.owner = 0;
    tx.recipient = 9;
    tx.amount = 1;
    tx.prev_block_id = sim.genesis().id;
    seal(tx);

    std::optional<ProposalOutcome> outcome;
    sim.node(0).submit(tx, std::nullopt, [&](const ProposalOutcome& o) { outcome = o; });
    drain_queue(sim);

    ASSERT_TRUE(outcome);
    std::size_t planted = 0;
    for (const auto& t : outcome->tickets) {
        planted += std::count(bad.begin(), bad.end(), t.validator);
        EXPECT_EQ(t.decision, std::count(bad.begin(), bad.end(), t.validator) ? Decision::reject : Decision::approve);
    }
    EXPECT_EQ(outcome->approvals, 12 - planted);
    EXPECT_EQ(outcome->finalized, outcome->approvals >= 10);
}

TEST(Node, InvalidEntityGetsNoApprovals)
{
    Simulation sim(small_config(16, 1, 2), scripted());
    sim.bootstrap();
    Transaction t = signed_tx(sim, 1, 0);
    BlockBundle dup;
    dup.block.owner = 3;
    dup.block.prev_block_id = sim.genesis().id;
    dup.block.height = 1;
    dup.block.tx_ids = {t.id, t.id};
    dup.transactions = {t, t};
    seal(dup.block);

    std::optional<ProposalOutcome> outcome;
    sim.node(3).submit(dup.block, dup, [&](const ProposalOutcome& o) { outcome = o; });
    drain_queue(sim);
    ASSERT_TRUE(outcome);
    EXPECT_EQ(outcome->approvals, 0u);
    EXPECT_FALSE(outcome->finalized);
    EXPECT_EQ(sim.economy().minted_total(), 0);
}

TEST(Node, TimerSpacingAndStop)
{
    SimulationOptions o = scripted();
    o.generate_transactions = true;
    Simulation sim(small_config(16, 2, 1), o);
    sim.bootstrap();
    Node& n0 = sim.node(0);
    ASSERT_TRUE(n0.timer_armed());
    const VirtualMs first = n0.next_tx_due();
    EXPECT_LT(first, 1000u);
    while (n0.tx_generated() == 0) ASSERT_TRUE(sim.queue().run_instant());
    EXPECT_EQ(n0.next_tx_due(), first + 1000);
    while (n0.tx_generated() == 1) ASSERT_TRUE(sim.queue().run_instant());
    EXPECT_FALSE(n0.timer_armed());
}

TEST(Node, CorruptedTransactionIsRetriedValid)
{
    SimulationOptions o = scripted({0});
    o.generate_transactions = true;
    o.corrupt_probability = 1.0;
    Simulation sim(small_config(16, 1, 1), o);
    SimulationResult r = sim.run();

    std::size_t txs = 0;
    for (const auto& rec : r.records) {
        if (rec.type != EntityType::tx || rec.owner != 0) continue;
        ++txs;
        EXPECT_LT(rec.finalized_at - rec.created_at, 1000u);
        const auto* stored = sim.node(0).store().fetch(rec.entity_id);
        ASSERT_NE(stored, nullptr);
        EXPECT_EQ(std::get<Transaction>(*stored).attempt, 1u);
        EXPECT_EQ(std::get<Transaction>(*stored).prev_block_id, sim.genesis().id);
    }
    EXPECT_EQ(txs, 1u);
    // Attempt 0 was rejected before any fee moved; conservation still holds.
    sim.economy().check_conservation();
}

TEST(Node, StaleParentRetrySucceeds)
{
    Simulation sim(small_config(16, 1, 2), scripted());
    sim.bootstrap();

    Node& a = sim.node(1);
    a.learn_transaction(signed_tx(sim, 5, 0));
    a.learn_transaction(signed_tx(sim, 5, 1));
    drain_queue(sim);
    const Identifier first_block = sim.global_view().tail();
    ASSERT_EQ(sim.global_view().tail_height(), 1u);

    Node& b = sim.node(2);
    b.force_parent_once(sim.genesis().id);
    b.learn_transaction(signed_tx(sim, 6, 0));
    b.learn_transaction(signed_tx(sim, 6, 1));
    drain_queue(sim);

    EXPECT_EQ(sim.global_view().tail_height(), 2u);
    EXPECT_EQ(sim.global_view().block(sim.global_view().tail())->owner, 2u);
    EXPECT_EQ(sim.global_view().block(sim.global_view().tail())->parent, first_block);
    EXPECT_EQ(sim.finalized_block_count(), 2u);
}

TEST(Node, ContendingProposersLeaveOneChain)
{
    Simulation sim(small_config(16, 1, 2), scripted());
    sim.bootstrap();
    std::vector<Transaction> txs{signed_tx(sim, 7, 0), signed_tx(sim, 7, 1)};
    for (std::uint32_t n : {3u, 4u}) {
        for (const auto& tx : txs) sim.node(n).learn_transaction(tx);
    }
    EXPECT_TRUE(sim.node(3).block_attempt_active());
    EXPECT_TRUE(sim.node(4).block_attempt_active());
    drain_queue(sim);

    const ChainView& chain = sim.global_view();
    EXPECT_TRUE(chain.in_chain(txs[0].id));
    EXPECT_TRUE(chain.in_chain(txs[1].id));
    EXPECT_EQ(chain.chain_tx_count(), 2u);
    EXPECT_EQ(sim.node(3).pool_size(), 0u);
    EXPECT_EQ(sim.node(4).pool_size(), 0u);
    EXPECT_EQ(sim.node(3).view().tail(), chain.tail());
}

TEST(Node, PoolThresholdTriggersAttempt)
{
    Simulation sim(small_config(16, 1, 3), scripted());
    sim.bootstrap();
    Node& n = sim.node(2);
    n.learn_transaction(signed_tx(sim, 8, 0));
    n.learn_transaction(signed_tx(sim, 8, 1));
    EXPECT_FALSE(n.block_attempt_active());
    n.learn_transaction(signed_tx(sim, 8, 2));
    EXPECT_TRUE(n.block_attempt_active());
    EXPECT_EQ(n.pool_order().size(), 3u);
    drain_queue(sim);
    EXPECT_EQ(n.pool_size(), 0u);
}

TEST(Node, DrainBlockOfSeven)
{
    Simulation sim(small_config(16, 1, 10), scripted());
    sim.bootstrap();
    Node& n = sim.node(5);
    for (std::uint64_t s = 0; s < 7; ++s) n.learn_transaction(signed_tx(sim, 9, s));
    EXPECT_FALSE(n.block_attempt_active());
    sim.enter_drain_mode();
    EXPECT_TRUE(n.maybe_trigger_block());
    drain_queue(sim);

    auto blocks = finalized_blocks(sim);
    ASSERT_EQ(blocks.size(), 1u);
    EXPECT_TRUE(blocks[0]->drain);
    EXPECT_EQ(blocks[0]->tx_ids.size(), 7u);
    EXPECT_EQ(sim.global_view().chain_tx_count(), 7u);
}

TEST(Node, ReplicationFactorThree)
{
    Simulation sim(small_config(16, 1, 2), scripted());
    sim.bootstrap();
    Transaction tx;
    tx.owner = 0;
    tx.recipient = 1;
    tx.amount = 1;
    tx.prev_block_id = sim.genesis().id;
    seal(tx);
    sim.node(0).submit(tx, std::nullopt, {});
    drain_queue(sim);
    const auto& holders = sim.replica_ledger().at(tx.id);
    EXPECT_EQ(holders.size(), 3u);
    EXPECT_TRUE(holders.contains(0));
    SearchResult r = sim.overlay().resolve_holders(Address::for_node(9), tx.id);
    EXPECT_EQ(r.holders.size(), 3u);
}
