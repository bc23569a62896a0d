#include "lightchain/consensus.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace lightchain;

namespace {

Overlay controllers(std::uint32_t n)
{
    Overlay o(n, 1);
    for (std::uint32_t i = 0; i < n; ++i) {
        o.announce(derive_node_identifier(NodeKey::for_node(i)), Address::for_node(i), VertexKind::controller);
    }
    return o;
}

std::vector<ValidationTicket> tickets_with(std::uint32_t approvals, std::uint32_t total)
{
    std::vector<ValidationTicket> out(total);
    for (std::uint32_t i = 0; i < total; ++i) {
        out[i].validator = i + 1;
        out[i].router = Address::for_node(13 + i);
        out[i].decision = i < approvals ? Decision::approve : Decision::reject;
    }
    return out;
}

Transaction valid_tx(const Block& g)
{
    Transaction tx;
    tx.owner = 1;
    tx.recipient = 2;
    tx.amount = 1;
    tx.prev_block_id = g.id;
    seal(tx);
    return tx;
}

Transaction signed_tx(const Block& g, std::uint64_t seq)
{
    Transaction tx = valid_tx(g);
    tx.seq = seq;
    seal(tx);
    for (std::uint32_t v = 0; v < 10; ++v) tx.signatures.push_back({v, Decision::approve, signature_token(tx.id, v, Decision::approve)});
    return tx;
}

BlockBundle bundle_of(const Identifier& parent, std::uint64_t height, std::vector<Transaction> txs, bool drain = false)
{
    BlockBundle b;
    b.block.owner = 3;
    b.block.prev_block_id = parent;
    b.block.height = height;
    b.block.drain = drain;
    for (const auto& tx : txs) b.block.tx_ids.push_back(tx.id);
    b.transactions = std::move(txs);
    seal(b.block);
    return b;
}

const ValidationRules kRules{32, 10, 2, false};

}  // namespace

TEST(Finalize, FeesOnTenApprovals)
{
    SimulationConfig cfg = lightchain::testing::sample_config();
    EconomyLedger ledger(30, 20);
    auto tickets = tickets_with(10, 12);
    FinalizeOutcome out = finalize(false, 0, tickets, ledger, cfg);
    EXPECT_TRUE(out.finalized);
    EXPECT_EQ(out.approvals, 10u);
    EXPECT_EQ(ledger.balance(0), 20 - 32);
    for (std::uint32_t i = 1; i <= 10; ++i) EXPECT_EQ(ledger.balance(i), 22);
    EXPECT_EQ(ledger.balance(11), 20);
    for (std::uint32_t r = 13; r < 25; ++r) EXPECT_EQ(ledger.balance(r), 21);
    // The owner dips below zero on ticket 6's routing fee and stays there for the remaining 8 payments.
    EXPECT_EQ(ledger.negative_balance_events(), 9u);
    ledger.check_conservation();
}

TEST(Finalize, BlockRewardIsMinted)
{
    SimulationConfig cfg = lightchain::testing::sample_config();
    EconomyLedger ledger(30, 20);
    const std::int64_t before = ledger.total();
    finalize(true, 0, tickets_with(12, 12), ledger, cfg);
    EXPECT_EQ(ledger.total(), before + 3);
    EXPECT_EQ(ledger.minted_total(), 3);
    ledger.check_conservation();
}

TEST(Finalize, BelowThresholdMovesNothing)
{
    SimulationConfig cfg = lightchain::testing::sample_config();
    EconomyLedger ledger(30, 20);
    FinalizeOutcome out = finalize(true, 0, tickets_with(9, 12), ledger, cfg);
    EXPECT_FALSE(out.finalized);
    for (auto b : ledger.balances()) EXPECT_EQ(b, 20);
    EXPECT_EQ(ledger.minted_total(), 0);
}

TEST(Selection, TwoNodesPickTheOther)
{
    Overlay o = controllers(2);
    for (int i = 0; i < 20; ++i) {
        auto t = select_validators(o, Address::for_node(0), sha256(std::to_string(i)), 1);
        ASSERT_EQ(t.size(), 1u);
        EXPECT_EQ(t[0].validator, 1u);
    }
}

TEST(Selection, DistinctDeterministicAndRouted)
{
    Overlay o = controllers(20);
    Identifier id = sha256("entity");
    auto a = select_validators(o, Address::for_node(4), id, 12);
    auto b = select_validators(o, Address::for_node(4), id, 12);
    ASSERT_EQ(a.size(), 12u);
    std::set<std::uint32_t> seen;
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].validator, b[k].validator);
        EXPECT_NE(a[k].validator, 4u);
        EXPECT_TRUE(seen.insert(a[k].validator).second);
        EXPECT_EQ(a[k].slot, k);
        ASSERT_FALSE(a[k].searches.empty());
        EXPECT_EQ(a[k].searches.back().owners.back(), a[k].validator_address);
    }
    EXPECT_EQ(a[0].searches.size() == 1 ? a[0].target : slot_target(id, 0), slot_target(id, 0));
}

TEST(Selection, InsufficientValidators)
{
    Overlay o = controllers(5);
    try {
        select_validators(o, Address::for_node(0), sha256("x"), 5);
        FAIL();
    } catch (const ConsensusError& e) {
        EXPECT_EQ(e.kind(), ConsensusError::Kind::InsufficientDistinctValidators);
    }
}

TEST(SelectionProperty, UniformChance)
{
    Overlay o = controllers(64);
    std::vector<int> counts(64, 0);
    for (std::uint32_t e = 0; e < 2000; ++e) {
        const std::uint32_t owner = e % 64;
        for (const auto& t : select_validators(o, Address::for_node(owner), Hasher().update("entity").update_u32(e).finish(), 12)) {
            ++counts[t.validator];
        }
    }
    const double expected = 2000.0 * 12 / 64;
    for (int c : counts) {
        EXPECT_GE(c, 0.5 * expected);
        EXPECT_LE(c, 1.5 * expected);
    }
}

TEST(Validate, Transaction)
{
    Block g = make_genesis(1);
    ChainView view(g);
    FinalizedSeqs finalized;
    Transaction tx = valid_tx(g);
    EXPECT_EQ(validate_transaction(tx, view, finalized, kRules), Decision::approve);

    finalized.insert({1, 0});
    EXPECT_EQ(validate_transaction(tx, view, finalized, kRules), Decision::reject);
    finalized.clear();

    Transaction self = tx;
    self.recipient = 1;
    seal(self);
    EXPECT_EQ(validate_transaction(self, view, finalized, kRules), Decision::reject);

    Transaction two = tx;
    two.amount = 2;
    seal(two);
    EXPECT_EQ(validate_transaction(two, view, finalized, kRules), Decision::reject);

    Transaction orphan = tx;
    orphan.prev_block_id = sha256("nowhere");
    seal(orphan);
    EXPECT_EQ(validate_transaction(orphan, view, finalized, kRules), Decision::reject);

    Transaction forged = tx;
    forged.seq = 9;
    EXPECT_EQ(validate_transaction(forged, view, finalized, kRules), Decision::reject);
}

TEST(Validate, Block)
{
    Block g = make_genesis(1);
    ChainView view(g);
    Transaction t0 = signed_tx(g, 0), t1 = signed_tx(g, 1), t2 = signed_tx(g, 2);

    BlockBundle ok = bundle_of(g.id, 1, {t0, t1});
    EXPECT_EQ(validate_block(ok, view, kRules), Decision::approve);
    EXPECT_EQ(validate_block(bundle_of(g.id, 1, {t0, t0}), view, kRules), Decision::reject);
    EXPECT_EQ(validate_block(bundle_of(g.id, 2, {t0, t1}), view, kRules), Decision::reject);
    EXPECT_EQ(validate_block(bundle_of(g.id, 1, {t0}), view, kRules), Decision::reject);

    Transaction unsigned_tx = t2;
    unsigned_tx.signatures.resize(9);
    EXPECT_EQ(validate_block(bundle_of(g.id, 1, {t0, unsigned_tx}), view, kRules), Decision::reject);

    view.add_block(ok.block);
    // Parent already extended, and a tx already in the parent.
    EXPECT_EQ(validate_block(bundle_of(g.id, 1, {t2, signed_tx(g, 3)}), view, kRules), Decision::reject);
    EXPECT_EQ(validate_block(bundle_of(ok.block.id, 2, {t1, t2}), view, kRules), Decision::reject);
    EXPECT_EQ(validate_block(bundle_of(ok.block.id, 2, {t2, signed_tx(g, 3)}), view, kRules), Decision::approve);
}

TEST(Validate, DrainBlocks)
{
    Block g = make_genesis(1);
    ChainView view(g);
    ValidationRules rules{32, 10, 10, false};
    std::vector<Transaction> seven;
    for (std::uint64_t s = 0; s < 7; ++s) seven.push_back(signed_tx(g, s));
    BlockBundle drain = bundle_of(g.id, 1, seven, true);
    EXPECT_EQ(validate_block(drain, view, rules), Decision::reject);
    rules.drain_mode = true;
    EXPECT_EQ(validate_block(drain, view, rules), Decision::approve);
    EXPECT_EQ(validate_block(bundle_of(g.id, 1, {}, true), view, rules), Decision::reject);
}

TEST(Validate, MaliciousInverts)
{
    EXPECT_EQ(apply_behavior(Decision::approve, true), Decision::reject);
    EXPECT_EQ(apply_behavior(Decision::reject, true), Decision::approve);
    EXPECT_EQ(apply_behavior(Decision::approve, false), Decision::approve);
}

TEST(EconomyProperty, ConservationUnderRandomRounds)
{
    SimulationConfig cfg = lightchain::testing::sample_config();
    EconomyLedger ledger(30, 20);
    std::int64_t blocks = 0;
    for (std::uint32_t i = 0; i < 400; ++i) {
        auto tickets = tickets_with(i % 13, 12);
        bool is_block = i % 3 == 0;
        if (finalize(is_block, i % 30, tickets, ledger, cfg).finalized && is_block) ++blocks;
        ASSERT_EQ(ledger.total(), 30 * 20 + 3 * blocks);
    }
}

TEST(FinalizedSeqsProperty, MatchesOrderedSet)
{
    std::mt19937_64 gen(11);
    FinalizedSeqs seqs;
    std::set<FinalizedSeqs::Key> oracle;
    const std::uint64_t big = std::uint64_t{1} << 40;
    for (int i = 0; i < 5000; ++i) {
        FinalizedSeqs::Key key{static_cast<std::uint32_t>(gen() % 40), gen() % 4 == 0 ? big + gen() % 50 : gen() % 300};
        if (gen() % 2) {
            seqs.insert(key);
            oracle.insert(key);
        }
        ASSERT_EQ(seqs.contains(key), oracle.contains(key));
    }
    seqs.clear();
    for (const auto& key : oracle) EXPECT_FALSE(seqs.contains(key));
}
