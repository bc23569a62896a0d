#include "lightchain/chain_view.hpp"
#include "lightchain/ledger.hpp"
#include "lightchain/rng.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <map>
#include <sstream>

using namespace lightchain;
using lightchain::testing::data_path;
using lightchain::testing::read_file;

namespace {

std::map<std::string, std::string> golden_ids()
{
    std::map<std::string, std::string> out;
    std::istringstream in(read_file(data_path("ledger_ids.txt")));
    std::string name, hex;
    while (in >> name >> hex) out[name] = hex;
    return out;
}

Transaction fixture_tx()
{
    Transaction tx;
    tx.owner = 3;
    tx.recipient = 7;
    tx.amount = 1;
    tx.prev_block_id = genesis_id(42);
    tx.seq = 5;
    tx.created_at = 1234;
    seal(tx);
    return tx;
}

Block child_of(const Identifier& parent, std::uint64_t height, std::uint32_t owner, std::vector<Identifier> txs = {})
{
    Block b;
    b.owner = owner;
    b.prev_block_id = parent;
    b.height = height;
    b.tx_ids = std::move(txs);
    seal(b);
    return b;
}

Transaction random_tx(RandomStream& rng)
{
    Transaction tx;
    tx.owner = static_cast<std::uint32_t>(rng.uniform_below(100));
    tx.recipient = static_cast<std::uint32_t>(rng.uniform_below(100));
    tx.amount = rng.uniform_below(5);
    tx.prev_block_id = Hasher().update_u64(rng.next()).finish();
    tx.seq = rng.next();
    tx.created_at = rng.uniform_below(1'000'000);
    tx.attempt = static_cast<std::uint32_t>(rng.uniform_below(4));
    seal(tx);
    for (std::uint64_t k = rng.uniform_below(4); k > 0; --k) {
        auto v = static_cast<std::uint32_t>(rng.uniform_below(100));
        auto d = static_cast<Decision>(rng.uniform_below(3));
        tx.signatures.push_back({v, d, signature_token(tx.id, v, d)});
    }
    return tx;
}

}  // namespace

TEST(Ledger, CanonicalTransactionBytes)
{
    const std::string golden = read_file(data_path("tx_canonical.bin"));
    Bytes bytes = canonical_bytes(fixture_tx());
    ASSERT_EQ(bytes.size(), 69u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.end()), golden);
}

TEST(Ledger, IdsMatchIndependentEncoder)
{
    auto ids = golden_ids();
    Transaction tx = fixture_tx();
    EXPECT_EQ(genesis_id(42).hex(), ids["genesis"]);
    EXPECT_EQ(tx.id.hex(), ids["tx"]);

    Block b;
    b.owner = 9;
    b.prev_block_id = genesis_id(42);
    b.height = 1;
    b.created_at = 2500;
    b.attempt = 1;
    b.tx_ids = {tx.id};
    seal(b);
    EXPECT_EQ(b.id.hex(), ids["block"]);
    EXPECT_EQ(signature_token(tx.id, 4, Decision::approve).hex(), ids["token"]);
}

TEST(Ledger, SignaturesAreNotPartOfTheId)
{
    Transaction tx = fixture_tx();
    Identifier before = tx.id;
    tx.signatures.push_back({4, Decision::approve, signature_token(tx.id, 4, Decision::approve)});
    EXPECT_EQ(expected_id(tx), before);
}

TEST(Ledger, CountApprovalsIgnoresForgedAndRepeated)
{
    Transaction tx = fixture_tx();
    std::vector<Signature> sigs{
        {1, Decision::approve, signature_token(tx.id, 1, Decision::approve)},
        {1, Decision::approve, signature_token(tx.id, 1, Decision::approve)},
        {2, Decision::approve, signature_token(tx.id, 2, Decision::reject)},
        {3, Decision::reject, signature_token(tx.id, 3, Decision::reject)},
        {4, Decision::approve, signature_token(tx.id, 4, Decision::approve)},
    };
    EXPECT_EQ(count_approvals(sigs, tx.id), 2u);
}

TEST(Ledger, DecodeRejectsTruncation)
{
    Bytes wire = encode_wire(fixture_tx());
    wire.pop_back();
    EXPECT_THROW(decode_wire(wire, 42), DecodeError);
    Bytes bad{0x07};
    EXPECT_THROW(decode_wire(bad, 42), DecodeError);
}

TEST(Ledger, StoreIsIdempotentAndChecksIds)
{
    ReplicaStore store(42);
    Transaction tx = fixture_tx();
    EXPECT_TRUE(store.store(tx));
    EXPECT_FALSE(store.store(tx));
    EXPECT_EQ(store.entity_count(), 1u);
    EXPECT_EQ(store.byte_count(), 69u);
    ASSERT_NE(store.fetch(tx.id), nullptr);
    EXPECT_EQ(store.fetch(sha256("missing")), nullptr);

    EXPECT_TRUE(store.store(make_genesis(42)));
    tx.amount = 2;
    EXPECT_THROW(store.store(tx), IdMismatch);
    store.check_invariants();
}

TEST(LedgerProperty, WireRoundTrip)
{
    RandomStream rng(11, "wire");
    for (int i = 0; i < 300; ++i) {
        Transaction tx = random_tx(rng);
        EXPECT_EQ(std::get<Transaction>(decode_wire(encode_wire(tx), 42)), tx);

        BlockBundle bundle;
        bundle.block.owner = static_cast<std::uint32_t>(rng.uniform_below(50));
        bundle.block.prev_block_id = Hasher().update_u64(rng.next()).finish();
        bundle.block.height = 1 + rng.uniform_below(100);
        bundle.block.drain = rng.bernoulli(0.5);
        for (std::uint64_t k = rng.uniform_below(6); k > 0; --k) {
            bundle.transactions.push_back(random_tx(rng));
            bundle.block.tx_ids.push_back(bundle.transactions.back().id);
        }
        seal(bundle.block);
        BlockBundle back = decode_bundle(encode_bundle(bundle), 42);
        EXPECT_EQ(back.block, bundle.block);
        EXPECT_EQ(back.transactions, bundle.transactions);
    }
    Block g = make_genesis(42);
    EXPECT_EQ(std::get<Block>(decode_wire(encode_wire(g), 42)), g);
}

TEST(ChainView, ForkRuleAndReorg)
{
    Block g = make_genesis(1);
    ChainView view(g);
    Identifier t1 = sha256("t1"), t2 = sha256("t2"), t3 = sha256("t3");

    Block a = child_of(g.id, 1, 1, {t1});
    Block b = child_of(g.id, 1, 2, {t2});
    auto u1 = view.add_block(a);
    EXPECT_EQ(u1.added, std::vector<Identifier>{t1});
    auto u2 = view.add_block(b);
    const Block& winner = a.id < b.id ? a : b;
    EXPECT_EQ(view.tail(), winner.id);
    EXPECT_EQ(u2.tail_changed, winner.id == b.id);

    const Block& loser = winner.id == a.id ? b : a;
    Block c = child_of(loser.id, 2, 3, {t3});
    auto u3 = view.add_block(c);
    EXPECT_EQ(view.tail(), c.id);
    EXPECT_TRUE(view.in_chain(t3));
    EXPECT_EQ(view.in_chain(t1), loser.id == a.id);
    EXPECT_EQ(view.in_chain(t2), loser.id == b.id);
    EXPECT_EQ(u3.removed.size(), winner.id == loser.id ? 0u : 1u);
    view.check_integrity();
}

TEST(ChainView, OrphansWaitForTheirParent)
{
    Block g = make_genesis(1);
    ChainView view(g);
    Block a = child_of(g.id, 1, 1, {sha256("x")});
    Block b = child_of(a.id, 2, 1, {sha256("y")});
    EXPECT_TRUE(view.add_block(b).added.empty());
    EXPECT_TRUE(view.is_parked(b.id));
    auto u = view.add_block(a);
    EXPECT_EQ(u.added.size(), 2u);
    EXPECT_EQ(view.tail(), b.id);
    EXPECT_EQ(view.tail_height(), 2u);
    EXPECT_TRUE(view.tx_in_ancestry(sha256("x"), b.id));
    EXPECT_FALSE(view.tx_in_ancestry(sha256("y"), a.id));
}
