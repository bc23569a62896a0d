#include "lightchain/identity.hpp"
#include "lightchain/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace lightchain;

TEST(Identity, NodeIdentifierMatchesHashlib)
{
    // hashlib.sha256(b"node-0").hexdigest()
    EXPECT_EQ(derive_node_identifier(NodeKey::for_node(0)).hex(),
              "7c6cc41e6bf72e7a7cd7b752d70b12e79212cffc30e18a8b1c3f0b51db459950");
}

TEST(Identity, EmptyKeyRejected)
{
    EXPECT_THROW(derive_node_identifier(NodeKey{}), std::invalid_argument);
}

TEST(Identity, HexRoundTrip)
{
    Identifier id = sha256("abc");
    EXPECT_EQ(id.hex(), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(Identifier::from_hex(id.hex()), id);
}

TEST(Identity, CommonPrefix)
{
    Identifier::Bytes a{}, b{};
    a[0] = 0b1010'0000;
    b[0] = 0b1001'0000;
    EXPECT_EQ(common_prefix_len(Identifier(a), Identifier(b)), 2u);
    EXPECT_EQ(common_prefix_len(Identifier(a), Identifier(a)), kIdentifierBits);
}

TEST(Identity, OrderingIsNumeric)
{
    Identifier::Bytes lo{}, hi{};
    lo[31] = 0xff;
    hi[0] = 0x01;
    EXPECT_LT(Identifier(lo), Identifier(hi));
}

TEST(Identity, MembershipVectorReversesBits)
{
    Identifier::Bytes b{};
    b[31] = 0x01;
    Identifier m = membership_vector(Identifier(b));
    EXPECT_TRUE(m.bit(0));
    for (std::size_t i = 1; i < kIdentifierBits; ++i) ASSERT_FALSE(m.bit(i));
    Identifier id = sha256("x");
    EXPECT_EQ(membership_vector(membership_vector(id)), id);
}

TEST(Identity, AddressFormat)
{
    EXPECT_EQ(Address::for_node(4).to_string(), "10.0.0.5:1099");
}

TEST(IdentityProperty, DistinctKeysDistinctIds)
{
    std::set<Identifier> ids;
    for (std::uint32_t i = 0; i < 5000; ++i) ids.insert(derive_node_identifier(NodeKey::for_node(i)));
    EXPECT_EQ(ids.size(), 5000u);
}

TEST(IdentityProperty, PrefixIsSymmetricAndBounded)
{
    RandomStream rng(3, "prefix");
    for (int i = 0; i < 2000; ++i) {
        Identifier a = Hasher().update_u64(rng.next()).finish();
        Identifier b = Hasher().update_u64(rng.next()).finish();
        std::size_t p = common_prefix_len(a, b);
        EXPECT_EQ(p, common_prefix_len(b, a));
        for (std::size_t k = 0; k < p; ++k) ASSERT_EQ(a.bit(k), b.bit(k));
        if (p < kIdentifierBits) ASSERT_NE(a.bit(p), b.bit(p));
    }
}
