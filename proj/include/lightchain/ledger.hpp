#pragma once

#include "lightchain/identity.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace lightchain {

using Bytes = std::vector<std::uint8_t>;
using VirtualMs = std::uint64_t;

enum class Decision : std::uint8_t { silent = 0, approve = 1, reject = 2 };

const char* to_string(Decision d);

/// A validator's decision over an entity; token = H(entity_id || validator || decision).
struct Signature {
    std::uint32_t validator = 0;
    Decision decision = Decision::silent;
    Identifier token;

    bool operator==(const Signature&) const = default;
};

Identifier signature_token(const Identifier& entity_id, std::uint32_t validator, Decision decision);
bool verify(const Signature& sig, const Identifier& entity_id);
std::size_t count_approvals(std::span<const Signature> sigs, const Identifier& entity_id);

struct Transaction {
    Identifier id;
    std::uint32_t owner = 0;
    std::uint32_t recipient = 0;
    std::uint64_t amount = 0;
    Identifier prev_block_id;
    std::uint64_t seq = 0;
    VirtualMs created_at = 0;
    std::uint32_t attempt = 0;
    std::vector<Signature> signatures;

    bool operator==(const Transaction&) const = default;
};

struct Block {
    Identifier id;
    std::uint32_t owner = 0;
    Identifier prev_block_id;
    std::uint64_t height = 0;
    std::vector<Identifier> tx_ids;
    VirtualMs created_at = 0;
    std::uint32_t attempt = 0;
    bool drain = false;
    std::vector<Signature> signatures;

    bool operator==(const Block&) const = default;
};

using Entity = std::variant<Transaction, Block>;

const Identifier& entity_id(const Entity& e);
std::uint32_t entity_owner(const Entity& e);

/// Id-bearing encoding: kind tag, fixed-width big-endian fields in
/// declaration order, u32 count before tx_ids. Signatures are excluded.
Bytes canonical_bytes(const Transaction& tx);
Bytes canonical_bytes(const Block& block);
Bytes canonical_bytes(const Entity& e);

/// Id the entity must carry. Genesis (height 0, no parent) is anchored to
/// H("genesis" || seed) instead of its bytes.
Identifier expected_id(const Transaction& tx);
Identifier expected_id(const Block& block, std::uint64_t genesis_seed);

Block make_genesis(std::uint64_t seed);
Identifier genesis_id(std::uint64_t seed);

/// Fills in tx.id / block.id from the canonical bytes.
void seal(Transaction& tx);
void seal(Block& block);

class DecodeError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Canonical bytes followed by the signature section. The id is recomputed
/// on decode, so decode(encode(e)) == e for any sealed entity.
Bytes encode_wire(const Entity& e);
Entity decode_wire(std::span<const std::uint8_t> bytes, std::uint64_t genesis_seed);

/// A block together with the transactions it references, as shipped in
/// validation requests and block announcements.
struct BlockBundle {
    Block block;
    std::vector<Transaction> transactions;
};
Bytes encode_bundle(const BlockBundle& bundle);
BlockBundle decode_bundle(std::span<const std::uint8_t> bytes, std::uint64_t genesis_seed);

class IdMismatch : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-node in-memory database of replicated transactions and blocks.
class ReplicaStore {
public:
    explicit ReplicaStore(std::uint64_t genesis_seed = 0) : genesis_seed_(genesis_seed) {}

    /// Idempotent put. Returns true on first insert. Throws IdMismatch.
    bool store(const Entity& entity);
    const Entity* fetch(const Identifier& id) const;

    std::size_t entity_count() const { return entities_.size(); }
    std::size_t byte_count() const { return bytes_; }
    const std::map<Identifier, Entity>& entities() const { return entities_; }

    /// Recomputes ids and byte totals; throws std::logic_error on mismatch.
    void check_invariants() const;

private:
    std::uint64_t genesis_seed_;
    std::map<Identifier, Entity> entities_;
    std::size_t bytes_ = 0;
};

}  // namespace lightchain
