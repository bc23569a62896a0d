#include "lightchain/ledger.hpp"

namespace lightchain {

namespace {

constexpr std::uint8_t kTransactionTag = 0x01;
constexpr std::uint8_t kBlockTag = 0x02;

class Writer {
public:
    explicit Writer(Bytes& out) : out_(out) {}
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v)
    {
        for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void u64(std::uint64_t v)
    {
        for (int s = 56; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void id(const Identifier& v) { out_.insert(out_.end(), v.bytes().begin(), v.bytes().end()); }
    void raw(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

private:
    Bytes& out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32()
    {
        auto b = take(4);
        std::uint32_t v = 0;
        for (auto x : b) v = (v << 8) | x;
        return v;
    }
    std::uint64_t u64()
    {
        auto b = take(8);
        std::uint64_t v = 0;
        for (auto x : b) v = (v << 8) | x;
        return v;
    }
    Identifier id()
    {
        auto b = take(kIdentifierBytes);
        Identifier::Bytes out{};
        std::copy(b.begin(), b.end(), out.begin());
        return Identifier(out);
    }
    std::span<const std::uint8_t> take(std::size_t n)
    {
        if (in_.size() - pos_ < n) throw DecodeError("truncated entity encoding");
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t position() const { return pos_; }
    bool done() const { return pos_ == in_.size(); }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void write_signatures(Writer& w, const std::vector<Signature>& sigs)
{
    w.u32(static_cast<std::uint32_t>(sigs.size()));
    for (const auto& s : sigs) {
        w.u32(s.validator);
        w.u8(static_cast<std::uint8_t>(s.decision));
        w.id(s.token);
    }
}

std::vector<Signature> read_signatures(Reader& r)
{
    std::uint32_t n = r.u32();
    std::vector<Signature> sigs;
    sigs.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        Signature s;
        s.validator = r.u32();
        std::uint8_t d = r.u8();
        if (d > 2) throw DecodeError("bad decision byte");
        s.decision = static_cast<Decision>(d);
        s.token = r.id();
        sigs.push_back(s);
    }
    return sigs;
}

Entity read_entity(Reader& r, std::uint64_t genesis_seed)
{
    std::uint8_t tag = r.u8();
    if (tag == kTransactionTag) {
        Transaction tx;
        tx.owner = r.u32();
        tx.recipient = r.u32();
        tx.amount = r.u64();
        tx.prev_block_id = r.id();
        tx.seq = r.u64();
        tx.created_at = r.u64();
        tx.attempt = r.u32();
        tx.signatures = read_signatures(r);
        tx.id = expected_id(tx);
        return tx;
    }
    if (tag == kBlockTag) {
        Block b;
        b.owner = r.u32();
        b.prev_block_id = r.id();
        b.height = r.u64();
        b.created_at = r.u64();
        b.attempt = r.u32();
        std::uint8_t flags = r.u8();
        if (flags > 1) throw DecodeError("bad block flags");
        b.drain = flags == 1;
        std::uint32_t n = r.u32();
        b.tx_ids.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) b.tx_ids.push_back(r.id());
        b.signatures = read_signatures(r);
        b.id = expected_id(b, genesis_seed);
        return b;
    }
    throw DecodeError("unknown entity tag");
}

}  // namespace

const char* to_string(Decision d)
{
    switch (d) {
    case Decision::approve: return "approve";
    case Decision::reject: return "reject";
    case Decision::silent: return "silent";
    }
    return "?";
}

Identifier signature_token(const Identifier& entity_id, std::uint32_t validator, Decision decision)
{
    return Hasher()
        .update(entity_id)
        .update_u32(validator)
        .update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(&decision), 1))
        .finish();
}

bool verify(const Signature& sig, const Identifier& entity_id)
{
    return sig.token == signature_token(entity_id, sig.validator, sig.decision);
}

std::size_t count_approvals(std::span<const Signature> sigs, const Identifier& entity_id)
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        const auto& s = sigs[i];
        if (s.decision != Decision::approve || !verify(s, entity_id)) continue;
        bool repeated = false;
        for (std::size_t j = 0; j < i; ++j) repeated = repeated || sigs[j].validator == s.validator;
        if (!repeated) ++n;
    }
    return n;
}

const Identifier& entity_id(const Entity& e)
{
    return std::visit([](const auto& x) -> const Identifier& { return x.id; }, e);
}

std::uint32_t entity_owner(const Entity& e)
{
    return std::visit([](const auto& x) { return x.owner; }, e);
}

Bytes canonical_bytes(const Transaction& tx)
{
    Bytes out;
    out.reserve(69);
    Writer w(out);
    w.u8(kTransactionTag);
    w.u32(tx.owner);
    w.u32(tx.recipient);
    w.u64(tx.amount);
    w.id(tx.prev_block_id);
    w.u64(tx.seq);
    w.u64(tx.created_at);
    w.u32(tx.attempt);
    return out;
}

Bytes canonical_bytes(const Block& block)
{
    Bytes out;
    out.reserve(62 + block.tx_ids.size() * kIdentifierBytes);
    Writer w(out);
    w.u8(kBlockTag);
    w.u32(block.owner);
    w.id(block.prev_block_id);
    w.u64(block.height);
    w.u64(block.created_at);
    w.u32(block.attempt);
    w.u8(block.drain ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(block.tx_ids.size()));
    for (const auto& id : block.tx_ids) w.id(id);
    return out;
}

Bytes canonical_bytes(const Entity& e)
{
    return std::visit([](const auto& x) { return canonical_bytes(x); }, e);
}

Identifier expected_id(const Transaction& tx)
{
    return derive_object_identifier(canonical_bytes(tx));
}

Identifier genesis_id(std::uint64_t seed)
{
    return Hasher().update("genesis").update_u64(seed).finish();
}

Identifier expected_id(const Block& block, std::uint64_t genesis_seed)
{
    if (block.height == 0 && block.prev_block_id.is_zero() && block.tx_ids.empty()) {
        return genesis_id(genesis_seed);
    }
    return derive_object_identifier(canonical_bytes(block));
}

Block make_genesis(std::uint64_t seed)
{
    Block g;
    g.owner = 0;
    g.height = 0;
    g.id = genesis_id(seed);
    return g;
}

void seal(Transaction& tx)
{
    tx.id = expected_id(tx);
}

void seal(Block& block)
{
    block.id = derive_object_identifier(canonical_bytes(block));
}

Bytes encode_wire(const Entity& e)
{
    Bytes out = canonical_bytes(e);
    Writer w(out);
    std::visit([&](const auto& x) { write_signatures(w, x.signatures); }, e);
    return out;
}

Entity decode_wire(std::span<const std::uint8_t> bytes, std::uint64_t genesis_seed)
{
    Reader r(bytes);
    Entity e = read_entity(r, genesis_seed);
    if (!r.done()) throw DecodeError("trailing bytes after entity");
    return e;
}

Bytes encode_bundle(const BlockBundle& bundle)
{
    Bytes out = encode_wire(bundle.block);
    Writer w(out);
    w.u32(static_cast<std::uint32_t>(bundle.transactions.size()));
    for (const auto& tx : bundle.transactions) {
        Bytes one = encode_wire(tx);
        w.u32(static_cast<std::uint32_t>(one.size()));
        w.raw(one);
    }
    return out;
}

BlockBundle decode_bundle(std::span<const std::uint8_t> bytes, std::uint64_t genesis_seed)
{
    Reader r(bytes);
    Entity head = read_entity(r, genesis_seed);
    auto* block = std::get_if<Block>(&head);
    if (!block) throw DecodeError("bundle does not start with a block");
    BlockBundle bundle{std::move(*block), {}};
    std::uint32_t n = r.u32();
    bundle.transactions.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::uint32_t len = r.u32();
        Entity e = decode_wire(r.take(len), genesis_seed);
        auto* tx = std::get_if<Transaction>(&e);
        if (!tx) throw DecodeError("bundle carries a non-transaction");
        bundle.transactions.push_back(std::move(*tx));
    }
    if (!r.done()) throw DecodeError("trailing bytes after bundle");
    return bundle;
}

bool ReplicaStore::store(const Entity& entity)
{
    const Identifier& id = entity_id(entity);
    Identifier recomputed = std::visit(
        [&](const auto& x) {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Transaction>) {
                return expected_id(x);
            } else {
                return expected_id(x, genesis_seed_);
            }
        },
        entity);
    if (recomputed != id) {
        throw IdMismatch("entity id " + id.hex() + " does not match its content");
    }
    auto [it, inserted] = entities_.emplace(id, entity);
    if (inserted) bytes_ += canonical_bytes(entity).size();
    return inserted;
}

const Entity* ReplicaStore::fetch(const Identifier& id) const
{
    auto it = entities_.find(id);
    return it == entities_.end() ? nullptr : &it->second;
}

void ReplicaStore::check_invariants() const
{
    std::size_t total = 0;
    for (const auto& [id, e] : entities_) {
        Identifier recomputed = std::visit(
            [&](const auto& x) {
                if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Transaction>) {
                    return expected_id(x);
                } else {
                    return expected_id(x, genesis_seed_);
                }
            },
            e);
        if (recomputed != id) throw std::logic_error("replica store key does not match entity id");
        total += canonical_bytes(e).size();
    }
    if (total != bytes_) throw std::logic_error("replica store byte count drifted");
}

}  // namespace lightchain
