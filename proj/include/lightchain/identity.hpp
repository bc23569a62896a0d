#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lightchain {

inline constexpr std::size_t kIdentifierBytes = 32;
inline constexpr std::size_t kIdentifierBits = kIdentifierBytes * 8;

/// Fixed-width 256-bit identifier shared by controllers and data objects.
///
/// Ordering is unsigned big-endian numeric comparison, which is what
/// lexicographic comparison of the byte array gives us.
class Identifier {
public:
    using Bytes = std::array<std::uint8_t, kIdentifierBytes>;

    constexpr Identifier() = default;
    explicit constexpr Identifier(const Bytes& bytes) : bytes_(bytes) {}

    const Bytes& bytes() const { return bytes_; }

    /// Bit i counted from the most significant bit.
    bool bit(std::size_t i) const { return (bytes_[i / 8] >> (7 - i % 8)) & 1U; }

    /// Top 64 bits as an integer; used for modular reductions of probe hashes.
    std::uint64_t high64() const;

    bool is_zero() const;
    std::string hex() const;
    static Identifier from_hex(std::string_view hex);

    auto operator<=>(const Identifier&) const = default;

private:
    Bytes bytes_{};
};

/// Incremental SHA-256 over a field sequence. Integers are fed big-endian.
class Hasher {
public:
    Hasher& update(std::span<const std::uint8_t> bytes);
    Hasher& update(std::string_view text);
    Hasher& update(const Identifier& id);
    Hasher& update_u32(std::uint32_t value);
    Hasher& update_u64(std::uint64_t value);
    Identifier finish() const;

private:
    std::vector<std::uint8_t> buffer_;
};

Identifier sha256(std::span<const std::uint8_t> bytes);
Identifier sha256(std::string_view text);

/// Simulated key material. There is no real asymmetric crypto here; the
/// public key is a fixed label plus the node index.
struct NodeKey {
    std::string public_key;
    std::uint32_t node_index = 0;

    static NodeKey for_node(std::uint32_t node_index);
};

/// Middleware endpoint of a node: host:port analogue plus the node ordinal.
struct Address {
    std::uint32_t node_index = 0;
    std::uint32_t host = 0;
    std::uint16_t port = 0;

    static Address for_node(std::uint32_t node_index);
    std::string to_string() const;

    auto operator<=>(const Address&) const = default;
};

Identifier derive_node_identifier(const NodeKey& key);
Identifier derive_object_identifier(std::span<const std::uint8_t> canonical_bytes);

/// Number of leading bits shared by a and b, in [0, 256].
std::size_t common_prefix_len(const Identifier& a, const Identifier& b);

/// Name ID used for skip-graph level membership: the identifier's bits read
/// from the least significant end. Independent of the numeric ordering that
/// the leading bits determine.
Identifier membership_vector(const Identifier& id);

}  // namespace lightchain

template <>
struct std::hash<lightchain::Identifier> {
    std::size_t operator()(const lightchain::Identifier& id) const noexcept
    {
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t); ++i) {
            h = (h << 8) | id.bytes()[i];
        }
        return h;
    }
};
