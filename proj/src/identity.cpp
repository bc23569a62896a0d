#include "lightchain/identity.hpp"

#include <openssl/sha.h>

#include <stdexcept>

namespace lightchain {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

std::uint64_t Identifier::high64() const
{
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        v = (v << 8) | bytes_[i];
    }
    return v;
}

bool Identifier::is_zero() const
{
    for (auto b : bytes_) {
        if (b != 0) return false;
    }
    return true;
}

std::string Identifier::hex() const
{
    std::string out;
    out.reserve(kIdentifierBytes * 2);
    for (auto b : bytes_) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0xF]);
    }
    return out;
}

Identifier Identifier::from_hex(std::string_view hex)
{
    if (hex.size() != kIdentifierBytes * 2) {
        throw std::invalid_argument("identifier hex must be 64 characters");
    }
    Bytes bytes{};
    for (std::size_t i = 0; i < kIdentifierBytes; ++i) {
        int hi = hex_value(hex[2 * i]);
        int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw std::invalid_argument("identifier hex has a non-hex character");
        }
        bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return Identifier(bytes);
}

Hasher& Hasher::update(std::span<const std::uint8_t> bytes)
{
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
    return *this;
}

Hasher& Hasher::update(std::string_view text)
{
    buffer_.insert(buffer_.end(), text.begin(), text.end());
    return *this;
}

Hasher& Hasher::update(const Identifier& id)
{
    return update(std::span<const std::uint8_t>(id.bytes()));
}

Hasher& Hasher::update_u32(std::uint32_t value)
{
    for (int shift = 24; shift >= 0; shift -= 8) {
        buffer_.push_back(static_cast<std::uint8_t>(value >> shift));
    }
    return *this;
}

Hasher& Hasher::update_u64(std::uint64_t value)
{
    for (int shift = 56; shift >= 0; shift -= 8) {
        buffer_.push_back(static_cast<std::uint8_t>(value >> shift));
    }
    return *this;
}

Identifier Hasher::finish() const
{
    return sha256(std::span<const std::uint8_t>(buffer_));
}

Identifier sha256(std::span<const std::uint8_t> bytes)
{
    Identifier::Bytes digest{};
    SHA256(bytes.data(), bytes.size(), digest.data());
    return Identifier(digest);
}

Identifier sha256(std::string_view text)
{
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

NodeKey NodeKey::for_node(std::uint32_t node_index)
{
    return NodeKey{"node-" + std::to_string(node_index), node_index};
}

Address Address::for_node(std::uint32_t node_index)
{
    // 10.0.0.0/8 private range, one host per node, fixed RMI-style port.
    return Address{node_index, (10U << 24) | (node_index + 1), 1099};
}

std::string Address::to_string() const
{
    return std::to_string(host >> 24) + "." + std::to_string((host >> 16) & 0xFF) + "." +
           std::to_string((host >> 8) & 0xFF) + "." + std::to_string(host & 0xFF) + ":" +
           std::to_string(port);
}

Identifier derive_node_identifier(const NodeKey& key)
{
    if (key.public_key.empty()) {
        throw std::invalid_argument("node public key must be non-empty");
    }
    return sha256(key.public_key);
}

Identifier derive_object_identifier(std::span<const std::uint8_t> canonical_bytes)
{
    return sha256(canonical_bytes);
}

std::size_t common_prefix_len(const Identifier& a, const Identifier& b)
{
    for (std::size_t i = 0; i < kIdentifierBytes; ++i) {
        std::uint8_t diff = a.bytes()[i] ^ b.bytes()[i];
        if (diff != 0) {
            std::size_t k = i * 8;
            for (int bit = 7; bit >= 0 && !((diff >> bit) & 1U); --bit) {
                ++k;
            }
            return k;
        }
    }
    return kIdentifierBits;
}

Identifier membership_vector(const Identifier& id)
{
    Identifier::Bytes out{};
    for (std::size_t i = 0; i < kIdentifierBytes; ++i) {
        std::uint8_t b = id.bytes()[kIdentifierBytes - 1 - i];
        std::uint8_t r = 0;
        for (int bit = 0; bit < 8; ++bit) {
            r = static_cast<std::uint8_t>((r << 1) | ((b >> bit) & 1U));
        }
        out[i] = r;
    }
    return Identifier(out);
}

}  // namespace lightchain
