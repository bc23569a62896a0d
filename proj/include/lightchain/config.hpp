#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lightchain {

/// Parsed `simulation.config`. Field comments give the file key.
struct SimulationConfig {
    std::uint32_t nodes = 0;                  // NODES
    std::uint32_t transactions_per_node = 0;  // TRANSACTIONS
    std::uint64_t inter_tx_delay_s = 0;       // DELAY
    std::uint32_t block_size_min = 0;         // BLK_SIZE
    std::int64_t initial_balance = 0;         // INIT_BALANCE
    double malicious_fraction = 0.0;          // MALICIOUS
    std::uint32_t validators_per_entity = 0;  // VALID_THR
    std::uint32_t signature_threshold = 0;    // SIG_THR
    std::int64_t validation_fee = 0;          // VALID_FEE
    std::int64_t routing_fee = 0;             // ROUTE_FEE
    std::int64_t block_reward = 0;            // REWARD

    std::uint64_t inter_tx_delay_ms() const { return inter_tx_delay_s * 1000; }

    bool operator==(const SimulationConfig&) const = default;
};

class ConfigError : public std::runtime_error {
public:
    enum class Kind { MissingKey, DuplicateKey, UnknownKey, MalformedLine, ValueOutOfRange, Unreadable };

    ConfigError(Kind kind, std::string subject, std::size_t line_no = 0);

    Kind kind() const { return kind_; }
    /// Key name, or file path for Unreadable; empty for MalformedLine.
    const std::string& subject() const { return subject_; }
    std::size_t line_no() const { return line_no_; }

private:
    Kind kind_;
    std::string subject_;
    std::size_t line_no_;
};

SimulationConfig parse_config(std::string_view text);
SimulationConfig load_config(const std::string& path);

/// Throws ConfigError(ValueOutOfRange) naming the first violated field.
void validate_config(const SimulationConfig& cfg);

/// `KEY = VALUE` lines in canonical key order; parse_config round-trips it.
std::string to_config_text(const SimulationConfig& cfg);

/// round-half-up(malicious_fraction * nodes), kept below nodes.
std::uint32_t malicious_count(const SimulationConfig& cfg);

}  // namespace lightchain
