#pragma once

#include "lightchain/identity.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lightchain {

enum class EntityType : std::uint8_t { tx, block };

/// One CSV row: a finalized transaction or block.
struct MetricRecord {
    EntityType type = EntityType::tx;
    Identifier entity_id;
    Identifier context;  // lifecycle context the message counters were kept under
    std::uint32_t owner = 0;
    std::uint64_t created_at = 0;
    std::uint64_t finalized_at = 0;
    std::uint64_t messages = 0;
    std::uint64_t bytes = 0;
    std::uint64_t memory_bytes = 0;
    std::uint32_t validators_contacted = 0;
    std::uint32_t approvals = 0;
    std::optional<std::uint64_t> height;
    std::optional<std::uint64_t> size;
    bool drain = false;
};

inline constexpr const char* kCsvHeader =
    "event_type,entity_id,owner,created_at_ms,finalized_at_ms,messages,bytes,memory_bytes,"
    "validators_contacted,approvals,height,size";

class OutputUnwritable : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sorts by (finalized_at, entity_id) and writes header plus rows.
void write_csv(std::ostream& out, std::vector<MetricRecord> records);
std::string to_csv(std::vector<MetricRecord> records);
void write_csv_file(const std::string& path, std::vector<MetricRecord> records);

struct SimulationReport {
    double avg_tx_time_ms = 0.0;
    double avg_block_time_ms = 0.0;
    double avg_block_size = 0.0;
    std::uint64_t finalized_txs = 0;
    std::uint64_t finalized_blocks = 0;
    std::uint64_t drain_blocks = 0;
    std::uint64_t chain_height = 0;
    std::uint64_t total_messages = 0;
    std::uint64_t total_bytes = 0;
    std::int64_t total_minted = 0;
    std::uint64_t negative_balance_events = 0;
    std::vector<std::uint64_t> storage_per_node;
    std::uint64_t virtual_end_ms = 0;
    double wall_clock_s = 0.0;
};

/// Averages over the records only; engine-side totals are left zero.
SimulationReport summarize(const std::vector<MetricRecord>& records);

void print_report(std::ostream& out, const SimulationReport& report);

}  // namespace lightchain
