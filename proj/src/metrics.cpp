#include "lightchain/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace lightchain {

void write_csv(std::ostream& out, std::vector<MetricRecord> records)
{
    std::sort(records.begin(), records.end(), [](const MetricRecord& a, const MetricRecord& b) {
        if (a.finalized_at != b.finalized_at) return a.finalized_at < b.finalized_at;
        return a.entity_id < b.entity_id;
    });
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << (r.type == EntityType::tx ? "tx" : "block") << ',' << r.entity_id.hex() << ',' << r.owner << ','
            << r.created_at << ',' << r.finalized_at << ',' << r.messages << ',' << r.bytes << ','
            << r.memory_bytes << ',' << r.validators_contacted << ',' << r.approvals << ',';
        if (r.height) out << *r.height;
        out << ',';
        if (r.size) out << *r.size;
        out << '\n';
    }
}

std::string to_csv(std::vector<MetricRecord> records)
{
    std::ostringstream out;
    write_csv(out, std::move(records));
    return out.str();
}

void write_csv_file(const std::string& path, std::vector<MetricRecord> records)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputUnwritable("cannot open " + path + " for writing");
    write_csv(out, std::move(records));
    out.flush();
    if (!out) throw OutputUnwritable("failed writing " + path);
}

SimulationReport summarize(const std::vector<MetricRecord>& records)
{
    SimulationReport report;
    std::uint64_t tx_time = 0;
    std::uint64_t block_time = 0;
    std::uint64_t block_txs = 0;
    for (const auto& r : records) {
        const std::uint64_t elapsed = r.finalized_at - r.created_at;
        if (r.type == EntityType::tx) {
            ++report.finalized_txs;
            tx_time += elapsed;
        } else {
            ++report.finalized_blocks;
            block_time += elapsed;
            block_txs += r.size.value_or(0);
            if (r.drain) ++report.drain_blocks;
        }
    }
    if (report.finalized_txs > 0) {
        report.avg_tx_time_ms = static_cast<double>(tx_time) / static_cast<double>(report.finalized_txs);
    }
    if (report.finalized_blocks > 0) {
        report.avg_block_time_ms = static_cast<double>(block_time) / static_cast<double>(report.finalized_blocks);
        report.avg_block_size = static_cast<double>(block_txs) / static_cast<double>(report.finalized_blocks);
    }
    return report;
}

void print_report(std::ostream& out, const SimulationReport& r)
{
    std::uint64_t max_store = 0;
    std::uint64_t min_store = r.storage_per_node.empty() ? 0 : UINT64_MAX;
    for (auto s : r.storage_per_node) {
        max_store = std::max(max_store, s);
        min_store = std::min(min_store, s);
    }
    out << std::fixed << std::setprecision(2);
    out << "== simulation summary ==\n"
        << "finalized transactions   " << r.finalized_txs << '\n'
        << "finalized blocks         " << r.finalized_blocks << " (" << r.drain_blocks << " drain)\n"
        << "chain height             " << r.chain_height << '\n'
        << "avg tx time              " << r.avg_tx_time_ms << " ms\n"
        << "avg block time           " << r.avg_block_time_ms << " ms\n"
        << "avg block size           " << r.avg_block_size << " txs\n"
        << "total messages           " << r.total_messages << '\n'
        << "total payload bytes      " << r.total_bytes << '\n'
        << "total minted             " << r.total_minted << '\n'
        << "negative balance events  " << r.negative_balance_events << '\n'
        << "stored entities per node " << min_store << " min / " << max_store << " max\n"
        << "virtual end time         " << r.virtual_end_ms << " ms\n"
        << "wall clock               " << r.wall_clock_s << " s\n";
}

}  // namespace lightchain
