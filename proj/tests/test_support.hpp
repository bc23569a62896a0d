#pragma once

#include "lightchain/config.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace lightchain::testing {

inline std::string data_path(const std::string& name)
{
    return std::string(LIGHTCHAIN_TEST_DATA) + "/" + name;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline SimulationConfig sample_config()
{
    return parse_config(read_file(data_path("sample.config")));
}

/// Sample-config thresholds and fees at a smaller scale.
inline SimulationConfig small_config(std::uint32_t nodes, std::uint32_t txs, std::uint32_t blk, double malicious = 0.0)
{
    SimulationConfig cfg = sample_config();
    cfg.nodes = nodes;
    cfg.transactions_per_node = txs;
    cfg.block_size_min = blk;
    cfg.malicious_fraction = malicious;
    return cfg;
}

}  // namespace lightchain::testing
