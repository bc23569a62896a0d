#include "lightchain/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace lightchain {

namespace {

constexpr std::array<std::string_view, 11> kKeys = {
    "NODES",       "TRANSACTIONS", "DELAY",     "BLK_SIZE",  "INIT_BALANCE", "MALICIOUS",
    "VALID_THR",   "SIG_THR",      "VALID_FEE", "ROUTE_FEE", "REWARD",
};

std::string describe(ConfigError::Kind kind, const std::string& subject, std::size_t line_no)
{
    switch (kind) {
    case ConfigError::Kind::MissingKey:
        return "missing key " + subject;
    case ConfigError::Kind::DuplicateKey:
        return "duplicate key " + subject + " on line " + std::to_string(line_no);
    case ConfigError::Kind::UnknownKey:
        return "unknown key " + subject + " on line " + std::to_string(line_no);
    case ConfigError::Kind::MalformedLine:
        return "malformed line " + std::to_string(line_no);
    case ConfigError::Kind::ValueOutOfRange:
        return "value out of range for " + subject;
    case ConfigError::Kind::Unreadable:
        return "cannot read config file " + subject;
    }
    return "config error";
}

std::string_view trim(std::string_view s)
{
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

struct RawValue {
    std::string text;
    std::size_t line_no;
};

std::int64_t parse_integer(const RawValue& raw, std::string_view key)
{
    std::int64_t value = 0;
    const char* first = raw.text.data();
    const char* last = first + raw.text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) {
        throw ConfigError(ConfigError::Kind::ValueOutOfRange, std::string(key));
    }
    if (ec != std::errc() || ptr != last) {
        throw ConfigError(ConfigError::Kind::MalformedLine, "", raw.line_no);
    }
    return value;
}

double parse_decimal(const RawValue& raw)
{
    double value = 0.0;
    const char* first = raw.text.data();
    const char* last = first + raw.text.size();
    auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::fixed);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw ConfigError(ConfigError::Kind::MalformedLine, "", raw.line_no);
    }
    return value;
}

template <typename T>
T checked_count(std::int64_t v, std::string_view key)
{
    if (v < 0 || static_cast<std::uint64_t>(v) > std::numeric_limits<T>::max()) {
        throw ConfigError(ConfigError::Kind::ValueOutOfRange, std::string(key));
    }
    return static_cast<T>(v);
}

}  // namespace

ConfigError::ConfigError(Kind kind, std::string subject, std::size_t line_no)
    : std::runtime_error(describe(kind, subject, line_no)),
      kind_(kind),
      subject_(std::move(subject)),
      line_no_(line_no)
{
}

SimulationConfig parse_config(std::string_view text)
{
    std::map<std::string, RawValue, std::less<>> raw;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);

        if (auto comment = line.find("//"); comment != std::string_view::npos) {
            line = line.substr(0, comment);
        }
        line = trim(line);
        if (line.empty()) continue;

        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(ConfigError::Kind::MalformedLine, "", line_no);
        }
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError(ConfigError::Kind::MalformedLine, "", line_no);
        }
        bool known = false;
        for (auto k : kKeys) known = known || k == key;
        if (!known) {
            throw ConfigError(ConfigError::Kind::UnknownKey, std::string(key), line_no);
        }
        if (raw.contains(key)) {
            throw ConfigError(ConfigError::Kind::DuplicateKey, std::string(key), line_no);
        }
        raw.emplace(std::string(key), RawValue{std::string(value), line_no});
    }

    for (auto k : kKeys) {
        if (!raw.contains(k)) {
            throw ConfigError(ConfigError::Kind::MissingKey, std::string(k));
        }
    }

    const auto integer = [&](std::string_view key) { return parse_integer(raw.find(key)->second, key); };

    SimulationConfig cfg;
    cfg.nodes = checked_count<std::uint32_t>(integer("NODES"), "NODES");
    cfg.transactions_per_node = checked_count<std::uint32_t>(integer("TRANSACTIONS"), "TRANSACTIONS");
    cfg.inter_tx_delay_s = checked_count<std::uint32_t>(integer("DELAY"), "DELAY");
    cfg.block_size_min = checked_count<std::uint32_t>(integer("BLK_SIZE"), "BLK_SIZE");
    cfg.initial_balance = integer("INIT_BALANCE");
    cfg.malicious_fraction = parse_decimal(raw.find("MALICIOUS")->second);
    cfg.validators_per_entity = checked_count<std::uint32_t>(integer("VALID_THR"), "VALID_THR");
    cfg.signature_threshold = checked_count<std::uint32_t>(integer("SIG_THR"), "SIG_THR");
    cfg.validation_fee = integer("VALID_FEE");
    cfg.routing_fee = integer("ROUTE_FEE");
    cfg.block_reward = integer("REWARD");

    validate_config(cfg);
    return cfg;
}

void validate_config(const SimulationConfig& cfg)
{
    const auto fail = [](const char* key) { throw ConfigError(ConfigError::Kind::ValueOutOfRange, key); };
    if (cfg.nodes < 2) fail("NODES");
    if (cfg.transactions_per_node < 1) fail("TRANSACTIONS");
    if (cfg.block_size_min < 1) fail("BLK_SIZE");
    if (cfg.initial_balance < 0) fail("INIT_BALANCE");
    if (!(cfg.malicious_fraction >= 0.0 && cfg.malicious_fraction < 1.0)) fail("MALICIOUS");
    if (cfg.validators_per_entity > cfg.nodes - 1) fail("VALID_THR");
    if (cfg.signature_threshold > cfg.validators_per_entity) fail("SIG_THR");
    if (cfg.validation_fee < 0) fail("VALID_FEE");
    if (cfg.routing_fee < 0) fail("ROUTE_FEE");
    if (cfg.block_reward < 0) fail("REWARD");
}

SimulationConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(ConfigError::Kind::Unreadable, path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string to_config_text(const SimulationConfig& cfg)
{
    // Shortest representation that round-trips the double exactly.
    std::array<char, 64> frac{};
    auto [end, ec] = std::to_chars(frac.data(), frac.data() + frac.size(), cfg.malicious_fraction,
                                   std::chars_format::fixed);
    (void)ec;

    std::ostringstream out;
    out << "NODES = " << cfg.nodes << "\n"
        << "TRANSACTIONS = " << cfg.transactions_per_node << "\n"
        << "DELAY = " << cfg.inter_tx_delay_s << "\n"
        << "BLK_SIZE = " << cfg.block_size_min << "\n"
        << "INIT_BALANCE = " << cfg.initial_balance << "\n"
        << "MALICIOUS = " << std::string_view(frac.data(), static_cast<std::size_t>(end - frac.data())) << "\n"
        << "VALID_THR = " << cfg.validators_per_entity << "\n"
        << "SIG_THR = " << cfg.signature_threshold << "\n"
        << "VALID_FEE = " << cfg.validation_fee << "\n"
        << "ROUTE_FEE = " << cfg.routing_fee << "\n"
        << "REWARD = " << cfg.block_reward << "\n";
    return out.str();
}

std::uint32_t malicious_count(const SimulationConfig& cfg)
{
    double exact = cfg.malicious_fraction * static_cast<double>(cfg.nodes);
    auto rounded = static_cast<std::uint64_t>(std::floor(exact + 0.5));
    if (cfg.nodes == 0) return 0;
    return static_cast<std::uint32_t>(std::min<std::uint64_t>(rounded, cfg.nodes - 1));
}

}  // namespace lightchain
