#include "lightchain/simnet.hpp"

#include "lightchain/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lightchain {

const Bytes& Payload::empty_bytes()
{
    static const Bytes empty;
    return empty;
}

const char* to_string(MessageTag tag)
{
    switch (tag) {
    case MessageTag::overlay_route: return "overlay-route";
    case MessageTag::validate_request: return "validate-request";
    case MessageTag::validate_reply: return "validate-reply";
    case MessageTag::fetch: return "fetch";
    case MessageTag::announce: return "announce";
    case MessageTag::notify: return "notify";
    case MessageTag::replicate: return "replicate";
    }
    return "?";
}

namespace {

VirtualMs to_ms(double value)
{
    return std::max<VirtualMs>(1, static_cast<VirtualMs>(std::llround(value)));
}

}  // namespace

LatencyMatrix::LatencyMatrix(std::size_t nodes) : nodes_(nodes), values_(nodes * (nodes - 1) / 2, 0) {}

std::size_t LatencyMatrix::slot(std::size_t a, std::size_t b) const
{
    if (a > b) std::swap(a, b);
    // Row-major upper triangle without the diagonal.
    return a * nodes_ - a * (a + 1) / 2 + (b - a - 1);
}

LatencyMatrix LatencyMatrix::builtin(std::size_t nodes, std::uint64_t seed, const LatencyModel& model)
{
    if (nodes < 2) throw std::invalid_argument("latency matrix needs at least two nodes");
    LatencyMatrix m(nodes);
    RandomStream rng(seed, "latency");
    for (auto& v : m.values_) {
        double draw = 0.0;
        do {
            draw = model.median_ms * std::exp(model.sigma * rng.standard_normal());
        } while (draw < model.min_ms || draw > model.max_ms);
        v = to_ms(draw);
    }
    return m;
}

LatencyMatrix LatencyMatrix::from_samples(std::size_t nodes, std::uint64_t seed, const std::vector<double>& samples_ms)
{
    if (nodes < 2) throw std::invalid_argument("latency matrix needs at least two nodes");
    if (samples_ms.empty()) throw NetworkError(NetworkError::Kind::BadSampleFile, "latency sample set is empty");
    LatencyMatrix m(nodes);
    RandomStream rng(seed, "latency-samples");
    for (auto& v : m.values_) v = to_ms(samples_ms[rng.uniform_below(samples_ms.size())]);
    return m;
}

LatencyMatrix LatencyMatrix::constant(std::size_t nodes, VirtualMs latency_ms)
{
    if (nodes < 2) throw std::invalid_argument("latency matrix needs at least two nodes");
    LatencyMatrix m(nodes);
    std::fill(m.values_.begin(), m.values_.end(), std::max<VirtualMs>(1, latency_ms));
    return m;
}

VirtualMs LatencyMatrix::latency(std::size_t a, std::size_t b) const
{
    if (a == b) return 0;
    return values_.at(slot(a, b));
}

void LatencyMatrix::set_latency(std::size_t a, std::size_t b, VirtualMs ms)
{
    if (a == b || ms == 0) throw std::invalid_argument("pair latency must be positive and between distinct nodes");
    values_.at(slot(a, b)) = ms;
}

VirtualMs LatencyMatrix::percentile(double q) const
{
    std::vector<VirtualMs> sorted = values_;
    std::sort(sorted.begin(), sorted.end());
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

std::vector<double> parse_latency_samples(const std::string& text)
{
    std::vector<double> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        std::string_view token(line.data() + first, last - first + 1);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || ptr != token.data() + token.size() || !(value > 0.0) || !std::isfinite(value)) {
            throw NetworkError(NetworkError::Kind::BadSampleFile,
                               "latency sample on line " + std::to_string(line_no) + " is not a positive number");
        }
        out.push_back(value);
    }
    if (out.empty()) throw NetworkError(NetworkError::Kind::BadSampleFile, "latency sample file is empty");
    return out;
}

std::vector<double> load_latency_samples(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw NetworkError(NetworkError::Kind::BadSampleFile, "cannot read latency samples " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_latency_samples(buf.str());
}

Network::Network(EventQueue& queue, LatencyMatrix latencies) : queue_(queue), latencies_(std::move(latencies)) {}

void Network::register_address(const Address& address)
{
    registry_[address.node_index] = address;
}

bool Network::is_registered(const Address& address) const
{
    auto it = registry_.find(address.node_index);
    return it != registry_.end() && it->second == address;
}

TrafficCounters Network::context_traffic(const Identifier& context) const
{
    auto it = per_context_.find(context);
    return it == per_context_.end() ? TrafficCounters{} : it->second;
}

void Network::send(Envelope env, DeliveryHandler on_deliver)
{
    if (!is_registered(env.src)) {
        throw NetworkError(NetworkError::Kind::UnknownAddress, "unknown source " + env.src.to_string());
    }
    if (!is_registered(env.dst)) {
        throw NetworkError(NetworkError::Kind::UnknownAddress, "unknown destination " + env.dst.to_string());
    }
    if (env.src.node_index == env.dst.node_index) {
        throw NetworkError(NetworkError::Kind::SelfSend, "self-send from " + env.src.to_string());
    }
    env.send_time = queue_.now();
    env.deliver_time = env.send_time + latencies_.latency(env.src.node_index, env.dst.node_index);

    const std::uint64_t bytes = env.payload.size();
    ++totals_.messages;
    totals_.bytes += bytes;
    ++per_tag_[env.tag];
    TrafficCounters& bucket = env.context ? per_context_[*env.context] : uncontexted_;
    ++bucket.messages;
    bucket.bytes += bytes;

    const std::uint64_t pair = (std::uint64_t{env.src.node_index} << 32) | env.dst.node_index;
    const std::uint64_t order = pair_sent_[pair]++;

    VirtualMs at = env.deliver_time;
    queue_.schedule(at, EventKind::delivery,
                    [this, pair, order, env = std::move(env), handler = std::move(on_deliver)]() {
                        std::uint64_t& expected = pair_delivered_[pair];
                        if (expected != order) throw std::logic_error("per-pair FIFO delivery violated");
                        ++expected;
                        ++delivered_;
                        handler(env);
                    });
}

void Network::check_invariants() const
{
    TrafficCounters sum = uncontexted_;
    for (const auto& [ctx, c] : per_context_) {
        sum.messages += c.messages;
        sum.bytes += c.bytes;
    }
    if (sum.messages != totals_.messages || sum.bytes != totals_.bytes) {
        throw std::logic_error("network accounting: per-context totals do not add up");
    }
    if (delivered_ > totals_.messages) throw std::logic_error("network accounting: more deliveries than sends");
}

}  // namespace lightchain
