#pragma once

#include "lightchain/event_queue.hpp"
#include "lightchain/identity.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace lightchain {

using Bytes = std::vector<std::uint8_t>;

enum class MessageTag : std::uint8_t { overlay_route, validate_request, validate_reply, fetch, announce, notify, replicate };

const char* to_string(MessageTag tag);

/// Immutable message body; copies share one buffer.
class Payload {
public:
    Payload() = default;
    Payload(Bytes bytes) : data_(std::make_shared<const Bytes>(std::move(bytes))) {}

    const Bytes& bytes() const { return data_ ? *data_ : empty_bytes(); }
    std::size_t size() const { return data_ ? data_->size() : 0; }

private:
    static const Bytes& empty_bytes();

    std::shared_ptr<const Bytes> data_;
};

struct Envelope {
    Address src;
    Address dst;
    MessageTag tag = MessageTag::notify;
    Payload payload;
    std::optional<Identifier> context;
    VirtualMs send_time = 0;
    VirtualMs deliver_time = 0;
};

class NetworkError : public std::runtime_error {
public:
    enum class Kind { UnknownAddress, BadSampleFile, SelfSend };
    NetworkError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Builtin pairwise latency model: log-normal, resampled into [min_ms, max_ms].
struct LatencyModel {
    double median_ms = 50.0;
    double sigma = 0.5;
    double min_ms = 5.0;
    double max_ms = 300.0;
};

/// Symmetric per-pair latency, one draw per unordered pair, fixed for a run.
class LatencyMatrix {
public:
    static LatencyMatrix builtin(std::size_t nodes, std::uint64_t seed, const LatencyModel& model = {});
    /// Samples uniformly with replacement from `samples_ms`.
    static LatencyMatrix from_samples(std::size_t nodes, std::uint64_t seed, const std::vector<double>& samples_ms);
    static LatencyMatrix constant(std::size_t nodes, VirtualMs latency_ms);

    VirtualMs latency(std::size_t a, std::size_t b) const;
    std::size_t node_count() const { return nodes_; }
    std::size_t pair_count() const { return values_.size(); }
    const std::vector<VirtualMs>& pair_values() const { return values_; }
    /// Nearest-rank percentile over pair values, q in (0, 1].
    VirtualMs percentile(double q) const;

    /// Adjusts one pair; scripted scenarios only.
    void set_latency(std::size_t a, std::size_t b, VirtualMs ms);

private:
    explicit LatencyMatrix(std::size_t nodes);
    std::size_t slot(std::size_t a, std::size_t b) const;

    std::size_t nodes_;
    std::vector<VirtualMs> values_;
};

/// One value per line (integer or decimal ms). Throws BadSampleFile.
std::vector<double> load_latency_samples(const std::string& path);
std::vector<double> parse_latency_samples(const std::string& text);

struct TrafficCounters {
    std::uint64_t messages = 0;
    std::uint64_t bytes = 0;
};

/// Simulated middleware: addressed delivery through the event queue with
/// per-pair latency, plus global and per-context accounting.
class Network {
public:
    using DeliveryHandler = std::function<void(const Envelope&)>;

    Network(EventQueue& queue, LatencyMatrix latencies);

    void register_address(const Address& address);
    bool is_registered(const Address& address) const;

    /// Stamps send/deliver times and schedules delivery. Throws UnknownAddress
    /// or SelfSend.
    void send(Envelope env, DeliveryHandler on_deliver);

    const LatencyMatrix& latencies() const { return latencies_; }
    LatencyMatrix& mutable_latencies() { return latencies_; }

    const TrafficCounters& totals() const { return totals_; }
    TrafficCounters context_traffic(const Identifier& context) const;
    const std::unordered_map<Identifier, TrafficCounters>& per_context() const { return per_context_; }
    const TrafficCounters& uncontexted() const { return uncontexted_; }
    std::uint64_t in_flight() const { return totals_.messages - delivered_; }
    std::uint64_t delivered() const { return delivered_; }
    const std::map<MessageTag, std::uint64_t>& per_tag() const { return per_tag_; }

    /// Accounting completeness; throws std::logic_error.
    void check_invariants() const;

private:
    EventQueue& queue_;
    LatencyMatrix latencies_;
    std::unordered_map<std::uint32_t, Address> registry_;
    TrafficCounters totals_;
    TrafficCounters uncontexted_;
    std::unordered_map<Identifier, TrafficCounters> per_context_;
    std::map<MessageTag, std::uint64_t> per_tag_;
    std::uint64_t delivered_ = 0;
    std::unordered_map<std::uint64_t, std::uint64_t> pair_sent_;
    std::unordered_map<std::uint64_t, std::uint64_t> pair_delivered_;
};

}  // namespace lightchain
