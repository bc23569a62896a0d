#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace lightchain {

using VirtualMs = std::uint64_t;

enum class EventKind : std::uint8_t { timer, delivery, internal };

/// Virtual-clock event queue. Events fire in (fire_time, seq) order; seq is
/// a global counter, so same-time events run in scheduling order.
class EventQueue {
public:
    using Handler = std::function<void()>;

    /// at must not precede now().
    void schedule(VirtualMs at, EventKind kind, Handler handler);
    void schedule_after(VirtualMs delay, EventKind kind, Handler handler) { schedule(now_ + delay, kind, std::move(handler)); }

    /// Runs every event sharing the next fire time, including ones scheduled
    /// for that same instant while running. Returns false if nothing was pending.
    /// On return the engine is at a quiescent point.
    bool run_instant();

    VirtualMs now() const { return now_; }
    bool empty() const { return queue_.empty(); }
    std::size_t pending() const { return queue_.size(); }
    std::size_t pending_timers() const { return pending_timers_; }
    std::uint64_t processed() const { return processed_; }

private:
    struct Event {
        VirtualMs fire_time;
        std::uint64_t seq;
        EventKind kind;
        Handler handler;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const
        {
            return a.fire_time != b.fire_time ? a.fire_time > b.fire_time : a.seq > b.seq;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    VirtualMs now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t processed_ = 0;
    std::size_t pending_timers_ = 0;
};

}  // namespace lightchain
