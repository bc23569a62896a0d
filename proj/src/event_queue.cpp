#include "lightchain/event_queue.hpp"

#include <stdexcept>
#include <utility>

namespace lightchain {

void EventQueue::schedule(VirtualMs at, EventKind kind, Handler handler)
{
    if (at < now_) throw std::logic_error("event scheduled in the past");
    if (kind == EventKind::timer) ++pending_timers_;
    queue_.push(Event{at, next_seq_++, kind, std::move(handler)});
}

bool EventQueue::run_instant()
{
    if (queue_.empty()) return false;
    const VirtualMs instant = queue_.top().fire_time;
    if (instant < now_) throw std::logic_error("event order violated");
    now_ = instant;
    while (!queue_.empty() && queue_.top().fire_time == instant) {
        // Only the handler is moved from; the ordering keys stay intact for pop().
        Event ev = std::move(const_cast<Event&>(queue_.top()));
        queue_.pop();
        if (ev.kind == EventKind::timer) --pending_timers_;
        ++processed_;
        ev.handler();
    }
    return true;
}

}  // namespace lightchain
