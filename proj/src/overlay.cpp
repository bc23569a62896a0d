#include "lightchain/overlay.hpp"

#include <algorithm>
#include <bit>
#include <ostream>

namespace lightchain {

const char* to_string(VertexKind kind)
{
    return kind == VertexKind::controller ? "controller" : "data-object";
}

namespace {

std::size_t level_count(std::size_t max_vertices)
{
    std::size_t n = std::max<std::size_t>(max_vertices, 2);
    return static_cast<std::size_t>(std::bit_width(n - 1)) + 2;
}

struct IdKey {
    const Identifier& target;
    bool at_or_below(const SkipGraph& g, std::size_t v) const { return g.vertex(v).id <= target; }
};

struct RankKey {
    std::size_t target;
    bool at_or_below(const SkipGraph& g, std::size_t v) const { return g.rank(v) <= target; }
};

}  // namespace

SkipGraph::SkipGraph(std::size_t max_vertices, bool track_ranks)
    : levels_(level_count(max_vertices)), track_ranks_(track_ranks)
{
}

std::optional<std::size_t> SkipGraph::find(const Identifier& id) const
{
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

template <typename Key>
std::size_t SkipGraph::descend(std::size_t start, const Key& key, RouteTrace* trace) const
{
    std::size_t cur = start;
    const auto visit = [&](std::size_t v) {
        if (trace) trace->visit(vertices_[v].owner);
    };
    visit(cur);

    if (key.at_or_below(*this, cur)) {
        for (std::size_t l = levels_; l-- > 0;) {
            for (std::size_t next = neighbor(cur, l, right); next != npos && key.at_or_below(*this, next);
                 next = neighbor(cur, l, right)) {
                cur = next;
                visit(cur);
            }
        }
        return cur;
    }

    for (std::size_t l = levels_; l-- > 0;) {
        for (std::size_t next = neighbor(cur, l, left); next != npos && !key.at_or_below(*this, next);
             next = neighbor(cur, l, left)) {
            cur = next;
            visit(cur);
        }
    }
    // cur is above the target; its level-0 predecessor (if any) is the floor.
    if (std::size_t prev = neighbor(cur, 0, left); prev != npos) {
        cur = prev;
        visit(cur);
    }
    return cur;
}

std::size_t SkipGraph::search(std::size_t start, const Identifier& target, RouteTrace* trace) const
{
    return descend(start, IdKey{target}, trace);
}

std::size_t SkipGraph::search_rank(std::size_t start, std::size_t rank, RouteTrace* trace) const
{
    if (!track_ranks_) throw std::logic_error("rank search on a layer without ranks");
    if (rank >= vertices_.size()) throw std::out_of_range("rank beyond layer size");
    return descend(start, RankKey{rank}, trace);
}

void SkipGraph::link(std::size_t a, std::size_t b, std::size_t level)
{
    if (a != npos) vertices_[a].links[level][right] = b;
    if (b != npos) vertices_[b].links[level][left] = a;
}

std::size_t SkipGraph::insert(const Identifier& id, const Address& owner, std::size_t introducer, RouteTrace* trace)
{
    if (index_.contains(id)) throw std::logic_error("identifier already present in layer");

    const std::size_t v = vertices_.size();
    Vertex fresh{id, membership_vector(id), owner, {}, {owner}};
    fresh.links.assign(levels_, {npos, npos});

    if (vertices_.empty()) {
        vertices_.push_back(std::move(fresh));
        index_.emplace(id, v);
        head_ = v;
        if (trace) trace->visit(owner);
        if (track_ranks_) ranks_.assign(1, 0);
        return v;
    }

    // Level 0: locate the floor of id through the existing structure.
    const std::size_t floor = search(introducer, id, trace);
    vertices_.push_back(std::move(fresh));
    index_.emplace(id, v);

    std::size_t pred = npos;
    std::size_t succ = npos;
    if (vertices_[floor].id < id) {
        pred = floor;
        succ = neighbor(floor, 0, right);
    } else {
        succ = floor;  // new global minimum
        head_ = v;
    }
    link(pred, v, 0);
    link(v, succ, 0);
    if (trace) trace->visit(owner);

    const Identifier& mv = vertices_[v].membership;
    for (std::size_t l = 1; l < levels_; ++l) {
        std::size_t a = neighbor(v, l - 1, left);
        while (a != npos && common_prefix_len(vertices_[a].membership, mv) < l) {
            if (trace) trace->visit(vertices_[a].owner);
            a = neighbor(a, l - 1, left);
        }
        if (a != npos && trace) {
            trace->visit(vertices_[a].owner);
            trace->visit(owner);
        }
        std::size_t b = neighbor(v, l - 1, right);
        while (b != npos && common_prefix_len(vertices_[b].membership, mv) < l) {
            if (trace) trace->visit(vertices_[b].owner);
            b = neighbor(b, l - 1, right);
        }
        if (b != npos && trace) {
            trace->visit(vertices_[b].owner);
            trace->visit(owner);
        }
        if (a == npos && b == npos) break;
        link(a, v, l);
        link(v, b, l);
    }
    if (trace) trace->visit(owner);

    if (track_ranks_) {
        ranks_.assign(vertices_.size(), 0);
        std::size_t r = 0;
        for (std::size_t cur = head_; cur != npos; cur = neighbor(cur, 0, right)) ranks_[cur] = r++;
    }
    return v;
}

void SkipGraph::add_replica(std::size_t v, const Address& holder)
{
    auto& reps = vertices_[v].replicas;
    auto pos = std::lower_bound(reps.begin(), reps.end(), holder,
                                [](const Address& a, const Address& b) { return a.node_index < b.node_index; });
    if (pos == reps.end() || pos->node_index != holder.node_index) reps.insert(pos, holder);
}

std::vector<std::size_t> SkipGraph::level0_order() const
{
    std::vector<std::size_t> order;
    order.reserve(vertices_.size());
    for (std::size_t cur = head_; cur != npos && order.size() <= vertices_.size(); cur = neighbor(cur, 0, right)) {
        order.push_back(cur);
    }
    return order;
}

void SkipGraph::check_invariants() const
{
    const auto fail = [](const std::string& what) { throw std::logic_error("skip graph: " + what); };
    if (vertices_.empty()) {
        if (head_ != npos) fail("empty layer with a head");
        return;
    }
    auto order = level0_order();
    if (order.size() != vertices_.size()) fail("level-0 traversal does not cover every vertex");
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (!(vertices_[order[i - 1]].id < vertices_[order[i]].id)) fail("level-0 list not strictly increasing");
    }
    if (neighbor(head_, 0, left) != npos) fail("head has a left neighbor");

    for (std::size_t v = 0; v < vertices_.size(); ++v) {
        for (std::size_t l = 0; l < levels_; ++l) {
            std::size_t r = neighbor(v, l, right);
            std::size_t lft = neighbor(v, l, left);
            if (r != npos) {
                if (neighbor(r, l, left) != v) fail("asymmetric link");
                if (!(vertices_[v].id < vertices_[r].id)) fail("right neighbor not larger");
                if (common_prefix_len(vertices_[v].membership, vertices_[r].membership) < l) {
                    fail("level adjacency without shared membership prefix");
                }
            }
            if (lft != npos && !(vertices_[lft].id < vertices_[v].id)) fail("left neighbor not smaller");
        }
        if (track_ranks_ && ranks_[v] >= vertices_.size()) fail("rank out of range");
    }

    // Exhaustive nearest-neighbor check on small layers.
    if (vertices_.size() <= 256) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            const auto& mv = vertices_[order[i]].membership;
            for (std::size_t l = 1; l < levels_; ++l) {
                std::size_t expect = npos;
                for (std::size_t j = i + 1; j < order.size(); ++j) {
                    if (common_prefix_len(vertices_[order[j]].membership, mv) >= l) {
                        expect = order[j];
                        break;
                    }
                }
                if (neighbor(order[i], l, right) != expect) fail("level list skips a matching vertex");
            }
        }
        if (track_ranks_) {
            for (std::size_t i = 0; i < order.size(); ++i) {
                if (ranks_[order[i]] != i) fail("rank disagrees with level-0 position");
            }
        }
    }
}

Overlay::Overlay(std::size_t max_controllers, std::size_t max_objects)
    : controllers_(max_controllers, true), objects_(max_objects, false)
{
}

std::size_t Overlay::controller_vertex(const Address& owner) const
{
    auto it = controller_of_.find(owner.node_index);
    if (it == controller_of_.end()) {
        throw OverlayError(OverlayError::Kind::UnknownStart, "no controller vertex for " + owner.to_string());
    }
    return it->second;
}

std::size_t Overlay::object_entry(const Address& owner) const
{
    auto it = object_entry_of_.find(owner.node_index);
    return it == object_entry_of_.end() ? 0 : it->second;
}

Announcement Overlay::announce(const Identifier& id, const Address& owner, VertexKind kind)
{
    Announcement result;
    result.trace.visit(owner);

    if (kind == VertexKind::controller) {
        if (controller_of_.contains(owner.node_index) || controllers_.find(id)) {
            throw OverlayError(OverlayError::Kind::DuplicateAnnouncement,
                               "controller " + id.hex() + " already announced");
        }
        std::size_t introducer = controllers_.empty() ? SkipGraph::npos : controllers_.head();
        std::size_t v = controllers_.insert(id, owner, introducer, &result.trace);
        controller_of_.emplace(owner.node_index, v);
        result.created_vertex = true;
        return result;
    }

    if (auto existing = objects_.find(id)) {
        const auto& reps = objects_.vertex(*existing).replicas;
        bool dup = std::any_of(reps.begin(), reps.end(),
                               [&](const Address& a) { return a.node_index == owner.node_index; });
        if (dup) {
            throw OverlayError(OverlayError::Kind::DuplicateAnnouncement,
                               "object " + id.hex() + " already announced by " + owner.to_string());
        }
        // Route to the vertex and register as an additional holder.
        objects_.search(object_entry(owner), id, &result.trace);
        objects_.add_replica(*existing, owner);
        result.trace.visit(owner);
        return result;
    }

    std::size_t introducer = objects_.empty() ? SkipGraph::npos : object_entry(owner);
    std::size_t v = objects_.insert(id, owner, introducer, &result.trace);
    object_entry_of_[owner.node_index] = v;
    result.created_vertex = true;
    return result;
}

SearchResult Overlay::search_num_id(const Address& start, const Identifier& target, VertexKind layer) const
{
    const SkipGraph& graph = this->layer(layer);
    if (graph.empty()) throw OverlayError(OverlayError::Kind::EmptyOverlay, "search on an empty overlay");

    SearchResult result;
    result.trace.visit(start);
    std::size_t from = layer == VertexKind::controller ? controller_vertex(start) : object_entry(start);
    std::size_t found = graph.search(from, target, &result.trace);
    const auto& v = graph.vertex(found);
    result.found = v.id;
    result.terminal = v.owner;
    result.holders = v.replicas;
    result.hop_count = result.trace.hop_count();
    return result;
}

SearchResult Overlay::search_rank(const Address& start, std::size_t rank) const
{
    if (controllers_.empty()) throw OverlayError(OverlayError::Kind::EmptyOverlay, "search on an empty overlay");
    SearchResult result;
    result.trace.visit(start);
    std::size_t found = controllers_.search_rank(controller_vertex(start), rank, &result.trace);
    const auto& v = controllers_.vertex(found);
    result.found = v.id;
    result.terminal = v.owner;
    result.holders = v.replicas;
    result.hop_count = result.trace.hop_count();
    return result;
}

SearchResult Overlay::resolve_holders(const Address& start, const Identifier& id) const
{
    if (objects_.empty()) throw OverlayError(OverlayError::Kind::NotFound, "identifier " + id.hex() + " not found");
    SearchResult result = search_num_id(start, id, VertexKind::data_object);
    if (result.found != id) {
        throw OverlayError(OverlayError::Kind::NotFound, "identifier " + id.hex() + " not found");
    }
    return result;
}

std::size_t Overlay::controller_rank(const Address& owner) const
{
    return controllers_.rank(controller_vertex(owner));
}

void Overlay::check_invariants() const
{
    controllers_.check_invariants();
    objects_.check_invariants();
}

void Overlay::dump(std::ostream& out) const
{
    for (VertexKind kind : {VertexKind::controller, VertexKind::data_object}) {
        const SkipGraph& g = layer(kind);
        for (std::size_t v : g.level0_order()) {
            const auto& vx = g.vertex(v);
            std::size_t l = g.neighbor(v, 0, SkipGraph::left);
            std::size_t r = g.neighbor(v, 0, SkipGraph::right);
            out << vx.id.hex() << ',' << to_string(kind) << ',' << vx.owner.to_string() << ','
                << (l == SkipGraph::npos ? "" : g.vertex(l).id.hex()) << ','
                << (r == SkipGraph::npos ? "" : g.vertex(r).id.hex()) << '\n';
        }
    }
}

}  // namespace lightchain
