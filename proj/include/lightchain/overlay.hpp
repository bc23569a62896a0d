#pragma once

#include "lightchain/identity.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace lightchain {

enum class VertexKind : std::uint8_t { controller, data_object };

const char* to_string(VertexKind kind);

class OverlayError : public std::runtime_error {
public:
    enum class Kind { DuplicateAnnouncement, EmptyOverlay, NotFound, UnknownStart };

    OverlayError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Owners visited by one overlay operation, in message order. Consecutive
/// visits to the same owner are collapsed into one.
struct RouteTrace {
    std::vector<Address> owners;

    void visit(const Address& owner)
    {
        if (owners.empty() || owners.back() != owner) owners.push_back(owner);
    }
    /// Inter-owner traversals.
    std::size_t hop_count() const { return owners.empty() ? 0 : owners.size() - 1; }
};

/// One skip-graph layer (Aspnes-Shah). Level 0 is a doubly linked list
/// sorted by numeric identifier; a level-l list links vertices sharing l
/// leading membership-vector bits.
class SkipGraph {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    enum Side : std::size_t { left = 0, right = 1 };

    struct Vertex {
        Identifier id;
        Identifier membership;
        Address owner;
        std::vector<std::array<std::size_t, 2>> links;
        std::vector<Address> replicas;  // sorted by node_index
    };

    /// levels = ceil(log2(max_vertices)) + 2.
    explicit SkipGraph(std::size_t max_vertices, bool track_ranks = false);

    std::size_t levels() const { return levels_; }
    std::size_t size() const { return vertices_.size(); }
    bool empty() const { return vertices_.empty(); }
    const Vertex& vertex(std::size_t v) const { return vertices_[v]; }
    std::size_t neighbor(std::size_t v, std::size_t level, Side side) const { return vertices_[v].links[level][side]; }
    std::optional<std::size_t> find(const Identifier& id) const;
    std::size_t head() const { return head_; }

    /// Links a new vertex; the level-0 slot is found by a search from
    /// `introducer` (ignored for the first vertex). Returns its index.
    std::size_t insert(const Identifier& id, const Address& owner, std::size_t introducer, RouteTrace* trace);

    /// Greatest identifier <= target, else the global minimum.
    std::size_t search(std::size_t start, const Identifier& target, RouteTrace* trace) const;

    /// Vertex at level-0 position `rank`. Requires track_ranks.
    std::size_t search_rank(std::size_t start, std::size_t rank, RouteTrace* trace) const;
    std::size_t rank(std::size_t v) const { return ranks_.at(v); }

    void add_replica(std::size_t v, const Address& holder);

    /// In-order traversal of level 0.
    std::vector<std::size_t> level0_order() const;

    /// Throws std::logic_error on the first violated structural invariant.
    void check_invariants() const;

private:
    template <typename Key>
    std::size_t descend(std::size_t start, const Key& key, RouteTrace* trace) const;
    void link(std::size_t a, std::size_t b, std::size_t level);

    std::size_t levels_;
    bool track_ranks_;
    std::vector<Vertex> vertices_;
    std::unordered_map<Identifier, std::size_t> index_;
    std::size_t head_ = npos;
    std::vector<std::size_t> ranks_;
};

struct SearchResult {
    std::vector<Address> holders;
    std::size_t hop_count = 0;
    Address terminal;
    Identifier found;
    RouteTrace trace;
};

struct Announcement {
    bool created_vertex = false;
    RouteTrace trace;
};

/// The DHT node set: a controller layer and a data-object layer sharing
/// one identifier space.
class Overlay {
public:
    Overlay(std::size_t max_controllers, std::size_t max_objects);

    /// Throws DuplicateAnnouncement when (id, owner, kind) was seen before, or
    /// when a controller id collides with another owner's.
    Announcement announce(const Identifier& id, const Address& owner, VertexKind kind);

    /// Floor search within one layer. For the controller layer the search
    /// starts at start's controller vertex; for the data layer at start's most
    /// recent own vertex, falling back to the first data vertex (introducer).
    SearchResult search_num_id(const Address& start, const Identifier& target,
                               VertexKind layer = VertexKind::controller) const;

    /// Controller at level-0 rank `rank`, routed from start's controller vertex.
    SearchResult search_rank(const Address& start, std::size_t rank) const;

    /// Exact-match data-layer lookup; throws NotFound.
    SearchResult resolve_holders(const Address& start, const Identifier& id) const;

    std::size_t controller_rank(const Address& owner) const;
    std::size_t controller_count() const { return controllers_.size(); }
    const SkipGraph& layer(VertexKind kind) const { return kind == VertexKind::controller ? controllers_ : objects_; }

    void check_invariants() const;

    /// One line per vertex: hex_id,kind,owner,level0_left,level0_right
    void dump(std::ostream& out) const;

private:
    std::size_t controller_vertex(const Address& owner) const;
    std::size_t object_entry(const Address& owner) const;

    SkipGraph controllers_;
    SkipGraph objects_;
    std::unordered_map<std::uint32_t, std::size_t> controller_of_;
    std::unordered_map<std::uint32_t, std::size_t> object_entry_of_;
};

}  // namespace lightchain
