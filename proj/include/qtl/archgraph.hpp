#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qtl/location.hpp"

namespace qtl {

using VertexId = std::int32_t;

class FormatError : public std::runtime_error {
public:
    enum class Kind { DuplicateVertex, DuplicateEdge, UnknownEndpoint, SelfLoop, Syntax };

    FormatError(Kind kind, int line, const std::string& message);

    Kind kind() const noexcept { return kind_; }
    int line() const noexcept { return line_; }

private:
    Kind kind_;
    int line_;
};

/// Undirected architecture graph over named cells. Vertex ids follow declaration
/// order; adjacency lists are sorted by id.
class ArchGraph {
public:
    ArchGraph() = default;

    /// `width` x `height` grid with 4-neighbour edges; cells are named `c<x>_<y>`.
    static ArchGraph grid(int width, int height);

    /// Parses the edge-list format: `v <name>` and `e <name> <name>` lines, `#` comments.
    static ArchGraph from_edge_list(std::string_view text);

    VertexId add_vertex(const Location& l);
    void add_edge(VertexId u, VertexId v);

    std::size_t vertex_count() const noexcept { return names_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    bool contains(const Location& l) const { return index_.count(l) != 0; }
    std::optional<VertexId> find(const Location& l) const;
    /// Throws std::out_of_range for names that are not vertices.
    VertexId id(const Location& l) const;
    const Location& name(VertexId v) const { return names_[static_cast<std::size_t>(v)]; }
    const std::vector<Location>& vertices() const noexcept { return names_; }

    std::span<const VertexId> neighbors(VertexId v) const {
        return adjacency_[static_cast<std::size_t>(v)];
    }
    bool adjacent(VertexId u, VertexId v) const;

    /// Edges as (smaller id, larger id), in insertion order.
    const std::vector<std::pair<VertexId, VertexId>>& edges() const noexcept { return edges_; }

    std::string to_edge_list() const;

private:
    std::vector<Location> names_;
    std::unordered_map<Location, VertexId> index_;
    std::vector<std::vector<VertexId>> adjacency_;
    std::vector<std::pair<VertexId, VertexId>> edges_;
};

/// Set of currently unoccupied vertices of one graph.
class FreeSet {
public:
    FreeSet() = default;
    explicit FreeSet(std::size_t vertex_count, bool all_free = true)
        : bits_(vertex_count, all_free ? 1 : 0), count_(all_free ? vertex_count : 0) {}

    static FreeSet all(const ArchGraph& g) { return FreeSet(g.vertex_count(), true); }
    static FreeSet none(const ArchGraph& g) { return FreeSet(g.vertex_count(), false); }
    /// Throws std::out_of_range on names outside the graph.
    static FreeSet of(const ArchGraph& g, std::span<const Location> free);
    /// Every vertex except `occupied`.
    static FreeSet all_except(const ArchGraph& g, std::span<const Location> occupied);

    bool contains(VertexId v) const { return bits_[static_cast<std::size_t>(v)] != 0; }
    void insert(VertexId v);
    void erase(VertexId v);
    std::size_t size() const noexcept { return count_; }
    std::size_t universe() const noexcept { return bits_.size(); }

    std::vector<Location> locations(const ArchGraph& g) const;

    friend bool operator==(const FreeSet&, const FreeSet&) = default;

private:
    std::vector<std::uint8_t> bits_;
    std::size_t count_ = 0;
};

/// Whether a merge between `l1` and `l2` can be routed: the two cells are adjacent,
/// or some path between them has every interior vertex in `free`.
bool merge_path_exists(const ArchGraph& g, const FreeSet& free, VertexId l1, VertexId l2);
bool merge_path_exists(const ArchGraph& g, const FreeSet& free, const Location& l1,
                       const Location& l2);

/// A shortest routing path (endpoints included), or empty when none exists.
/// Ties resolve toward smaller vertex ids.
std::vector<VertexId> find_merge_path(const ArchGraph& g, const FreeSet& free, VertexId l1,
                                      VertexId l2);

}  // namespace qtl
