#include "qtl/archgraph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace qtl {

FormatError::FormatError(Kind kind, int line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), kind_(kind), line_(line) {}

ArchGraph ArchGraph::grid(int width, int height) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("grid dimensions must be positive, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
    ArchGraph g;
    auto cell = [width](int x, int y) { return static_cast<VertexId>(y * width + x); };
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            g.add_vertex(Location{"c" + std::to_string(x) + "_" + std::to_string(y)});
        }
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (x + 1 < width) g.add_edge(cell(x, y), cell(x + 1, y));
            if (y + 1 < height) g.add_edge(cell(x, y), cell(x, y + 1));
        }
    }
    return g;
}

ArchGraph ArchGraph::from_edge_list(std::string_view text) {
    ArchGraph g;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream line(raw);
        std::string tag;
        if (!(line >> tag)) continue;
        if (tag == "v") {
            std::string name, extra;
            if (!(line >> name) || (line >> extra)) {
                throw FormatError(FormatError::Kind::Syntax, line_no, "expected `v <name>`");
            }
            Location l{name};
            if (g.contains(l)) {
                throw FormatError(FormatError::Kind::DuplicateVertex, line_no,
                                  "duplicate vertex " + name);
            }
            g.add_vertex(l);
        } else if (tag == "e") {
            std::string a, b, extra;
            if (!(line >> a >> b) || (line >> extra)) {
                throw FormatError(FormatError::Kind::Syntax, line_no,
                                  "expected `e <name> <name>`");
            }
            if (a == b) {
                throw FormatError(FormatError::Kind::SelfLoop, line_no, "self-loop on " + a);
            }
            auto u = g.find(Location{a});
            auto v = g.find(Location{b});
            if (!u || !v) {
                throw FormatError(FormatError::Kind::UnknownEndpoint, line_no,
                                  "edge endpoint not declared: " + (u ? b : a));
            }
            if (g.adjacent(*u, *v)) {
                throw FormatError(FormatError::Kind::DuplicateEdge, line_no,
                                  "duplicate edge " + a + " " + b);
            }
            g.add_edge(*u, *v);
        } else {
            throw FormatError(FormatError::Kind::Syntax, line_no, "unknown directive `" + tag + "`");
        }
    }
    return g;
}

VertexId ArchGraph::add_vertex(const Location& l) {
    if (l.name.empty()) throw std::invalid_argument("vertex name must be non-empty");
    auto [it, inserted] = index_.emplace(l, static_cast<VertexId>(names_.size()));
    if (!inserted) throw std::invalid_argument("duplicate vertex " + l.name);
    names_.push_back(l);
    adjacency_.emplace_back();
    return it->second;
}

void ArchGraph::add_edge(VertexId u, VertexId v) {
    if (u == v) throw std::invalid_argument("self-loop on " + name(u).name);
    if (adjacent(u, v)) throw std::invalid_argument("duplicate edge");
    auto insert_sorted = [](std::vector<VertexId>& xs, VertexId x) {
        xs.insert(std::upper_bound(xs.begin(), xs.end(), x), x);
    };
    insert_sorted(adjacency_[static_cast<std::size_t>(u)], v);
    insert_sorted(adjacency_[static_cast<std::size_t>(v)], u);
    edges_.emplace_back(std::min(u, v), std::max(u, v));
}

std::optional<VertexId> ArchGraph::find(const Location& l) const {
    auto it = index_.find(l);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

VertexId ArchGraph::id(const Location& l) const {
    auto it = index_.find(l);
    if (it == index_.end()) throw std::out_of_range("unknown location " + l.name);
    return it->second;
}

bool ArchGraph::adjacent(VertexId u, VertexId v) const {
    const auto& adj = adjacency_[static_cast<std::size_t>(u)];
    return std::binary_search(adj.begin(), adj.end(), v);
}

std::string ArchGraph::to_edge_list() const {
    std::ostringstream os;
    for (const auto& n : names_) os << "v " << n.name << "\n";
    for (const auto& [u, v] : edges_) os << "e " << name(u).name << " " << name(v).name << "\n";
    return os.str();
}

FreeSet FreeSet::of(const ArchGraph& g, std::span<const Location> free) {
    FreeSet s = none(g);
    for (const auto& l : free) s.insert(g.id(l));
    return s;
}

FreeSet FreeSet::all_except(const ArchGraph& g, std::span<const Location> occupied) {
    FreeSet s = all(g);
    for (const auto& l : occupied) s.erase(g.id(l));
    return s;
}

void FreeSet::insert(VertexId v) {
    auto& b = bits_[static_cast<std::size_t>(v)];
    if (!b) {
        b = 1;
        ++count_;
    }
}

void FreeSet::erase(VertexId v) {
    auto& b = bits_[static_cast<std::size_t>(v)];
    if (b) {
        b = 0;
        --count_;
    }
}

std::vector<Location> FreeSet::locations(const ArchGraph& g) const {
    std::vector<Location> out;
    out.reserve(count_);
    for (std::size_t v = 0; v < bits_.size(); ++v) {
        if (bits_[v]) out.push_back(g.name(static_cast<VertexId>(v)));
    }
    return out;
}

std::vector<VertexId> find_merge_path(const ArchGraph& g, const FreeSet& free, VertexId l1,
                                      VertexId l2) {
    if (l1 == l2) throw std::invalid_argument("merge endpoints must differ");
    std::vector<VertexId> parent(g.vertex_count(), -1);
    std::deque<VertexId> queue{l1};
    parent[static_cast<std::size_t>(l1)] = l1;
    while (!queue.empty()) {
        VertexId u = queue.front();
        queue.pop_front();
        for (VertexId w : g.neighbors(u)) {
            if (parent[static_cast<std::size_t>(w)] != -1) continue;
            if (w == l2) {
                std::vector<VertexId> path{l2};
                for (VertexId x = u; x != l1; x = parent[static_cast<std::size_t>(x)]) {
                    path.push_back(x);
                }
                path.push_back(l1);
                std::reverse(path.begin(), path.end());
                return path;
            }
            if (!free.contains(w)) continue;
            parent[static_cast<std::size_t>(w)] = u;
            queue.push_back(w);
        }
    }
    return {};
}

bool merge_path_exists(const ArchGraph& g, const FreeSet& free, VertexId l1, VertexId l2) {
    return !find_merge_path(g, free, l1, l2).empty();
}

bool merge_path_exists(const ArchGraph& g, const FreeSet& free, const Location& l1,
                       const Location& l2) {
    return merge_path_exists(g, free, g.id(l1), g.id(l2));
}

}  // namespace qtl
