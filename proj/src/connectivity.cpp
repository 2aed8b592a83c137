#include "qtl/connectivity.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "qtl/offline_connectivity.hpp"

namespace qtl {

const char* to_string(Violation::Kind k) {
    switch (k) {
        case Violation::Kind::DoubleAlloc: return "double-alloc";
        case Violation::Kind::NoMergePath: return "no-merge-path";
        case Violation::Kind::UnbalancedLoop: return "unbalanced-loop";
        case Violation::Kind::UnbalancedInput: return "unbalanced-input";
    }
    return "?";
}

std::string describe(const Violation& v) {
    std::ostringstream os;
    switch (v.kind) {
        case Violation::Kind::DoubleAlloc:
            os << "location " << v.endpoints.at(0) << " allocated while occupied";
            break;
        case Violation::Kind::NoMergePath:
            os << "no free path for merge " << v.endpoints.at(0) << " ~ " << v.endpoints.at(1);
            break;
        case Violation::Kind::UnbalancedLoop:
            os << "loop body does not preserve the free locations";
            break;
        case Violation::Kind::UnbalancedInput:
            os << "command sequence is not balanced";
            if (!v.endpoints.empty()) os << " at " << v.endpoints.front();
            break;
    }
    return os.str();
}

namespace {

class NaiveChecker {
public:
    explicit NaiveChecker(const ArchGraph& g) : g_(g) {}

    std::optional<Violation> run(const CommandSeq& c, FreeSet& live) {
        struct Frame {
            const CommandSeq* seq;
            std::size_t pos;
            const Command* loop = nullptr;  // set on loop bodies
            FreeSet entry;
        };
        std::vector<Frame> stack;
        stack.push_back({&c, 0, nullptr, {}});
        while (!stack.empty()) {
            Frame& top = stack.back();
            if (top.pos == top.seq->size()) {
                if (top.loop && !(top.entry == live)) {
                    return Violation{Violation::Kind::UnbalancedLoop, next_index_, {}, top.loop->origin};
                }
                stack.pop_back();
                continue;
            }
            const Command& x = (*top.seq)[top.pos++];
            if (const auto* a = x.as<cmd::Alloc<Location>>()) {
                std::size_t index = next_index_++;
                VertexId v = g_.id(a->loc);
                if (!live.contains(v)) {
                    return Violation{Violation::Kind::DoubleAlloc, index, {a->loc}, x.origin};
                }
                live.erase(v);
            } else if (const auto* f = x.as<cmd::Free<Location>>()) {
                ++next_index_;
                live.insert(g_.id(f->loc));
            } else if (const auto* m = x.as<cmd::Merge<Location>>()) {
                std::size_t index = next_index_++;
                if (!merge_path_exists(g_, live, m->first, m->second)) {
                    return Violation{Violation::Kind::NoMergePath, index, {m->first, m->second},
                                     x.origin};
                }
            } else if (const auto* s = x.as<cmd::Star<Location>>()) {
                stack.push_back({&s->body, 0, &x, live});
            } else if (const auto* b = x.as<cmd::Branch<Location>>()) {
                FreeSet left = live;
                if (auto v = run(b->left, left)) return v;
                stack.push_back({&b->right, 0, nullptr, {}});
            }
        }
        return std::nullopt;
    }

private:
    const ArchGraph& g_;
    std::size_t next_index_ = 0;
};

using IdSeq = BasicCommandSeq<VertexId>;

// Replays the tree once, left arm before right as serialization does, checking
// that both arms of each branch end in the same state and that loop bodies are
// identities. Stops at the first double alloc; that one is reported later from
// the flat sequence in its proper order.
class PrePass {
public:
    PrePass(const ArchGraph& g, FreeSet& live) : g_(g), live_(live) {}

    bool run(const IdSeq& c) {
        for (const auto& x : c) {
            if (const auto* a = x.as<cmd::Alloc<VertexId>>()) {
                ++next_index_;
                if (!live_.contains(a->loc)) {
                    hit_double_alloc = true;
                    return false;
                }
                set(a->loc, false);
            } else if (const auto* f = x.as<cmd::Free<VertexId>>()) {
                std::size_t index = next_index_++;
                if (live_.contains(f->loc)) {
                    fail(index, x.origin, f->loc);
                    return false;
                }
                set(f->loc, true);
            } else if (x.as<cmd::Merge<VertexId>>()) {
                ++next_index_;
            } else if (const auto* s = x.as<cmd::Star<VertexId>>()) {
                std::size_t mark = log_.size();
                if (!run(s->body)) return false;
                if (!changed_since(mark).empty()) {
                    fail(next_index_, x.origin, std::nullopt);
                    return false;
                }
            } else if (const auto* b = x.as<cmd::Branch<VertexId>>()) {
                std::size_t mark = log_.size();
                if (!run(b->left)) return false;
                std::vector<VertexId> left = changed_since(mark);
                rollback(mark);
                if (!run(b->right)) return false;
                if (changed_since(mark) != left) {
                    fail(next_index_, x.origin, std::nullopt);
                    return false;
                }
            }
        }
        return true;
    }

    bool hit_double_alloc = false;
    std::optional<Violation> unbalanced;

private:
    void set(VertexId v, bool now_free) {
        log_.push_back({v, live_.contains(v)});
        if (now_free) {
            live_.insert(v);
        } else {
            live_.erase(v);
        }
    }

    void rollback(std::size_t mark) {
        while (log_.size() > mark) {
            auto [v, was_free] = log_.back();
            log_.pop_back();
            if (was_free) {
                live_.insert(v);
            } else {
                live_.erase(v);
            }
        }
    }

    // Vertices whose state differs from the one at `mark`, sorted.
    std::vector<VertexId> changed_since(std::size_t mark) const {
        std::vector<std::pair<VertexId, bool>> slice(log_.begin() + static_cast<std::ptrdiff_t>(mark),
                                                     log_.end());
        std::stable_sort(slice.begin(), slice.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<VertexId> out;
        for (std::size_t i = 0; i < slice.size(); ++i) {
            if (i > 0 && slice[i].first == slice[i - 1].first) continue;
            if (slice[i].second != live_.contains(slice[i].first)) out.push_back(slice[i].first);
        }
        return out;
    }

    void fail(std::size_t index, Span origin, std::optional<VertexId> at) {
        Violation v{Violation::Kind::UnbalancedInput, index, {}, origin};
        if (at) v.endpoints.push_back(g_.name(*at));
        unbalanced = std::move(v);
    }

    const ArchGraph& g_;
    FreeSet& live_;
    std::vector<std::pair<VertexId, bool>> log_;
    std::size_t next_index_ = 0;
};

query::Edge make_edge(VertexId u, VertexId v) { return {std::min(u, v), std::max(u, v)}; }

}  // namespace

CheckOutcome check_naive(const ArchGraph& g, const FreeSet& free, const CommandSeq& c) {
    FreeSet live = free;
    NaiveChecker checker(g);
    if (auto v = checker.run(c, live)) return {false, {}, std::move(v)};
    return {true, std::move(live), std::nullopt};
}

QueryScript to_query_script(const ArchGraph& g, const BasicCommandSeq<VertexId>& flat,
                            const FreeSet& initially_free) {
    QueryScript s;
    s.vertex_count = g.vertex_count();
    s.initial_edges = g.edges();
    FreeSet live = initially_free;
    for (const auto& [u, v] : g.edges()) {
        if (!live.contains(u) || !live.contains(v)) s.queries.push_back(query::RemoveEdge{{u, v}});
    }
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const auto& x = flat[i];
        if (const auto* a = x.as<cmd::Alloc<VertexId>>()) {
            if (!live.contains(a->loc)) {
                s.double_alloc = i;
                break;
            }
            for (VertexId w : g.neighbors(a->loc)) {
                if (live.contains(w)) s.queries.push_back(query::RemoveEdge{make_edge(a->loc, w)});
            }
            live.erase(a->loc);
        } else if (const auto* f = x.as<cmd::Free<VertexId>>()) {
            if (live.contains(f->loc)) continue;
            live.insert(f->loc);
            for (VertexId w : g.neighbors(f->loc)) {
                if (live.contains(w)) s.queries.push_back(query::AddEdge{make_edge(f->loc, w)});
            }
        } else if (const auto* m = x.as<cmd::Merge<VertexId>>()) {
            if (g.adjacent(m->first, m->second)) continue;
            query::ConnectedBatch batch;
            batch.flat_index = i;
            batch.origin = x.origin;
            for (VertexId u : g.neighbors(m->first)) {
                if (!live.contains(u)) continue;
                for (VertexId w : g.neighbors(m->second)) {
                    if (live.contains(w)) batch.pairs.emplace_back(u, w);
                }
            }
            s.queries.push_back(std::move(batch));
        } else {
            throw std::invalid_argument("to_query_script: sequence is not flat");
        }
    }
    return s;
}

QueryScript to_query_script(const ArchGraph& g, const CommandSeq& flat, const FreeSet& initially_free) {
    return to_query_script(g, map_locations(flat, [&](const Location& l) { return g.id(l); }),
                           initially_free);
}

std::string format_queries(const ArchGraph& g, const QueryScript& script) {
    std::ostringstream os;
    for (const auto& q : script.queries) {
        if (const auto* a = std::get_if<query::AddEdge>(&q)) {
            os << "add " << g.name(a->edge.first) << " " << g.name(a->edge.second) << "\n";
        } else if (const auto* r = std::get_if<query::RemoveEdge>(&q)) {
            os << "remove " << g.name(r->edge.first) << " " << g.name(r->edge.second) << "\n";
        } else {
            const auto& b = std::get<query::ConnectedBatch>(q);
            os << "connected?";
            for (const auto& [u, w] : b.pairs) os << " " << g.name(u) << " " << g.name(w);
            os << "\n";
        }
    }
    return os.str();
}

std::vector<bool> solve_offline(const QueryScript& script) {
    const auto n = static_cast<VertexId>(script.vertex_count);
    auto check_edge = [&](const query::Edge& e) {
        if (e.first < 0 || e.second >= n || e.first >= e.second) {
            throw std::invalid_argument("solve_offline: malformed edge");
        }
    };

    std::vector<const query::ConnectedBatch*> batches;
    for (const auto& q : script.queries) {
        if (const auto* b = std::get_if<query::ConnectedBatch>(&q)) batches.push_back(b);
    }
    const std::size_t count = batches.size();

    // Lifetime of each edge as a range of batch indices, stored on a segment tree.
    std::vector<std::vector<query::Edge>> tree(count == 0 ? 1 : 4 * count);
    auto insert = [&](auto& self, std::size_t node, std::size_t lo, std::size_t hi, std::size_t from,
                      std::size_t to, const query::Edge& e) -> void {
        if (to < lo || hi < from) return;
        if (from <= lo && hi <= to) {
            tree[node].push_back(e);
            return;
        }
        std::size_t mid = lo + (hi - lo) / 2;
        self(self, 2 * node, lo, mid, from, to, e);
        self(self, 2 * node + 1, mid + 1, hi, from, to, e);
    };
    auto cover = [&](std::size_t from, std::size_t to, const query::Edge& e) {
        if (from < to && count > 0) insert(insert, 1, 0, count - 1, from, to - 1, e);
    };

    std::map<query::Edge, std::size_t> live;
    for (const auto& e : script.initial_edges) {
        check_edge(e);
        if (!live.emplace(e, 0).second) throw std::invalid_argument("solve_offline: duplicate edge");
    }
    std::size_t now = 0;
    for (const auto& q : script.queries) {
        if (const auto* a = std::get_if<query::AddEdge>(&q)) {
            check_edge(a->edge);
            if (!live.emplace(a->edge, now).second) {
                throw std::invalid_argument("solve_offline: add of a present edge");
            }
        } else if (const auto* r = std::get_if<query::RemoveEdge>(&q)) {
            check_edge(r->edge);
            auto it = live.find(r->edge);
            if (it == live.end()) throw std::invalid_argument("solve_offline: remove of a missing edge");
            cover(it->second, now, r->edge);
            live.erase(it);
        } else {
            for (const auto& [u, w] : std::get<query::ConnectedBatch>(q).pairs) {
                if (u < 0 || u >= n || w < 0 || w >= n) {
                    throw std::invalid_argument("solve_offline: query vertex out of range");
                }
            }
            ++now;
        }
    }
    for (const auto& [e, from] : live) cover(from, count, e);

    std::vector<bool> answers(count, false);
    if (count == 0) return answers;
    RollbackUnionFind uf(script.vertex_count);
    auto walk = [&](auto& self, std::size_t node, std::size_t lo, std::size_t hi) -> void {
        std::size_t mark = uf.checkpoint();
        for (const auto& [u, v] : tree[node]) uf.unite(u, v);
        if (lo == hi) {
            for (const auto& [u, w] : batches[lo]->pairs) {
                if (uf.connected(u, w)) {
                    answers[lo] = true;
                    break;
                }
            }
        } else {
            std::size_t mid = lo + (hi - lo) / 2;
            self(self, 2 * node, lo, mid);
            self(self, 2 * node + 1, mid + 1, hi);
        }
        uf.rollback(mark);
    };
    walk(walk, 1, 0, count - 1);
    return answers;
}

CheckOutcome check_fast(const ArchGraph& g, const FreeSet& free, const CommandSeq& c) {
    const IdSeq lowered = map_locations(c, [&](const Location& l) { return g.id(l); });

    FreeSet final_free = free;
    PrePass pre(g, final_free);
    pre.run(lowered);
    if (pre.unbalanced) return {false, {}, std::move(pre.unbalanced)};

    IdSeq flat;
    std::vector<std::size_t> atom_of;
    serialize_visit(lowered, [&](const BasicCommand<VertexId>& atom, std::size_t index, bool inverted) {
        if (!inverted) {
            flat.push_back(atom);
        } else if (const auto* a = atom.as<cmd::Alloc<VertexId>>()) {
            flat.push_back(BasicCommand<VertexId>::free(a->loc, atom.origin));
        } else {
            flat.push_back(BasicCommand<VertexId>::alloc(std::get<cmd::Free<VertexId>>(atom.node).loc,
                                                         atom.origin));
        }
        atom_of.push_back(index);
    });

    const QueryScript script = to_query_script(g, flat, free);
    const std::vector<bool> answers = solve_offline(script);

    std::optional<std::size_t> failing;
    std::size_t batch = 0;
    for (const auto& q : script.queries) {
        if (const auto* b = std::get_if<query::ConnectedBatch>(&q)) {
            if (!answers[batch++]) {
                failing = b->flat_index;
                break;
            }
        }
    }
    if (script.double_alloc && (!failing || *script.double_alloc < *failing)) {
        const auto& x = flat[*script.double_alloc];
        return {false,
                {},
                Violation{Violation::Kind::DoubleAlloc, atom_of[*script.double_alloc],
                          {g.name(std::get<cmd::Alloc<VertexId>>(x.node).loc)}, x.origin}};
    }
    if (failing) {
        const auto& x = flat[*failing];
        const auto& m = std::get<cmd::Merge<VertexId>>(x.node);
        return {false,
                {},
                Violation{Violation::Kind::NoMergePath, atom_of[*failing],
                          {g.name(m.first), g.name(m.second)}, x.origin}};
    }
    if (pre.hit_double_alloc) {
        throw std::logic_error("check_fast: double alloc seen before flattening but not after");
    }
    return {true, std::move(final_free), std::nullopt};
}

}  // namespace qtl
