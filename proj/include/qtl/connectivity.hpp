#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qtl/archgraph.hpp"
#include "qtl/commands.hpp"

namespace qtl {

struct Violation {
    enum class Kind {
        DoubleAlloc,      // alloc of an occupied location
        NoMergePath,      // merge endpoints cannot be routed
        UnbalancedLoop,   // loop body changed the free set
        UnbalancedInput,  // input not shaped like a typed trace
    };

    Kind kind;
    std::size_t atom_index = 0;  // pre-order index among the atoms of the input tree
    std::vector<Location> endpoints;
    Span origin;
};

const char* to_string(Violation::Kind k);
std::string describe(const Violation& v);

struct CheckOutcome {
    bool accepted = false;
    FreeSet final_free;  // only meaningful when accepted
    std::optional<Violation> violation;
};

/// Direct recursive decision procedure over the command tree.
CheckOutcome check_naive(const ArchGraph& g, const FreeSet& free, const CommandSeq& c);

namespace query {

using Edge = std::pair<VertexId, VertexId>;  // (smaller id, larger id)

struct AddEdge {
    Edge edge;
};
struct RemoveEdge {
    Edge edge;
};
/// True when at least one pair is connected at this point of the script.
struct ConnectedBatch {
    std::vector<std::pair<VertexId, VertexId>> pairs;
    std::size_t flat_index = 0;  // merge position in the flat sequence
    Span origin;
};

}  // namespace query

using Query = std::variant<query::AddEdge, query::RemoveEdge, query::ConnectedBatch>;

struct QueryScript {
    std::size_t vertex_count = 0;
    std::vector<query::Edge> initial_edges;
    std::vector<Query> queries;
    /// Flat position of the first alloc of an occupied vertex; conversion stops there.
    std::optional<std::size_t> double_alloc;
};

/// Reduces a flat sequence to edge updates and connectivity questions. Merges of
/// adjacent cells are trivially routable and produce no query.
QueryScript to_query_script(const ArchGraph& g, const CommandSeq& flat, const FreeSet& initially_free);
QueryScript to_query_script(const ArchGraph& g, const BasicCommandSeq<VertexId>& flat,
                            const FreeSet& initially_free);

/// `remove u v` / `add u v` / `connected? u v [u v ...]`, one query per line.
std::string format_queries(const ArchGraph& g, const QueryScript& script);

/// Answers every ConnectedBatch, in script order. Throws std::invalid_argument on
/// scripts that remove a missing edge or add a present one.
std::vector<bool> solve_offline(const QueryScript& script);

/// serialize, reduce to queries, solve offline. Agrees with check_naive on traces
/// produced by the type checker; rejects other shapes as UnbalancedInput.
CheckOutcome check_fast(const ArchGraph& g, const FreeSet& free, const CommandSeq& c);

}  // namespace qtl
