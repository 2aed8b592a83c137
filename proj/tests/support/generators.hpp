#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qtl/archgraph.hpp"
#include "qtl/commands.hpp"
#include "qtl/connectivity.hpp"
#include "qtl/syntax.hpp"

namespace qtl::testing {

using Rng = std::mt19937_64;

/// Random simple graph on 1..max_vertices vertices named v0, v1, ...
ArchGraph random_graph(Rng& rng, int max_vertices = 25);

/// Command tree on `g` starting from the all-free state. Branch arms end in the
/// same state and loop bodies restore their entry state; merges pick two
/// occupied cells. No alloc of an occupied cell and no free of a free one.
CommandSeq random_balanced_commands(Rng& rng, const ArchGraph& g, std::size_t max_size);

/// Query script with consistent edge bookkeeping on a random graph.
QueryScript random_query_script(Rng& rng, int max_vertices, std::size_t max_queries);

/// Answers every batch by rebuilding the live graph and searching it.
std::vector<bool> bfs_answers(const QueryScript& script);

/// Whether some simple path joins l1 and l2 with every interior vertex free,
/// by enumerating paths. Exponential; keep graphs small.
bool merge_path_brute(const ArchGraph& g, const FreeSet& free, VertexId l1, VertexId l2);

/// Random syntax tree for printer/parser round trips. Not necessarily well typed.
Program random_program(Rng& rng, int max_depth = 5);

struct GeneratedProgram {
    std::string source;
    int width = 0;
    int height = 0;
};

struct ProgramOptions {
    int max_qubits = 6;
    std::size_t max_nodes = 40;
    int max_grid = 4;
    bool allow_calls = true;
    bool allow_loops = true;
    /// Every branch of the command tree is taken with positive probability:
    /// no loops, and each `if` tests a fresh X-measured qubit.
    bool reachable = false;
};

/// Well-typed program on a small grid. The result may or may not pass the
/// connectivity check.
GeneratedProgram random_typed_program(Rng& rng, const ProgramOptions& options = {});

/// The CX declaration used by generated programs.
extern const char* const kCxDecl;

}  // namespace qtl::testing
