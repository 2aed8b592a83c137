#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "qtl/archgraph.hpp"
#include "qtl/qstate.hpp"
#include "qtl/syntax.hpp"

namespace qtl {

namespace heap {

struct Qubit {
    Location loc;
};
/// Measurement result bound by `let x = meas...`.
struct Classical {
    ExprPtr value;
};
/// Reference cell; holds a literal or the name of another reference.
struct Reference {
    ExprPtr value;
};

}  // namespace heap

using HeapEntry = std::variant<heap::Qubit, heap::Classical, heap::Reference>;
using Heap = std::map<std::string, HeapEntry>;

struct RuntimeState {
    Heap heap;
    QState q;
    ExprPtr expr;
    std::uint64_t next_fresh = 0;
};

/// Locations currently held by qubit entries of the heap.
std::vector<Location> used_locations(const Heap& h);

/// Supplies measurement outcomes. Returning nullopt rejects the step.
class OutcomeSource {
public:
    virtual ~OutcomeSource() = default;
    virtual std::optional<int> choose(double p0, double p1) = 0;
};

class SeededOutcomes : public OutcomeSource {
public:
    explicit SeededOutcomes(std::uint64_t seed) : rng_(seed) {}
    std::optional<int> choose(double p0, double p1) override;

private:
    std::mt19937_64 rng_;
};

/// Replays a fixed list of bits; rejects when a bit is impossible or the list runs out.
class ScriptedOutcomes : public OutcomeSource {
public:
    explicit ScriptedOutcomes(std::vector<int> bits) : bits_(std::move(bits)) {}
    std::optional<int> choose(double p0, double p1) override;
    std::size_t consumed() const noexcept { return pos_; }

private:
    std::vector<int> bits_;
    std::size_t pos_ = 0;
};

struct InterpreterOptions {
    std::size_t fuel = 100000;
    std::size_t max_qubits = 10;
    bool trace = false;
};

struct StuckInfo {
    std::string rule;
    std::vector<Location> locations;
    std::string message;
};

enum class RunStatus { Terminated, Stuck, FuelExhausted, ResourceExceeded, PolicyRejected };
const char* to_string(RunStatus s);

struct RunStats {
    std::size_t steps = 0;
    std::size_t measurements = 0;
    std::size_t max_live_qubits = 0;
    double max_trace_deviation = 0;
    double max_hermiticity_deviation = 0;
    double max_probability_deviation = 0;  // |p0 + p1 - 1|
};

struct RunResult {
    RunStatus status = RunStatus::Terminated;
    RuntimeState final_state;
    std::optional<StuckInfo> stuck;
    std::string message;
    RunStats stats;
    std::vector<std::string> trace;
};

struct StepResult {
    enum class Kind { Stepped, Value, Stuck, ResourceExceeded, PolicyRejected };
    Kind kind = Kind::Stepped;
    std::string rule;    // rule that fired
    std::string detail;  // heap and label changes, for tracing
    std::optional<StuckInfo> stuck;
    double p0 = 0, p1 = 0;  // outcome distribution when a measurement fired or was rejected
    bool measured = false;
};

/// Small-step reference semantics over one program and architecture graph.
class Interpreter {
public:
    Interpreter(const Program& p, const ArchGraph& g, InterpreterOptions options = {});

    RuntimeState initial_state() const;

    /// Whether `e` is a value under heap `h`.
    static bool is_value(const Expr& e, const Heap& h);

    /// Exactly one reduction of `s.expr`.
    StepResult step(RuntimeState& s, OutcomeSource& outcomes) const;

    RunResult run(OutcomeSource& outcomes) const;
    RunResult run_from(RuntimeState s, OutcomeSource& outcomes) const;

    const InterpreterOptions& options() const noexcept { return options_; }

private:
    struct Reduced;
    Reduced reduce(const ExprPtr& e, RuntimeState& s, OutcomeSource& outcomes) const;

    const Program& program_;
    const ArchGraph& graph_;
    InterpreterOptions options_;
    std::map<std::string, const FuncDecl*> decls_;
};

RunResult run(const Program& p, const ArchGraph& g, OutcomeSource& outcomes,
              InterpreterOptions options = {});

struct ExploredLeaf {
    double probability = 0;
    std::vector<int> outcomes;
    RunResult result;
};

struct Exploration {
    std::vector<ExploredLeaf> leaves;
    double pruned_probability = 0;
    bool truncated = false;  // leaf cap reached
};

/// Follows every realisable measurement outcome. Branches below `prune` are dropped.
Exploration explore(const Program& p, const ArchGraph& g, InterpreterOptions options = {},
                    double prune = 1e-10, std::size_t max_leaves = 4096);

/// Capture-avoiding renaming of free variables and locations.
struct Renaming {
    std::map<std::string, std::string> vars;
    std::map<Location, Location> locs;
};
ExprPtr substitute(const ExprPtr& e, const Renaming& r, std::uint64_t& next_fresh);

}  // namespace qtl
