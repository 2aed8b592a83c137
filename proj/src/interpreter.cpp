#include "qtl/interpreter.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qtl/printer.hpp"

namespace qtl {

namespace {

constexpr double kZeroProbability = 1e-12;

std::string fresh_name(const std::string& base, std::uint64_t& next) {
    const auto hash = base.find('#');
    return base.substr(0, hash) + "#" + std::to_string(next++);
}

class Substituter {
public:
    explicit Substituter(std::uint64_t& next_fresh) : next_fresh_(next_fresh) {}

    ExprPtr go(const ExprPtr& e, const Renaming& r) {
        if (r.vars.empty() && r.locs.empty()) return e;
        return std::visit([&](const auto& n) { return rewrite(n, *e, r); }, e->node);
    }

private:
    static std::string var(const std::string& x, const Renaming& r) {
        auto it = r.vars.find(x);
        return it == r.vars.end() ? x : it->second;
    }
    static Location loc(const Location& l, const Renaming& r) {
        auto it = r.locs.find(l);
        return it == r.locs.end() ? l : it->second;
    }

    // Renaming for the scope of binder `b`, which may itself need renaming when a
    // replacement name would be captured by it.
    std::pair<std::string, Renaming> bind(const std::string& b, const Renaming& r) {
        Renaming inner = r;
        inner.vars.erase(b);
        for (const auto& [from, to] : inner.vars) {
            if (to == b) {
                std::string renamed = fresh_name(b, next_fresh_);
                inner.vars[b] = renamed;
                return {renamed, std::move(inner)};
            }
        }
        return {b, std::move(inner)};
    }

    ExprPtr rewrite(const ast::Var& n, const Expr& e, const Renaming& r) {
        return make_expr(ast::Var{var(n.name, r)}, e.span);
    }
    ExprPtr rewrite(const ast::Init& n, const Expr& e, const Renaming& r) {
        auto [b, inner] = bind(n.var, r);
        return make_expr(ast::Init{loc(n.loc, r), b, n.state, go(n.body, inner)}, e.span);
    }
    ExprPtr rewrite(const ast::Free& n, const Expr& e, const Renaming& r) {
        return make_expr(ast::Free{var(n.var, r), go(n.rest, r)}, e.span);
    }
    ExprPtr rewrite(const ast::Meas& n, const Expr& e, const Renaming& r) {
        std::vector<std::string> args;
        for (const auto& a : n.args) args.push_back(var(a, r));
        auto [b, inner] = bind(n.bind, r);
        return make_expr(ast::Meas{n.bases, std::move(args), b, go(n.body, inner)}, e.span);
    }
    ExprPtr rewrite(const ast::Gate& n, const Expr& e, const Renaming& r) {
        return make_expr(ast::Gate{n.gate, var(n.var, r)}, e.span);
    }
    ExprPtr rewrite(const ast::MkRef& n, const Expr& e, const Renaming& r) {
        ExprPtr rhs = go(n.rhs, r);
        auto [b, inner] = bind(n.var, r);
        return make_expr(ast::MkRef{b, std::move(rhs), go(n.body, inner)}, e.span);
    }
    ExprPtr rewrite(const ast::Deref& n, const Expr& e, const Renaming& r) {
        return make_expr(ast::Deref{go(n.operand, r)}, e.span);
    }
    ExprPtr rewrite(const ast::Assign& n, const Expr& e, const Renaming& r) {
        return make_expr(ast::Assign{var(n.var, r), go(n.value, r)}, e.span);
    }
    ExprPtr rewrite(const ast::Seq& n, const Expr& e, const Renaming& r) {
        return make_expr(ast::Seq{go(n.first, r), go(n.second, r)}, e.span);
    }
    ExprPtr rewrite(const ast::If& n, const Expr& e, const Renaming& r) {
        return make_expr(ast::If{go(n.cond, r), go(n.then_branch, r), go(n.else_branch, r)}, e.span);
    }
    ExprPtr rewrite(const ast::While& n, const Expr& e, const Renaming& r) {
        return make_expr(ast::While{go(n.cond, r), go(n.body, r)}, e.span);
    }
    ExprPtr rewrite(const ast::Call& n, const Expr& e, const Renaming& r) {
        ast::Call out{n.func, {}, {}};
        for (const auto& l : n.loc_args) out.loc_args.push_back(loc(l, r));
        for (const auto& a : n.args) out.args.push_back(var(a, r));
        return make_expr(std::move(out), e.span);
    }
    ExprPtr rewrite(const ast::Unit&, const Expr& e, const Renaming&) {
        return make_expr(ast::Unit{}, e.span);
    }
    ExprPtr rewrite(const ast::BoolLit& n, const Expr& e, const Renaming&) {
        return make_expr(n, e.span);
    }

    std::uint64_t& next_fresh_;
};

const heap::Qubit* qubit_entry(const Heap& h, const std::string& x) {
    auto it = h.find(x);
    return it == h.end() ? nullptr : std::get_if<heap::Qubit>(&it->second);
}

const heap::Reference* reference_entry(const Heap& h, const std::string& x) {
    auto it = h.find(x);
    return it == h.end() ? nullptr : std::get_if<heap::Reference>(&it->second);
}

bool quantum_rule(const std::string& rule) {
    return rule == "E-Init" || rule == "E-MInit" || rule == "E-Free" || rule == "E-Gate" ||
           rule == "E-Meas1" || rule == "E-Meas2";
}

// Outcome source for explore(): yields one forced bit, then asks to fork.
class ForkingOutcomes : public OutcomeSource {
public:
    explicit ForkingOutcomes(std::optional<int> forced) : forced_(forced) {}
    std::optional<int> choose(double p0, double p1) override {
        if (forced_) {
            int v = *forced_;
            forced_.reset();
            return v;
        }
        asked = true;
        p[0] = p0;
        p[1] = p1;
        return std::nullopt;
    }

    bool asked = false;
    double p[2] = {0, 0};

private:
    std::optional<int> forced_;
};

}  // namespace

std::vector<Location> used_locations(const Heap& h) {
    std::vector<Location> out;
    for (const auto& [name, entry] : h) {
        if (const auto* q = std::get_if<heap::Qubit>(&entry)) out.push_back(q->loc);
    }
    return out;
}

ExprPtr substitute(const ExprPtr& e, const Renaming& r, std::uint64_t& next_fresh) {
    return Substituter(next_fresh).go(e, r);
}

std::optional<int> SeededOutcomes::choose(double p0, double p1) {
    if (p0 <= kZeroProbability) return 1;
    if (p1 <= kZeroProbability) return 0;
    std::uniform_real_distribution<double> u(0.0, p0 + p1);
    return u(rng_) < p0 ? 0 : 1;
}

std::optional<int> ScriptedOutcomes::choose(double p0, double p1) {
    if (pos_ >= bits_.size()) return std::nullopt;
    const int bit = bits_[pos_];
    if ((bit == 0 ? p0 : p1) <= kZeroProbability) return std::nullopt;
    ++pos_;
    return bit;
}

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Terminated: return "terminated";
        case RunStatus::Stuck: return "stuck";
        case RunStatus::FuelExhausted: return "fuel-exhausted";
        case RunStatus::ResourceExceeded: return "resource-exceeded";
        case RunStatus::PolicyRejected: return "policy-rejected";
    }
    return "?";
}

struct Interpreter::Reduced {
    StepResult result;
    ExprPtr next;
};

Interpreter::Interpreter(const Program& p, const ArchGraph& g, InterpreterOptions options)
    : program_(p), graph_(g), options_(options) {
    for (const auto& d : p.decls) decls_.emplace(d.name, &d);
}

RuntimeState Interpreter::initial_state() const {
    RuntimeState s;
    s.expr = program_.entry;
    return s;
}

bool Interpreter::is_value(const Expr& e, const Heap& h) {
    if (e.is<ast::Unit>() || e.is<ast::BoolLit>()) return true;
    if (const auto* v = e.as<ast::Var>()) {
        auto it = h.find(v->name);
        return it != h.end() && !std::holds_alternative<heap::Classical>(it->second);
    }
    return false;
}

Interpreter::Reduced Interpreter::reduce(const ExprPtr& ep, RuntimeState& s,
                                         OutcomeSource& outcomes) const {
    const Expr& e = *ep;
    auto stepped = [](std::string rule, ExprPtr next, std::string detail = {}) {
        Reduced r;
        r.result.kind = StepResult::Kind::Stepped;
        r.result.rule = std::move(rule);
        r.result.detail = std::move(detail);
        r.next = std::move(next);
        return r;
    };
    auto stuck = [](std::string rule, std::vector<Location> locs, std::string message) {
        Reduced r;
        r.result.kind = StepResult::Kind::Stuck;
        r.result.rule = rule;
        r.result.stuck = StuckInfo{std::move(rule), std::move(locs), std::move(message)};
        return r;
    };
    // Reduces inside an evaluation context and plugs the result back.
    auto within = [&](const ExprPtr& hole, auto plug) {
        Reduced inner = reduce(hole, s, outcomes);
        if (inner.result.kind == StepResult::Kind::Stepped) inner.next = plug(inner.next);
        return inner;
    };
    auto rename = [&](const ExprPtr& body, const std::string& from, const std::string& to) {
        Renaming r;
        r.vars.emplace(from, to);
        return substitute(body, r, s.next_fresh);
    };

    if (const auto* n = e.as<ast::Var>()) {
        auto it = s.heap.find(n->name);
        if (it == s.heap.end()) return stuck("E-Var", {}, "unbound variable `" + n->name + "`");
        if (const auto* c = std::get_if<heap::Classical>(&it->second)) {
            return stepped("E-Var", c->value);
        }
        Reduced r;
        r.result.kind = StepResult::Kind::Value;
        return r;
    }
    if (e.is<ast::Unit>() || e.is<ast::BoolLit>()) {
        Reduced r;
        r.result.kind = StepResult::Kind::Value;
        return r;
    }
    if (const auto* n = e.as<ast::Init>()) {
        const char* rule = n->state == InitState::Zero ? "E-Init" : "E-MInit";
        if (!graph_.contains(n->loc)) {
            return stuck(rule, {n->loc}, "location " + n->loc.name + " is not in the graph");
        }
        const auto used = used_locations(s.heap);
        if (std::find(used.begin(), used.end(), n->loc) != used.end()) {
            return stuck(rule, {n->loc}, "location " + n->loc.name + " is occupied");
        }
        if (used.size() >= options_.max_qubits) {
            Reduced r;
            r.result.kind = StepResult::Kind::ResourceExceeded;
            r.result.rule = rule;
            r.result.detail = "more than " + std::to_string(options_.max_qubits) + " live qubits";
            return r;
        }
        std::string name = fresh_name(n->var, s.next_fresh);
        s.heap[name] = heap::Qubit{n->loc};
        s.q.alloc(n->loc, n->state);
        return stepped(rule, rename(n->body, n->var, name), name + " -> " + n->loc.name);
    }
    if (const auto* n = e.as<ast::Free>()) {
        const auto* q = qubit_entry(s.heap, n->var);
        if (!q) return stuck("E-Free", {}, "`" + n->var + "` is not a qubit");
        const Location l = q->loc;
        s.q.free(l);
        s.heap.erase(n->var);
        return stepped("E-Free", n->rest, n->var + " released " + l.name);
    }
    if (const auto* n = e.as<ast::Gate>()) {
        const auto* q = qubit_entry(s.heap, n->var);
        if (!q) return stuck("E-Gate", {}, "`" + n->var + "` is not a qubit");
        s.q.apply(n->gate, q->loc);
        return stepped("E-Gate", make_expr(ast::Unit{}, e.span),
                       std::string(1, to_char(n->gate)) + " on " + q->loc.name);
    }
    if (const auto* n = e.as<ast::Meas>()) {
        const char* rule = n->args.size() == 2 ? "E-Meas2" : "E-Meas1";
        if (n->args.empty() || n->args.size() > 2 || n->args.size() != n->bases.size()) {
            return stuck(rule, {}, "malformed measurement");
        }
        std::vector<QState::Target> targets;
        std::vector<Location> locs;
        for (std::size_t i = 0; i < n->args.size(); ++i) {
            const auto* q = qubit_entry(s.heap, n->args[i]);
            if (!q) return stuck(rule, {}, "`" + n->args[i] + "` is not a qubit");
            targets.push_back({q->loc, n->bases[i]});
            locs.push_back(q->loc);
        }
        if (locs.size() == 2) {
            if (locs[0] == locs[1]) return stuck(rule, locs, "measurement targets coincide");
            const auto used = used_locations(s.heap);
            if (!merge_path_exists(graph_, FreeSet::all_except(graph_, used), locs[0], locs[1])) {
                return stuck(rule, locs,
                             "no free path between " + locs[0].name + " and " + locs[1].name);
            }
        }
        const double p0 = s.q.probability(targets, 0);
        const double p1 = s.q.probability(targets, 1);
        const auto v = outcomes.choose(p0, p1);
        if (!v || (*v == 0 ? p0 : p1) <= kZeroProbability) {
            Reduced r;
            r.result.kind = StepResult::Kind::PolicyRejected;
            r.result.rule = rule;
            r.result.p0 = p0;
            r.result.p1 = p1;
            r.result.detail = v ? "outcome " + std::to_string(*v) + " is impossible"
                                : "no outcome available";
            return r;
        }
        s.q.measure(targets, *v, kZeroProbability);
        std::string name = fresh_name(n->bind, s.next_fresh);
        s.heap[name] = heap::Classical{make_expr(ast::BoolLit{*v == 1}, e.span)};
        Reduced r = stepped(rule, rename(n->body, n->bind, name),
                            name + " = " + std::to_string(*v));
        r.result.measured = true;
        r.result.p0 = p0;
        r.result.p1 = p1;
        return r;
    }
    if (const auto* n = e.as<ast::MkRef>()) {
        if (!is_value(*n->rhs, s.heap)) {
            return within(n->rhs, [&](ExprPtr x) {
                return make_expr(ast::MkRef{n->var, std::move(x), n->body}, e.span);
            });
        }
        if (const auto* v = n->rhs->as<ast::Var>(); v && qubit_entry(s.heap, v->name)) {
            return stuck("E-MkRef", {}, "reference to qubit `" + v->name + "`");
        }
        std::string name = fresh_name(n->var, s.next_fresh);
        s.heap[name] = heap::Reference{n->rhs};
        return stepped("E-MkRef", rename(n->body, n->var, name), name + " := " + format_expr(*n->rhs));
    }
    if (const auto* n = e.as<ast::Deref>()) {
        if (!is_value(*n->operand, s.heap)) {
            return within(n->operand,
                          [&](ExprPtr x) { return make_expr(ast::Deref{std::move(x)}, e.span); });
        }
        const auto* v = n->operand->as<ast::Var>();
        const auto* ref = v ? reference_entry(s.heap, v->name) : nullptr;
        if (!ref) return stuck("E-Deref", {}, "dereference of a non-reference");
        return stepped("E-Deref", ref->value);
    }
    if (const auto* n = e.as<ast::Assign>()) {
        if (!is_value(*n->value, s.heap)) {
            return within(n->value, [&](ExprPtr x) {
                return make_expr(ast::Assign{n->var, std::move(x)}, e.span);
            });
        }
        auto it = s.heap.find(n->var);
        if (it == s.heap.end() || !std::holds_alternative<heap::Reference>(it->second)) {
            return stuck("E-Assign", {}, "`" + n->var + "` is not a reference");
        }
        if (const auto* v = n->value->as<ast::Var>(); v && qubit_entry(s.heap, v->name)) {
            return stuck("E-Assign", {}, "reference to qubit `" + v->name + "`");
        }
        it->second = heap::Reference{n->value};
        return stepped("E-Assign", make_expr(ast::Unit{}, e.span),
                       n->var + " := " + format_expr(*n->value));
    }
    if (const auto* n = e.as<ast::Seq>()) {
        if (!is_value(*n->first, s.heap)) {
            return within(n->first,
                          [&](ExprPtr x) { return make_expr(ast::Seq{std::move(x), n->second}, e.span); });
        }
        return stepped("E-Seq", n->second);
    }
    if (const auto* n = e.as<ast::If>()) {
        if (!is_value(*n->cond, s.heap)) {
            return within(n->cond, [&](ExprPtr x) {
                return make_expr(ast::If{std::move(x), n->then_branch, n->else_branch}, e.span);
            });
        }
        const auto* b = n->cond->as<ast::BoolLit>();
        if (!b) return stuck("E-If", {}, "condition is not a boolean");
        return b->value ? stepped("E-IfTrue", n->then_branch) : stepped("E-IfFalse", n->else_branch);
    }
    if (const auto* n = e.as<ast::While>()) {
        ExprPtr unfolded = make_expr(
            ast::If{n->cond, make_expr(ast::Seq{n->body, ep}, e.span), make_expr(ast::Unit{}, e.span)},
            e.span);
        return stepped("E-While", std::move(unfolded));
    }
    if (const auto* n = e.as<ast::Call>()) {
        auto it = decls_.find(n->func);
        if (it == decls_.end()) return stuck("E-Call", {}, "unknown function `" + n->func + "`");
        const FuncDecl& d = *it->second;
        if (d.loc_params.size() != n->loc_args.size() || d.params.size() != n->args.size()) {
            return stuck("E-Call", {}, "arity mismatch calling `" + n->func + "`");
        }
        Renaming r;
        for (std::size_t i = 0; i < d.loc_params.size(); ++i) r.locs.emplace(d.loc_params[i], n->loc_args[i]);
        for (std::size_t i = 0; i < d.params.size(); ++i) r.vars.emplace(d.params[i].name, n->args[i]);
        return stepped("E-Call", substitute(d.body, r, s.next_fresh), n->func);
    }
    throw std::logic_error("reduce: unhandled expression");
}

StepResult Interpreter::step(RuntimeState& s, OutcomeSource& outcomes) const {
    if (is_value(*s.expr, s.heap)) {
        StepResult r;
        r.kind = StepResult::Kind::Value;
        return r;
    }
    Reduced r = reduce(s.expr, s, outcomes);
    if (r.result.kind == StepResult::Kind::Stepped) s.expr = std::move(r.next);
    return r.result;
}

namespace {

// Steps until the run ends; `res` accumulates stats and trace across calls.
void drive(const Interpreter& in, RuntimeState& s, OutcomeSource& outcomes, RunResult& res) {
    const auto& opts = in.options();
    while (true) {
        if (Interpreter::is_value(*s.expr, s.heap)) {
            res.status = RunStatus::Terminated;
            res.message = format_expr(*s.expr);
            return;
        }
        if (res.stats.steps >= opts.fuel) {
            res.status = RunStatus::FuelExhausted;
            res.message = "fuel exhausted after " + std::to_string(res.stats.steps) + " steps";
            return;
        }
        StepResult r = in.step(s, outcomes);
        switch (r.kind) {
            case StepResult::Kind::Stepped: break;
            case StepResult::Kind::Value:
                res.status = RunStatus::Terminated;
                res.message = format_expr(*s.expr);
                return;
            case StepResult::Kind::Stuck:
                res.status = RunStatus::Stuck;
                res.stuck = r.stuck;
                res.message = r.stuck->rule + ": " + r.stuck->message;
                if (opts.trace) res.trace.push_back("stuck " + res.message);
                return;
            case StepResult::Kind::ResourceExceeded:
                res.status = RunStatus::ResourceExceeded;
                res.message = r.rule + ": " + r.detail;
                return;
            case StepResult::Kind::PolicyRejected:
                res.status = RunStatus::PolicyRejected;
                res.message = r.rule + ": " + r.detail;
                return;
        }
        ++res.stats.steps;
        res.stats.max_live_qubits = std::max(res.stats.max_live_qubits, s.q.qubit_count());
        if (r.measured) {
            ++res.stats.measurements;
            res.stats.max_probability_deviation =
                std::max(res.stats.max_probability_deviation, std::abs(r.p0 + r.p1 - 1.0));
        }
        if (quantum_rule(r.rule)) {
            res.stats.max_trace_deviation = std::max(res.stats.max_trace_deviation, s.q.trace_deviation());
            res.stats.max_hermiticity_deviation =
                std::max(res.stats.max_hermiticity_deviation, s.q.hermiticity_deviation());
        }
        if (opts.trace) {
            std::ostringstream line;
            line << res.stats.steps << " " << r.rule;
            if (!r.detail.empty()) line << " " << r.detail;
            if (quantum_rule(r.rule)) {
                line << " [";
                for (std::size_t i = 0; i < s.q.labels().size(); ++i) {
                    line << (i ? " " : "") << s.q.labels()[i].name;
                }
                line << "]";
            }
            res.trace.push_back(line.str());
        }
    }
}

}  // namespace

RunResult Interpreter::run(OutcomeSource& outcomes) const { return run_from(initial_state(), outcomes); }

RunResult Interpreter::run_from(RuntimeState s, OutcomeSource& outcomes) const {
    RunResult res;
    drive(*this, s, outcomes, res);
    res.final_state = std::move(s);
    return res;
}

RunResult run(const Program& p, const ArchGraph& g, OutcomeSource& outcomes, InterpreterOptions options) {
    return Interpreter(p, g, options).run(outcomes);
}

Exploration explore(const Program& p, const ArchGraph& g, InterpreterOptions options, double prune,
                    std::size_t max_leaves) {
    struct Branch {
        RuntimeState state;
        RunResult partial;
        double probability;
        std::vector<int> outcomes;
        std::optional<int> forced;
    };
    const Interpreter in(p, g, options);
    Exploration out;
    std::vector<Branch> pending;
    pending.push_back({in.initial_state(), {}, 1.0, {}, std::nullopt});
    while (!pending.empty()) {
        Branch b = std::move(pending.back());
        pending.pop_back();
        ForkingOutcomes source(b.forced);
        drive(in, b.state, source, b.partial);
        if (b.partial.status == RunStatus::PolicyRejected && source.asked) {
            for (int v : {1, 0}) {
                const double pv = source.p[v];
                if (pv <= kZeroProbability) continue;
                const double child = b.probability * pv;
                if (child < prune) {
                    out.pruned_probability += child;
                    continue;
                }
                Branch next{b.state, b.partial, child, b.outcomes, v};
                next.outcomes.push_back(v);
                pending.push_back(std::move(next));
            }
            continue;
        }
        if (out.leaves.size() >= max_leaves) {
            out.truncated = true;
            break;
        }
        b.partial.final_state = std::move(b.state);
        out.leaves.push_back({b.probability, std::move(b.outcomes), std::move(b.partial)});
    }
    return out;
}

}  // namespace qtl
