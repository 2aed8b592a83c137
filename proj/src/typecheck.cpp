#include "qtl/typecheck.hpp"

#include <algorithm>
#include <functional>

namespace qtl {

namespace {

using Kind = TypeError::Kind;

CommandSeq concat(CommandSeq a, const CommandSeq& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

CommandSeq prepend(Command c, const CommandSeq& rest) {
    CommandSeq out;
    out.reserve(rest.size() + 1);
    out.push_back(std::move(c));
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

std::string quote(const std::string& s) { return "`" + s + "`"; }

class Checker {
public:
    explicit Checker(const FuncTypeEnv& theta) : theta_(theta) {}

    Inferred infer(const Expr& e, const TypeEnv& env) {
        Inferred r = std::visit([&](const auto& n) { return rule(n, e, env); }, e.node);
        if (!r.env.well_formed()) {
            throw std::logic_error("typing produced an ill-formed environment at " +
                                   to_string(e.span) + ": " + to_string(r.env));
        }
        return r;
    }

private:
    const Type& lookup(const TypeEnv& env, const std::string& x, Span span) {
        const Type* t = env.lookup(x);
        if (!t) throw TypeError(Kind::UnboundVariable, span, "unbound variable " + quote(x));
        return *t;
    }

    const Location& qubit_loc(const TypeEnv& env, const std::string& x, Span span) {
        const Type& t = lookup(env, x, span);
        if (!t.is_qbit()) {
            throw TypeError(Kind::TypeMismatch, span,
                            quote(x) + " has type " + to_string(t) + ", expected a qubit");
        }
        return t.loc();
    }

    void expect(const Type& actual, const Type& expected, Span span, const char* what) {
        if (!(actual == expected)) {
            throw TypeError(Kind::TypeMismatch, span,
                            std::string(what) + " has type " + to_string(actual) + ", expected " +
                                to_string(expected));
        }
    }

    Inferred rule(const ast::Var& n, const Expr& e, const TypeEnv& env) {
        return {lookup(env, n.name, e.span), env, {}};
    }

    Inferred rule(const ast::Unit&, const Expr&, const TypeEnv& env) {
        return {Type::unit(), env, {}};
    }

    Inferred rule(const ast::BoolLit&, const Expr&, const TypeEnv& env) {
        return {Type::boolean(), env, {}};
    }

    Inferred rule(const ast::Init& n, const Expr& e, const TypeEnv& env) {
        TypeEnv next = env;
        if (!next.take_free(n.loc)) {
            if (auto owner = env.owner_of(n.loc)) {
                throw TypeError(Kind::LocationNotFree, e.span,
                                "location " + n.loc.name + " is occupied by " + quote(*owner));
            }
            throw TypeError(Kind::LocationNotFree, e.span,
                            "location " + n.loc.name + " is not available here");
        }
        next.bind(n.var, Type::qbit(n.loc));
        Inferred r = infer(*n.body, next);
        r.effect = prepend(Command::alloc(n.loc, e.span), r.effect);
        return r;
    }

    Inferred rule(const ast::Free& n, const Expr& e, const TypeEnv& env) {
        const Location l = qubit_loc(env, n.var, e.span);
        TypeEnv next = env;
        next.unbind(n.var);
        next.add_free(l);
        Inferred r = infer(*n.rest, next);
        r.effect = prepend(Command::free(l, e.span), r.effect);
        return r;
    }

    Inferred rule(const ast::Meas& n, const Expr& e, const TypeEnv& env) {
        if (n.bases.empty() || n.bases.size() > 2 || n.bases.size() != n.args.size()) {
            throw TypeError(Kind::BasisArityMismatch, e.span,
                            "measurement with " + std::to_string(n.bases.size()) + " bases and " +
                                std::to_string(n.args.size()) + " targets");
        }
        std::vector<Location> locs;
        for (const auto& a : n.args) locs.push_back(qubit_loc(env, a, e.span));
        if (locs.size() == 2 && n.args[0] == n.args[1]) {
            throw TypeError(Kind::LocationInUse, e.span,
                            "measurement targets must be distinct, " + quote(n.args[0]) +
                                " given twice");
        }
        TypeEnv next = env;
        next.bind(n.bind, Type::boolean());
        Inferred r = infer(*n.body, next);
        if (locs.size() == 2) r.effect = prepend(Command::merge(locs[0], locs[1], e.span), r.effect);
        return r;
    }

    Inferred rule(const ast::Gate& n, const Expr& e, const TypeEnv& env) {
        qubit_loc(env, n.var, e.span);
        return {Type::unit(), env, {}};
    }

    Inferred rule(const ast::MkRef& n, const Expr& e, const TypeEnv& env) {
        Inferred rhs = infer(*n.rhs, env);
        if (!rhs.type.locations().empty()) {
            throw TypeError(Kind::RefContainsQubit, e.span,
                            "reference " + quote(n.var) + " would hold " + to_string(rhs.type));
        }
        TypeEnv next = rhs.env;
        next.bind(n.var, Type::ref(rhs.type));
        Inferred body = infer(*n.body, next);
        body.env.unbind(n.var);
        body.effect = concat(std::move(rhs.effect), body.effect);
        return body;
    }

    Inferred rule(const ast::Deref& n, const Expr& e, const TypeEnv& env) {
        Inferred r = infer(*n.operand, env);
        if (r.type.kind() != Type::Kind::Ref) {
            throw TypeError(Kind::TypeMismatch, e.span,
                            "dereference of " + to_string(r.type) + ", expected a reference");
        }
        Type inner = r.type.inner();
        r.type = std::move(inner);
        return r;
    }

    Inferred rule(const ast::Assign& n, const Expr& e, const TypeEnv& env) {
        const Type target = lookup(env, n.var, e.span);
        if (target.kind() != Type::Kind::Ref) {
            throw TypeError(Kind::TypeMismatch, e.span,
                            quote(n.var) + " has type " + to_string(target) +
                                ", expected a reference");
        }
        Inferred r = infer(*n.value, env);
        expect(r.type, target.inner(), e.span, "assigned value");
        r.type = Type::unit();
        return r;
    }

    Inferred rule(const ast::Seq& n, const Expr& e, const TypeEnv& env) {
        Inferred first = infer(*n.first, env);
        expect(first.type, Type::unit(), n.first->span.line ? n.first->span : e.span,
               "left side of `;`");
        Inferred second = infer(*n.second, first.env);
        second.effect = concat(std::move(first.effect), second.effect);
        return second;
    }

    Inferred rule(const ast::If& n, const Expr& e, const TypeEnv& env) {
        Inferred cond = infer(*n.cond, env);
        expect(cond.type, Type::boolean(), e.span, "condition");
        Inferred then_r = infer(*n.then_branch, cond.env);
        Inferred else_r = infer(*n.else_branch, cond.env);
        if (!(then_r.type == else_r.type)) {
            throw TypeError(Kind::TypeMismatch, e.span,
                            "branches have types " + to_string(then_r.type) + " and " +
                                to_string(else_r.type));
        }
        TypeEnv joined = env_join(then_r.env, else_r.env, e.span);
        CommandSeq effect = std::move(cond.effect);
        effect.push_back(Command::branch(std::move(then_r.effect), std::move(else_r.effect), e.span));
        return {then_r.type, std::move(joined), std::move(effect)};
    }

    Inferred rule(const ast::While& n, const Expr& e, const TypeEnv& env) {
        Inferred cond = infer(*n.cond, env);
        expect(cond.type, Type::boolean(), e.span, "loop condition");
        if (!env_weakens_to(cond.env, env)) {
            throw TypeError(Kind::WhileEnvMismatch, e.span,
                            "loop condition changes the environment: " + to_string(env) + " to " +
                                to_string(cond.env));
        }
        Inferred body = infer(*n.body, env);
        expect(body.type, Type::unit(), e.span, "loop body");
        if (!env_weakens_to(body.env, env)) {
            throw TypeError(Kind::WhileEnvMismatch, e.span,
                            "loop body changes the environment: " + to_string(env) + " to " +
                                to_string(body.env));
        }
        CommandSeq effect;
        effect.push_back(Command::star(concat(cond.effect, body.effect), e.span));
        effect.insert(effect.end(), cond.effect.begin(), cond.effect.end());
        return {Type::unit(), env, std::move(effect)};
    }

    Inferred rule(const ast::Call& n, const Expr& e, const TypeEnv& env) {
        auto it = theta_.find(n.func);
        if (it == theta_.end()) {
            throw TypeError(Kind::UnboundFunction, e.span, "unknown function " + quote(n.func));
        }
        return instantiate_call(it->second, n.loc_args, n.args, env, e.span);
    }

    const FuncTypeEnv& theta_;
};

FuncType check_decl(const FuncDecl& d, const FuncTypeEnv& theta) {
    std::set<Location> loc_params;
    for (const auto& l : d.loc_params) {
        if (!loc_params.insert(l).second) {
            throw TypeError(Kind::DuplicateName, d.span,
                            "location parameter " + l.name + " declared twice in " + quote(d.name));
        }
    }
    FuncType ft;
    ft.loc_params = d.loc_params;
    std::set<Location> carried;
    std::set<std::string> names;
    for (const auto& p : d.params) {
        if (!names.insert(p.name).second) {
            throw TypeError(Kind::DuplicateName, d.span,
                            "parameter " + quote(p.name) + " declared twice in " + quote(d.name));
        }
        Type t = Type::from(p.type);
        for (const auto& l : t.locations()) {
            if (!loc_params.count(l)) {
                throw TypeError(Kind::UndeclaredLocation, d.span,
                                "parameter " + quote(p.name) + " uses undeclared location " +
                                    l.name);
            }
            if (!carried.insert(l).second) {
                throw TypeError(Kind::LocationInUse, d.span,
                                "two parameters of " + quote(d.name) + " occupy location " + l.name);
            }
        }
        ft.param_types.emplace_back(p.name, std::move(t));
    }

    std::set<Location> internal;
    for (const auto& l : d.loc_params) {
        if (!carried.count(l)) {
            internal.insert(l);
            ft.internal_locs.push_back(l);
        }
    }
    TypeEnv env(internal);
    for (const auto& [name, t] : ft.param_types) env.bind(name, t);

    Inferred r = Checker(theta).infer(*d.body, env);
    ft.effect = std::move(r.effect);
    ft.result_type = std::move(r.type);
    // Locals do not outlive the call; only parameter bindings reach the caller.
    TypeEnv out(r.env.free_locs());
    for (const auto& [name, t] : r.env.bindings()) {
        if (names.count(name)) out.bind(name, t);
    }
    ft.result_env = std::move(out);
    return ft;
}

}  // namespace

Inferred infer(const FuncTypeEnv& theta, const TypeEnv& gamma, const Expr& e) {
    return Checker(theta).infer(e, gamma);
}

TypeEnv env_join(const TypeEnv& a, const TypeEnv& b, Span span) {
    if (a.free_locs() != b.free_locs()) {
        std::string diff;
        for (const auto& l : a.free_locs()) {
            if (!b.is_free(l)) diff += " " + l.name + " (free only in then)";
        }
        for (const auto& l : b.free_locs()) {
            if (!a.is_free(l)) diff += " " + l.name + " (free only in else)";
        }
        throw TypeError(Kind::EnvJoinMismatch, span, "branches disagree on free locations:" + diff);
    }
    TypeEnv out(a.free_locs());
    for (const auto& [name, t] : a.bindings()) {
        const Type* other = b.lookup(name);
        if (other && *other == t) out.bind(name, t);
    }
    return out;
}

bool env_weakens_to(const TypeEnv& after, const TypeEnv& before) {
    if (after.free_locs() != before.free_locs()) return false;
    for (const auto& [name, t] : before.bindings()) {
        const Type* now = after.lookup(name);
        if (!now || !(*now == t)) return false;
    }
    return true;
}

Inferred instantiate_call(const FuncType& ft, const std::vector<Location>& loc_args,
                          const std::vector<std::string>& args, const TypeEnv& gamma, Span span) {
    if (loc_args.size() != ft.loc_params.size()) {
        throw TypeError(Kind::ArityMismatch, span,
                        "expected " + std::to_string(ft.loc_params.size()) +
                            " location arguments, got " + std::to_string(loc_args.size()));
    }
    if (args.size() != ft.param_types.size()) {
        throw TypeError(Kind::ArityMismatch, span,
                        "expected " + std::to_string(ft.param_types.size()) + " arguments, got " +
                            std::to_string(args.size()));
    }
    std::map<Location, Location> sigma;
    for (std::size_t i = 0; i < loc_args.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (loc_args[j] == loc_args[i]) {
                throw TypeError(Kind::LocationInUse, span,
                                "location argument " + loc_args[i].name + " given twice");
            }
        }
        sigma.emplace(ft.loc_params[i], loc_args[i]);
    }

    TypeEnv env = gamma;
    std::set<Location> carried;
    for (std::size_t i = 0; i < args.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (args[j] == args[i]) {
                throw TypeError(Kind::OwnershipViolation, span,
                                "argument " + quote(args[i]) + " passed twice");
            }
        }
        const Type* actual = gamma.lookup(args[i]);
        if (!actual) throw TypeError(Kind::UnboundVariable, span, "unbound variable " + quote(args[i]));
        Type expected = ft.param_types[i].second.substitute(sigma);
        if (!(*actual == expected)) {
            throw TypeError(Kind::TypeMismatch, span,
                            "argument " + quote(args[i]) + " has type " + to_string(*actual) +
                                ", expected " + to_string(expected));
        }
        for (const auto& l : expected.locations()) carried.insert(l);
    }
    for (const auto& l : loc_args) {
        if (carried.count(l)) continue;
        if (!env.take_free(l)) {
            throw TypeError(Kind::LocationNotFree, span,
                            "location " + l.name + " must be free for the call");
        }
    }
    for (const auto& a : args) env.unbind(a);

    auto rename = [&](const Location& l) {
        auto it = sigma.find(l);
        return it == sigma.end() ? l : it->second;
    };
    for (const auto& [name, t] : ft.result_env.bindings()) {
        for (std::size_t i = 0; i < ft.param_types.size(); ++i) {
            if (ft.param_types[i].first == name) env.bind(args[i], t.substitute(sigma));
        }
    }
    for (const auto& l : ft.result_env.free_locs()) env.add_free(rename(l));

    return {ft.result_type.substitute(sigma), std::move(env), map_locations(ft.effect, rename)};
}

FuncTypeEnv check_decls(std::span<const FuncDecl> decls) {
    std::map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < decls.size(); ++i) {
        if (!by_name.emplace(decls[i].name, i).second) {
            throw TypeError(Kind::DuplicateName, decls[i].span,
                            "function " + quote(decls[i].name) + " declared twice");
        }
    }
    std::vector<std::vector<std::size_t>> callees(decls.size());
    for (std::size_t i = 0; i < decls.size(); ++i) {
        for (const auto& f : called_functions(*decls[i].body)) {
            auto it = by_name.find(f);
            if (it == by_name.end()) {
                throw TypeError(Kind::UnboundFunction, decls[i].span,
                                quote(decls[i].name) + " calls unknown function " + quote(f));
            }
            callees[i].push_back(it->second);
        }
    }

    // Depth-first post-order; a back edge is recursion.
    enum class Mark { None, Active, Done };
    std::vector<Mark> mark(decls.size(), Mark::None);
    std::vector<std::size_t> order;
    std::function<void(std::size_t)> visit = [&](std::size_t i) {
        mark[i] = Mark::Active;
        for (std::size_t j : callees[i]) {
            if (mark[j] == Mark::Active) {
                throw TypeError(Kind::RecursiveFunction, decls[i].span,
                                "recursive call from " + quote(decls[i].name) + " to " +
                                    quote(decls[j].name));
            }
            if (mark[j] == Mark::None) visit(j);
        }
        mark[i] = Mark::Done;
        order.push_back(i);
    };
    for (std::size_t i = 0; i < decls.size(); ++i) {
        if (mark[i] == Mark::None) visit(i);
    }

    FuncTypeEnv theta;
    for (std::size_t i : order) theta.emplace(decls[i].name, check_decl(decls[i], theta));
    return theta;
}

TypedProgram typecheck_program(const Program& p, const ArchGraph& g) {
    FuncTypeEnv theta = check_decls(p.decls);
    TypeEnv env(std::set<Location>(g.vertices().begin(), g.vertices().end()));
    Inferred r = infer(theta, env, *p.entry);
    return {std::move(theta), std::move(r.type), std::move(r.effect)};
}

}  // namespace qtl
