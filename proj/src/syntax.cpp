#include "qtl/syntax.hpp"

#include <algorithm>
#include <type_traits>

namespace qtl {

char to_char(Basis b) { return b == Basis::X ? 'X' : 'Z'; }

char to_char(GateKind g) {
    switch (g) {
        case GateKind::X: return 'X';
        case GateKind::Z: return 'Z';
        case GateKind::H: return 'H';
        case GateKind::S: return 'S';
    }
    return '?';
}

bool operator==(const TypeAnnotation& a, const TypeAnnotation& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case TypeAnnotation::Kind::Qbit: return a.loc == b.loc;
        case TypeAnnotation::Kind::Ref: return *a.inner == *b.inner;
        default: return true;
    }
}

namespace {

bool eq(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return a == b;
    return structurally_equal(*a, *b);
}

struct EqualVisitor {
    const Expr::Node& other;

    bool operator()(const ast::Var& a) const { return a.name == std::get<ast::Var>(other).name; }
    bool operator()(const ast::Init& a) const {
        const auto& b = std::get<ast::Init>(other);
        return a.loc == b.loc && a.var == b.var && a.state == b.state && eq(a.body, b.body);
    }
    bool operator()(const ast::Free& a) const {
        const auto& b = std::get<ast::Free>(other);
        return a.var == b.var && eq(a.rest, b.rest);
    }
    bool operator()(const ast::Meas& a) const {
        const auto& b = std::get<ast::Meas>(other);
        return a.bases == b.bases && a.args == b.args && a.bind == b.bind && eq(a.body, b.body);
    }
    bool operator()(const ast::Gate& a) const {
        const auto& b = std::get<ast::Gate>(other);
        return a.gate == b.gate && a.var == b.var;
    }
    bool operator()(const ast::MkRef& a) const {
        const auto& b = std::get<ast::MkRef>(other);
        return a.var == b.var && eq(a.rhs, b.rhs) && eq(a.body, b.body);
    }
    bool operator()(const ast::Deref& a) const {
        return eq(a.operand, std::get<ast::Deref>(other).operand);
    }
    bool operator()(const ast::Assign& a) const {
        const auto& b = std::get<ast::Assign>(other);
        return a.var == b.var && eq(a.value, b.value);
    }
    bool operator()(const ast::Seq& a) const {
        const auto& b = std::get<ast::Seq>(other);
        return eq(a.first, b.first) && eq(a.second, b.second);
    }
    bool operator()(const ast::If& a) const {
        const auto& b = std::get<ast::If>(other);
        return eq(a.cond, b.cond) && eq(a.then_branch, b.then_branch) &&
               eq(a.else_branch, b.else_branch);
    }
    bool operator()(const ast::While& a) const {
        const auto& b = std::get<ast::While>(other);
        return eq(a.cond, b.cond) && eq(a.body, b.body);
    }
    bool operator()(const ast::Call& a) const {
        const auto& b = std::get<ast::Call>(other);
        return a.func == b.func && a.loc_args == b.loc_args && a.args == b.args;
    }
    bool operator()(const ast::Unit&) const { return true; }
    bool operator()(const ast::BoolLit& a) const {
        return a.value == std::get<ast::BoolLit>(other).value;
    }
};

template <typename F>
void for_each_child(const Expr& e, F&& f) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ast::Init>) {
                f(*n.body);
            } else if constexpr (std::is_same_v<T, ast::Free>) {
                f(*n.rest);
            } else if constexpr (std::is_same_v<T, ast::Meas>) {
                f(*n.body);
            } else if constexpr (std::is_same_v<T, ast::MkRef>) {
                f(*n.rhs);
                f(*n.body);
            } else if constexpr (std::is_same_v<T, ast::Deref>) {
                f(*n.operand);
            } else if constexpr (std::is_same_v<T, ast::Assign>) {
                f(*n.value);
            } else if constexpr (std::is_same_v<T, ast::Seq>) {
                f(*n.first);
                f(*n.second);
            } else if constexpr (std::is_same_v<T, ast::If>) {
                f(*n.cond);
                f(*n.then_branch);
                f(*n.else_branch);
            } else if constexpr (std::is_same_v<T, ast::While>) {
                f(*n.cond);
                f(*n.body);
            }
        },
        e.node);
}

void collect_calls(const Expr& e, std::vector<std::string>& out) {
    if (const auto* c = e.as<ast::Call>()) {
        if (std::find(out.begin(), out.end(), c->func) == out.end()) out.push_back(c->func);
    }
    for_each_child(e, [&](const Expr& child) { collect_calls(child, out); });
}

}  // namespace

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(EqualVisitor{b.node}, a.node);
}

bool structurally_equal(const FuncDecl& a, const FuncDecl& b) {
    if (a.name != b.name || a.loc_params != b.loc_params) return false;
    if (a.params.size() != b.params.size()) return false;
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        if (a.params[i].name != b.params[i].name || !(a.params[i].type == b.params[i].type)) {
            return false;
        }
    }
    return eq(a.body, b.body);
}

bool structurally_equal(const Program& a, const Program& b) {
    if (a.decls.size() != b.decls.size()) return false;
    for (std::size_t i = 0; i < a.decls.size(); ++i) {
        if (!structurally_equal(a.decls[i], b.decls[i])) return false;
    }
    return eq(a.entry, b.entry);
}

std::size_t node_count(const Expr& e) {
    std::size_t n = 1;
    for_each_child(e, [&](const Expr& child) { n += node_count(child); });
    return n;
}

std::vector<std::string> called_functions(const Expr& e) {
    std::vector<std::string> out;
    collect_calls(e, out);
    return out;
}

}  // namespace qtl
