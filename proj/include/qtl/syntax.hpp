#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qtl/location.hpp"

namespace qtl {

enum class Basis { X, Z };
enum class GateKind { X, Z, H, S };
enum class InitState { Zero, Magic };

char to_char(Basis b);
char to_char(GateKind g);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

namespace ast {

struct Var {
    std::string name;
};

/// `let var = init(loc) in body`, or `minit` when state is Magic.
struct Init {
    Location loc;
    std::string var;
    InitState state = InitState::Zero;
    ExprPtr body;
};

struct Free {
    std::string var;
    ExprPtr rest;
};

/// `let bind = meas[bases](args) in body`; one or two targets.
struct Meas {
    std::vector<Basis> bases;
    std::vector<std::string> args;
    std::string bind;
    ExprPtr body;
};

struct Gate {
    GateKind gate;
    std::string var;
};

struct MkRef {
    std::string var;
    ExprPtr rhs;
    ExprPtr body;
};

struct Deref {
    ExprPtr operand;
};

struct Assign {
    std::string var;
    ExprPtr value;
};

struct Seq {
    ExprPtr first;
    ExprPtr second;
};

struct If {
    ExprPtr cond;
    ExprPtr then_branch;
    ExprPtr else_branch;
};

struct While {
    ExprPtr cond;
    ExprPtr body;
};

struct Call {
    std::string func;
    std::vector<Location> loc_args;
    std::vector<std::string> args;
};

struct Unit {};

struct BoolLit {
    bool value = false;
};

}  // namespace ast

struct Expr {
    using Node = std::variant<ast::Var, ast::Init, ast::Free, ast::Meas, ast::Gate, ast::MkRef,
                              ast::Deref, ast::Assign, ast::Seq, ast::If, ast::While, ast::Call,
                              ast::Unit, ast::BoolLit>;

    Node node;
    Span span;

    template <typename T>
    const T* as() const {
        return std::get_if<T>(&node);
    }
    template <typename T>
    bool is() const {
        return std::holds_alternative<T>(node);
    }
};

template <typename T>
ExprPtr make_expr(T node, Span span = {}) {
    return std::make_shared<const Expr>(Expr{Expr::Node{std::move(node)}, span});
}

/// Source-level type annotation on a function parameter.
struct TypeAnnotation {
    enum class Kind { Qbit, Unit, Bool, Ref };
    Kind kind = Kind::Unit;
    Location loc;                                  // Qbit only
    std::shared_ptr<const TypeAnnotation> inner;  // Ref only

    static TypeAnnotation qbit(Location l) { return {Kind::Qbit, std::move(l), nullptr}; }
    static TypeAnnotation unit() { return {Kind::Unit, {}, nullptr}; }
    static TypeAnnotation boolean() { return {Kind::Bool, {}, nullptr}; }
    static TypeAnnotation ref(TypeAnnotation t) {
        return {Kind::Ref, {}, std::make_shared<const TypeAnnotation>(std::move(t))};
    }

    friend bool operator==(const TypeAnnotation& a, const TypeAnnotation& b);
};

struct Param {
    std::string name;
    TypeAnnotation type;
};

struct FuncDecl {
    std::string name;
    std::vector<Location> loc_params;
    std::vector<Param> params;
    ExprPtr body;
    Span span;
};

struct Program {
    std::vector<FuncDecl> decls;
    ExprPtr entry;
};

/// Equality up to source spans.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const FuncDecl& a, const FuncDecl& b);
bool structurally_equal(const Program& a, const Program& b);

/// Number of AST nodes in `e`.
std::size_t node_count(const Expr& e);

/// Names of the functions called anywhere inside `e`, in first-occurrence order.
std::vector<std::string> called_functions(const Expr& e);

}  // namespace qtl
