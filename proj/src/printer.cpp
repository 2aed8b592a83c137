#include "qtl/printer.hpp"

#include <sstream>

namespace qtl {

namespace {

std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 2, ' '); }

// Forms that extend to the right and would absorb a following `;`.
bool is_greedy(const Expr& e) {
    return e.is<ast::Init>() || e.is<ast::Meas>() || e.is<ast::MkRef>() || e.is<ast::Free>() ||
           e.is<ast::If>() || e.is<ast::While>() || e.is<ast::Seq>();
}

bool is_atomic(const Expr& e) {
    return e.is<ast::Var>() || e.is<ast::Unit>() || e.is<ast::BoolLit>() || e.is<ast::Deref>() ||
           e.is<ast::Gate>() || e.is<ast::Call>();
}

std::string join_names(const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += xs[i];
    }
    return out;
}

std::string join_locs(const std::vector<Location>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += xs[i].name;
    }
    return out;
}

class Printer {
public:
    // `else_follows`: the printed text is immediately followed by `else`, so a
    // trailing if-without-else would capture it.
    std::string fmt(const Expr& e, int indent, bool else_follows) const {
        return std::visit([&](const auto& n) { return node(n, indent, else_follows); }, e.node);
    }

private:
    std::string parens(const Expr& e, int indent) const { return "(" + fmt(e, indent, false) + ")"; }

    std::string node(const ast::Var& n, int, bool) const { return n.name; }
    std::string node(const ast::Unit&, int, bool) const { return "()"; }
    std::string node(const ast::BoolLit& n, int, bool) const { return n.value ? "true" : "false"; }
    std::string node(const ast::Gate& n, int, bool) const {
        return std::string(1, to_char(n.gate)) + "(" + n.var + ")";
    }
    std::string node(const ast::Call& n, int, bool) const {
        return n.func + "[" + join_locs(n.loc_args) + "](" + join_names(n.args) + ")";
    }
    std::string node(const ast::Deref& n, int indent, bool) const {
        const Expr& op = *n.operand;
        return "*" + (is_atomic(op) ? fmt(op, indent, false) : parens(op, indent));
    }
    std::string node(const ast::Assign& n, int indent, bool) const {
        const Expr& v = *n.value;
        return n.var + " := " + (is_atomic(v) ? fmt(v, indent, false) : parens(v, indent));
    }
    std::string node(const ast::Init& n, int indent, bool ef) const {
        std::string kw = n.state == InitState::Zero ? "init" : "minit";
        return "let " + n.var + " = " + kw + "(" + n.loc.name + ") in\n" + pad(indent) +
               fmt(*n.body, indent, ef);
    }
    std::string node(const ast::Meas& n, int indent, bool ef) const {
        std::string bases;
        for (std::size_t i = 0; i < n.bases.size(); ++i) {
            if (i) bases += ", ";
            bases += to_char(n.bases[i]);
        }
        return "let " + n.bind + " = meas[" + bases + "](" + join_names(n.args) + ") in\n" +
               pad(indent) + fmt(*n.body, indent, ef);
    }
    std::string node(const ast::MkRef& n, int indent, bool ef) const {
        return "let " + n.var + " = mkref " + fmt(*n.rhs, indent + 1, false) + " in\n" +
               pad(indent) + fmt(*n.body, indent, ef);
    }
    std::string node(const ast::Free& n, int indent, bool ef) const {
        if (n.rest->is<ast::Unit>()) return "free " + n.var;
        return "free " + n.var + ";\n" + pad(indent) + fmt(*n.rest, indent, ef);
    }
    std::string node(const ast::Seq& n, int indent, bool ef) const {
        const Expr& a = *n.first;
        std::string head = is_greedy(a) ? parens(a, indent) : fmt(a, indent, false);
        return head + ";\n" + pad(indent) + fmt(*n.second, indent, ef);
    }
    std::string node(const ast::If& n, int indent, bool ef) const {
        std::string cond = fmt(*n.cond, indent + 1, false);
        const Expr& t = *n.then_branch;
        if (n.else_branch->is<ast::Unit>() && !ef && is_atomic(t)) {
            return "if " + cond + " then " + fmt(t, indent, false);
        }
        return "if " + cond + " then\n" + pad(indent + 1) + fmt(t, indent + 1, true) + "\n" +
               pad(indent) + "else\n" + pad(indent + 1) + fmt(*n.else_branch, indent + 1, ef);
    }
    std::string node(const ast::While& n, int indent, bool ef) const {
        return "while " + fmt(*n.cond, indent + 1, false) + " do\n" + pad(indent + 1) +
               fmt(*n.body, indent + 1, ef);
    }
};

}  // namespace

std::string format_type(const TypeAnnotation& t) {
    switch (t.kind) {
        case TypeAnnotation::Kind::Qbit: return "qbit(" + t.loc.name + ")";
        case TypeAnnotation::Kind::Unit: return "unit";
        case TypeAnnotation::Kind::Bool: return "bool";
        case TypeAnnotation::Kind::Ref: return "ref " + format_type(*t.inner);
    }
    return "?";
}

std::string format_expr(const Expr& e) { return Printer{}.fmt(e, 0, false); }

std::string format_program(const Program& p) {
    std::ostringstream os;
    Printer pr;
    for (const auto& d : p.decls) {
        os << "[" << join_locs(d.loc_params) << "]\n" << d.name << "(";
        for (std::size_t i = 0; i < d.params.size(); ++i) {
            if (i) os << ", ";
            os << d.params[i].name << ": " << format_type(d.params[i].type);
        }
        os << ") {\n  " << pr.fmt(*d.body, 1, false) << "\n}\n\n";
    }
    os << pr.fmt(*p.entry, 0, false) << "\n";
    return os.str();
}

}  // namespace qtl
