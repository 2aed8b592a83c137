#include "qtl/parser.hpp"

#include <array>
#include <cctype>
#include <sstream>

namespace qtl {

namespace {

std::string render_message(const Span& span, const std::vector<std::string>& expected,
                           const std::string& found) {
    std::ostringstream os;
    os << to_string(span) << ": expected ";
    if (expected.size() == 1) {
        os << expected.front();
    } else {
        os << "one of ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) os << ", ";
            os << expected[i];
        }
    }
    os << ", found " << found;
    return os.str();
}

constexpr std::array kKeywords = {"let",   "in",   "init", "minit", "free", "meas", "mkref",
                                  "if",    "then", "else", "while", "do",   "true", "false"};

bool is_keyword(std::string_view s) {
    for (const char* k : kKeywords) {
        if (s == k) return true;
    }
    return false;
}

enum class Tok { Ident, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    Span span;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_trivia();
            Span here{line_, col_};
            if (pos_ >= src_.size()) {
                out.push_back({Tok::End, "", here});
                return out;
            }
            char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = pos_;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                    advance();
                }
                out.push_back({Tok::Ident, std::string(src_.substr(start, pos_ - start)), here});
                continue;
            }
            if (c == ':' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
                advance();
                advance();
                out.push_back({Tok::Punct, ":=", here});
                continue;
            }
            if (std::string_view("()[]{},;:=*").find(c) != std::string_view::npos) {
                advance();
                out.push_back({Tok::Punct, std::string(1, c), here});
                continue;
            }
            throw ParseError(here, {"token"}, "'" + std::string(1, c) + "'");
        }
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

std::optional<GateKind> gate_from(std::string_view s) {
    if (s == "X") return GateKind::X;
    if (s == "Z") return GateKind::Z;
    if (s == "H") return GateKind::H;
    if (s == "S") return GateKind::S;
    return std::nullopt;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Program program() {
        Program p;
        while (peek_punct("[")) p.decls.push_back(decl());
        p.entry = expr();
        expect_end();
        return p;
    }

    ExprPtr lone_expr() {
        auto e = expr();
        expect_end();
        return e;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    bool peek_punct(std::string_view p, std::size_t ahead = 0) const {
        const auto& t = peek(ahead);
        return t.kind == Tok::Punct && t.text == p;
    }
    bool peek_kw(std::string_view k) const {
        const auto& t = peek();
        return t.kind == Tok::Ident && t.text == k;
    }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        const auto& t = peek();
        std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(t.span, std::move(expected), found);
    }

    bool accept_punct(std::string_view p) {
        if (!peek_punct(p)) return false;
        ++pos_;
        return true;
    }
    bool accept_kw(std::string_view k) {
        if (!peek_kw(k)) return false;
        ++pos_;
        return true;
    }
    void expect_punct(std::string_view p) {
        if (!accept_punct(p)) fail({"'" + std::string(p) + "'"});
    }
    void expect_kw(std::string_view k) {
        if (!accept_kw(k)) fail({"'" + std::string(k) + "'"});
    }
    void expect_end() {
        if (peek().kind != Tok::End) fail({"end of input"});
    }

    std::string ident(const char* what) {
        const auto& t = peek();
        if (t.kind != Tok::Ident || is_keyword(t.text)) fail({what});
        ++pos_;
        return t.text;
    }

    // `[l0, l1] name(x: qbit(l0), ...) { body }`
    FuncDecl decl() {
        FuncDecl d;
        d.span = peek().span;
        expect_punct("[");
        if (!peek_punct("]")) {
            do {
                d.loc_params.emplace_back(ident("location parameter"));
            } while (accept_punct(","));
        }
        expect_punct("]");
        d.name = ident("function name");
        if (gate_from(d.name)) {
            throw ParseError(d.span, {"function name"}, "gate name '" + d.name + "'");
        }
        expect_punct("(");
        if (!peek_punct(")")) {
            do {
                Param p;
                p.name = ident("parameter name");
                expect_punct(":");
                p.type = type_annotation();
                d.params.push_back(std::move(p));
            } while (accept_punct(","));
        }
        expect_punct(")");
        expect_punct("{");
        d.body = expr();
        expect_punct("}");
        return d;
    }

    TypeAnnotation type_annotation() {
        if (accept_kw("qbit")) {
            expect_punct("(");
            Location l{ident("location")};
            expect_punct(")");
            return TypeAnnotation::qbit(std::move(l));
        }
        if (accept_kw("unit")) return TypeAnnotation::unit();
        if (accept_kw("bool")) return TypeAnnotation::boolean();
        if (accept_kw("ref")) return TypeAnnotation::ref(type_annotation());
        fail({"'qbit'", "'unit'", "'bool'", "'ref'"});
    }

    // Sequence level. Binding forms extend as far right as possible and absorb
    // any trailing `; e` themselves.
    ExprPtr expr() {
        if (peek_kw("let") || peek_kw("free") || peek_kw("if") || peek_kw("while")) {
            return compound();
        }
        auto lhs = simple();
        if (peek_punct(";")) {
            Span span = peek().span;
            ++pos_;
            auto rhs = expr();
            return make_expr(ast::Seq{std::move(lhs), std::move(rhs)}, span);
        }
        return lhs;
    }

    ExprPtr compound() {
        Span span = peek().span;
        if (accept_kw("let")) return let_form(span);
        if (accept_kw("free")) {
            std::string var;
            if (accept_punct("(")) {
                var = ident("variable");
                expect_punct(")");
            } else {
                var = ident("variable");
            }
            ExprPtr rest;
            if (accept_punct(";")) {
                rest = expr();
            } else {
                rest = make_expr(ast::Unit{}, peek().span);
            }
            return make_expr(ast::Free{std::move(var), std::move(rest)}, span);
        }
        if (accept_kw("if")) {
            auto c = expr();
            expect_kw("then");
            auto t = expr();
            ExprPtr e;
            if (accept_kw("else")) {
                e = expr();
            } else {
                e = make_expr(ast::Unit{}, span);
            }
            return make_expr(ast::If{std::move(c), std::move(t), std::move(e)}, span);
        }
        if (accept_kw("while")) {
            auto c = expr();
            expect_kw("do");
            auto b = expr();
            return make_expr(ast::While{std::move(c), std::move(b)}, span);
        }
        fail({"'let'", "'free'", "'if'", "'while'"});
    }

    ExprPtr let_form(Span span) {
        std::string var = ident("variable");
        expect_punct("=");
        if (peek_kw("init") || peek_kw("minit")) {
            InitState st = next().text == "init" ? InitState::Zero : InitState::Magic;
            expect_punct("(");
            Location l{ident("location")};
            expect_punct(")");
            expect_kw("in");
            auto body = expr();
            return make_expr(ast::Init{std::move(l), std::move(var), st, std::move(body)}, span);
        }
        if (accept_kw("meas")) {
            ast::Meas m;
            m.bind = std::move(var);
            Span bases_span = peek().span;
            expect_punct("[");
            do {
                const auto& t = peek();
                if (t.kind == Tok::Ident && t.text == "X") {
                    m.bases.push_back(Basis::X);
                } else if (t.kind == Tok::Ident && t.text == "Z") {
                    m.bases.push_back(Basis::Z);
                } else {
                    fail({"'X'", "'Z'"});
                }
                ++pos_;
            } while (accept_punct(","));
            expect_punct("]");
            expect_punct("(");
            do {
                m.args.push_back(ident("variable"));
            } while (accept_punct(","));
            expect_punct(")");
            if (m.bases.size() > 2) {
                throw ParseError(bases_span, {"one or two bases"},
                                 std::to_string(m.bases.size()) + " bases");
            }
            if (m.bases.size() != m.args.size()) {
                throw ParseError(bases_span, {std::to_string(m.bases.size()) + " arguments"},
                                 std::to_string(m.args.size()) + " arguments");
            }
            expect_kw("in");
            m.body = expr();
            return make_expr(std::move(m), span);
        }
        if (accept_kw("mkref")) {
            auto rhs = expr();
            expect_kw("in");
            auto body = expr();
            return make_expr(ast::MkRef{std::move(var), std::move(rhs), std::move(body)}, span);
        }
        fail({"'init'", "'minit'", "'meas'", "'mkref'"});
    }

    // Assignment or atom; never swallows a trailing `;`.
    ExprPtr simple() {
        if (peek().kind == Tok::Ident && !is_keyword(peek().text) && peek_punct(":=", 1)) {
            Span span = peek().span;
            std::string var = next().text;
            ++pos_;
            ExprPtr value;
            if (peek_kw("let") || peek_kw("free") || peek_kw("if") || peek_kw("while")) {
                value = compound();
            } else {
                value = atom();
            }
            return make_expr(ast::Assign{std::move(var), std::move(value)}, span);
        }
        return atom();
    }

    ExprPtr atom() {
        const Token& t = peek();
        Span span = t.span;
        if (t.kind == Tok::Punct) {
            if (t.text == "(") {
                ++pos_;
                if (accept_punct(")")) return make_expr(ast::Unit{}, span);
                auto inner = expr();
                expect_punct(")");
                return inner;
            }
            if (t.text == "*") {
                ++pos_;
                return make_expr(ast::Deref{atom()}, span);
            }
            fail({"expression"});
        }
        if (t.kind == Tok::Ident) {
            if (t.text == "true" || t.text == "false") {
                ++pos_;
                return make_expr(ast::BoolLit{t.text == "true"}, span);
            }
            if (is_keyword(t.text)) fail({"expression"});
            std::string name = next().text;
            if (peek_punct("[")) return call(std::move(name), span);
            if (peek_punct("(")) {
                if (auto g = gate_from(name)) {
                    ++pos_;
                    std::string var = ident("variable");
                    expect_punct(")");
                    return make_expr(ast::Gate{*g, std::move(var)}, span);
                }
                return call(std::move(name), span);
            }
            return make_expr(ast::Var{std::move(name)}, span);
        }
        fail({"expression"});
    }

    ExprPtr call(std::string func, Span span) {
        ast::Call c;
        c.func = std::move(func);
        if (accept_punct("[")) {
            if (!peek_punct("]")) {
                do {
                    c.loc_args.emplace_back(ident("location"));
                } while (accept_punct(","));
            }
            expect_punct("]");
        }
        expect_punct("(");
        if (!peek_punct(")")) {
            do {
                c.args.push_back(ident("variable"));
            } while (accept_punct(","));
        }
        expect_punct(")");
        return make_expr(std::move(c), span);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

ParseError::ParseError(Span span, std::vector<std::string> expected, const std::string& found)
    : std::runtime_error(render_message(span, expected, found)),
      span_(span),
      expected_(std::move(expected)),
      found_(found) {}

Program parse_program(std::string_view source) {
    return Parser(Lexer(source).run()).program();
}

ExprPtr parse_expr(std::string_view source) { return Parser(Lexer(source).run()).lone_expr(); }

}  // namespace qtl
