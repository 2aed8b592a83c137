#include <fstream>
#include <optional>
#include <sstream>

#include "doctest.h"
#include "generators.hpp"
#include "qtl/parser.hpp"
#include "qtl/typecheck.hpp"

using namespace qtl;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ArchGraph path4() {
    return ArchGraph::from_edge_list("v l1\nv l2\nv l3\nv l4\ne l1 l2\ne l2 l3\ne l3 l4\n");
}

TypedProgram check(const std::string& src, const ArchGraph& g) { return typecheck_program(parse_program(src), g); }

TypeError::Kind error_kind(const std::string& src, const ArchGraph& g) {
    try {
        check(src, g);
    } catch (const TypeError& e) {
        return e.kind();
    }
    FAIL("program was accepted: " << src);
    return TypeError::Kind::TypeMismatch;
}

Command A(const char* l) { return Command::alloc(Location{l}); }
Command F(const char* l) { return Command::free(Location{l}); }
Command M(const char* a, const char* b) { return Command::merge(Location{a}, Location{b}); }

}  // namespace

TEST_CASE("worked example emits alloc then a branch") {
    TypedProgram t = check(slurp(QTL_PROGRAMS_DIR "/ser_example.qtl"), path4());
    CommandSeq expect{A("l1"), Command::branch({A("l2")}, {A("l2"), M("l1", "l2")})};
    CHECK(t.effect == expect);
    CHECK(t.type == Type::unit());
}

TEST_CASE("basic forms") {
    ArchGraph g = path4();
    CHECK(check("()", g).effect.empty());
    CHECK(check("let a = init(l1) in H(a); free a", g).effect == CommandSeq{A("l1"), F("l1")});
    CHECK(check("let a = minit(l3) in free a", g).effect == CommandSeq{A("l3"), F("l3")});
    // single-qubit measurement needs no routing
    auto m1 = check("let a = init(l1) in let b = meas[Z](a) in free a; b", g);
    CHECK(m1.effect == CommandSeq{A("l1"), F("l1")});
    CHECK(m1.type == Type::boolean());
    auto m2 = check("let a = init(l1) in let b = init(l4) in let c = meas[X, Z](b, a) in c", g);
    CHECK(m2.effect == CommandSeq{A("l1"), A("l4"), M("l4", "l1")});
    CHECK(check("let r = mkref true in let s = mkref r in **s", g).type == Type::boolean());
    CHECK(check("while true do ()", g).effect == CommandSeq{Command::star({})});
}

TEST_CASE("if and while effects") {
    ArchGraph g = path4();
    auto i = check("let a = init(l1) in (if true then (let b = init(l2) in free b; ()) else ()); free a", g);
    CHECK(i.effect == CommandSeq{A("l1"), Command::branch({A("l2"), F("l2")}, {}), F("l1")});

    // guard effect comes before the loop and once more after it
    auto w = check(
        "let a = init(l1) in let r = mkref true in "
        "(while (let q = init(l2) in let m = meas[Z](q) in free q; *r) do (H(a); r := false)); free a",
        g);
    CommandSeq guard{A("l2"), F("l2")};
    CommandSeq expect{A("l1"), Command::star(guard), A("l2"), F("l2"), F("l1")};
    CHECK(w.effect == expect);
}

TEST_CASE("type errors") {
    ArchGraph g = path4();
    using K = TypeError::Kind;
    CHECK(error_kind("X(q)", g) == K::UnboundVariable);
    CHECK(error_kind("let a = init(l1) in let b = init(l1) in ()", g) == K::LocationNotFree);
    CHECK(error_kind("let a = init(zz) in ()", g) == K::LocationNotFree);
    CHECK(error_kind("let a = init(l1) in if true then free a else ()", g) == K::EnvJoinMismatch);
    CHECK(error_kind("let r = mkref true in while *r do (let a = init(l1) in r := false)", g) ==
          K::WhileEnvMismatch);
    CHECK(error_kind("let a = init(l1) in let r = mkref a in ()", g) == K::RefContainsQubit);
    CHECK(error_kind("let a = init(l1) in let m = meas[X,Z](a, a) in ()", g) == K::LocationInUse);
    CHECK(error_kind("let a = init(l1) in if a then () else ()", g) == K::TypeMismatch);
    CHECK(error_kind("let r = mkref true in r := ()", g) == K::TypeMismatch);
    CHECK(error_kind("f[l1](a)", g) == K::UnboundFunction);
    CHECK(error_kind("let a = init(l1) in free a; free a", g) == K::UnboundVariable);
    CHECK(error_kind("[l]\nf(a: qbit(l)) { () }\n[l]\nf(a: qbit(l)) { () }\n()", g) == K::DuplicateName);
    CHECK(error_kind("[l]\nf(a: qbit(l)) { g[l](a) }\n[l]\ng(a: qbit(l)) { f[l](a) }\n()", g) ==
          K::RecursiveFunction);
    CHECK(error_kind("[l]\nf(a: qbit(l)) { () }\nlet a = init(l1) in f[l1](a, a)", g) == K::ArityMismatch);
    CHECK(error_kind("[l]\nf(a: qbit(l)) { () }\nlet a = init(l1) in f[l2](a)", g) == K::TypeMismatch);
}

TEST_CASE("errors point at the offending expression") {
    try {
        check("let a = init(l1) in\nlet b = init(l1) in ()", path4());
        FAIL("accepted");
    } catch (const TypeError& e) {
        CHECK(e.span().line == 2);
        CHECK(std::string(e.what()).find("l1") != std::string::npos);
    }
}

TEST_CASE("shadowing a qubit leaks its location") {
    auto t = check("let a = init(l1) in let a = init(l2) in free a", path4());
    CHECK(t.effect == CommandSeq{A("l1"), A("l2"), F("l2")});
    CHECK_THROWS_AS(check("let a = init(l1) in let a = init(l2) in free a; let c = init(l1) in ()", path4()),
                    TypeError);
}

TEST_CASE("cx declaration type") {
    Program p = parse_program(slurp(QTL_PROGRAMS_DIR "/cx.qtl"));
    FuncTypeEnv theta = check_decls(p.decls);
    const FuncType& ft = theta.at("cx");
    CHECK(ft.internal_locs == std::vector<Location>{Location{"l2"}});
    CommandSeq none;
    CommandSeq expect{A("l2"),  M("l2", "l1"), Command::branch(none, none), M("l0", "l2"),
                      Command::branch(none, none), Command::branch(none, none), F("l2")};
    CHECK(ft.effect == expect);
    CHECK(ft.result_type == Type::unit());

    // instantiate at a call site
    ArchGraph g = ArchGraph::grid(3, 1);
    TypedProgram t = typecheck_program(p, g);
    CommandSeq call{A("c1_0"),  M("c1_0", "c2_0"), Command::branch(none, none), M("c0_0", "c1_0"),
                    Command::branch(none, none), Command::branch(none, none), F("c1_0")};
    CommandSeq whole{A("c0_0"), A("c2_0")};
    whole.insert(whole.end(), call.begin(), call.end());
    CHECK(t.effect == whole);
}

TEST_CASE("call instantiation checks its ancilla is free") {
    const std::string src = std::string(testing::kCxDecl) +
                            "let a = init(c0_0) in let b = init(c1_0) in let c = init(c2_0) in "
                            "cx[c0_0, c1_0, c2_0](a, b)";
    CHECK_THROWS_AS(check(src, ArchGraph::grid(3, 1)), TypeError);
}

TEST_CASE("env_join and env_weakens_to") {
    TypeEnv a, b;
    a.add_free(Location{"l1"});
    b.add_free(Location{"l1"});
    a.bind("x", Type::boolean());
    a.bind("y", Type::unit());
    b.bind("x", Type::boolean());
    TypeEnv j = env_join(a, b);
    CHECK(j.lookup("x"));
    CHECK_FALSE(j.lookup("y"));
    CHECK(env_weakens_to(a, j));
    CHECK(env_weakens_to(b, j));
    CHECK_FALSE(env_weakens_to(j, a));

    b.add_free(Location{"l2"});
    CHECK_THROWS_AS(env_join(a, b), TypeError);
    CHECK_FALSE(env_weakens_to(b, j));
}

TEST_CASE("generated programs are well typed") {
    testing::Rng rng(21);
    int with_branch = 0, with_loop = 0, with_call = 0;
    for (int i = 0; i < 400; ++i) {
        testing::ProgramOptions opt;
        opt.reachable = i % 3 == 0;
        auto gp = testing::random_typed_program(rng, opt);
        CAPTURE(gp.source);
        ArchGraph g = ArchGraph::grid(gp.width, gp.height);
        std::optional<TypedProgram> t;
        REQUIRE_NOTHROW(t.emplace(check(gp.source, g)));
        const std::string dump = format_commands(t->effect);
        with_branch += dump.find("branch{") != std::string::npos;
        with_loop += dump.find("star{") != std::string::npos;
        with_call += gp.source.find("cx[") != std::string::npos;
    }
    CHECK(with_branch > 20);
    CHECK(with_loop > 10);
    CHECK(with_call > 10);
}
