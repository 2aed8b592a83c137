#include "doctest.h"
#include "generators.hpp"
#include "qtl/connectivity.hpp"
#include "qtl/offline_connectivity.hpp"
#include "qtl/parser.hpp"
#include "qtl/typecheck.hpp"

using namespace qtl;

namespace {

ArchGraph path4() {
    return ArchGraph::from_edge_list("v l1\nv l2\nv l3\nv l4\ne l1 l2\ne l2 l3\ne l3 l4\n");
}

Command A(const char* l) { return Command::alloc(Location{l}); }
Command F(const char* l) { return Command::free(Location{l}); }
Command M(const char* a, const char* b) { return Command::merge(Location{a}, Location{b}); }

void require_agree(const ArchGraph& g, const FreeSet& free, const CommandSeq& c) {
    CheckOutcome n = check_naive(g, free, c);
    CheckOutcome f = check_fast(g, free, c);
    REQUIRE(n.accepted == f.accepted);
    if (n.accepted) {
        CHECK(n.final_free == f.final_free);
    } else {
        REQUIRE(n.violation);
        REQUIRE(f.violation);
        CHECK(n.violation->kind == f.violation->kind);
        CHECK(n.violation->atom_index == f.violation->atom_index);
        CHECK(n.violation->endpoints == f.violation->endpoints);
    }
}

}  // namespace

TEST_CASE("worked example reduces to the expected queries") {
    ArchGraph g = path4();
    CommandSeq c{A("l1"), A("l3"), M("l1", "l3")};
    QueryScript s = to_query_script(g, c, FreeSet::all(g));
    CHECK(format_queries(g, s) == "remove l1 l2\nremove l2 l3\nremove l3 l4\nconnected? l2 l2 l2 l4\n");
    CHECK(solve_offline(s) == std::vector<bool>{true});
    CHECK(check_fast(g, FreeSet::all(g), c).accepted);
    CHECK(check_naive(g, FreeSet::all(g), c).accepted);
}

TEST_CASE("adjacent merges produce no query") {
    ArchGraph g = path4();
    QueryScript s = to_query_script(g, CommandSeq{A("l1"), A("l2"), M("l1", "l2")}, FreeSet::all(g));
    CHECK(format_queries(g, s) == "remove l1 l2\nremove l2 l3\n");
}

TEST_CASE("occupied vertices start without their edges") {
    ArchGraph g = path4();
    std::vector<Location> occ{Location{"l2"}};
    QueryScript s = to_query_script(g, CommandSeq{}, FreeSet::all_except(g, occ));
    CHECK(s.initial_edges.size() == 3);
    CHECK(format_queries(g, s) == "remove l1 l2\nremove l2 l3\n");
}

TEST_CASE("naive checker: atoms") {
    ArchGraph g = path4();
    FreeSet all = FreeSet::all(g);

    auto ok = check_naive(g, all, CommandSeq{A("l1"), A("l4"), M("l1", "l4"), F("l1")});
    CHECK(ok.accepted);
    FreeSet expect = all;
    expect.erase(3);
    CHECK(ok.final_free == expect);

    auto dbl = check_naive(g, all, CommandSeq{A("l1"), A("l1")});
    REQUIRE(dbl.violation);
    CHECK(dbl.violation->kind == Violation::Kind::DoubleAlloc);
    CHECK(dbl.violation->atom_index == 1);

    auto blocked = check_naive(g, all, CommandSeq{A("l1"), A("l2"), A("l4"), M("l1", "l4")});
    REQUIRE(blocked.violation);
    CHECK(blocked.violation->kind == Violation::Kind::NoMergePath);
    CHECK(blocked.violation->atom_index == 3);
    CHECK(blocked.violation->endpoints == std::vector<Location>{Location{"l1"}, Location{"l4"}});
    CHECK(describe(*blocked.violation).find("l1 ~ l4") != std::string::npos);
}

TEST_CASE("naive checker: branches and loops") {
    ArchGraph g = path4();
    FreeSet all = FreeSet::all(g);

    // the left arm is checked on its own: its allocation does not block the continuation
    CommandSeq arms{A("l1"), A("l4"), Command::branch({A("l2"), F("l2")}, {}), M("l1", "l4")};
    CHECK(check_naive(g, all, arms).accepted);

    // a failure in the left arm rejects
    CommandSeq bad_left{A("l1"), A("l4"), Command::branch({A("l3"), M("l1", "l4"), F("l3")}, {})};
    auto r = check_naive(g, all, bad_left);
    REQUIRE(r.violation);
    CHECK(r.violation->kind == Violation::Kind::NoMergePath);
    CHECK(r.violation->atom_index == 3);

    // the right arm flows into the continuation
    CommandSeq bad_right{A("l1"), A("l4"), Command::branch({}, {A("l2")}), M("l1", "l4")};
    CHECK_FALSE(check_naive(g, all, bad_right).accepted);

    // loop body must restore the free set
    auto loop = check_naive(g, all, CommandSeq{Command::star({A("l1")})});
    REQUIRE(loop.violation);
    CHECK(loop.violation->kind == Violation::Kind::UnbalancedLoop);
    CHECK(check_naive(g, all, CommandSeq{Command::star({A("l1"), F("l1")})}).accepted);
}

TEST_CASE("fast checker rejects untyped shapes") {
    ArchGraph g = path4();
    FreeSet all = FreeSet::all(g);
    auto free_of_free = check_fast(g, all, CommandSeq{F("l1")});
    REQUIRE(free_of_free.violation);
    CHECK(free_of_free.violation->kind == Violation::Kind::UnbalancedInput);
    auto arms = check_fast(g, all, CommandSeq{Command::branch({A("l1")}, {})});
    REQUIRE(arms.violation);
    CHECK(arms.violation->kind == Violation::Kind::UnbalancedInput);
    auto loop = check_fast(g, all, CommandSeq{Command::star({A("l1")})});
    REQUIRE(loop.violation);
    CHECK(loop.violation->kind == Violation::Kind::UnbalancedInput);
}

TEST_CASE("fast and naive agree on random balanced sequences") {
    testing::Rng rng(101);
    int accepted = 0, rejected = 0;
    for (int i = 0; i < 2000; ++i) {
        ArchGraph g = testing::random_graph(rng, 25);
        CommandSeq c = testing::random_balanced_commands(rng, g, 200);
        require_agree(g, FreeSet::all(g), c);
        (check_naive(g, FreeSet::all(g), c).accepted ? accepted : rejected)++;
    }
    MESSAGE("accepted " << accepted << ", rejected " << rejected);
    CHECK(accepted > 100);
    CHECK(rejected > 100);
}

TEST_CASE("fast and naive agree with occupied cells at the start") {
    testing::Rng rng(102);
    for (int i = 0; i < 300; ++i) {
        ArchGraph g = testing::random_graph(rng, 12);
        // Allocate a prefix, then start both checkers from that state.
        CommandSeq c = testing::random_balanced_commands(rng, g, 60);
        FreeSet start = FreeSet::all(g);
        CommandSeq rest;
        bool prefix = true;
        for (const auto& x : c) {
            const auto* a = x.as<cmd::Alloc<Location>>();
            if (prefix && a) {
                start.erase(g.id(a->loc));
            } else {
                prefix = false;
                rest.push_back(x);
            }
        }
        require_agree(g, start, rest);
    }
}

TEST_CASE("fast and naive agree on typed program traces") {
    testing::Rng rng(103);
    for (int i = 0; i < 300; ++i) {
        auto gp = testing::random_typed_program(rng);
        ArchGraph g = ArchGraph::grid(gp.width, gp.height);
        TypedProgram t = typecheck_program(parse_program(gp.source), g);
        CAPTURE(gp.source);
        require_agree(g, FreeSet::all(g), t.effect);
    }
}

TEST_CASE("offline solver matches recomputation") {
    testing::Rng rng(104);
    for (int i = 0; i < 200; ++i) {
        QueryScript s = testing::random_query_script(rng, 25, 500);
        REQUIRE(solve_offline(s) == testing::bfs_answers(s));
    }
}

TEST_CASE("offline solver rejects inconsistent scripts") {
    QueryScript s;
    s.vertex_count = 3;
    s.initial_edges = {{0, 1}};
    s.queries = {query::RemoveEdge{{1, 2}}};
    CHECK_THROWS_AS(solve_offline(s), std::invalid_argument);
    s.queries = {query::AddEdge{{0, 1}}};
    CHECK_THROWS_AS(solve_offline(s), std::invalid_argument);
    s.queries = {query::RemoveEdge{{0, 1}}, query::RemoveEdge{{0, 1}}};
    CHECK_THROWS_AS(solve_offline(s), std::invalid_argument);
}

TEST_CASE("rollback union find") {
    RollbackUnionFind uf(5);
    auto mark = uf.checkpoint();
    uf.unite(0, 1);
    uf.unite(1, 2);
    uf.unite(0, 2);
    CHECK(uf.connected(0, 2));
    auto inner = uf.checkpoint();
    uf.unite(3, 4);
    CHECK(uf.connected(3, 4));
    uf.rollback(inner);
    CHECK_FALSE(uf.connected(3, 4));
    CHECK(uf.connected(0, 2));
    uf.rollback(mark);
    CHECK_FALSE(uf.connected(0, 1));
}
