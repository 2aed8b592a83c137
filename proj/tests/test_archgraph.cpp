#include "doctest.h"
#include "generators.hpp"
#include "qtl/archgraph.hpp"

using namespace qtl;

TEST_CASE("grid names and 4-neighbour edges") {
    ArchGraph g = ArchGraph::grid(3, 2);
    CHECK(g.vertex_count() == 6);
    CHECK(g.edge_count() == 7);  // 2 rows of 2 + 3 columns of 1
    CHECK(g.contains(Location{"c2_1"}));
    CHECK_FALSE(g.contains(Location{"c3_0"}));
    const VertexId a = g.id(Location{"c1_0"});
    CHECK(g.adjacent(a, g.id(Location{"c0_0"})));
    CHECK(g.adjacent(a, g.id(Location{"c1_1"})));
    CHECK_FALSE(g.adjacent(a, g.id(Location{"c0_1"})));
    CHECK_THROWS_AS(g.id(Location{"nope"}), std::out_of_range);
}

TEST_CASE("edge list format") {
    ArchGraph g = ArchGraph::from_edge_list("# path\nv a\nv b\nv c\ne a b\ne c b\n");
    CHECK(g.vertex_count() == 3);
    CHECK(g.edges() == std::vector<std::pair<VertexId, VertexId>>{{0, 1}, {1, 2}});
    CHECK(ArchGraph::from_edge_list(g.to_edge_list()).edges() == g.edges());

    auto kind_of = [](const char* text) {
        try {
            ArchGraph::from_edge_list(text);
        } catch (const FormatError& e) {
            return e.kind();
        }
        FAIL("accepted malformed graph");
        return FormatError::Kind::Syntax;
    };
    CHECK(kind_of("v a\nv a\n") == FormatError::Kind::DuplicateVertex);
    CHECK(kind_of("v a\nv b\ne a b\ne b a\n") == FormatError::Kind::DuplicateEdge);
    CHECK(kind_of("v a\ne a z\n") == FormatError::Kind::UnknownEndpoint);
    CHECK(kind_of("v a\ne a a\n") == FormatError::Kind::SelfLoop);
    CHECK(kind_of("x a\n") == FormatError::Kind::Syntax);
}

TEST_CASE("free sets") {
    ArchGraph g = ArchGraph::grid(2, 2);
    std::vector<Location> occ{Location{"c0_0"}};
    FreeSet f = FreeSet::all_except(g, occ);
    CHECK(f.size() == 3);
    CHECK_FALSE(f.contains(g.id(Location{"c0_0"})));
    f.erase(g.id(Location{"c1_1"}));
    CHECK(f.size() == 2);
    f.insert(g.id(Location{"c1_1"}));
    CHECK(f == FreeSet::all_except(g, occ));
    CHECK(FreeSet::none(g).size() == 0);
    CHECK_THROWS_AS(FreeSet::of(g, std::vector<Location>{Location{"zz"}}), std::out_of_range);
}

TEST_CASE("merge path needs a free interior") {
    ArchGraph g = ArchGraph::from_edge_list("v l1\nv l2\nv l3\nv l4\ne l1 l2\ne l2 l3\ne l3 l4\n");
    FreeSet f = FreeSet::all(g);
    f.erase(0);
    f.erase(2);
    CHECK(merge_path_exists(g, f, Location{"l1"}, Location{"l3"}));
    f.erase(1);
    CHECK_FALSE(merge_path_exists(g, f, Location{"l1"}, Location{"l3"}));
    // adjacent cells need no interior
    CHECK(merge_path_exists(g, FreeSet::none(g), Location{"l1"}, Location{"l2"}));
    CHECK(find_merge_path(g, FreeSet::all(g), 0, 3) == std::vector<VertexId>{0, 1, 2, 3});
}

TEST_CASE("merge path agrees with path enumeration") {
    testing::Rng rng(11);
    for (int trial = 0; trial < 400; ++trial) {
        ArchGraph g = testing::random_graph(rng, 9);
        if (g.vertex_count() < 2) continue;
        FreeSet f(g.vertex_count(), false);
        for (VertexId v = 0; v < static_cast<VertexId>(g.vertex_count()); ++v) {
            if (rng() % 2) f.insert(v);
        }
        for (VertexId a = 0; a < static_cast<VertexId>(g.vertex_count()); ++a) {
            for (VertexId b = a + 1; b < static_cast<VertexId>(g.vertex_count()); ++b) {
                const bool expect = testing::merge_path_brute(g, f, a, b);
                REQUIRE(merge_path_exists(g, f, a, b) == expect);
                const auto path = find_merge_path(g, f, a, b);
                CHECK(path.empty() == !expect);
                if (!path.empty()) {
                    CHECK(path.front() == a);
                    CHECK(path.back() == b);
                    for (std::size_t i = 1; i + 1 < path.size(); ++i) CHECK(f.contains(path[i]));
                    for (std::size_t i = 0; i + 1 < path.size(); ++i) CHECK(g.adjacent(path[i], path[i + 1]));
                }
            }
        }
    }
}
