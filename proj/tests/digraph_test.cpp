#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"

using Catch::Approx;

TEST_CASE("build_digraph validates and normalizes") {
    auto g = fm::build_digraph<double>(2, {});
    CHECK(g.order() == 2);
    CHECK(g.arcs().empty());

    auto cyc = fm::build_digraph<double>(2, {{2, 1, 1.0}, {1, 2, 1.0}});
    REQUIRE(cyc.arcs().size() == 2);
    CHECK(cyc.arcs()[0].tail == 1); // sorted (tail, head)
    CHECK(cyc.arcs()[1].tail == 2);

    auto code_of = [](auto fn) {
        try {
            fn();
        } catch (const fm::error& e) {
            return e.code();
        }
        return fm::errc::parse_error;
    };
    CHECK(code_of([] { fm::build_digraph<double>(2, {{1, 2, 1.0}, {1, 2, 2.0}}); }) ==
          fm::errc::duplicate_arc);
    CHECK(code_of([] { fm::build_digraph<double>(2, {{1, 1, 1.0}}); }) == fm::errc::loop_arc);
    CHECK(code_of([] { fm::build_digraph<double>(2, {{1, 2, 0.0}}); }) ==
          fm::errc::nonpositive_weight);
    CHECK(code_of([] { fm::build_digraph<double>(2, {{1, 2, -0.5}}); }) ==
          fm::errc::nonpositive_weight);
    CHECK(code_of([] { fm::build_digraph<double>(2, {{1, 3, 1.0}}); }) ==
          fm::errc::vertex_out_of_range);
    CHECK(code_of([] { fm::build_digraph<double>(1, {}); }) == fm::errc::vertex_out_of_range);
}

TEST_CASE("kirchhoff matrix of the basic digraphs") {
    auto L = fm::kirchhoff(two_cycle());
    CHECK(L(0, 0) == 1.0);
    CHECK(L(0, 1) == -1.0);
    CHECK(L(1, 0) == -1.0);
    CHECK(L(1, 1) == 1.0);

    auto Ls = fm::kirchhoff(single_arc(2.5));
    CHECK(Ls(0, 0) == 0.0);
    CHECK(Ls(0, 1) == 0.0);
    CHECK(Ls(1, 0) == -2.5);
    CHECK(Ls(1, 1) == 2.5); // diagonal carries the weight entering the vertex

    auto Lp = fm::kirchhoff(path3());
    CHECK(Lp(0, 0) == 0.0);
    CHECK(Lp(1, 0) == -1.0);
    CHECK(Lp(1, 1) == 1.0);
    CHECK(Lp(2, 1) == -1.0);
    CHECK(Lp(2, 2) == 1.0);
}

TEST_CASE("kirchhoff row sums vanish") {
    std::mt19937_64 rng(7001);
    for (int trial = 0; trial < 100; ++trial) {
        auto g = random_digraph(rng);
        auto L = fm::kirchhoff(g);
        for (std::size_t i = 0; i < L.rows(); ++i) {
            double s = 0;
            for (std::size_t j = 0; j < L.cols(); ++j) s += L(i, j);
            CHECK(std::abs(s) <= 1e-12 * std::max(1.0, L(i, i)));
        }
    }
    // exact mode: identically zero
    std::mt19937_64 rng2(7002);
    for (int trial = 0; trial < 50; ++trial) {
        auto g = random_digraph_exact(rng2);
        auto L = fm::kirchhoff(g);
        for (std::size_t i = 0; i < L.rows(); ++i) {
            fm::rational s(0);
            for (std::size_t j = 0; j < L.cols(); ++j) s += L(i, j);
            CHECK(s == 0);
        }
    }
}

TEST_CASE("reachable") {
    auto g = path3();
    CHECK(fm::reachable(g, 1) == std::set<int>{1, 2, 3});
    CHECK(fm::reachable(g, 3) == std::set<int>{3});
    CHECK(fm::reachable(fm::build_digraph<double>(2, {}), 1) == std::set<int>{1});
    CHECK_THROWS_AS(fm::reachable(g, 4), fm::error);
}

TEST_CASE("decompose on the basic digraphs") {
    auto d = fm::decompose(two_cycle());
    REQUIRE(d.strong_components.size() == 1);
    CHECK(d.knots == std::vector<std::vector<int>>{{1, 2}});
    CHECK(d.forest_dimension == 1); // strong digraph

    auto e = fm::decompose(fm::build_digraph<double>(3, {}));
    CHECK(e.knots.size() == 3);
    CHECK(e.forest_dimension == 3);
    CHECK(e.knot_union == std::vector<int>{1, 2, 3});
}

TEST_CASE("decompose on the 13-vertex fixture") {
    auto g = load_fixture_digraph("knots13.digraph");
    auto d = fm::decompose(g);
    std::vector<std::vector<int>> comps = {{1, 5, 9}, {2, 8, 12}, {3, 6, 10}, {4, 7, 11, 13}};
    CHECK(d.strong_components == comps);
    CHECK(d.knots == std::vector<std::vector<int>>{{3, 6, 10}, {4, 7, 11, 13}});
    CHECK(d.forest_dimension == 2);
    CHECK(d.knot_union == std::vector<int>{3, 4, 6, 7, 10, 11, 13});
    CHECK(d.k_plus[0] == std::vector<int>{3, 6, 10});
    CHECK(d.k_plus[1] == std::vector<int>{2, 4, 7, 8, 11, 12, 13});
}

TEST_CASE("forest dimension bounds and knot definition hold on random digraphs") {
    std::mt19937_64 rng(7003);
    for (int trial = 0; trial < 120; ++trial) {
        auto g = random_digraph(rng);
        auto d = fm::decompose(g);
        const int v = d.forest_dimension;
        CHECK(v >= weak_component_count(g));
        CHECK(v <= static_cast<int>(d.strong_components.size()));
        CHECK(1 <= v);
        CHECK(v <= g.order());

        // every knot: mutually reachable, no arc entering from outside
        for (const auto& knot : d.knots) {
            std::set<int> kset(knot.begin(), knot.end());
            for (int a : knot) {
                auto r = fm::reachable(g, a);
                for (int b : knot) CHECK(r.count(b) == 1);
            }
            for (const auto& a : g.arcs())
                CHECK(!(kset.count(a.head) && !kset.count(a.tail)));
        }

        // K_i^+ contains K_i and the K_i^+ are pairwise disjoint
        std::set<int> seen;
        for (std::size_t i = 0; i < d.knots.size(); ++i) {
            std::set<int> kp(d.k_plus[i].begin(), d.k_plus[i].end());
            for (int a : d.knots[i]) CHECK(kp.count(a) == 1);
            for (int a : d.k_plus[i]) {
                CHECK(seen.count(a) == 0);
                seen.insert(a);
            }
        }
    }
}

TEST_CASE("knots of a circuit-free digraph are the undominated singletons") {
    std::mt19937_64 rng(7004);
    std::uniform_real_distribution<double> coin(0.0, 1.0), wd(0.1, 2.0);
    for (int trial = 0; trial < 60; ++trial) {
        std::uniform_int_distribution<int> nd(2, 7);
        const int n = nd(rng);
        std::vector<fm::arc<double>> arcs;
        for (int t = 1; t <= n; ++t)
            for (int h = t + 1; h <= n; ++h) // t < h: acyclic
                if (coin(rng) < 0.4) arcs.push_back({t, h, wd(rng)});
        fm::digraph<double> g(n, std::move(arcs));
        auto d = fm::decompose(g);
        std::vector<std::vector<int>> expected;
        for (int v = 1; v <= n; ++v)
            if (g.in_degree(v) == 0) expected.push_back({v});
        CHECK(d.knots == expected);
    }
}

TEST_CASE("restriction renumbers consistently") {
    auto g = load_fixture_digraph("knots13.digraph");
    auto [h, ids] = g.restriction({3, 6, 10});
    CHECK(h.order() == 3);
    CHECK(ids == std::vector<int>{3, 6, 10});
    // arcs 6->3 (1.7), 3->10 (1.67), 10->6 (1) become 2->1, 1->3, 3->2
    CHECK(h.weight(2, 1) == 1.7);
    CHECK(h.weight(1, 3) == 1.67);
    CHECK(h.weight(3, 2) == 1.0);
    CHECK(h.arcs().size() == 3);
}
