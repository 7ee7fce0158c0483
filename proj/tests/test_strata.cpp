#include "tautrec/errors.hpp"
#include "tautrec/strata.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace tautrec;

namespace {

StableGraph smooth(int g, int n) {
    StableGraph s;
    s.genus = {g};
    s.leg_vertex.assign(n, 0);
    return s;
}

Code stratum_code(const StableGraph& g, const Decoration& d) {
    auto s = make_stratum(g, d);
    REQUIRE(s.has_value());
    return s->code;
}

} // namespace

TEST_CASE("basis of (1,1,1): kappa_1, psi_1, boundary loop") {
    auto basis = strata_basis(1, 1, 1);
    REQUIRE(basis.size() == 3);
    CHECK(kappa_block_size(basis) == 1);

    StableGraph sm = smooth(1, 1);
    Decoration k = Decoration::empty(sm);
    k.kappa[0] = {1};
    Decoration p = Decoration::empty(sm);
    p.psi_leg[0] = 1;
    StableGraph loop;
    loop.genus = {0};
    loop.leg_vertex = {0};
    loop.edges = {{0, 0}};
    std::set<Code> expect{stratum_code(sm, k), stratum_code(sm, p),
                          stratum_code(loop, Decoration::empty(loop))};
    std::set<Code> got;
    for (auto& s : basis) got.insert(s.code);
    CHECK(got == expect);
}

TEST_CASE("degree-zero basis is the fundamental class") {
    for (int n : {3, 4, 5}) {
        auto basis = strata_basis(0, n, 0);
        REQUIRE(basis.size() == 1);
        CHECK(basis[0].graph.num_edges() == 0);
        CHECK(basis[0].deco.total_degree() == 0);
    }
}

TEST_CASE("basis counts match the brute-force decoration oracle") {
    struct Case {
        int g, n, r;
    };
    for (auto [g, n, r] : std::vector<Case>{{1, 1, 1}, {2, 1, 1}, {2, 1, 2}, {1, 2, 2}, {2, 0, 2}}) {
        CAPTURE(g);
        CAPTURE(n);
        CAPTURE(r);
        auto basis = strata_basis(g, n, r);
        CHECK(static_cast<long>(basis.size()) == oracle::count_decorated_strata(g, n, r));
        // each element is homogeneous of degree r and round-trips its code
        for (auto& s : basis) {
            CHECK(s.degree() == r);
            DecoratedStratum back = stratum_from_code(s.code);
            auto re = make_stratum(back.graph, back.deco);
            REQUIRE(re.has_value());
            CHECK(re->code == s.code);
        }
    }
}

TEST_CASE("basis order puts kappa strata first") {
    auto basis = strata_basis(2, 1, 2);
    int kb = kappa_block_size(basis);
    for (int i = 0; i < static_cast<int>(basis.size()); i++) {
        bool has_kappa = false;
        for (auto& ks : basis[i].deco.kappa)
            if (!ks.empty()) has_kappa = true;
        CHECK(has_kappa == (i < kb));
    }
}

TEST_CASE("canonical form is idempotent and automorphism invariant") {
    StableGraph g;
    g.genus = {1, 1};
    g.leg_vertex = {};
    g.edges = {{0, 1}, {0, 1}};
    // psi on the two half-edges of one vertex; swapping the parallel edges
    // gives the same stored key
    Decoration d1 = Decoration::empty(g);
    d1.psi_edge[0] = {1, 0};
    Decoration d2 = Decoration::empty(g);
    d2.psi_edge[1] = {1, 0};
    CHECK(stratum_code(g, d1) == stratum_code(g, d2));

    // swapping vertex roles moves psi to the other side of each edge
    Decoration d3 = Decoration::empty(g);
    d3.psi_edge[0] = {0, 1};
    CHECK(stratum_code(g, d1) == stratum_code(g, d3));
}

TEST_CASE("dimension-violating decorations canonicalize to zero") {
    StableGraph g = smooth(1, 1);  // dim 1
    Decoration d = Decoration::empty(g);
    d.psi_leg[0] = 2;
    CHECK(!make_stratum(g, d).has_value());
    StrataVector v;
    v.add_stratum(g, d, Rat(5));
    CHECK(v.is_zero());
}

TEST_CASE("pushforward of a fundamental class is the boundary stratum") {
    // two-vertex (2,0) graph, genus-1 slot
    StableGraph outer;
    outer.genus = {1, 1};
    outer.edges = {{0, 1}};
    StableGraph inner = smooth(1, 1);

    StrataVector fund;
    fund.add_stratum(inner, Decoration::empty(inner), Rat(1));
    StrataVector out = pushforward(fund, outer, 0, Decoration::empty(outer));
    REQUIRE(out.coeffs.size() == 1);
    CHECK(out.coeffs.begin()->first == stratum_code(outer, Decoration::empty(outer)));
    CHECK(out.coeffs.begin()->second == 1);
}

TEST_CASE("pushforward transports psi decorations to the fused half-edge") {
    StableGraph outer;
    outer.genus = {1, 1};
    outer.edges = {{0, 1}};
    StableGraph inner = smooth(1, 1);
    Decoration di = Decoration::empty(inner);
    di.psi_leg[0] = 1;
    StrataVector v;
    v.add_stratum(inner, di, Rat(1));
    StrataVector out = pushforward(v, outer, 0, Decoration::empty(outer));

    Decoration expect = Decoration::empty(outer);
    expect.psi_edge[0] = {1, 0};
    REQUIRE(out.coeffs.size() == 1);
    CHECK(out.coeffs.begin()->first == stratum_code(outer, expect));
}

TEST_CASE("pushforward is linear") {
    StableGraph outer;
    outer.genus = {1, 1};
    outer.leg_vertex = {};
    outer.edges = {{0, 1}};
    StableGraph inner = smooth(1, 1);
    Decoration d0 = Decoration::empty(inner);
    Decoration d1 = d0;
    d1.psi_leg[0] = 1;

    std::mt19937 rng(3);
    for (int trial = 0; trial < 4; trial++) {
        Rat a = frac(static_cast<long>(rng() % 7) - 3, 1 + static_cast<long>(rng() % 5));
        Rat b = frac(static_cast<long>(rng() % 9) - 4, 1 + static_cast<long>(rng() % 3));
        StrataVector u, v;
        u.add_stratum(inner, d0, Rat(1));
        v.add_stratum(inner, d1, Rat(1));
        StrataVector lin = u.scaled(a);
        lin += v.scaled(b);
        StrataVector lhs = pushforward(lin, outer, 0, Decoration::empty(outer));
        StrataVector rhs = pushforward(u, outer, 0, Decoration::empty(outer)).scaled(a);
        rhs += pushforward(v, outer, 0, Decoration::empty(outer)).scaled(b);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("pushforward composes across nested slots") {
    // push (1,1) fundamental into one vertex of the (2,0) two-vertex graph,
    // then degenerate the inner part, versus substituting the degenerate
    // inner class directly
    StableGraph outer;
    outer.genus = {1, 1};
    outer.edges = {{0, 1}};

    StableGraph loop;
    loop.genus = {0};
    loop.leg_vertex = {0};
    loop.edges = {{0, 0}};
    StrataVector loop_class;
    loop_class.add_stratum(loop, Decoration::empty(loop), Rat(1));

    StrataVector direct = pushforward(loop_class, outer, 0, Decoration::empty(outer));

    // composite built by hand: genus-0 vertex with loop joined to genus-1
    StableGraph comp;
    comp.genus = {0, 1};
    comp.edges = {{0, 0}, {0, 1}};
    REQUIRE(direct.coeffs.size() == 1);
    CHECK(direct.coeffs.begin()->first == stratum_code(comp, Decoration::empty(comp)));

    // genus/valence mismatch is rejected
    StableGraph sm2 = smooth(2, 1);
    StrataVector wrong;
    wrong.add_stratum(sm2, Decoration::empty(sm2), Rat(1));
    CHECK_THROWS_AS(pushforward(wrong, outer, 0, Decoration::empty(outer)), InvalidInput);
}
