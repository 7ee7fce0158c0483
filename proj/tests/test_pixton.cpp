#include "tautrec/errors.hpp"
#include "tautrec/linalg.hpp"
#include "tautrec/pixton.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace tautrec;

namespace {

Code code_of(const StableGraph& g, const Decoration& d) {
    auto s = make_stratum(g, d);
    REQUIRE(s.has_value());
    return s->code;
}

PixtonInput input(int g, int n, int r, std::vector<int> sigma, std::vector<int> a) {
    PixtonInput in;
    in.g = g;
    in.n = n;
    in.r = r;
    in.sigma = std::move(sigma);
    in.a = std::move(a);
    return in;
}

} // namespace

TEST_CASE("input validation") {
    CHECK_NOTHROW(input(1, 1, 1, {}, {1}).validate());
    CHECK_THROWS_AS(input(1, 1, 1, {}, {2}).validate(), InvalidInput);   // 2 mod 3
    CHECK_THROWS_AS(input(2, 1, 2, {}, {0}).validate(), InvalidInput);   // parity
    CHECK_THROWS_AS(input(1, 1, 1, {2}, {1}).validate(), InvalidInput);  // sigma part
    CHECK_THROWS_AS(input(1, 1, 1, {}, {3}).validate(), InvalidInput);   // bound
    CHECK_THROWS_AS(input(0, 2, 1, {}, {0, 0}).validate(), InvalidInput);
}

TEST_CASE("valid inputs exactly satisfy bound and parity") {
    for (auto [g, n, r] : std::vector<std::array<int, 3>>{{1, 1, 1}, {2, 1, 2}, {0, 4, 1}}) {
        auto ins = valid_inputs(g, n, r);
        for (auto& in : ins) CHECK_NOTHROW(in.validate());
        // grid check: every (sigma,a) not in the list violates a constraint
        long bound = 3 * r - g - 1;
        long count = 0;
        for (auto& in : ins) {
            long tot = 0;
            for (int p : in.sigma) tot += p;
            for (int x : in.a) tot += x;
            CHECK(tot <= bound);
            CHECK((bound - tot) % 2 == 0);
            count++;
        }
        CHECK(count == static_cast<long>(ins.size()));
    }
}

TEST_CASE("hand-expanded relation at (1,1,1) with a=(1)") {
    // direct expansion of the two graphs:
    //   smooth vertex: 60 kappa_1 + 84 psi_1
    //   loop graph (aut 2, 1/2^h1): -(1/2)(1/2) * 24 = -6
    StrataVector r = pixton_relation(input(1, 1, 1, {}, {1}));

    StableGraph sm;
    sm.genus = {1};
    sm.leg_vertex = {0};
    Decoration k = Decoration::empty(sm);
    k.kappa[0] = {1};
    Decoration p = Decoration::empty(sm);
    p.psi_leg[0] = 1;
    StableGraph loop;
    loop.genus = {0};
    loop.leg_vertex = {0};
    loop.edges = {{0, 0}};

    REQUIRE(r.coeffs.size() == 3);
    CHECK(r.coeffs.at(code_of(sm, k)) == 60);
    CHECK(r.coeffs.at(code_of(sm, p)) == 84);
    CHECK(r.coeffs.at(code_of(loop, Decoration::empty(loop))) == -6);
}

TEST_CASE("second (1,1,1) relation and the 1/24 consequence") {
    StrataVector r2 = pixton_relation(input(1, 1, 1, {1}, {0}));
    CHECK(!r2.is_zero());

    BasisIndex bi = BasisIndex::build(1, 1, 1);
    Rref rr(static_cast<int>(bi.basis.size()));
    for (auto& row : relation_set(1, 1, 1)) rr.absorb(bi.to_row(row));
    CHECK(rr.rank() == 2);

    auto kf = kappa_free_relations(rr, bi);
    REQUIRE(kf.size() == 1);
    // psi_1 = (1/24) [loop stratum]
    StableGraph sm;
    sm.genus = {1};
    sm.leg_vertex = {0};
    Decoration p = Decoration::empty(sm);
    p.psi_leg[0] = 1;
    StableGraph loop;
    loop.genus = {0};
    loop.leg_vertex = {0};
    loop.edges = {{0, 0}};
    REQUIRE(kf[0].coeffs.size() == 2);
    CHECK(kf[0].coeffs.at(code_of(sm, p)) == 1);
    CHECK(kf[0].coeffs.at(code_of(loop, Decoration::empty(loop))) == frac(-1, 24));
}

TEST_CASE("all rows are homogeneous and live in the declared basis") {
    BasisIndex bi = BasisIndex::build(1, 2, 2);
    for (auto& row : relation_set(1, 2, 2)) {
        for (auto& [code, c] : row.coeffs) {
            CHECK(bi.index.count(code) == 1);
            CHECK(stratum_from_code(code).degree() == 2);
        }
    }
}

TEST_CASE("classical genus-zero relations on four points") {
    // kappa_1 = sum psi_i - sum boundary, and psi_1 matches any boundary
    // divisor; also two boundary divisors agree in cohomology
    BasisIndex bi = BasisIndex::build(0, 4, 1);
    Rref rr(static_cast<int>(bi.basis.size()));
    for (auto& row : relation_set(0, 4, 1)) rr.absorb(bi.to_row(row));

    StableGraph sm;
    sm.genus = {0};
    sm.leg_vertex = {0, 0, 0, 0};
    Decoration p1 = Decoration::empty(sm);
    p1.psi_leg[0] = 1;

    auto boundary = [&](int partner) {
        StableGraph b;
        b.genus = {0, 0};
        b.leg_vertex = {0, 0, 1, 1};
        b.leg_vertex[partner] = 0;
        for (int l = 1; l < 4; l++)
            if (l != partner) b.leg_vertex[l] = 1;
        b.edges = {{0, 1}};
        return code_of(b, Decoration::empty(b));
    };
    // D(1i|jk), i in {2,3}
    StrataVector cand;
    cand.add(code_of(sm, p1), Rat(1));
    cand.add(boundary(1), Rat(-1));
    CHECK(membership(cand, rr, bi));

    StrataVector keel;
    keel.add(boundary(1), Rat(1));
    keel.add(boundary(2), Rat(-1));
    CHECK(membership(keel, rr, bi));

    StrataVector wrong;
    wrong.add(code_of(sm, p1), Rat(1));
    wrong.add(boundary(1), frac(-1, 2));
    CHECK(!membership(wrong, rr, bi));
}

TEST_CASE("boundary pushforwards stay inside the generated row space") {
    // degeneration consistency on small cases: a (1,1) relation pushed into
    // a vertex of a (2,0) or (1,2) graph is spanned by the row set
    auto check_push = [](int g, int n, int r) {
        BasisIndex bi = BasisIndex::build(g, n, r);
        Rref rr(static_cast<int>(bi.basis.size()));
        for (auto& row : relation_set(g, n, r)) rr.absorb(bi.to_row(row));
        StrataVector inner = pixton_relation(input(1, 1, 1, {}, {1}));
        for (auto& graph : enumerate_stable_graphs(g, n)) {
            for (int v = 0; v < graph.num_vertices(); v++) {
                if (graph.genus[v] != 1) continue;
                auto slots = vertex_slots(graph, v);
                if (slots.size() != 1) continue;
                if (graph.num_edges() + 1 > r) continue;
                StrataVector row = pushforward(inner, graph, v, Decoration::empty(graph));
                if (row.is_zero()) continue;
                CHECK(membership(row, rr, bi));
            }
        }
    };
    check_push(2, 0, 2);
    check_push(1, 2, 2);
}

TEST_CASE("duplicate rows are removed") {
    auto rows = relation_set(1, 1, 1);
    std::set<std::string> keys;
    for (auto& row : rows) {
        std::string k;
        for (auto& [c, x] : row.coeffs) k += code_to_hex(c) + rat_str(x) + ";";
        CHECK(keys.insert(k).second);
    }
}
