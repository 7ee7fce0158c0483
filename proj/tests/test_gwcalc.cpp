#include "tautrec/errors.hpp"
#include "tautrec/gwcalc.hpp"
#include "tautrec/pixton.hpp"

#include "support/point_theory.hpp"

#include <doctest.h>

#include <random>

using namespace tautrec;
using namespace tautrec::gw;

#ifndef TAUTREC_DATA_DIR
#define TAUTREC_DATA_DIR "data"
#endif

namespace {

RuleSet rules_g1() {
    RuleSet rs;
    Rule r1;
    r1.genus = 1;
    r1.tpow = 1;
    r1.rhs = single(frac(1, 24), 0, {Slot::w(), Slot::dummy(0, true), Slot::dummy(0, false)});
    rs.by_genus[1] = r1;
    return rs;
}

RuleSet rules_from_files(int max_genus) {
    std::vector<std::string> paths = {std::string(TAUTREC_DATA_DIR) + "/rules/trr_genus0.json",
                                      std::string(TAUTREC_DATA_DIR) + "/rules/trr_genus1.json"};
    if (max_genus >= 2) paths.push_back(std::string(TAUTREC_DATA_DIR) + "/rules/trr_genus2.json");
    if (max_genus >= 3) paths.push_back(std::string(TAUTREC_DATA_DIR) + "/rules/trr_genus3.json");
    return load_rules(paths);
}

StrataVector genus1_relation() {
    StableGraph sm;
    sm.genus = {1};
    sm.leg_vertex = {0};
    Decoration p = Decoration::empty(sm);
    p.psi_leg[0] = 1;
    StableGraph loop;
    loop.genus = {0};
    loop.leg_vertex = {0};
    loop.edges = {{0, 0}};
    StrataVector v;
    v.add_stratum(sm, p, Rat(1));
    v.add_stratum(loop, Decoration::empty(loop), frac(-1, 24));
    return v;
}

} // namespace

TEST_CASE("canonical form: dummy renaming and slot order invariance") {
    std::mt19937 rng(5);
    // <<T(W) g^a>>_1 <<g_a g^b>>_1 <<g_b X X'>>_0-like shapes under random
    // relabelings of pair ids and slot shuffles
    for (int trial = 0; trial < 20; trial++) {
        int ids[3] = {static_cast<int>(rng() % 90), static_cast<int>(90 + rng() % 90),
                      static_cast<int>(180 + rng() % 90)};
        Term t1;
        t1.coeff = Rat(1);
        t1.factors = {
            Factor{1, {Slot::w(1), Slot::dummy(ids[0], true)}},
            Factor{1, {Slot::dummy(ids[0], false), Slot::dummy(ids[1], true)}},
            Factor{0, {Slot::dummy(ids[1], false), Slot::dummy(ids[2], true), Slot::dummy(ids[2], false)}},
        };
        // flip orientations of a pair (eta symmetry) and shuffle slots
        Term t2 = t1;
        for (auto& f : t2.factors) {
            std::shuffle(f.slots.begin(), f.slots.end(), rng);
            for (auto& s : f.slots)
                if (s.kind == Slot::Dummy && s.id == ids[2]) s.up = !s.up;
        }
        std::shuffle(t2.factors.begin(), t2.factors.end(), rng);
        Expr e1 = expr_from_term(t1);
        Expr e2 = expr_from_term(t2);
        CHECK(e1 == e2);
    }
}

TEST_CASE("translate the genus-1 relation") {
    Expr got = translate(genus1_relation());
    Expr expect = single(Rat(1), 1, {Slot::w(1)}) +
                  single(frac(-1, 24), 0,
                         {Slot::w(), Slot::dummy(0, true), Slot::dummy(0, false)});
    CHECK(got == expect);

    // kappa input is rejected
    StableGraph sm;
    sm.genus = {1};
    sm.leg_vertex = {0};
    Decoration k = Decoration::empty(sm);
    k.kappa[0] = {1};
    StrataVector bad;
    bad.add_stratum(sm, k, Rat(1));
    CHECK_THROWS_AS(translate(bad), InvalidInput);
}

TEST_CASE("translate is linear and inverts") {
    StrataVector rel = genus1_relation();
    Expr e = translate(rel.scaled(frac(3, 7)));
    CHECK(e == translate(rel).scaled(frac(3, 7)));
    StrataVector back = translate_inverse(e);
    CHECK(back == rel.scaled(frac(3, 7)));
}

TEST_CASE("differentiate: append plus wrapper corrections") {
    Slot V = Slot::ext(7);
    // plain correlator: only the appended slot
    Expr plain = single(Rat(1), 1, {Slot::dummy(0, true), Slot::dummy(0, false)});
    Expr dplain = differentiate(plain, V);
    Expr expect_plain = single(Rat(1), 1, {Slot::dummy(0, true), Slot::dummy(0, false), V});
    CHECK(dplain == expect_plain);

    // d_V <<T(W)>>_1 = <<T(W) V>>_1 - <<{W o V}>>_1
    Expr tw = single(Rat(1), 1, {Slot::w(1)});
    Expr d = differentiate(tw, V);
    Expr expect = single(Rat(1), 1, {Slot::w(1), V}) +
                  single(Rat(-1), 1, {Slot::prod({Slot::w(), V})});
    CHECK(d == expect);

    // product rule over factors; distinct genera keep the two terms apart
    Expr two = single(Rat(1), 1, {Slot::dummy(0, true)}) *
               single(Rat(1), 2, {Slot::dummy(0, false)});
    Expr dtwo = differentiate(two, V);
    CHECK(dtwo.size() == 2);
}

TEST_CASE("reduce: genus-1 descendant squares vanish") {
    RuleSet rs = rules_g1();
    // <<T^2(W)>>_1 -> (1/24)<<T(W) g g>>_0 -> 0
    Expr e = single(Rat(1), 1, {Slot::w(2)});
    CHECK(reduce(e, rs).is_zero());
    CHECK(reduce(Expr{}, rs).is_zero());
}

TEST_CASE("reduce: derivative identity of the genus-1 relation") {
    RuleSet rs = rules_g1();
    Slot V = Slot::ext(3);
    // <<T(W) V>>_1 reduces to <<{W o V}>>_1 + (1/24)<<W V g g>>_0,
    // with the product then expanded into a three-point factor
    Expr e = single(Rat(1), 1, {Slot::w(1), V});
    Expr red = reduce(e, rs);
    Term bridge;
    bridge.coeff = Rat(1);
    bridge.factors = {Factor{0, {Slot::w(), V, Slot::dummy(0, true)}},
                      Factor{1, {Slot::dummy(0, false)}}};
    Expr expect =
        expr_from_term(bridge) +
        single(frac(1, 24), 0, {Slot::w(), V, Slot::dummy(1, true), Slot::dummy(1, false)});
    CHECK(red == reduce(expect, rs));
    CHECK(red == expect);
}

TEST_CASE("point oracle: known intersection numbers") {
    oracle::TauIntersections tau;
    CHECK(tau.value(0, {0, 0, 0}) == 1);
    CHECK(tau.value(0, {1, 0, 0, 0}) == 1);
    CHECK(tau.value(0, {0, 2, 0, 0, 0}) == 1);
    CHECK(tau.value(1, {1}) == frac(1, 24));
    CHECK(tau.value(1, {0, 2}) == frac(1, 24));
    CHECK(tau.value(2, {4}) == frac(1, 1152));
    CHECK(tau.value(3, {7}) == frac(1, 82944));
    CHECK(tau.value(4, {10}) == frac(1, 7962624));
    CHECK(tau.value(1, {0}) == 0);  // dimension filter
}

TEST_CASE("point oracle: universal identities evaluate to zero") {
    oracle::PointEvaluator ev({2, 3}, 2);
    // genus-0 TRR <<T(W) X Y>>_0 = 0 with X, Y backed by tau_2, tau_3
    {
        Term t;
        t.coeff = Rat(1);
        t.factors = {Factor{0, {Slot::w(1), Slot::dummy(0, true), Slot::dummy(0, false)}}};
        CHECK(ev.eval(expr_from_term(t), 2).is_zero());
    }
    // genus-1 TRR
    for (int w : {0, 2, 3}) {
        Expr e = single(Rat(1), 1, {Slot::w(1)}) +
                 single(frac(-1, 24), 0,
                        {Slot::w(), Slot::dummy(0, true), Slot::dummy(0, false)});
        CHECK(ev.eval(e, w).is_zero());
    }
}

TEST_CASE("point oracle: genus-2 rule file transcription") {
    RuleSet rs = rules_from_files(2);
    REQUIRE(rs.by_genus.count(2) == 1);
    const Rule& r2 = rs.by_genus.at(2);
    Expr lhs = single(Rat(1), 2, {Slot::w(2)});
    oracle::PointEvaluator ev({2, 3}, 2);
    for (int w : {0, 2, 3}) {
        CAPTURE(w);
        auto diff = ev.eval(lhs - r2.rhs, w);
        CHECK(diff.is_zero());
    }
}

TEST_CASE("reduce agrees with the point oracle on derived combinations") {
    RuleSet rs = rules_from_files(2);
    oracle::PointEvaluator ev({2, 3}, 2);
    // reduce preserves value: <<T^4(W)>>_2 vs its normal form
    Expr e = single(Rat(1), 2, {Slot::w(4)});
    Expr red = reduce(e, rs);
    CHECK(!red.is_zero());
    for (int w : {0, 2}) {
        auto a = ev.eval(e, w);
        auto b = ev.eval(red, w);
        CHECK(a == b);
    }
}

TEST_CASE("verify_identity flags perturbed coefficients") {
    RuleSet rs = rules_g1();
    Expr lhs = single(Rat(1), 1, {Slot::w(1)});
    Expr rhs = single(frac(1, 24), 0, {Slot::w(), Slot::dummy(0, true), Slot::dummy(0, false)});
    CHECK(verify_identity(lhs, rhs, rs).ok);
    Expr wrong = single(frac(1, 23), 0, {Slot::w(), Slot::dummy(0, true), Slot::dummy(0, false)});
    auto res = verify_identity(lhs, wrong, rs);
    CHECK(!res.ok);
    CHECK(!res.residual.is_zero());
}

TEST_CASE("confluence: shuffled scan order reaches the same normal form") {
    RuleSet rs = rules_from_files(2);
    Expr e = single(Rat(1), 2, {Slot::w(2), Slot::ext(1)}) +
             single(frac(1, 3), 1, {Slot::w(2), Slot::ext(1), Slot::ext(2)});
    Expr base = reduce(e, rs);
    for (uint64_t seed : {1ull, 7ull, 42ull}) {
        ReduceOptions opts;
        opts.shuffle_seed = seed;
        CHECK(reduce(e, rs, opts) == base);
    }
}

TEST_CASE("wdvv span membership") {
    // basic associativity instance is in the span
    auto wdvv_pair = [](int swap) {
        Term t;
        t.coeff = Rat(1);
        Slot a = Slot::ext(1), b = Slot::ext(2), c = Slot::ext(3), d = Slot::ext(4);
        if (swap) std::swap(b, c);
        t.factors = {Factor{0, {a, b, Slot::dummy(0, true)}},
                     Factor{0, {Slot::dummy(0, false), c, d}}};
        return expr_from_term(t);
    };
    Expr rel = wdvv_pair(0) - wdvv_pair(1);
    CHECK(!rel.is_zero());
    CHECK(wdvv_member(rel));

    Expr lone = single(Rat(1), 0, {Slot::ext(1), Slot::ext(2), Slot::ext(3)});
    CHECK(!wdvv_member(lone));
}

TEST_CASE("json round trip and pretty printing") {
    Term t;
    t.coeff = frac(-3, 4);
    t.factors = {Factor{1, {Slot::w(2), Slot::prod({Slot::dummy(0, true), Slot::w()})}},
                 Factor{1, {Slot::dummy(0, false)}}};
    Expr e = expr_from_term(t);
    json j = expr_to_json(e);
    Expr back = expr_from_json(j);
    CHECK(back == e);
    CHECK(pretty(e).find("T^2(W)") != std::string::npos);
}
