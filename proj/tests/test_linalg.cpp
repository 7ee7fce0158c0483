#include "tautrec/io.hpp"
#include "tautrec/linalg.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace tautrec;

namespace {

SparseRow dense_to_sparse(const std::vector<Rat>& v) {
    SparseRow r;
    for (size_t i = 0; i < v.size(); i++)
        if (v[i] != 0) r.push_back({static_cast<int>(i), v[i]});
    return r;
}

std::vector<Rat> sparse_to_dense(const SparseRow& r, int n) {
    std::vector<Rat> v(n, Rat(0));
    for (auto& [c, x] : r) v[c] = x;
    return v;
}

std::vector<std::vector<Rat>> random_matrix(int rows, int cols, int seed) {
    std::mt19937 rng(seed);
    std::vector<std::vector<Rat>> m(rows, std::vector<Rat>(cols, Rat(0)));
    for (auto& row : m)
        for (auto& x : row)
            if (rng() % 3 == 0)
                x = frac(static_cast<long>(rng() % 19) - 9, 1 + static_cast<long>(rng() % 7));
    return m;
}

std::vector<std::vector<Rat>> rref_dense_view(const Rref& rr, int cols) {
    std::vector<std::vector<Rat>> out;
    for (auto& [p, row] : rr.rows()) out.push_back(sparse_to_dense(row, cols));
    return out;
}

} // namespace

TEST_CASE("small frozen reductions") {
    Rref rr(2);
    rr.absorb(dense_to_sparse({Rat(1), Rat(2)}));
    rr.absorb(dense_to_sparse({Rat(2), Rat(4)}));
    CHECK(rr.rank() == 1);
    CHECK(rref_dense_view(rr, 2) == std::vector<std::vector<Rat>>{{Rat(1), Rat(2)}});

    Rref id(3);
    id.absorb(dense_to_sparse({Rat(0), Rat(5), Rat(0)}));
    id.absorb(dense_to_sparse({Rat(3), Rat(0), Rat(0)}));
    id.absorb(dense_to_sparse({Rat(0), Rat(0), frac(-7, 2)}));
    CHECK(id.rank() == 3);
    CHECK(rref_dense_view(id, 3) ==
          std::vector<std::vector<Rat>>{{Rat(1), Rat(0), Rat(0)},
                                        {Rat(0), Rat(1), Rat(0)},
                                        {Rat(0), Rat(0), Rat(1)}});
}

TEST_CASE("random matrices match the dense textbook oracle") {
    for (int seed : {1, 2, 3}) {
        auto m = random_matrix(50, 80, seed);
        Rref rr(80);
        for (auto& row : m) rr.absorb(dense_to_sparse(row));
        auto got = rref_dense_view(rr, 80);
        auto want = oracle::dense_rref(m);
        CHECK(got == want);
    }
}

TEST_CASE("idempotence and row-space preservation") {
    auto m = random_matrix(30, 40, 9);
    Rref rr(40);
    for (auto& row : m) rr.absorb(dense_to_sparse(row));
    // every input row reduces to zero against the result
    for (auto& row : m) CHECK(rr.member(dense_to_sparse(row)));
    // reducing the reduced rows again changes nothing
    Rref rr2(40);
    for (auto& [p, row] : rr.rows()) rr2.absorb(row);
    CHECK(rref_dense_view(rr2, 40) == rref_dense_view(rr, 40));
}

TEST_CASE("determinism across thread counts and row orders") {
    auto m = random_matrix(60, 70, 17);
    auto run = [&](int threads, unsigned shuffle_seed) {
        auto rows = m;
        if (shuffle_seed) {
            std::mt19937 rng(shuffle_seed);
            std::shuffle(rows.begin(), rows.end(), rng);
        }
        Rref rr(70, threads);
        for (auto& row : rows) rr.absorb(dense_to_sparse(row));
        return rref_dense_view(rr, 70);
    };
    auto base = run(1, 0);
    CHECK(run(2, 0) == base);
    CHECK(run(8, 0) == base);
    CHECK(run(1, 5) == base);
    CHECK(run(4, 11) == base);
}

TEST_CASE("membership basics") {
    auto m = random_matrix(10, 12, 23);
    Rref rr(12);
    for (auto& row : m) rr.absorb(dense_to_sparse(row));
    CHECK(rr.member(SparseRow{}));  // zero vector
    // a random combination of rows is a member
    std::vector<Rat> combo(12, Rat(0));
    for (size_t i = 0; i < m.size(); i += 2)
        for (int j = 0; j < 12; j++) combo[j] += frac(static_cast<long>(i) + 1, 3) * m[i][j];
    CHECK(rr.member(dense_to_sparse(combo)));
}

TEST_CASE("checkpoint round-trip") {
    auto m = random_matrix(25, 30, 31);
    Rref rr(30);
    for (auto& row : m) rr.absorb(dense_to_sparse(row));
    json j = rref_to_json(rr);
    Rref back(30);
    rref_from_json(j, back);
    CHECK(rref_dense_view(back, 30) == rref_dense_view(rr, 30));
}
