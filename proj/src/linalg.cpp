#include "tautrec/linalg.hpp"

#include "tautrec/errors.hpp"

#include <algorithm>
#include <thread>

namespace tautrec {

SparseRow row_scaled(const SparseRow& r, const Rat& s) {
    SparseRow out;
    if (s == 0) return out;
    out.reserve(r.size());
    for (auto& [c, x] : r) out.push_back({c, x * s});
    return out;
}

SparseRow row_add_scaled(const SparseRow& a, const SparseRow& b, const Rat& s) {
    SparseRow out;
    out.reserve(a.size() + b.size());
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            Rat v = b[j].second * s;
            if (v != 0) out.push_back({b[j].first, v});
            j++;
        } else {
            Rat v = a[i].second + b[j].second * s;
            if (v != 0) out.push_back({a[i].first, v});
            i++;
            j++;
        }
    }
    return out;
}

SparseRow Rref::reduce(const SparseRow& r) const {
    // callers may hand in rows with explicit zeros; drop them up front so
    // the leading entry of the residual is always invertible
    bool has_zero = false;
    for (auto& [c, x] : r)
        if (x == 0) has_zero = true;
    if (has_zero) {
        SparseRow clean;
        for (auto& [c, x] : r)
            if (x != 0) clean.push_back({c, x});
        return reduce(clean);
    }
    // multipliers are just r's entries at pivot columns: pivot rows carry
    // zeros at every other pivot column, so no interaction between steps
    std::vector<std::pair<const SparseRow*, Rat>> combo;
    for (auto& [c, x] : r) {
        auto it = rows_.find(c);
        if (it != rows_.end()) combo.push_back({&it->second, x});
    }
    if (combo.empty()) return r;

    auto accumulate = [](const std::vector<std::pair<const SparseRow*, Rat>>& part) {
        SparseRow acc;
        for (auto& [row, m] : part) acc = row_add_scaled(acc, *row, m);
        return acc;
    };

    SparseRow sum;
    if (nthreads_ <= 1 || combo.size() < 8) {
        sum = accumulate(combo);
    } else {
        int nt = std::min<int>(nthreads_, static_cast<int>(combo.size()));
        std::vector<SparseRow> partial(nt);
        std::vector<std::thread> workers;
        size_t chunk = (combo.size() + nt - 1) / nt;
        for (int t = 0; t < nt; t++) {
            workers.emplace_back([&, t]() {
                size_t lo = std::min(combo.size(), t * chunk);
                size_t hi = std::min(combo.size(), lo + chunk);
                std::vector<std::pair<const SparseRow*, Rat>> part(combo.begin() + lo,
                                                                   combo.begin() + hi);
                partial[t] = accumulate(part);
            });
        }
        for (auto& w : workers) w.join();
        for (auto& p : partial) sum = row_add_scaled(sum, p, Rat(1));
    }
    return row_add_scaled(r, sum, Rat(-1));
}

bool Rref::absorb(const SparseRow& r) {
    SparseRow red = reduce(r);
    if (red.empty()) return false;
    int pivot = red.front().first;
    Rat inv = 1 / red.front().second;
    SparseRow unit = row_scaled(red, inv);
    // back-substitute into existing rows so the echelon stays fully reduced
    for (auto& [c, row] : rows_) {
        Rat coeff(0);
        for (auto& [col, x] : row)
            if (col == pivot) {
                coeff = x;
                break;
            }
        if (coeff != 0) row = row_add_scaled(row, unit, -coeff);
    }
    rows_.emplace(pivot, std::move(unit));
    return true;
}

std::vector<int> Rref::pivots() const {
    std::vector<int> p;
    for (auto& [c, row] : rows_) p.push_back(c);
    return p;
}

BasisIndex BasisIndex::build(int g, int n, int r) {
    BasisIndex bi;
    bi.basis = strata_basis(g, n, r);
    bi.kappa_block = kappa_block_size(bi.basis);
    for (size_t i = 0; i < bi.basis.size(); i++) bi.index.emplace(bi.basis[i].code, static_cast<int>(i));
    return bi;
}

SparseRow BasisIndex::to_row(const StrataVector& v) const {
    SparseRow r;
    for (auto& [c, x] : v.coeffs) {
        auto it = index.find(c);
        if (it == index.end()) throw InvalidInput("stratum code outside basis");
        r.push_back({it->second, x});
    }
    std::sort(r.begin(), r.end(), [](auto& a, auto& b) { return a.first < b.first; });
    return r;
}

StrataVector BasisIndex::to_vector(const SparseRow& r) const {
    StrataVector v;
    for (auto& [c, x] : r) v.add(basis[c].code, x);
    return v;
}

std::vector<StrataVector> kappa_free_relations(const Rref& rref, const BasisIndex& bi) {
    std::vector<StrataVector> out;
    for (auto& [pivot, row] : rref.rows())
        if (pivot >= bi.kappa_block) out.push_back(bi.to_vector(row));
    return out;
}

std::optional<StrataVector> solve_for(const Code& target,
                                      const std::vector<StrataVector>& relations,
                                      const BasisIndex& bi) {
    auto it = bi.index.find(target);
    if (it == bi.index.end()) throw InvalidInput("target stratum outside basis");
    int tcol = it->second;
    // reorder columns so the target leads; the RREF then solves for it
    int N = static_cast<int>(bi.basis.size());
    auto remap = [&](int c) { return c == tcol ? 0 : (c < tcol ? c + 1 : c); };
    Rref rr(N);
    for (auto& rel : relations) {
        SparseRow row = bi.to_row(rel);
        for (auto& [c, x] : row) c = remap(c);
        std::sort(row.begin(), row.end(), [](auto& a, auto& b) { return a.first < b.first; });
        rr.absorb(row);
    }
    auto rowit = rr.rows().find(0);
    if (rowit == rr.rows().end()) return std::nullopt;
    StrataVector out;
    for (auto& [c, x] : rowit->second) {
        int orig = c == 0 ? tcol : (c <= tcol ? c - 1 : c);
        out.add(bi.basis[orig].code, x);
    }
    return out;
}

bool membership(const StrataVector& candidate, const Rref& rref, const BasisIndex& bi) {
    return rref.member(bi.to_row(candidate));
}

} // namespace tautrec
