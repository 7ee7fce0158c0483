#pragma once

#include "tautrec/series.hpp"
#include "tautrec/strata.hpp"

#include <functional>
#include <vector>

namespace tautrec {

/// Input data of one relation class: codimension r, a partition sigma with
/// no parts 2 mod 3, and one nonnegative integer per leg, none 2 mod 3,
/// subject to |sigma| + sum(a) <= 3r - g - 1 with matching parity.
struct PixtonInput {
    int g = 0;
    int n = 0;
    int r = 0;
    std::vector<int> sigma;  // weakly decreasing parts
    std::vector<int> a;      // per leg

    void validate() const;  // throws InvalidInput
};

/// The relation class R(g,n,r;sigma,a) expanded in the degree-r strata
/// basis of (g,n); includes the 1/|Aut| and 1/2^h1 normalizations.
/// Terms violating per-vertex dimension bounds are dropped.
StrataVector pixton_relation(const PixtonInput& in,
                             KappaVariant variant = KappaVariant::Printed);

/// Deterministic stream of relation rows on (g,n) in codimension r: the
/// direct relations plus, for every boundary graph and vertex, every valid
/// relation on that vertex tensored with every complementary decoration on
/// the rest, pushed forward. Duplicate rows are dropped. Returns the number
/// of rows emitted (after dedup). `start_index` rows are skipped without
/// being rebuilt... they are rebuilt internally but not emitted, so resume
/// cost stays proportional to the full stream.
long for_each_relation_row(int g, int n, int r, KappaVariant variant,
                           const std::function<void(long index, const StrataVector&)>& emit,
                           long start_index = 0);

/// Materialized relation_set (small cases and tests).
std::vector<StrataVector> relation_set(int g, int n, int r,
                                       KappaVariant variant = KappaVariant::Printed);

/// All valid (sigma, a) pairs at (g,n,r), deterministic order.
std::vector<PixtonInput> valid_inputs(int g, int n, int r);

} // namespace tautrec
