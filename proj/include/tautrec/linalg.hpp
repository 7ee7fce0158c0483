#pragma once

#include "tautrec/rational.hpp"
#include "tautrec/strata.hpp"

#include <map>
#include <optional>
#include <vector>

namespace tautrec {

/// Sparse row, strictly increasing column indices, no stored zeros.
using SparseRow = std::vector<std::pair<int, Rat>>;

/// Streaming reduced row echelon form over the rationals. The echelon set
/// is kept fully reduced at all times (each pivot is 1 and the only nonzero
/// in its column), so absorbing a row is a single linear combination
/// against frozen pivots; that combination may be evaluated by several
/// worker threads with bit-identical results.
class Rref {
public:
    explicit Rref(int ncols, int nthreads = 1) : ncols_(ncols), nthreads_(nthreads) {}

    int ncols() const { return ncols_; }
    int rank() const { return static_cast<int>(rows_.size()); }
    void set_threads(int n) { nthreads_ = n < 1 ? 1 : n; }

    /// Residual of r against the current echelon (independent of insertion
    /// history; the echelon is always in RREF state).
    SparseRow reduce(const SparseRow& r) const;

    /// Reduce and, if nonzero, install the new pivot (with back-substitution
    /// into existing rows). Returns true when the rank grew.
    bool absorb(const SparseRow& r);

    bool member(const SparseRow& r) const { return reduce(r).empty(); }

    const std::map<int, SparseRow>& rows() const { return rows_; }

    /// Pivot columns in increasing order.
    std::vector<int> pivots() const;

private:
    int ncols_;
    int nthreads_;
    std::map<int, SparseRow> rows_;  // pivot column -> row
};

SparseRow row_add_scaled(const SparseRow& a, const SparseRow& b, const Rat& s);
SparseRow row_scaled(const SparseRow& r, const Rat& s);

/// Basis-indexed view used to move between StrataVectors and sparse rows.
struct BasisIndex {
    std::vector<DecoratedStratum> basis;
    std::map<Code, int> index;
    int kappa_block = 0;

    static BasisIndex build(int g, int n, int r);
    SparseRow to_row(const StrataVector& v) const;  // throws on unknown code
    StrataVector to_vector(const SparseRow& r) const;
};

/// RREF rows whose support lies entirely in the kappa-free block. With the
/// kappa block ordered first, these are exactly the rows whose pivot sits
/// past the block.
std::vector<StrataVector> kappa_free_relations(const Rref& rref, const BasisIndex& bi);

/// Express `target` through the other strata: returns the relation row
/// normalized to coefficient 1 on target, or nullopt when the relations do
/// not determine it.
std::optional<StrataVector> solve_for(const Code& target,
                                      const std::vector<StrataVector>& relations,
                                      const BasisIndex& bi);

bool membership(const StrataVector& candidate, const Rref& rref, const BasisIndex& bi);

} // namespace tautrec
