#pragma once

#include "tautrec/rational.hpp"
#include "tautrec/stable_graph.hpp"

#include <map>
#include <optional>
#include <vector>

namespace tautrec {

/// A basis element of the strata algebra: stable graph plus decoration,
/// stored in canonical labeling.
struct DecoratedStratum {
    StableGraph graph;
    Decoration deco;
    Code code;

    int degree() const { return graph.num_edges() + deco.total_degree(); }
};

/// Canonicalizes; returns nullopt when a per-vertex dimension bound is
/// violated (such classes vanish in the strata algebra).
std::optional<DecoratedStratum> make_stratum(const StableGraph& g, const Decoration& d);

DecoratedStratum stratum_from_code(const Code& c);

/// Sparse exact-rational combination of decorated strata, keyed by code.
struct StrataVector {
    std::map<Code, Rat> coeffs;

    void add(const Code& c, const Rat& r);
    /// Canonicalize-and-add; silently drops dimension-violating terms.
    void add_stratum(const StableGraph& g, const Decoration& d, const Rat& r);
    bool is_zero() const { return coeffs.empty(); }
    StrataVector& operator+=(const StrataVector& o);
    StrataVector scaled(const Rat& r) const;
    bool operator==(const StrataVector&) const = default;
};

/// All degree-r decorated strata on (g,n), one per isomorphism class.
/// Order: kappa-decorated block first, then kappa-free, each sorted by code.
std::vector<DecoratedStratum> strata_basis(int g, int n, int r);

/// Number of kappa-decorated elements at the front of strata_basis(g,n,r).
int kappa_block_size(const std::vector<DecoratedStratum>& basis);

/// Graph substitution along a gluing map: every decorated graph of `inner`
/// replaces vertex `slot` of `outer`; inner legs fuse with the slot's legs
/// and half-edges (legs first in marking order, then edge slots in edge
/// order), psi exponents on fused pairs add, decorations merge, results are
/// canonicalized with coefficient 1 per substitution.
StrataVector pushforward(const StrataVector& inner, const StableGraph& outer, int slot,
                         const Decoration& outer_deco);

/// Slot list of a vertex: legs (marking order) then edge endpoints
/// (edge index, then side).
struct VertexSlot {
    bool is_leg;
    int idx;   // leg index or edge index
    int side;  // endpoint side for edges
};
std::vector<VertexSlot> vertex_slots(const StableGraph& g, int v);

} // namespace tautrec
