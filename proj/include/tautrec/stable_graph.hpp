#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tautrec {

/// Canonical byte encoding of a (possibly decorated) stable graph.
/// Equal codes <=> isomorphic respecting leg labels, vertex genera and
/// decorations. Rendered as lowercase hex at external interfaces.
using Code = std::string;

/// Dual graph of a boundary stratum: vertices carry genus, legs are the
/// labeled markings, edges are the nodes (loops allowed).
struct StableGraph {
    std::vector<int> genus;                      // per vertex
    std::vector<int> leg_vertex;                 // marking i+1 -> vertex id
    std::vector<std::pair<int, int>> edges;      // unordered; (v,v) = loop

    int num_vertices() const { return static_cast<int>(genus.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
    int num_legs() const { return static_cast<int>(leg_vertex.size()); }
    int h1() const { return num_edges() - num_vertices() + 1; }
    int total_genus() const;
    /// Incident half-edges plus legs; a loop contributes 2.
    int valence(int v) const;
    /// dim of the vertex moduli factor, 3g(v)-3+n(v).
    int dim_bound(int v) const { return 3 * genus[v] - 3 + valence(v); }
    bool is_connected() const;
    bool is_stable() const;

    bool operator==(const StableGraph&) const = default;
};

/// kappa monomials per vertex plus psi exponents per half-edge slot and leg.
/// psi_edge[e] = {exponent at edges[e].first side, exponent at .second side}.
struct Decoration {
    std::vector<std::vector<int>> kappa;         // per vertex, sorted indices >= 1
    std::vector<std::array<int, 2>> psi_edge;    // per edge
    std::vector<int> psi_leg;                    // per leg

    static Decoration empty(const StableGraph& g);
    int total_degree() const;
    /// kappa degree + psi degree of slots/legs incident to v.
    int vertex_degree(const StableGraph& g, int v) const;
    bool operator==(const Decoration&) const = default;
};

struct CanonResult {
    Code code;
    std::vector<int> perm;    // perm[v] = canonical position of original vertex v
    long vertex_autos = 1;    // permutations realizing the minimal encoding
};

/// Minimal encoding over all vertex relabelings (legs stay pointwise fixed).
/// Pass deco = nullptr for a bare graph.
CanonResult canonize(const StableGraph& g, const Decoration* deco);

/// Rewrites graph (and decoration, if given) into canonical labeling with
/// canonically sorted edges.
void apply_canonical_labeling(StableGraph& g, Decoration* deco, const CanonResult& cr);

/// Isomorphism-invariant code of the bare graph.
Code canonical_code(const StableGraph& g);

/// Exact order of the automorphism group at the half-edge level: vertex
/// automorphisms combined with parallel-edge permutations and loop
/// half-edge swaps. Legs are fixed pointwise.
long automorphism_count(const StableGraph& g);

/// Decode the byte encoding produced by canonize back into a stratum.
void decode_code(const Code& code, StableGraph& g, Decoration& deco);

std::string code_to_hex(const Code& c);
Code code_from_hex(const std::string& h);

/// All stable graphs of genus g with n legs, one canonical representative
/// per isomorphism class, sorted by code. Throws InvalidInput when
/// 2g-2+n <= 0.
std::vector<StableGraph> enumerate_stable_graphs(int g, int n);

/// Stable graphs reachable from `g` by one vertex split or one
/// genus-to-loop move, deduplicated, canonical labeling, sorted by code.
std::vector<StableGraph> one_step_degenerations(const StableGraph& g);

} // namespace tautrec
