#include "tautrec/strata.hpp"

#include "tautrec/errors.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace tautrec {

std::optional<DecoratedStratum> make_stratum(const StableGraph& g, const Decoration& d) {
    for (int v = 0; v < g.num_vertices(); v++)
        if (d.vertex_degree(g, v) > g.dim_bound(v)) return std::nullopt;
    for (auto& ks : d.kappa)
        for (int k : ks)
            if (k < 1) throw InvalidInput("kappa index must be >= 1");
    DecoratedStratum s;
    CanonResult cr = canonize(g, &d);
    s.code = cr.code;
    decode_code(cr.code, s.graph, s.deco);
    return s;
}

DecoratedStratum stratum_from_code(const Code& c) {
    DecoratedStratum s;
    decode_code(c, s.graph, s.deco);
    s.code = c;
    return s;
}

void StrataVector::add(const Code& c, const Rat& r) {
    if (r == 0) return;
    auto it = coeffs.find(c);
    if (it == coeffs.end()) {
        coeffs.emplace(c, r);
    } else {
        it->second += r;
        if (it->second == 0) coeffs.erase(it);
    }
}

void StrataVector::add_stratum(const StableGraph& g, const Decoration& d, const Rat& r) {
    auto s = make_stratum(g, d);
    if (s) add(s->code, r);
}

StrataVector& StrataVector::operator+=(const StrataVector& o) {
    for (auto& [c, r] : o.coeffs) add(c, r);
    return *this;
}

StrataVector StrataVector::scaled(const Rat& r) const {
    StrataVector out;
    if (r == 0) return out;
    for (auto& [c, x] : coeffs) out.coeffs.emplace(c, x * r);
    return out;
}

std::vector<VertexSlot> vertex_slots(const StableGraph& g, int v) {
    std::vector<VertexSlot> slots;
    for (int l = 0; l < g.num_legs(); l++)
        if (g.leg_vertex[l] == v) slots.push_back({true, l, 0});
    for (int e = 0; e < g.num_edges(); e++) {
        if (g.edges[e].first == v) slots.push_back({false, e, 0});
        if (g.edges[e].second == v) slots.push_back({false, e, 1});
    }
    return slots;
}

namespace {

void partitions_of(int n, int max_part, std::vector<int>& cur,
                   const std::function<void(const std::vector<int>&)>& f) {
    if (n == 0) {
        f(cur);
        return;
    }
    for (int p = std::min(n, max_part); p >= 1; p--) {
        cur.push_back(p);
        partitions_of(n - p, p, cur, f);
        cur.pop_back();
    }
}

// all ways to place `deg` psi among the given slots of one vertex
void psi_distributions(const StableGraph& g, const std::vector<VertexSlot>& slots, size_t i,
                       int deg, Decoration& d, const std::function<void()>& f) {
    if (i == slots.size()) {
        if (deg == 0) f();
        return;
    }
    for (int p = 0; p <= deg; p++) {
        auto& sl = slots[i];
        if (sl.is_leg) d.psi_leg[sl.idx] = p;
        else d.psi_edge[sl.idx][sl.side] = p;
        psi_distributions(g, slots, i + 1, deg - p, d, f);
        if (sl.is_leg) d.psi_leg[sl.idx] = 0;
        else d.psi_edge[sl.idx][sl.side] = 0;
    }
}

// enumerate decorations of the given per-vertex degrees over selected slots
void vertex_decorations(const StableGraph& g, const std::vector<int>& vdeg,
                        const std::vector<std::vector<VertexSlot>>& vslots, int v, Decoration& d,
                        const std::function<void()>& f) {
    if (v == g.num_vertices()) {
        f();
        return;
    }
    for (int kd = 0; kd <= vdeg[v]; kd++) {
        int pd = vdeg[v] - kd;
        std::vector<int> cur;
        partitions_of(kd, kd, cur, [&](const std::vector<int>& part) {
            d.kappa[v] = part;
            psi_distributions(g, vslots[v], 0, pd, d,
                              [&]() { vertex_decorations(g, vdeg, vslots, v + 1, d, f); });
            d.kappa[v].clear();
        });
    }
}

void degree_splits(const StableGraph& g, int v, int left, std::vector<int>& vdeg,
                   const std::function<void()>& f) {
    if (v == g.num_vertices()) {
        if (left == 0) f();
        return;
    }
    int cap = std::min(left, g.dim_bound(v));
    for (int dv = 0; dv <= cap; dv++) {
        vdeg[v] = dv;
        degree_splits(g, v + 1, left - dv, vdeg, f);
    }
    vdeg[v] = 0;
}

} // namespace

std::vector<DecoratedStratum> strata_basis(int g, int n, int r) {
    if (2 * g - 2 + n <= 0) throw InvalidInput("unstable (g,n) pair");
    if (r < 0 || r > 3 * g - 3 + n) throw InvalidInput("codimension out of range");
    std::map<Code, DecoratedStratum> seen;
    for (auto& graph : enumerate_stable_graphs(g, n)) {
        int rem = r - graph.num_edges();
        if (rem < 0) continue;
        std::vector<std::vector<VertexSlot>> vslots;
        for (int v = 0; v < graph.num_vertices(); v++) vslots.push_back(vertex_slots(graph, v));
        std::vector<int> vdeg(graph.num_vertices(), 0);
        Decoration d = Decoration::empty(graph);
        degree_splits(graph, 0, rem, vdeg, [&]() {
            vertex_decorations(graph, vdeg, vslots, 0, d, [&]() {
                auto s = make_stratum(graph, d);
                if (s) seen.emplace(s->code, *s);
            });
        });
    }
    std::vector<DecoratedStratum> kap, free;
    for (auto& [c, s] : seen) {
        bool has_kappa = false;
        for (auto& ks : s.deco.kappa)
            if (!ks.empty()) has_kappa = true;
        (has_kappa ? kap : free).push_back(s);
    }
    kap.insert(kap.end(), free.begin(), free.end());
    return kap;
}

int kappa_block_size(const std::vector<DecoratedStratum>& basis) {
    int n = 0;
    for (auto& s : basis) {
        bool has_kappa = false;
        for (auto& ks : s.deco.kappa)
            if (!ks.empty()) has_kappa = true;
        if (has_kappa) n++;
    }
    return n;
}

StrataVector pushforward(const StrataVector& inner, const StableGraph& outer, int slot,
                         const Decoration& outer_deco) {
    std::vector<VertexSlot> slots = vertex_slots(outer, slot);
    StrataVector out;
    for (auto& [code, coeff] : inner.coeffs) {
        DecoratedStratum in = stratum_from_code(code);
        if (in.graph.total_genus() != outer.genus[slot] ||
            in.graph.num_legs() != static_cast<int>(slots.size()))
            throw InvalidInput("pushforward: slot genus/valence mismatch");

        StableGraph comp;
        Decoration deco;
        int Vout = outer.num_vertices();
        // outer vertices keep their ids except `slot`, whose place is taken
        // by the first inner vertex; remaining inner vertices are appended
        std::vector<int> omap(Vout, -1);
        int next = 0;
        for (int v = 0; v < Vout; v++)
            if (v != slot) omap[v] = next++;
        std::vector<int> imap(in.graph.num_vertices());
        for (int w = 0; w < in.graph.num_vertices(); w++) imap[w] = next++;

        comp.genus.resize(next);
        deco.kappa.resize(next);
        for (int v = 0; v < Vout; v++) {
            if (v == slot) continue;
            comp.genus[omap[v]] = outer.genus[v];
            deco.kappa[omap[v]] = outer_deco.kappa[v];
        }
        for (int w = 0; w < in.graph.num_vertices(); w++) {
            comp.genus[imap[w]] = in.graph.genus[w];
            deco.kappa[imap[w]] = in.deco.kappa[w];
        }

        // inner leg k corresponds to slots[k]
        auto inner_vertex_of = [&](int k) { return imap[in.graph.leg_vertex[k]]; };
        auto inner_psi_of = [&](int k) { return in.deco.psi_leg[k]; };
        std::vector<int> slot_of_edge_side(outer.num_edges() * 2, -1);
        for (size_t k = 0; k < slots.size(); k++)
            if (!slots[k].is_leg)
                slot_of_edge_side[slots[k].idx * 2 + slots[k].side] = static_cast<int>(k);

        comp.leg_vertex.assign(outer.num_legs(), -1);
        deco.psi_leg.assign(outer.num_legs(), 0);
        for (size_t k = 0; k < slots.size(); k++) {
            if (slots[k].is_leg) {
                comp.leg_vertex[slots[k].idx] = inner_vertex_of(static_cast<int>(k));
                deco.psi_leg[slots[k].idx] =
                    inner_psi_of(static_cast<int>(k)) + outer_deco.psi_leg[slots[k].idx];
            }
        }
        for (int l = 0; l < outer.num_legs(); l++) {
            if (outer.leg_vertex[l] != slot) {
                comp.leg_vertex[l] = omap[outer.leg_vertex[l]];
                deco.psi_leg[l] = outer_deco.psi_leg[l];
            }
        }

        for (int e = 0; e < outer.num_edges(); e++) {
            auto [a, b] = outer.edges[e];
            int na, nb, pa, pb;
            if (a == slot) {
                int k = slot_of_edge_side[e * 2 + 0];
                na = inner_vertex_of(k);
                pa = inner_psi_of(k) + outer_deco.psi_edge[e][0];
            } else {
                na = omap[a];
                pa = outer_deco.psi_edge[e][0];
            }
            if (b == slot) {
                int k = slot_of_edge_side[e * 2 + 1];
                nb = inner_vertex_of(k);
                pb = inner_psi_of(k) + outer_deco.psi_edge[e][1];
            } else {
                nb = omap[b];
                pb = outer_deco.psi_edge[e][1];
            }
            comp.edges.push_back({na, nb});
            deco.psi_edge.push_back({pa, pb});
        }
        for (int e = 0; e < in.graph.num_edges(); e++) {
            auto [a, b] = in.graph.edges[e];
            comp.edges.push_back({imap[a], imap[b]});
            deco.psi_edge.push_back(in.deco.psi_edge[e]);
        }

        out.add_stratum(comp, deco, coeff);
    }
    return out;
}

} // namespace tautrec
