#include "tautrec/pixton.hpp"

#include "tautrec/errors.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace tautrec {

namespace {

bool bad_mod3(int x) { return x % 3 == 2; }

int sigma_size(const std::vector<int>& sigma) {
    int s = 0;
    for (int p : sigma) s += p;
    return s;
}

} // namespace

void PixtonInput::validate() const {
    if (2 * g - 2 + n <= 0) throw InvalidInput("unstable (g,n) pair");
    if (r < 0) throw InvalidInput("negative codimension");
    if (static_cast<int>(a.size()) != n) throw InvalidInput("a must have one entry per leg");
    for (int x : a)
        if (x < 0 || bad_mod3(x)) throw InvalidInput("a values must be nonnegative, not 2 mod 3");
    for (size_t i = 0; i < sigma.size(); i++) {
        if (sigma[i] < 1 || bad_mod3(sigma[i]))
            throw InvalidInput("sigma parts must be positive, not 2 mod 3");
        if (i > 0 && sigma[i] > sigma[i - 1]) throw InvalidInput("sigma must be weakly decreasing");
    }
    int tot = sigma_size(sigma);
    for (int x : a) tot += x;
    int bound = 3 * r - g - 1;
    if (tot > bound) throw InvalidInput("|sigma| + sum(a) exceeds 3r - g - 1");
    if (((tot - bound) % 2 + 2) % 2 != 0) throw InvalidInput("parity constraint violated");
}

StrataVector pixton_relation(const PixtonInput& in, KappaVariant variant) {
    in.validate();
    StrataVector out;
    for (auto& graph : enumerate_stable_graphs(in.g, in.n)) {
        int E = graph.num_edges();
        int D = in.r - E;
        if (D < 0) continue;
        int V = graph.num_vertices();
        int npsi = in.n + 2 * E;

        // psi symbol -> vertex, for the per-vertex dimension pruner
        std::vector<int> sym_vertex(npsi);
        for (int l = 0; l < in.n; l++) sym_vertex[l] = graph.leg_vertex[l];
        for (int e = 0; e < E; e++) {
            sym_vertex[in.n + 2 * e + 0] = graph.edges[e].first;
            sym_vertex[in.n + 2 * e + 1] = graph.edges[e].second;
        }
        std::vector<int> bound(V);
        for (int v = 0; v < V; v++) bound[v] = graph.dim_bound(v);
        auto keep = [&](const ZTerm& t) {
            std::vector<int> deg(V, 0);
            for (int s = 0; s < npsi; s++) deg[sym_vertex[s]] += t.psi[s];
            for (int v = 0; v < V; v++) {
                for (int k : t.kappa[v]) deg[v] += k;
                if (deg[v] > bound[v]) return false;
            }
            return true;
        };

        // kappa generating factor: exp of the brace of 1 - Chat_0 times the
        // braces of the sigma parts, converted by the cycle-sum operator
        std::map<std::vector<std::pair<KappaSymbol, int>>, Rat> brace;
        brace[{}] = Rat(1);
        for (auto& [sym, c] : brace_one_minus_chat0(D)) {
            std::map<std::vector<std::pair<KappaSymbol, int>>, Rat> next;
            for (auto& [mono, mc] : brace) {
                int used = 0;
                for (auto& [s, k] : mono) used += s.n * k;
                Rat pw(1);
                Rat factm(1);
                for (int m = 0; used + sym.n * m <= D; m++) {
                    if (m > 0) {
                        pw *= c;
                        factm *= m;
                    }
                    auto mono2 = mono;
                    if (m > 0) mono2.push_back({sym, m});
                    std::sort(mono2.begin(), mono2.end());
                    Rat add = mc * pw / factm;
                    auto it = next.find(mono2);
                    if (it == next.end()) next.emplace(mono2, add);
                    else it->second += add;
                }
            }
            brace = std::move(next);
        }
        for (int part : in.sigma) {
            std::map<std::vector<std::pair<KappaSymbol, int>>, Rat> next;
            auto terms = brace_chat(part, D);
            for (auto& [mono, mc] : brace) {
                int used = 0;
                for (auto& [s, k] : mono) used += s.n * k;
                for (auto& [sym, c] : terms) {
                    if (used + sym.n > D) continue;
                    auto mono2 = mono;
                    bool merged = false;
                    for (auto& [s, k] : mono2)
                        if (s == sym) {
                            k++;
                            merged = true;
                            break;
                        }
                    if (!merged) mono2.push_back({sym, 1});
                    std::sort(mono2.begin(), mono2.end());
                    Rat add = mc * c;
                    auto it = next.find(mono2);
                    if (it == next.end()) next.emplace(mono2, add);
                    else it->second += add;
                }
            }
            brace = std::move(next);
        }

        ZetaPoly kpart(D, npsi, V);
        for (auto& [mono, mc] : brace) {
            std::vector<KappaSymbol> syms;
            for (auto& [s, k] : mono)
                for (int i = 0; i < k; i++) syms.push_back(s);
            ZetaPoly kh = kappa_hat(syms, graph, D, npsi, variant);
            kh.for_each([&](const ZTerm& t, const Rat& c) {
                if (keep(t)) kpart.add_term(t, c * mc);
            });
        }

        ZetaPoly prod = kpart;
        for (int l = 0; l < in.n; l++)
            prod = prod.mul(chat(in.a[l], l, graph.leg_vertex[l], D, npsi, V), keep);
        for (int e = 0; e < E; e++)
            prod = prod.mul(edge_factor(in.n + 2 * e, in.n + 2 * e + 1, graph.edges[e].first,
                                        graph.edges[e].second, D, npsi, V),
                            keep);

        uint32_t target = 0;
        for (int v = 0; v < V; v++)
            if ((graph.genus[v] + 1) % 2 == 1) target |= 1u << v;

        Rat norm = Rat(1, automorphism_count(graph));
        for (int i = 0; i < graph.h1(); i++) norm /= 2;

        prod.extract(D, target, [&](const ZTerm& t, const Rat& c) {
            Decoration d = Decoration::empty(graph);
            d.kappa = t.kappa;
            for (int l = 0; l < in.n; l++) d.psi_leg[l] = t.psi[l];
            for (int e = 0; e < E; e++)
                d.psi_edge[e] = {t.psi[in.n + 2 * e + 0], t.psi[in.n + 2 * e + 1]};
            out.add_stratum(graph, d, c * norm);
        });
    }
    return out;
}

std::vector<PixtonInput> valid_inputs(int g, int n, int r) {
    std::vector<PixtonInput> out;
    int bound = 3 * r - g - 1;
    if (bound < 0) return out;

    // partitions with parts != 2 mod 3
    std::vector<std::vector<int>> sigmas;
    std::vector<int> cur;
    std::function<void(int, int)> sig = [&](int left, int maxp) {
        sigmas.push_back(cur);
        for (int p = std::min(left, maxp); p >= 1; p--) {
            if (bad_mod3(p)) continue;
            cur.push_back(p);
            sig(left - p, p);
            cur.pop_back();
        }
    };
    sig(bound, bound);

    for (auto& sigma : sigmas) {
        int ssum = sigma_size(sigma);
        std::vector<int> a(n, 0);
        std::function<void(int, int)> avals = [&](int i, int left) {
            if (i == n) {
                int tot = ssum;
                for (int x : a) tot += x;
                if ((bound - tot) % 2 == 0) {
                    PixtonInput in;
                    in.g = g;
                    in.n = n;
                    in.r = r;
                    in.sigma = sigma;
                    in.a = a;
                    out.push_back(in);
                }
                return;
            }
            for (int x = 0; x <= left; x++) {
                if (bad_mod3(x)) continue;
                a[i] = x;
                avals(i + 1, left - x);
            }
            a[i] = 0;
        };
        avals(0, bound - ssum);
    }
    std::sort(out.begin(), out.end(), [](const PixtonInput& x, const PixtonInput& y) {
        if (x.sigma != y.sigma) return x.sigma < y.sigma;
        return x.a < y.a;
    });
    return out;
}

namespace {

// decorations of total degree `deg` on everything except vertex v0's side
// of its incident slots (those belong to the inner relation)
void complement_decorations(const StableGraph& g, int v0, int deg,
                            const std::function<void(const Decoration&)>& f) {
    std::vector<std::vector<VertexSlot>> vslots(g.num_vertices());
    for (int v = 0; v < g.num_vertices(); v++) {
        if (v == v0) continue;
        vslots[v] = vertex_slots(g, v);
    }
    Decoration d = Decoration::empty(g);
    std::function<void(int, int)> rec = [&](int v, int left) {
        if (v == g.num_vertices()) {
            if (left == 0) f(d);
            return;
        }
        if (v == v0) {
            rec(v + 1, left);
            return;
        }
        int cap = std::min(left, g.dim_bound(v));
        for (int dv = 0; dv <= cap; dv++) {
            for (int kd = 0; kd <= dv; kd++) {
                int pd = dv - kd;
                std::vector<int> cur;
                std::function<void(int, int)> parts = [&](int leftk, int maxp) {
                    if (leftk == 0) {
                        d.kappa[v] = cur;
                        // psi over this vertex's slots
                        std::function<void(size_t, int)> psis = [&](size_t i, int leftp) {
                            if (i == vslots[v].size()) {
                                if (leftp == 0) rec(v + 1, left - dv);
                                return;
                            }
                            auto& sl = vslots[v][i];
                            for (int p = 0; p <= leftp; p++) {
                                if (sl.is_leg) d.psi_leg[sl.idx] = p;
                                else d.psi_edge[sl.idx][sl.side] = p;
                                psis(i + 1, leftp - p);
                            }
                            if (sl.is_leg) d.psi_leg[sl.idx] = 0;
                            else d.psi_edge[sl.idx][sl.side] = 0;
                        };
                        psis(0, pd);
                        d.kappa[v].clear();
                        return;
                    }
                    for (int p = std::min(leftk, maxp); p >= 1; p--) {
                        cur.push_back(p);
                        parts(leftk - p, p);
                        cur.pop_back();
                    }
                };
                parts(kd, kd);
            }
        }
    };
    rec(0, deg);
}

} // namespace

long for_each_relation_row(int g, int n, int r, KappaVariant variant,
                           const std::function<void(long, const StrataVector&)>& emit,
                           long start_index) {
    std::map<std::string, StrataVector> inner_memo;
    std::set<std::string> seen_rows;
    long index = 0;

    auto row_key = [](const StrataVector& v) {
        std::string k;
        for (auto& [c, x] : v.coeffs) {
            k += c;
            k += '/';
            k += rat_str(x);
            k += ';';
        }
        return k;
    };
    auto handle = [&](const StrataVector& row) {
        if (row.is_zero()) return;
        if (!seen_rows.insert(row_key(row)).second) return;
        if (index >= start_index) emit(index, row);
        index++;
    };

    for (auto& graph : enumerate_stable_graphs(g, n)) {
        int rem_total = r - graph.num_edges();
        if (rem_total < 0) continue;
        for (int v0 = 0; v0 < graph.num_vertices(); v0++) {
            int g0 = graph.genus[v0];
            int n0 = static_cast<int>(vertex_slots(graph, v0).size());
            if (2 * g0 - 2 + n0 <= 0) throw InternalError("unstable vertex in stable graph");
            int dim0 = 3 * g0 - 3 + n0;
            for (int d = 1; d <= std::min(rem_total, dim0); d++) {
                for (auto& in : valid_inputs(g0, n0, d)) {
                    std::string memo_key;
                    {
                        memo_key = std::to_string(g0) + "," + std::to_string(n0) + "," +
                                   std::to_string(d) + ";";
                        for (int p : in.sigma) memo_key += std::to_string(p) + ",";
                        memo_key += ";";
                        for (int x : in.a) memo_key += std::to_string(x) + ",";
                    }
                    auto it = inner_memo.find(memo_key);
                    if (it == inner_memo.end())
                        it = inner_memo.emplace(memo_key, pixton_relation(in, variant)).first;
                    const StrataVector& inner = it->second;
                    if (inner.is_zero()) continue;
                    if (graph.num_edges() == 0) {
                        // smooth graph: the relation itself
                        if (d == r) handle(inner);
                        continue;
                    }
                    complement_decorations(graph, v0, rem_total - d, [&](const Decoration& od) {
                        handle(pushforward(inner, graph, v0, od));
                    });
                }
            }
        }
    }
    return index;
}

std::vector<StrataVector> relation_set(int g, int n, int r, KappaVariant variant) {
    std::vector<StrataVector> rows;
    for_each_relation_row(g, n, r, variant,
                          [&](long, const StrataVector& row) { rows.push_back(row); });
    return rows;
}

} // namespace tautrec
