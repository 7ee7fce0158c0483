#include "tautrec/stable_graph.hpp"

#include "tautrec/errors.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace tautrec {

int StableGraph::total_genus() const {
    int s = 0;
    for (int gv : genus) s += gv;
    return s + h1();
}

int StableGraph::valence(int v) const {
    int n = 0;
    for (auto& e : edges) {
        if (e.first == v) n++;
        if (e.second == v) n++;
    }
    for (int lv : leg_vertex)
        if (lv == v) n++;
    return n;
}

bool StableGraph::is_connected() const {
    int V = num_vertices();
    if (V == 0) return false;
    std::vector<char> seen(V, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int cnt = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (auto& e : edges) {
            int u = -1;
            if (e.first == v) u = e.second;
            else if (e.second == v) u = e.first;
            if (u >= 0 && !seen[u]) {
                seen[u] = 1;
                cnt++;
                q.push(u);
            }
        }
    }
    return cnt == V;
}

bool StableGraph::is_stable() const {
    if (!is_connected()) return false;
    for (int v = 0; v < num_vertices(); v++) {
        if (genus[v] < 0) return false;
        if (2 * genus[v] - 2 + valence(v) <= 0) return false;
    }
    for (auto& e : edges)
        if (e.first < 0 || e.first >= num_vertices() || e.second < 0 || e.second >= num_vertices())
            return false;
    for (int lv : leg_vertex)
        if (lv < 0 || lv >= num_vertices()) return false;
    return true;
}

Decoration Decoration::empty(const StableGraph& g) {
    Decoration d;
    d.kappa.assign(g.num_vertices(), {});
    d.psi_edge.assign(g.num_edges(), {0, 0});
    d.psi_leg.assign(g.num_legs(), 0);
    return d;
}

int Decoration::total_degree() const {
    int s = 0;
    for (auto& ks : kappa)
        for (int k : ks) s += k;
    for (auto& pe : psi_edge) s += pe[0] + pe[1];
    for (int p : psi_leg) s += p;
    return s;
}

int Decoration::vertex_degree(const StableGraph& g, int v) const {
    int s = 0;
    for (int k : kappa[v]) s += k;
    for (int e = 0; e < g.num_edges(); e++) {
        if (g.edges[e].first == v) s += psi_edge[e][0];
        if (g.edges[e].second == v) s += psi_edge[e][1];
    }
    for (int l = 0; l < g.num_legs(); l++)
        if (g.leg_vertex[l] == v) s += psi_leg[l];
    return s;
}

namespace {

void push_byte(std::string& s, int v) {
    if (v < 0 || v > 255) throw InternalError("code byte out of range");
    s.push_back(static_cast<char>(static_cast<unsigned char>(v)));
}

struct Searcher {
    const StableGraph& g;
    const Decoration* d;
    int V;
    // per vertex: sorted (marking, leg psi) pairs, sorted kappa, loop psi
    // pairs, adjacency
    std::vector<std::vector<std::pair<int, int>>> marks;
    std::vector<std::vector<int>> kap;
    std::vector<std::vector<std::array<int, 2>>> loops;
    struct Adj {
        int other;
        int psi_here;
        int psi_there;
    };
    std::vector<std::vector<Adj>> adj;

    std::vector<int> pos;     // vertex -> position, -1 unassigned
    std::vector<int> order;   // position -> vertex
    std::string cur;
    std::string best;
    std::vector<int> best_perm;
    long count = 0;

    explicit Searcher(const StableGraph& graph, const Decoration* deco) : g(graph), d(deco) {
        V = g.num_vertices();
        marks.resize(V);
        kap.resize(V);
        loops.resize(V);
        adj.resize(V);
        for (int l = 0; l < g.num_legs(); l++)
            marks[g.leg_vertex[l]].push_back({l + 1, d ? d->psi_leg[l] : 0});
        for (auto& m : marks) std::sort(m.begin(), m.end());
        if (d) {
            for (int v = 0; v < V; v++) {
                kap[v] = d->kappa[v];
                std::sort(kap[v].begin(), kap[v].end());
            }
        }
        for (int e = 0; e < g.num_edges(); e++) {
            auto [a, b] = g.edges[e];
            int pa = d ? d->psi_edge[e][0] : 0;
            int pb = d ? d->psi_edge[e][1] : 0;
            if (a == b) {
                loops[a].push_back({std::min(pa, pb), std::max(pa, pb)});
            } else {
                adj[a].push_back({b, pa, pb});
                adj[b].push_back({a, pb, pa});
            }
        }
        for (auto& ls : loops) std::sort(ls.begin(), ls.end());
        pos.assign(V, -1);
    }

    std::string segment(int v, int level) const {
        std::string s;
        push_byte(s, g.genus[v]);
        push_byte(s, static_cast<int>(kap[v].size()));
        for (int k : kap[v]) push_byte(s, k);
        push_byte(s, static_cast<int>(marks[v].size()));
        for (auto& [m, psi] : marks[v]) {
            push_byte(s, m);
            push_byte(s, psi);
        }
        std::vector<std::array<int, 3>> recs;
        for (auto& lp : loops[v]) recs.push_back({level, lp[0], lp[1]});
        for (auto& a : adj[v])
            if (pos[a.other] >= 0) recs.push_back({pos[a.other], a.psi_here, a.psi_there});
        std::sort(recs.begin(), recs.end());
        push_byte(s, static_cast<int>(recs.size()));
        for (auto& r : recs) {
            push_byte(s, r[0]);
            push_byte(s, r[1]);
            push_byte(s, r[2]);
        }
        return s;
    }

    void run() {
        order.assign(V, -1);
        recurse(0);
    }

    void recurse(int level) {
        if (level == V) {
            if (best.empty() || cur < best) {
                best = cur;
                best_perm = pos;
                count = 1;
            } else if (cur == best) {
                count++;
            }
            return;
        }
        // try candidates in ascending segment order so the first full
        // assignment is already a strong bound
        std::vector<std::pair<std::string, int>> cands;
        for (int v = 0; v < V; v++)
            if (pos[v] < 0) cands.push_back({segment(v, level), v});
        std::sort(cands.begin(), cands.end());
        for (auto& [seg, v] : cands) {
            size_t keep = cur.size();
            cur += seg;
            // prune branches already lexicographically above the best
            bool dead = false;
            if (!best.empty()) {
                int cmp = best.compare(0, cur.size(), cur);
                if (cmp < 0) dead = true;
            }
            if (!dead) {
                pos[v] = level;
                order[level] = v;
                recurse(level + 1);
                pos[v] = -1;
            }
            cur.resize(keep);
        }
    }
};

} // namespace

CanonResult canonize(const StableGraph& g, const Decoration* deco) {
    if (g.num_vertices() == 0) throw InvalidInput("empty graph");
    Searcher s(g, deco);
    s.run();
    CanonResult cr;
    std::string header;
    push_byte(header, g.num_vertices());
    push_byte(header, g.num_legs());
    push_byte(header, g.num_edges());
    cr.code = header + s.best;
    cr.perm = s.best_perm;
    cr.vertex_autos = s.count;
    return cr;
}

Code canonical_code(const StableGraph& g) { return canonize(g, nullptr).code; }

long automorphism_count(const StableGraph& g) {
    CanonResult cr = canonize(g, nullptr);
    long n = cr.vertex_autos;
    // parallel-edge permutations and loop half-edge swaps
    std::map<std::pair<int, int>, long> mult;
    std::map<int, long> loop_cnt;
    for (auto& e : g.edges) {
        if (e.first == e.second) loop_cnt[e.first]++;
        else mult[{std::min(e.first, e.second), std::max(e.first, e.second)}]++;
    }
    auto factorial = [](long k) {
        long f = 1;
        for (long i = 2; i <= k; i++) f *= i;
        return f;
    };
    for (auto& [p, m] : mult) n *= factorial(m);
    for (auto& [v, k] : loop_cnt) {
        n *= factorial(k);
        for (long i = 0; i < k; i++) n *= 2;
    }
    return n;
}

void apply_canonical_labeling(StableGraph& g, Decoration* deco, const CanonResult& cr) {
    Decoration tmp;
    StableGraph ng;
    if (deco) {
        decode_code(cr.code, ng, *deco);
    } else {
        decode_code(cr.code, ng, tmp);
    }
    g = ng;
}

void decode_code(const Code& code, StableGraph& g, Decoration& deco) {
    size_t p = 0;
    auto rd = [&]() -> int {
        if (p >= code.size()) throw InvalidInput("truncated code");
        return static_cast<unsigned char>(code[p++]);
    };
    int V = rd(), L = rd(), E = rd();
    g = StableGraph{};
    g.genus.resize(V);
    g.leg_vertex.assign(L, -1);
    deco = Decoration{};
    deco.kappa.resize(V);
    deco.psi_leg.assign(L, 0);
    for (int i = 0; i < V; i++) {
        g.genus[i] = rd();
        int kc = rd();
        for (int k = 0; k < kc; k++) deco.kappa[i].push_back(rd());
        int lc = rd();
        for (int l = 0; l < lc; l++) {
            int mark = rd();
            int psi = rd();
            if (mark < 1 || mark > L) throw InvalidInput("bad marking in code");
            g.leg_vertex[mark - 1] = i;
            deco.psi_leg[mark - 1] = psi;
        }
        int rc = rd();
        for (int r = 0; r < rc; r++) {
            int j = rd(), px = rd(), py = rd();
            if (j == i) {
                g.edges.push_back({i, i});
                deco.psi_edge.push_back({px, py});
            } else {
                if (j > i) throw InvalidInput("bad edge record in code");
                g.edges.push_back({j, i});
                deco.psi_edge.push_back({py, px});
            }
        }
    }
    if (p != code.size()) throw InvalidInput("trailing bytes in code");
    if (static_cast<int>(g.edges.size()) != E) throw InvalidInput("edge count mismatch in code");
    for (int l = 0; l < L; l++)
        if (g.leg_vertex[l] < 0) throw InvalidInput("missing marking in code");
}

std::string code_to_hex(const Code& c) {
    static const char* digits = "0123456789abcdef";
    std::string h;
    h.reserve(c.size() * 2);
    for (unsigned char b : c) {
        h.push_back(digits[b >> 4]);
        h.push_back(digits[b & 15]);
    }
    return h;
}

Code code_from_hex(const std::string& h) {
    if (h.size() % 2) throw InvalidInput("odd hex length");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw InvalidInput("bad hex digit");
    };
    Code out;
    out.reserve(h.size() / 2);
    for (size_t i = 0; i < h.size(); i += 2)
        out.push_back(static_cast<char>((nib(h[i]) << 4) | nib(h[i + 1])));
    return out;
}

namespace {

StableGraph canonical_copy(const StableGraph& g) {
    StableGraph out;
    Decoration d;
    decode_code(canonize(g, nullptr).code, out, d);
    return out;
}

} // namespace

std::vector<StableGraph> one_step_degenerations(const StableGraph& g) {
    std::map<Code, StableGraph> out;
    int V = g.num_vertices();
    for (int v = 0; v < V; v++) {
        // genus drop + loop
        if (g.genus[v] >= 1) {
            StableGraph h = g;
            h.genus[v]--;
            h.edges.push_back({v, v});
            Code c = canonical_code(h);
            out.emplace(c, canonical_copy(h));
        }
        // vertex split: distribute genus, incident half-edge slots and legs
        struct Slot {
            bool is_leg;
            int idx;   // leg index, or edge index
            int side;  // 0/1 for edge endpoint
        };
        std::vector<Slot> slots;
        for (int l = 0; l < g.num_legs(); l++)
            if (g.leg_vertex[l] == v) slots.push_back({true, l, 0});
        for (int e = 0; e < g.num_edges(); e++) {
            if (g.edges[e].first == v) slots.push_back({false, e, 0});
            if (g.edges[e].second == v) slots.push_back({false, e, 1});
        }
        int S = static_cast<int>(slots.size());
        for (int g1 = 0; g1 <= g.genus[v]; g1++) {
            int g2 = g.genus[v] - g1;
            for (unsigned mask = 0; mask < (1u << S); mask++) {
                int keep = 0;
                for (int s = 0; s < S; s++)
                    if (mask & (1u << s)) keep++;
                int moved = S - keep;
                if (2 * g1 - 2 + keep + 1 <= 0) continue;
                if (2 * g2 - 2 + moved + 1 <= 0) continue;
                StableGraph h = g;
                int w = h.num_vertices();
                h.genus[v] = g1;
                h.genus.push_back(g2);
                for (int s = 0; s < S; s++) {
                    if (mask & (1u << s)) continue;
                    const Slot& sl = slots[s];
                    if (sl.is_leg) {
                        h.leg_vertex[sl.idx] = w;
                    } else if (sl.side == 0) {
                        h.edges[sl.idx].first = w;
                    } else {
                        h.edges[sl.idx].second = w;
                    }
                }
                h.edges.push_back({v, w});
                Code c = canonical_code(h);
                if (!out.count(c)) out.emplace(c, canonical_copy(h));
            }
        }
    }
    std::vector<StableGraph> res;
    for (auto& [c, h] : out) res.push_back(h);
    return res;
}

std::vector<StableGraph> enumerate_stable_graphs(int g, int n) {
    if (2 * g - 2 + n <= 0) throw InvalidInput("unstable (g,n) pair");
    StableGraph smooth;
    smooth.genus = {g};
    smooth.leg_vertex.assign(n, 0);
    std::map<Code, StableGraph> seen;
    std::queue<StableGraph> q;
    seen.emplace(canonical_code(smooth), canonical_copy(smooth));
    q.push(smooth);
    while (!q.empty()) {
        StableGraph cur = q.front();
        q.pop();
        for (auto& h : one_step_degenerations(cur)) {
            Code c = canonical_code(h);
            if (seen.emplace(c, h).second) q.push(h);
        }
    }
    std::vector<StableGraph> out;
    for (auto& [c, h] : seen) out.push_back(h);
    return out;
}

} // namespace tautrec
