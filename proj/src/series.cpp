#include "tautrec/series.hpp"

#include "tautrec/errors.hpp"

#include <algorithm>
#include <map>

namespace tautrec {

std::string ZetaPoly::key(const ZTerm& t) const {
    std::string k;
    k.push_back(static_cast<char>(t.t));
    for (int i = 0; i < 4; i++) k.push_back(static_cast<char>((t.zeta >> (8 * i)) & 0xff));
    for (int i = 0; i < npsi_; i++) k.push_back(static_cast<char>(i < (int)t.psi.size() ? t.psi[i] : 0));
    for (int v = 0; v < nvert_; v++) {
        const auto& ks = v < (int)t.kappa.size() ? t.kappa[v] : std::vector<int>{};
        k.push_back(static_cast<char>(ks.size()));
        for (int x : ks) k.push_back(static_cast<char>(x));
    }
    return k;
}

ZTerm ZetaPoly::unkey(const std::string& k) const {
    ZTerm t;
    size_t p = 0;
    auto rd = [&]() { return static_cast<int>(static_cast<unsigned char>(k[p++])); };
    t.t = rd();
    t.zeta = 0;
    for (int i = 0; i < 4; i++) t.zeta |= static_cast<uint32_t>(rd()) << (8 * i);
    t.psi.resize(npsi_);
    for (int i = 0; i < npsi_; i++) t.psi[i] = rd();
    t.kappa.resize(nvert_);
    for (int v = 0; v < nvert_; v++) {
        int c = rd();
        t.kappa[v].resize(c);
        for (int i = 0; i < c; i++) t.kappa[v][i] = rd();
    }
    return t;
}

ZetaPoly ZetaPoly::one(int order, int npsi, int nvert) {
    ZetaPoly p(order, npsi, nvert);
    p.add_term(ZTerm{}, Rat(1));
    return p;
}

void ZetaPoly::add_term(const ZTerm& t, const Rat& c) {
    if (c == 0 || t.t > order_) return;
    ZTerm n = t;
    for (auto& ks : n.kappa) std::sort(ks.begin(), ks.end());
    std::string k = key(n);
    auto it = terms_.find(k);
    if (it == terms_.end()) {
        terms_.emplace(std::move(k), c);
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

ZetaPoly ZetaPoly::operator+(const ZetaPoly& o) const {
    ZetaPoly r = *this;
    for (auto& [k, c] : o.terms_) {
        auto it = r.terms_.find(k);
        if (it == r.terms_.end()) {
            r.terms_.emplace(k, c);
        } else {
            it->second += c;
            if (it->second == 0) r.terms_.erase(it);
        }
    }
    return r;
}

ZetaPoly ZetaPoly::operator-(const ZetaPoly& o) const {
    ZetaPoly neg = o;
    for (auto& [k, c] : neg.terms_) c = -c;
    return *this + neg;
}

ZetaPoly ZetaPoly::mul(const ZetaPoly& o, const Pruner& keep) const {
    ZetaPoly r(order_, npsi_, nvert_);
    for (auto& [ka, ca] : terms_) {
        ZTerm a = unkey(ka);
        for (auto& [kb, cb] : o.terms_) {
            ZTerm b = o.unkey(kb);
            if (a.t + b.t > order_) continue;
            ZTerm m;
            m.t = a.t + b.t;
            m.zeta = a.zeta ^ b.zeta;
            m.psi.resize(npsi_);
            for (int i = 0; i < npsi_; i++)
                m.psi[i] = (i < (int)a.psi.size() ? a.psi[i] : 0) + (i < (int)b.psi.size() ? b.psi[i] : 0);
            m.kappa.resize(nvert_);
            for (int v = 0; v < nvert_; v++) {
                if (v < (int)a.kappa.size()) m.kappa[v] = a.kappa[v];
                if (v < (int)b.kappa.size())
                    m.kappa[v].insert(m.kappa[v].end(), b.kappa[v].begin(), b.kappa[v].end());
                std::sort(m.kappa[v].begin(), m.kappa[v].end());
            }
            if (keep && !keep(m)) continue;
            r.add_term(m, ca * cb);
        }
    }
    return r;
}

ZetaPoly ZetaPoly::operator*(const ZetaPoly& o) const { return mul(o, nullptr); }

void ZetaPoly::for_each(const std::function<void(const ZTerm&, const Rat&)>& f) const {
    for (auto& [k, c] : terms_) f(unkey(k), c);
}

void ZetaPoly::extract(int t, uint32_t zeta,
                       const std::function<void(const ZTerm&, const Rat&)>& f) const {
    for (auto& [k, c] : terms_) {
        ZTerm z = unkey(k);
        if (z.t == t && z.zeta == zeta) f(z, c);
    }
}

Rat ZetaPoly::coeff(const ZTerm& t) const {
    ZTerm n = t;
    for (auto& ks : n.kappa) std::sort(ks.begin(), ks.end());
    auto it = terms_.find(key(n));
    return it == terms_.end() ? Rat(0) : it->second;
}

Rat series_a_coeff(int n) {
    mpz_class num, d1, d2;
    mpz_fac_ui(num.get_mpz_t(), 6 * n);
    mpz_fac_ui(d1.get_mpz_t(), 3 * n);
    mpz_fac_ui(d2.get_mpz_t(), 2 * n);
    Rat r(num, d1 * d2);
    r.canonicalize();
    return r;
}

Rat series_b_coeff(int n) {
    Rat r = series_a_coeff(n) * frac(6 * n + 1, 6 * n - 1);
    r.canonicalize();
    return r;
}

ZetaPoly series_A(int order) {
    ZetaPoly p(order, 0, 0);
    for (int n = 0; n <= order; n++) {
        ZTerm t;
        t.t = n;
        p.add_term(t, series_a_coeff(n));
    }
    return p;
}

ZetaPoly series_B(int order) {
    ZetaPoly p(order, 0, 0);
    for (int n = 0; n <= order; n++) {
        ZTerm t;
        t.t = n;
        p.add_term(t, series_b_coeff(n));
    }
    return p;
}

ZetaPoly chat(int a, int psi_symbol, int zeta_bit, int order, int npsi, int nvert) {
    if (a < 0 || a % 3 == 2) throw InvalidInput("Chat index must not be 2 mod 3");
    ZetaPoly p(order, npsi, nvert);
    int i = a / 3;
    bool bee = (a % 3 == 1);
    for (int m = 0; i + m <= order; m++) {
        ZTerm t;
        t.t = i + m;
        t.psi.assign(npsi, 0);
        t.psi[psi_symbol] = i + m;
        int par = bee ? (m + 1) % 2 : m % 2;
        t.zeta = par ? (1u << zeta_bit) : 0u;
        p.add_term(t, bee ? series_b_coeff(m) : series_a_coeff(m));
    }
    return p;
}

ZetaPoly edge_factor(int psi1, int psi2, int zeta_bit1, int zeta_bit2,
                     int order, int npsi, int nvert) {
    // numerator up to T^(order+1); each T^k coefficient is psi-homogeneous
    // of degree k split between the two half-edge symbols
    int nord = order + 1;
    auto zmask = [&](int e1, int e2) -> uint32_t {
        uint32_t m = 0;
        if (e1 % 2) m ^= 1u << zeta_bit1;
        if (e2 % 2) m ^= 1u << zeta_bit2;
        return m;
    };
    // component[t][zeta word] -> coefficients of psi1^i psi2^(t-i)
    std::map<std::pair<int, uint32_t>, std::vector<Rat>> comp;
    auto at = [&](int t, uint32_t z) -> std::vector<Rat>& {
        auto& v = comp[{t, z}];
        if (v.empty()) v.assign(t + 1, Rat(0));
        return v;
    };
    for (int i = 0; i <= nord; i++) {
        for (int j = 0; i + j <= nord; j++) {
            int t = i + j;
            // A(z1 p1 T) * z2 B(z2 p2 T): psi1^i psi2^j, zeta z1^i z2^(j+1)
            at(t, zmask(i, j + 1))[i] += series_a_coeff(i) * series_b_coeff(j);
            // z1 B(z1 p1 T) * A(z2 p2 T): zeta z1^(i+1) z2^j
            at(t, zmask(i + 1, j))[i] += series_b_coeff(i) * series_a_coeff(j);
        }
    }
    at(0, zmask(1, 0))[0] += 1;
    at(0, zmask(0, 1))[0] += 1;

    ZetaPoly q(order, npsi, nvert);
    for (auto& [tz, coeffs] : comp) {
        auto [t, z] = tz;
        if (t == 0) {
            if (std::any_of(coeffs.begin(), coeffs.end(), [](const Rat& c) { return c != 0; }))
                throw InternalError("edge factor: constant term of numerator nonzero");
            continue;
        }
        // divide sum_i c_i psi1^i psi2^(t-i) by (psi1 + psi2)
        std::vector<Rat> quo(t);
        quo[0] = coeffs[0];
        for (int i = 1; i < t; i++) quo[i] = coeffs[i] - quo[i - 1];
        if (coeffs[t] != quo[t - 1])
            throw InternalError("edge factor: numerator not divisible by psi1+psi2");
        if (t - 1 > order) continue;
        for (int i = 0; i < t; i++) {
            if (quo[i] == 0) continue;
            ZTerm term;
            term.t = t - 1;
            term.zeta = z;
            term.psi.assign(npsi, 0);
            term.psi[psi1] += i;
            term.psi[psi2] += t - 1 - i;
            q.add_term(term, quo[i]);
        }
    }
    return q;
}

std::vector<std::pair<KappaSymbol, Rat>> brace_chat(int sigma_part, int order) {
    if (sigma_part < 0 || sigma_part % 3 == 2)
        throw InvalidInput("sigma part must not be 2 mod 3");
    std::vector<std::pair<KappaSymbol, Rat>> out;
    int i = sigma_part / 3;
    bool bee = (sigma_part % 3 == 1);
    for (int m = 0; i + m <= order; m++) {
        int par = bee ? (m + 1) % 2 : m % 2;
        out.push_back({KappaSymbol{i + m, par}, bee ? series_b_coeff(m) : series_a_coeff(m)});
    }
    return out;
}

std::vector<std::pair<KappaSymbol, Rat>> brace_one_minus_chat0(int order) {
    std::vector<std::pair<KappaSymbol, Rat>> out;
    for (int n = 1; n <= order; n++)
        out.push_back({KappaSymbol{n, n % 2}, -series_a_coeff(n)});
    return out;
}

namespace {

// weight of one cycle block: sum over vertices of kappa_{e}^{(v)} zeta_v^{a},
// with kappa_0 replaced by the scalar 2g(v)-2+n(v)
ZetaPoly block_weight(int esum, int asum, const StableGraph& g, int order, int npsi) {
    int V = g.num_vertices();
    ZetaPoly w(order, npsi, V);
    for (int v = 0; v < V; v++) {
        ZTerm t;
        t.t = esum;
        t.zeta = (asum % 2) ? (1u << v) : 0u;
        t.kappa.assign(V, {});
        Rat c(1);
        if (esum == 0) {
            c = Rat(2 * g.genus[v] - 2 + g.valence(v));
        } else {
            t.kappa[v] = {esum};
        }
        w.add_term(t, c);
    }
    return w;
}

using Multiset = std::vector<std::pair<KappaSymbol, int>>; // sorted, count > 0

std::string mkey(const Multiset& m) {
    std::string k;
    for (auto& [s, c] : m) {
        k.push_back(static_cast<char>(s.n));
        k.push_back(static_cast<char>(s.parity));
        k.push_back(static_cast<char>(c));
    }
    return k;
}

long binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 1; i <= k; i++) r = r * (n - k + i) / i;
    return r;
}

long fact(int n) {
    long r = 1;
    for (int i = 2; i <= n; i++) r *= i;
    return r;
}

// sum over set partitions with (|block|-1)! cyclic weights; the first
// element of the first symbol type anchors the recursion
ZetaPoly printed_sum(Multiset m, const StableGraph& g, int order, int npsi,
                     std::map<std::string, ZetaPoly>& memo) {
    if (m.empty()) return ZetaPoly::one(order, npsi, g.num_vertices());
    std::string k = mkey(m);
    auto it = memo.find(k);
    if (it != memo.end()) return it->second;

    KappaSymbol x = m[0].first;
    Multiset rest = m;
    if (--rest[0].second == 0) rest.erase(rest.begin());

    ZetaPoly total(order, npsi, g.num_vertices());
    // choose the sub-multiset joining x in its block
    int ntypes = static_cast<int>(rest.size());
    std::vector<int> pick(ntypes, 0);
    while (true) {
        int bsize = 1, esum = x.n, asum = x.parity;
        long ways = 1;
        Multiset remain;
        for (int i = 0; i < ntypes; i++) {
            bsize += pick[i];
            esum += pick[i] * rest[i].first.n;
            asum += pick[i] * rest[i].first.parity;
            ways *= binom(rest[i].second, pick[i]);
            if (rest[i].second - pick[i] > 0)
                remain.push_back({rest[i].first, rest[i].second - pick[i]});
        }
        if (esum <= order) {
            ZetaPoly w = block_weight(esum, asum, g, order, npsi);
            ZetaPoly sub = printed_sum(remain, g, order, npsi, memo);
            ZetaPoly contrib = w * sub;
            ZetaPoly scaled(order, npsi, g.num_vertices());
            Rat mult(ways * fact(bsize - 1));
            contrib.for_each([&](const ZTerm& t, const Rat& c) { scaled.add_term(t, c * mult); });
            total = total + scaled;
        }
        // next pick vector
        int i = 0;
        while (i < ntypes) {
            if (pick[i] < rest[i].second) {
                pick[i]++;
                break;
            }
            pick[i] = 0;
            i++;
        }
        if (i == ntypes) break;
    }
    memo.emplace(k, total);
    return total;
}

// single-vertex cycle sum used by the per-vertex variant
ZetaPoly vertex_sum(Multiset m, int v, const StableGraph& g, int order, int npsi,
                    std::map<std::string, ZetaPoly>& memo) {
    if (m.empty()) return ZetaPoly::one(order, npsi, g.num_vertices());
    std::string k = mkey(m);
    k.push_back(static_cast<char>(v));
    auto it = memo.find(k);
    if (it != memo.end()) return it->second;

    KappaSymbol x = m[0].first;
    Multiset rest = m;
    if (--rest[0].second == 0) rest.erase(rest.begin());

    int V = g.num_vertices();
    ZetaPoly total(order, npsi, V);
    int ntypes = static_cast<int>(rest.size());
    std::vector<int> pick(ntypes, 0);
    while (true) {
        int bsize = 1, esum = x.n, asum = x.parity;
        long ways = 1;
        Multiset remain;
        for (int i = 0; i < ntypes; i++) {
            bsize += pick[i];
            esum += pick[i] * rest[i].first.n;
            asum += pick[i] * rest[i].first.parity;
            ways *= binom(rest[i].second, pick[i]);
            if (rest[i].second - pick[i] > 0)
                remain.push_back({rest[i].first, rest[i].second - pick[i]});
        }
        if (esum <= order) {
            ZTerm t;
            t.t = esum;
            t.zeta = (asum % 2) ? (1u << v) : 0u;
            t.kappa.assign(V, {});
            Rat c(1);
            if (esum == 0) c = Rat(2 * g.genus[v] - 2 + g.valence(v));
            else t.kappa[v] = {esum};
            ZetaPoly w(order, npsi, V);
            w.add_term(t, c);
            ZetaPoly contrib = w * vertex_sum(remain, v, g, order, npsi, memo);
            ZetaPoly scaled(order, npsi, V);
            Rat mult(ways * fact(bsize - 1));
            contrib.for_each([&](const ZTerm& tt, const Rat& cc) { scaled.add_term(tt, cc * mult); });
            total = total + scaled;
        }
        int i = 0;
        while (i < ntypes) {
            if (pick[i] < rest[i].second) {
                pick[i]++;
                break;
            }
            pick[i] = 0;
            i++;
        }
        if (i == ntypes) break;
    }
    memo.emplace(k, total);
    return total;
}

} // namespace

ZetaPoly kappa_hat(const std::vector<KappaSymbol>& symbols, const StableGraph& g,
                   int order, int npsi, KappaVariant variant) {
    int V = g.num_vertices();
    Multiset m;
    {
        std::vector<KappaSymbol> s = symbols;
        std::sort(s.begin(), s.end());
        for (auto& x : s) {
            if (!m.empty() && m.back().first == x) m.back().second++;
            else m.push_back({x, 1});
        }
    }
    if (variant == KappaVariant::Printed) {
        std::map<std::string, ZetaPoly> memo;
        return printed_sum(m, g, order, npsi, memo);
    }
    // per-vertex bookkeeping: assign every symbol copy to a vertex, with a
    // multinomial factor for choosing which copies land where, then take a
    // local cycle sum at each vertex
    ZetaPoly total(order, npsi, V);
    std::vector<Multiset> at(V);
    std::map<std::string, ZetaPoly> vmemo;
    std::function<void(size_t, long)> rec = [&](size_t type, long ways) {
        if (type == m.size()) {
            ZetaPoly prod = ZetaPoly::one(order, npsi, V);
            for (int v = 0; v < V; v++)
                if (!at[v].empty()) prod = prod * vertex_sum(at[v], v, g, order, npsi, vmemo);
            ZetaPoly scaled(order, npsi, V);
            Rat mult(ways);
            prod.for_each([&](const ZTerm& t, const Rat& c) { scaled.add_term(t, c * mult); });
            total = total + scaled;
            return;
        }
        int cnt = m[type].second;
        std::vector<int> assign(V, 0);
        std::function<void(int, int)> dist = [&](int v, int left) {
            if (v == V - 1) {
                assign[v] = left;
                long w = 1;
                int rem = cnt;
                for (int u = 0; u < V; u++) {
                    w *= binom(rem, assign[u]);
                    rem -= assign[u];
                }
                for (int u = 0; u < V; u++)
                    if (assign[u] > 0) at[u].push_back({m[type].first, assign[u]});
                rec(type + 1, ways * w);
                for (int u = 0; u < V; u++)
                    if (assign[u] > 0) at[u].pop_back();
                return;
            }
            for (int c = 0; c <= left; c++) {
                assign[v] = c;
                dist(v + 1, left - c);
            }
        };
        dist(0, cnt);
    };
    rec(0, 1);
    return total;
}

} // namespace tautrec
