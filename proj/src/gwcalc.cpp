#include "tautrec/gwcalc.hpp"

#include "tautrec/errors.hpp"
#include "tautrec/linalg.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <queue>
#include <random>
#include <set>
#include <sstream>

namespace tautrec::gw {

namespace {

void eb(std::string& s, int v) { s.push_back(static_cast<char>(static_cast<unsigned char>(v & 0xff))); }

// structure bytes: dummy ids and orientations blanked, Ext ids kept
void enc_struct(const Slot& s, std::string& out) {
    eb(out, s.tpow);
    eb(out, static_cast<int>(s.kind));
    if (s.kind == Slot::Ext) eb(out, s.id);
    if (s.kind == Slot::Prod) {
        eb(out, static_cast<int>(s.chain.size()));
        for (auto& c : s.chain) enc_struct(c, out);
    }
}

std::string slot_struct(const Slot& s) {
    std::string b;
    enc_struct(s, b);
    return b;
}

struct NumState {
    std::map<int, int> num;
    std::map<int, bool> flip;
    int next = 0;
};

void enc_full(const Slot& s, std::string& out, NumState& st) {
    eb(out, s.tpow);
    eb(out, static_cast<int>(s.kind));
    switch (s.kind) {
        case Slot::W: break;
        case Slot::Ext: eb(out, s.id); break;
        case Slot::Dummy: {
            auto it = st.num.find(s.id);
            int n;
            bool up;
            if (it == st.num.end()) {
                n = st.next++;
                st.num[s.id] = n;
                st.flip[s.id] = !s.up;
                up = true;
            } else {
                n = it->second;
                up = st.flip[s.id] ? !s.up : s.up;
            }
            eb(out, n);
            eb(out, up ? 1 : 0);
            break;
        }
        case Slot::Prod: {
            eb(out, static_cast<int>(s.chain.size()));
            for (auto& c : s.chain) enc_full(c, out, st);
            break;
        }
    }
}

Slot rebuild_slot(const Slot& s, NumState& st) {
    Slot r = s;
    if (s.kind == Slot::Dummy) {
        auto it = st.num.find(s.id);
        if (it == st.num.end()) {
            r.id = st.next++;
            st.num[s.id] = r.id;
            st.flip[s.id] = !s.up;
            r.up = true;
        } else {
            r.id = it->second;
            r.up = st.flip[s.id] ? !s.up : s.up;
        }
    } else if (s.kind == Slot::Prod) {
        for (auto& c : r.chain) c = rebuild_slot(c, st);
    }
    return r;
}

void normalize_chains(Slot& s) {
    for (auto& c : s.chain) normalize_chains(c);
    if (s.kind == Slot::Prod && s.chain.size() >= 2) {
        // the first product pairing commutes
        if (slot_struct(s.chain[1]) < slot_struct(s.chain[0]))
            std::swap(s.chain[0], s.chain[1]);
    }
}

void collect_dummy_atoms(const Slot& s, std::vector<const Slot*>& out) {
    if (s.kind == Slot::Dummy) out.push_back(&s);
    for (auto& c : s.chain) collect_dummy_atoms(c, out);
}

long group_combinations(const std::vector<std::vector<int>>& groups) {
    long total = 1;
    for (auto& g : groups) {
        long f = 1;
        for (size_t i = 2; i <= g.size(); i++) f *= static_cast<long>(i);
        total *= f;
        if (total > 2000000) return total;
    }
    return total;
}

} // namespace

std::string canonical_term_key(Term& t) {
    for (auto& f : t.factors)
        for (auto& s : f.slots) normalize_chains(s);

    int F = static_cast<int>(t.factors.size());
    // slots sorted by structure, then refined by pairing signature
    std::vector<std::vector<std::string>> sig(F);
    for (int i = 0; i < F; i++) {
        auto& f = t.factors[i];
        std::stable_sort(f.slots.begin(), f.slots.end(), [](const Slot& a, const Slot& b) {
            return slot_struct(a) < slot_struct(b);
        });
    }
    // pairing signature: partner factor genus + partner slot structure
    std::map<int, std::vector<std::pair<int, int>>> pair_loc;  // id -> (factor, slot)
    for (int i = 0; i < F; i++)
        for (int j = 0; j < static_cast<int>(t.factors[i].slots.size()); j++) {
            std::vector<const Slot*> ds;
            collect_dummy_atoms(t.factors[i].slots[j], ds);
            for (auto* d : ds) pair_loc[d->id].push_back({i, j});
        }
    for (int i = 0; i < F; i++) {
        sig[i].resize(t.factors[i].slots.size());
        for (int j = 0; j < static_cast<int>(t.factors[i].slots.size()); j++) {
            std::string s = slot_struct(t.factors[i].slots[j]);
            std::vector<const Slot*> ds;
            collect_dummy_atoms(t.factors[i].slots[j], ds);
            std::vector<std::string> partners;
            for (auto* d : ds) {
                for (auto& [fi, si] : pair_loc[d->id]) {
                    if (fi == i && si == j) continue;
                    std::string p;
                    eb(p, t.factors[fi].genus);
                    p += slot_struct(t.factors[fi].slots[si]);
                    partners.push_back(p);
                }
            }
            std::sort(partners.begin(), partners.end());
            s.push_back('\xfe');
            for (auto& p : partners) {
                s += p;
                s.push_back('\xfd');
            }
            sig[i][j] = s;
        }
        // re-sort slots by refined signature
        std::vector<int> ord(t.factors[i].slots.size());
        for (size_t k = 0; k < ord.size(); k++) ord[k] = static_cast<int>(k);
        std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) { return sig[i][a] < sig[i][b]; });
        std::vector<Slot> ns;
        std::vector<std::string> nsig;
        for (int k : ord) {
            ns.push_back(t.factors[i].slots[k]);
            nsig.push_back(sig[i][k]);
        }
        t.factors[i].slots = ns;
        sig[i] = nsig;
    }
    // factor keys and order
    std::vector<std::string> fkey(F);
    for (int i = 0; i < F; i++) {
        std::string k;
        eb(k, t.factors[i].genus);
        for (auto& s : sig[i]) {
            k += s;
            k.push_back('\xfc');
        }
        fkey[i] = k;
    }
    std::vector<int> ford(F);
    for (int i = 0; i < F; i++) ford[i] = i;
    std::stable_sort(ford.begin(), ford.end(), [&](int a, int b) { return fkey[a] < fkey[b]; });

    // tie groups among factors and among slots
    std::vector<std::vector<int>> fgroups;
    for (int i = 0; i < F;) {
        int j = i;
        while (j < F && fkey[ford[j]] == fkey[ford[i]]) j++;
        if (j - i > 1) {
            std::vector<int> grp;
            for (int k = i; k < j; k++) grp.push_back(k);
            fgroups.push_back(grp);
        }
        i = j;
    }
    std::vector<std::vector<std::pair<int, std::vector<int>>>> sgroups(F);  // per factor: (start, positions)
    for (int i = 0; i < F; i++) {
        int S = static_cast<int>(sig[i].size());
        for (int a = 0; a < S;) {
            int b = a;
            while (b < S && sig[i][b] == sig[i][a]) b++;
            if (b - a > 1) {
                std::vector<int> grp;
                for (int k = a; k < b; k++) grp.push_back(k);
                sgroups[i].push_back({a, grp});
            }
            a = b;
        }
    }

    {
        std::vector<std::vector<int>> all;
        for (auto& g : fgroups) all.push_back(g);
        for (auto& per : sgroups)
            for (auto& [st, g] : per) all.push_back(g);
        if (group_combinations(all) > 2000000)
            throw InternalError("canonical form tie search too large");
    }

    std::string best;
    std::vector<int> best_ford;
    std::vector<std::vector<int>> best_sord(F);

    std::vector<std::vector<int>> sord(F);
    for (int i = 0; i < F; i++) {
        sord[i].resize(sig[i].size());
        for (size_t k = 0; k < sord[i].size(); k++) sord[i][k] = static_cast<int>(k);
    }

    auto encode_candidate = [&]() {
        std::string out;
        NumState st;
        for (int p = 0; p < F; p++) {
            int i = ford[p];
            eb(out, t.factors[i].genus);
            eb(out, static_cast<int>(t.factors[i].slots.size()));
            for (int q : sord[i]) enc_full(t.factors[i].slots[q], out, st);
        }
        if (best.empty() || out < best) {
            best = out;
            best_ford = ford;
            best_sord = sord;
        }
    };

    // enumerate permutations of every tie group
    std::function<void(size_t)> enum_sgroups_then_encode;
    std::vector<std::pair<int, std::vector<int>*>> flat_sgroups;
    for (int i = 0; i < F; i++)
        for (auto& [st0, grp] : sgroups[i]) flat_sgroups.push_back({i, &grp});

    std::function<void(size_t)> enum_slots = [&](size_t gi) {
        if (gi == flat_sgroups.size()) {
            encode_candidate();
            return;
        }
        auto [fi, grp] = flat_sgroups[gi];
        std::vector<int> positions = *grp;
        std::sort(positions.begin(), positions.end());
        std::vector<int> perm = positions;
        do {
            for (size_t k = 0; k < positions.size(); k++) sord[fi][positions[k]] = perm[k];
            enum_slots(gi + 1);
        } while (std::next_permutation(perm.begin(), perm.end()));
        for (int p : positions) sord[fi][p] = p;
    };

    std::function<void(size_t)> enum_factors = [&](size_t gi) {
        if (gi == fgroups.size()) {
            enum_slots(0);
            return;
        }
        std::vector<int> positions = fgroups[gi];
        std::vector<int> vals;
        for (int p : positions) vals.push_back(ford[p]);
        std::sort(vals.begin(), vals.end());
        std::vector<int> perm = vals;
        do {
            for (size_t k = 0; k < positions.size(); k++) ford[positions[k]] = perm[k];
            enum_factors(gi + 1);
        } while (std::next_permutation(perm.begin(), perm.end()));
    };

    enum_factors(0);

    // rebuild the term in its canonical order with renumbered dummies
    std::vector<Factor> nf;
    NumState st;
    for (int p = 0; p < F; p++) {
        int i = best_ford[p];
        Factor f;
        f.genus = t.factors[i].genus;
        for (int q : best_sord[i]) f.slots.push_back(rebuild_slot(t.factors[i].slots[q], st));
        nf.push_back(f);
    }
    t.factors = nf;
    return best;
}

void Expr::add_term(Term t) {
    if (t.coeff == 0) return;
    std::string key = canonical_term_key(t);
    auto it = terms_.find(key);
    if (it == terms_.end()) {
        terms_.emplace(std::move(key), std::move(t));
    } else {
        it->second.coeff += t.coeff;
        if (it->second.coeff == 0) terms_.erase(it);
    }
}

void Expr::add(const Expr& o) {
    for (auto& [k, t] : o.terms_) add_term(t);
}

Expr Expr::operator+(const Expr& o) const {
    Expr r = *this;
    r.add(o);
    return r;
}

Expr Expr::operator-(const Expr& o) const {
    Expr r = *this;
    r.add(o.scaled(Rat(-1)));
    return r;
}

Expr Expr::scaled(const Rat& r) const {
    Expr out;
    if (r == 0) return out;
    for (auto& [k, t] : terms_) {
        Term t2 = t;
        t2.coeff *= r;
        out.terms_.emplace(k, std::move(t2));
    }
    return out;
}

namespace {

int max_dummy_id(const Slot& s) {
    int m = -1;
    if (s.kind == Slot::Dummy) m = std::max(m, s.id);
    for (auto& c : s.chain) m = std::max(m, max_dummy_id(c));
    return m;
}

int max_dummy_id(const Term& t) {
    int m = -1;
    for (auto& f : t.factors)
        for (auto& s : f.slots) m = std::max(m, max_dummy_id(s));
    return m;
}

void shift_dummies(Slot& s, int offset) {
    if (s.kind == Slot::Dummy) s.id += offset;
    for (auto& c : s.chain) shift_dummies(c, offset);
}

void shift_dummies(Term& t, int offset) {
    for (auto& f : t.factors)
        for (auto& s : f.slots) shift_dummies(s, offset);
}

} // namespace

Expr Expr::operator*(const Expr& o) const {
    Expr out;
    for (auto& [ka, ta] : terms_) {
        int off = max_dummy_id(ta) + 1;
        for (auto& [kb, tb] : o.terms_) {
            Term t;
            t.coeff = ta.coeff * tb.coeff;
            t.factors = ta.factors;
            Term tb2 = tb;
            shift_dummies(tb2, off);
            for (auto& f : tb2.factors) t.factors.push_back(f);
            out.add_term(std::move(t));
        }
    }
    return out;
}

std::vector<Term> Expr::term_list() const {
    std::vector<Term> out;
    for (auto& [k, t] : terms_) out.push_back(t);
    return out;
}

bool Expr::operator==(const Expr& o) const {
    if (terms_.size() != o.terms_.size()) return false;
    auto it = terms_.begin();
    auto jt = o.terms_.begin();
    for (; it != terms_.end(); ++it, ++jt) {
        if (it->first != jt->first || it->second.coeff != jt->second.coeff) return false;
    }
    return true;
}

Expr expr_from_term(Term t) {
    Expr e;
    e.add_term(std::move(t));
    return e;
}

Expr single(const Rat& c, int genus, std::vector<Slot> slots) {
    Term t;
    t.coeff = c;
    t.factors.push_back(Factor{genus, std::move(slots)});
    return expr_from_term(std::move(t));
}

namespace {

struct NablaEntry {
    Slot repl;
    std::vector<Factor> extra;
    Rat coeff;
};

// covariant derivative of one slot in direction dir; fresh ids taken from
// next_id. Atoms are flat coordinate fields, so d(atom) = 0.
std::vector<NablaEntry> slot_nabla(const Slot& s, const Slot& dir, int& next_id) {
    std::vector<NablaEntry> out;
    if (s.tpow >= 1) {
        // d(T^m X) = T^m(dX) - sum_j T^j((T^(m-1-j) X) o dir)
        Slot payload = s;
        payload.tpow = 0;
        for (int j = 0; j < s.tpow; j++) {
            Slot inner = payload;
            inner.tpow = s.tpow - 1 - j;
            Slot repl = Slot::prod({inner, dir}, j);
            out.push_back({repl, {}, Rat(-1)});
        }
        if (s.kind == Slot::Prod) {
            for (auto& e : slot_nabla(payload, dir, next_id)) {
                NablaEntry e2 = e;
                e2.repl.tpow += s.tpow;
                out.push_back(e2);
            }
        }
        return out;
    }
    if (s.kind == Slot::Prod) {
        // left-associated product: A o B with B the last element
        Slot A, B = s.chain.back();
        if (s.chain.size() == 2) {
            A = s.chain[0];
        } else {
            std::vector<Slot> pre(s.chain.begin(), s.chain.end() - 1);
            A = Slot::prod(std::move(pre));
        }
        auto mk = [&](const Slot& a, const Slot& b) { return Slot::prod({a, b}); };
        for (auto& e : slot_nabla(A, dir, next_id))
            out.push_back({mk(e.repl, B), e.extra, e.coeff});
        for (auto& e : slot_nabla(B, dir, next_id))
            out.push_back({mk(A, e.repl), e.extra, e.coeff});
        int id = next_id++;
        Factor corr{0, {A, B, dir, Slot::dummy(id, true)}};
        out.push_back({Slot::dummy(id, false), {corr}, Rat(1)});
        return out;
    }
    return out;
}

} // namespace

Expr differentiate(const Expr& e, const Slot& dir) {
    Expr out;
    for (auto& [key, t] : e.terms()) {
        int next_id = std::max(max_dummy_id(t), max_dummy_id(dir)) + 1;
        for (size_t i = 0; i < t.factors.size(); i++) {
            Term t2 = t;
            t2.factors[i].slots.push_back(dir);
            out.add_term(std::move(t2));
        }
        for (size_t i = 0; i < t.factors.size(); i++) {
            for (size_t j = 0; j < t.factors[i].slots.size(); j++) {
                int nid = next_id;
                for (auto& entry : slot_nabla(t.factors[i].slots[j], dir, nid)) {
                    Term t2 = t;
                    t2.coeff *= entry.coeff;
                    t2.factors[i].slots[j] = entry.repl;
                    for (auto& f : entry.extra) t2.factors.push_back(f);
                    out.add_term(std::move(t2));
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// reduction engine

namespace {

bool slot_has_prod(const Slot& s) {
    if (s.kind == Slot::Prod) return true;
    for (auto& c : s.chain)
        if (slot_has_prod(c)) return true;
    return false;
}

std::string atom_bytes(const Slot& s) {
    std::string b;
    eb(b, s.tpow);
    eb(b, static_cast<int>(s.kind));
    if (s.kind == Slot::Ext) eb(b, s.id);
    return b;
}

struct Reducer {
    const RuleSet& rules;
    ReduceOptions opts;
    ReduceStats* stats;
    long work = 0;
    std::map<std::string, Expr> memo;
    std::mt19937_64 rng;

    Reducer(const RuleSet& r, const ReduceOptions& o, ReduceStats* st)
        : rules(r), opts(o), stats(st), rng(o.shuffle_seed ? o.shuffle_seed : 1) {}

    void bump(long n) {
        work += n;
        if (stats) stats->steps = work;
        if (work > opts.budget) throw InternalError("reduce: step budget exhausted");
    }

    int threshold(int genus) const {
        auto it = rules.by_genus.find(genus);
        if (it == rules.by_genus.end() || genus > opts.scope_max_genus) return -1;
        return it->second.tpow;
    }

    Expr reduce_expr(const Expr& e) {
        Expr out;
        std::vector<Term> queue = e.term_list();
        while (!queue.empty()) {
            Term t = std::move(queue.back());
            queue.pop_back();
            bump(1);
            if (!rewrite_one(t, queue)) out.add_term(std::move(t));
        }
        return out;
    }

    bool rewrite_one(Term& t, std::vector<Term>& queue) {
        int F = static_cast<int>(t.factors.size());
        std::vector<int> order(F);
        for (int i = 0; i < F; i++) order[i] = i;
        if (opts.shuffle_seed) std::shuffle(order.begin(), order.end(), rng);

        // quantum products expand first
        for (int i : order) {
            auto& slots = t.factors[i].slots;
            for (size_t j = 0; j < slots.size(); j++) {
                if (slot_has_prod(slots[j])) {
                    expand_prod(t, i, static_cast<int>(j), queue);
                    return true;
                }
            }
        }
        for (int i : order) {
            const Factor& f = t.factors[i];
            int maxt = 0;
            for (auto& s : f.slots) maxt = std::max(maxt, s.tpow);
            bool reducible = false;
            if (f.genus == 0) {
                reducible = maxt >= 1 && f.slots.size() >= 3;
            } else {
                int th = threshold(f.genus);
                reducible = th >= 1 && maxt >= th;
            }
            if (reducible) {
                splice_factor_reduction(t, i, queue);
                return true;
            }
        }
        return false;
    }

    // {a o b} in any T-wrapper becomes a genus-0 three-point factor and a
    // contracted insertion
    void expand_prod(Term& t, int fi, int sj, std::vector<Term>& queue) {
        Slot s = t.factors[fi].slots[sj];
        // descend to the outermost Prod (the slot itself may be T^k(Prod))
        if (s.kind != Slot::Prod) {
            // T^k applied to an atom cannot contain a Prod except via chain
            throw InternalError("expand_prod: unexpected slot shape");
        }
        Slot A, B = s.chain.back();
        if (s.chain.size() == 2) {
            A = s.chain[0];
        } else {
            std::vector<Slot> pre(s.chain.begin(), s.chain.end() - 1);
            A = Slot::prod(std::move(pre));
        }
        int id = max_dummy_id(t) + 1;
        Term t2 = t;
        t2.factors[fi].slots[sj] = Slot::dummy(id, false, s.tpow);
        t2.factors.push_back(Factor{0, {A, B, Slot::dummy(id, true)}});
        queue.push_back(std::move(t2));
    }

    void splice_factor_reduction(Term& t, int fi, std::vector<Term>& queue) {
        // isolate the factor behind opaque Ext atoms (pre-existing Ext
        // atoms are re-indexed through the same table)
        Factor f = t.factors[fi];
        std::vector<Slot> substitution;  // ext index -> original atom
        for (auto& s : f.slots) {
            if (s.kind == Slot::Dummy || s.kind == Slot::Ext) {
                int idx = static_cast<int>(substitution.size());
                Slot orig = s;
                orig.tpow = 0;
                substitution.push_back(orig);
                s = Slot::ext(idx, s.tpow);
            } else if (s.kind == Slot::Prod) {
                throw InternalError("factor reduction before product expansion");
            }
        }
        Expr red = reduce_factor(f);

        Term rest = t;
        rest.factors.erase(rest.factors.begin() + fi);
        int base = max_dummy_id(rest) + 1;
        for (auto& [k, rt] : red.terms()) {
            Term nt = rt;
            // internal pair ids fresh relative to the surrounding term
            shift_dummies(nt, base + 1000000);
            // graft the external atoms back
            for (auto& fac : nt.factors)
                for (auto& s : fac.slots) s = unext(s, substitution);
            nt.coeff *= t.coeff;
            for (auto& fac : rest.factors) nt.factors.push_back(fac);
            queue.push_back(std::move(nt));
        }
    }

    static Slot unext(const Slot& s, const std::vector<Slot>& substitution) {
        Slot r = s;
        if (s.kind == Slot::Ext) {
            if (s.id < 0 || s.id >= static_cast<int>(substitution.size()))
                throw InternalError("dangling external atom");
            r = substitution[s.id];
            r.tpow += s.tpow;
        }
        for (auto& c : r.chain) c = unext(c, substitution);
        return r;
    }

    // factor with only W/Ext atoms
    Expr reduce_factor(const Factor& f) {
        std::string key;
        eb(key, f.genus);
        {
            std::vector<std::string> sb;
            for (auto& s : f.slots) sb.push_back(atom_bytes(s));
            std::sort(sb.begin(), sb.end());
            for (auto& b : sb) {
                key += b;
                key.push_back('\xfc');
            }
        }
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        bump(4);

        // head: maximal T power; others sorted ascending
        std::vector<Slot> slots = f.slots;
        std::stable_sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
            return atom_bytes(a) < atom_bytes(b);
        });
        int head = -1, maxt = 0;
        for (size_t i = 0; i < slots.size(); i++)
            if (slots[i].tpow > maxt) {
                maxt = slots[i].tpow;
                head = static_cast<int>(i);
            }

        Expr result;
        bool irreducible = false;
        if (head < 0) {
            irreducible = true;
        } else if (f.genus == 0) {
            if (slots.size() == 3) {
                result = Expr{};  // <<T(X) Y Z>>_0 = 0
            } else if (slots.size() < 3) {
                irreducible = true;
            } else {
                result = peel(f.genus, slots, head);
            }
        } else {
            int th = threshold(f.genus);
            if (th < 1 || maxt < th) {
                irreducible = true;
            } else if (slots.size() == 1) {
                const Rule& rule = rules.by_genus.at(f.genus);
                Slot payload = slots[0];
                payload.tpow = 0;
                Expr inst = substitute_w(rule.rhs, slots[0].tpow - rule.tpow, payload);
                result = reduce_expr(inst);
            } else {
                result = peel(f.genus, slots, head);
            }
        }
        if (irreducible) result = expr_from_term(Term{Rat(1), {Factor{f.genus, slots}}});
        memo.emplace(std::move(key), result);
        return result;
    }

    // <<T^m(X) rest s*>>_g = d_{s*} <<T^m(X) rest>>_g
    //                        + sum_j <<T^(m-1-j)(X) s* mu>>_0 <<T^j(mu) rest>>_g
    Expr peel(int genus, const std::vector<Slot>& slots, int head) {
        std::vector<Slot> others;
        for (size_t i = 0; i < slots.size(); i++)
            if (static_cast<int>(i) != head) others.push_back(slots[i]);
        // peel the canonically last non-head slot
        Slot star = others.back();
        others.pop_back();

        Factor smaller{genus, others};
        smaller.slots.push_back(slots[head]);
        Expr e0 = reduce_factor(smaller);
        Expr d = reduce_expr(differentiate(e0, star));

        Slot payload = slots[head];
        payload.tpow = 0;
        int m = slots[head].tpow;
        Expr corr;
        for (int j = 0; j < m; j++) {
            Slot xm = payload;
            xm.tpow = m - 1 - j;
            Term t;
            t.coeff = Rat(1);
            int id = 5000000 + j;  // local; renumbered when spliced
            t.factors.push_back(Factor{0, {xm, star, Slot::dummy(id, true)}});
            Factor fg{genus, {Slot::dummy(id, false, j)}};
            for (auto& o : others) fg.slots.push_back(o);
            t.factors.push_back(fg);
            corr.add_term(std::move(t));
        }
        return d + reduce_expr(corr);
    }

    static Expr substitute_w(const Expr& rhs, int addt, const Slot& payload) {
        Expr out;
        for (auto& [k, t] : rhs.terms()) {
            Term t2 = t;
            for (auto& f : t2.factors)
                for (auto& s : f.slots) s = subst_slot(s, addt, payload);
            out.add_term(std::move(t2));
        }
        return out;
    }

    static Slot subst_slot(const Slot& s, int addt, const Slot& payload) {
        Slot r = s;
        if (s.kind == Slot::W) {
            r = payload;
            r.tpow = payload.tpow + s.tpow + addt;
        }
        for (auto& c : r.chain) c = subst_slot(c, addt, payload);
        return r;
    }
};

} // namespace

Expr reduce(const Expr& e, const RuleSet& rules, const ReduceOptions& opts, ReduceStats* stats) {
    Reducer r(rules, opts, stats);
    return r.reduce_expr(e);
}

// ---------------------------------------------------------------------------
// WDVV span membership

namespace {

std::string term_key_of(Term t) { return canonical_term_key(t); }

// all WDVV relations containing `t` as a summand: pick a dummy bridge
// between two genus-0 factors, pick a transposition across it, distribute
// the remaining insertions of both factors over the two sides
std::vector<Expr> wdvv_moves(const Term& t) {
    std::vector<Expr> out;
    int F = static_cast<int>(t.factors.size());
    for (int i = 0; i < F; i++) {
        if (t.factors[i].genus != 0) continue;
        for (int j = 0; j < F; j++) {
            if (j == i || t.factors[j].genus != 0) continue;
            // bridges: top-level dummy slots of i paired into top-level of j
            for (size_t a = 0; a < t.factors[i].slots.size(); a++) {
                const Slot& sa = t.factors[i].slots[a];
                if (sa.kind != Slot::Dummy || sa.tpow != 0) continue;
                for (size_t b = 0; b < t.factors[j].slots.size(); b++) {
                    const Slot& sb = t.factors[j].slots[b];
                    if (sb.kind != Slot::Dummy || sb.id != sa.id || sb.tpow != 0) continue;
                    // sides
                    std::vector<Slot> side1, side2;
                    for (size_t k = 0; k < t.factors[i].slots.size(); k++)
                        if (k != a) side1.push_back(t.factors[i].slots[k]);
                    for (size_t k = 0; k < t.factors[j].slots.size(); k++)
                        if (k != b) side2.push_back(t.factors[j].slots[k]);
                    if (side1.size() < 2 || side2.size() < 2) continue;
                    std::vector<Factor> ctx;
                    for (int k = 0; k < F; k++)
                        if (k != i && k != j) ctx.push_back(t.factors[k]);

                    // choose the four fixed ends
                    for (size_t x = 0; x < side1.size(); x++)
                        for (size_t y = x + 1; y < side1.size(); y++)
                            for (size_t z = 0; z < side2.size(); z++)
                                for (size_t w = z + 1; w < side2.size(); w++) {
                                    std::vector<Slot> extras;
                                    for (size_t k = 0; k < side1.size(); k++)
                                        if (k != x && k != y) extras.push_back(side1[k]);
                                    for (size_t k = 0; k < side2.size(); k++)
                                        if (k != z && k != w) extras.push_back(side2[k]);
                                    if (extras.size() > 6) continue;
                                    Expr rel;
                                    int E = static_cast<int>(extras.size());
                                    for (int mask = 0; mask < (1 << E); mask++) {
                                        auto build = [&](const Slot& p, const Slot& q,
                                                         const Slot& r, const Slot& s,
                                                         const Rat& c) {
                                            Term nt;
                                            nt.coeff = c;
                                            nt.factors = ctx;
                                            Factor f1{0, {p, q, sa}};
                                            Factor f2{0, {sb, r, s}};
                                            for (int k = 0; k < E; k++)
                                                ((mask >> k) & 1 ? f1 : f2).slots.push_back(extras[k]);
                                            nt.factors.push_back(f1);
                                            nt.factors.push_back(f2);
                                            rel.add_term(std::move(nt));
                                        };
                                        build(side1[x], side1[y], side2[z], side2[w], Rat(1));
                                        build(side1[x], side2[z], side1[y], side2[w], Rat(-1));
                                    }
                                    if (!rel.is_zero()) out.push_back(rel);
                                }
                }
            }
        }
    }
    return out;
}

} // namespace

bool wdvv_member(const Expr& e, int closure_depth) {
    if (e.is_zero()) return true;
    std::map<std::string, int> col;
    auto colof = [&](const std::string& k) {
        auto it = col.find(k);
        if (it != col.end()) return it->second;
        int c = static_cast<int>(col.size());
        col.emplace(k, c);
        return c;
    };
    auto to_row = [&](const Expr& x) {
        std::map<int, Rat> m;
        for (auto& [k, t] : x.terms()) m[colof(k)] = t.coeff;
        SparseRow r(m.begin(), m.end());
        return r;
    };

    std::vector<Expr> rels;
    std::set<std::string> mined;
    std::vector<Term> frontier = e.term_list();
    for (int depth = 0; depth < closure_depth; depth++) {
        std::vector<Term> next;
        for (auto& t : frontier) {
            Term tc = t;
            std::string k = canonical_term_key(tc);
            if (!mined.insert(k).second) continue;
            for (auto& rel : wdvv_moves(tc)) {
                rels.push_back(rel);
                for (auto& [rk, rt] : rel.terms())
                    if (!mined.count(rk)) next.push_back(rt);
                if (rels.size() > 60000) break;
            }
            if (rels.size() > 60000) break;
        }
        frontier = std::move(next);
        if (rels.size() > 60000) break;
    }
    if (rels.empty()) return false;

    SparseRow target = to_row(e);  // fix columns for e first
    Rref rr(1 << 24);
    for (auto& rel : rels) rr.absorb(to_row(rel));
    return rr.member(target);
}

VerifyResult verify_identity(const Expr& lhs, const Expr& rhs, const RuleSet& rules,
                             const ReduceOptions& opts) {
    VerifyResult res;
    Expr diff = reduce(lhs - rhs, rules, opts);
    if (diff.is_zero()) {
        res.ok = true;
        return res;
    }
    res.residual = diff;
    if (wdvv_member(diff)) {
        res.ok = true;
        res.used_assoc_closure = true;
        return res;
    }
    return res;
}

// ---------------------------------------------------------------------------
// dictionary

Expr translate(const StrataVector& relation) {
    Expr out;
    for (auto& [code, coeff] : relation.coeffs) {
        DecoratedStratum s = stratum_from_code(code);
        if (s.graph.num_legs() != 1) throw InvalidInput("translate expects (g,1) strata");
        for (auto& ks : s.deco.kappa)
            if (!ks.empty()) throw InvalidInput("translate expects kappa-free strata");
        Term t;
        t.coeff = coeff;
        t.factors.resize(s.graph.num_vertices());
        for (int v = 0; v < s.graph.num_vertices(); v++) t.factors[v].genus = s.graph.genus[v];
        t.factors[s.graph.leg_vertex[0]].slots.push_back(Slot::w(s.deco.psi_leg[0]));
        for (int e = 0; e < s.graph.num_edges(); e++) {
            auto [a, b] = s.graph.edges[e];
            t.factors[a].slots.push_back(Slot::dummy(e, true, s.deco.psi_edge[e][0]));
            t.factors[b].slots.push_back(Slot::dummy(e, false, s.deco.psi_edge[e][1]));
        }
        out.add_term(std::move(t));
    }
    return out;
}

StrataVector translate_inverse(const Expr& e) {
    StrataVector out;
    for (auto& [key, t] : e.terms()) {
        StableGraph g;
        Decoration d;
        g.genus.resize(t.factors.size());
        d.kappa.resize(t.factors.size());
        std::map<int, std::vector<std::pair<int, int>>> pair_ends;  // id -> (vertex, tpow)
        int wcount = 0;
        for (size_t v = 0; v < t.factors.size(); v++) {
            g.genus[v] = t.factors[v].genus;
            for (auto& s : t.factors[v].slots) {
                if (s.kind == Slot::W) {
                    wcount++;
                    g.leg_vertex = {static_cast<int>(v)};
                    d.psi_leg = {s.tpow};
                } else if (s.kind == Slot::Dummy) {
                    pair_ends[s.id].push_back({static_cast<int>(v), s.tpow});
                } else {
                    throw InvalidInput("translate_inverse: slots must be T-powers of W or index pairs");
                }
            }
        }
        if (wcount != 1) throw InvalidInput("translate_inverse: exactly one W per term");
        for (auto& [id, ends] : pair_ends) {
            if (ends.size() != 2) throw InvalidInput("translate_inverse: unpaired index");
            g.edges.push_back({ends[0].first, ends[1].first});
            d.psi_edge.push_back({ends[0].second, ends[1].second});
        }
        if (!g.is_stable()) throw InvalidInput("translate_inverse: term is not a stable stratum");
        out.add_stratum(g, d, t.coeff);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON and pretty-printing

namespace {

Slot slot_from_json(const json& j, DeltaReading dr, int& fresh, std::vector<Slot>* expand_into);

std::vector<Slot> chain_from_json(const json& arr, DeltaReading dr, int& fresh) {
    std::vector<Slot> out;
    for (auto& ej : arr) {
        if (ej.contains("delta")) {
            int t = ej.value("t", 0);
            if (t != 0) throw InvalidInput("delta cannot carry T directly");
            if (dr == DeltaReading::Contraction) {
                int id = fresh++;
                out.push_back(Slot::dummy(id, true));
                out.push_back(Slot::dummy(id, false));
            } else {
                int id = fresh++;
                out.push_back(Slot::prod({Slot::dummy(id, true), Slot::dummy(id, false)}));
            }
            continue;
        }
        out.push_back(slot_from_json(ej, dr, fresh, nullptr));
    }
    return out;
}

Slot slot_from_json(const json& j, DeltaReading dr, int& fresh, std::vector<Slot>* expand_into) {
    int t = j.value("t", 0);
    if (j.contains("delta")) {
        if (t != 0) throw InvalidInput("delta cannot carry T directly");
        if (dr == DeltaReading::Contraction) {
            if (!expand_into) throw InvalidInput("paired delta not allowed inside a product");
            int id = fresh++;
            expand_into->push_back(Slot::dummy(id, true));
            return Slot::dummy(id, false);
        }
        int id = fresh++;
        return Slot::prod({Slot::dummy(id, true), Slot::dummy(id, false)});
    }
    if (j.contains("base")) {
        if (j.at("base").get<std::string>() != "W") throw InvalidInput("unknown base");
        return Slot::w(t);
    }
    if (j.contains("up")) return Slot::dummy(j.at("up").get<int>(), true, t);
    if (j.contains("down")) return Slot::dummy(j.at("down").get<int>(), false, t);
    if (j.contains("prod")) return Slot::prod(chain_from_json(j.at("prod"), dr, fresh), t);
    throw InvalidInput("bad slot json");
}

json slot_to_json(const Slot& s) {
    json j;
    if (s.tpow) j["t"] = s.tpow;
    switch (s.kind) {
        case Slot::W: j["base"] = "W"; break;
        case Slot::Dummy:
            if (s.up) j["up"] = s.id;
            else j["down"] = s.id;
            break;
        case Slot::Ext: throw InternalError("external atom in serialized expression");
        case Slot::Prod: {
            json arr = json::array();
            for (auto& c : s.chain) arr.push_back(slot_to_json(c));
            j["prod"] = arr;
            break;
        }
    }
    return j;
}

} // namespace

Expr expr_from_json(const json& j, DeltaReading dr) {
    Expr out;
    for (auto& tj : j.at("terms")) {
        Term t;
        t.coeff = rat_parse(tj.at("coeff").get<std::string>());
        int fresh = 1 << 20;
        for (auto& fj : tj.at("factors")) {
            Factor f;
            f.genus = fj.at("genus").get<int>();
            for (auto& sj : fj.at("slots")) f.slots.push_back(slot_from_json(sj, dr, fresh, &f.slots));
            t.factors.push_back(std::move(f));
        }
        out.add_term(std::move(t));
    }
    return out;
}

json expr_to_json(const Expr& e) {
    json terms = json::array();
    for (auto& [k, t] : e.terms()) {
        json tj;
        tj["coeff"] = rat_str(t.coeff);
        json fs = json::array();
        for (auto& f : t.factors) {
            json fj;
            fj["genus"] = f.genus;
            json ss = json::array();
            for (auto& s : f.slots) ss.push_back(slot_to_json(s));
            fj["slots"] = ss;
            fs.push_back(fj);
        }
        tj["factors"] = fs;
        terms.push_back(tj);
    }
    return json{{"terms", terms}};
}

namespace {

std::string pretty_slot(const Slot& s) {
    std::string inner;
    switch (s.kind) {
        case Slot::W: inner = "W"; break;
        case Slot::Dummy: inner = (s.up ? "g^" : "g_") + std::to_string(s.id + 1); break;
        case Slot::Ext: inner = "X" + std::to_string(s.id); break;
        case Slot::Prod: {
            inner = "{";
            for (size_t i = 0; i < s.chain.size(); i++) {
                if (i) inner += " o ";
                inner += pretty_slot(s.chain[i]);
            }
            inner += "}";
            break;
        }
    }
    if (s.tpow == 0) return inner;
    if (s.tpow == 1) return "T(" + inner + ")";
    return "T^" + std::to_string(s.tpow) + "(" + inner + ")";
}

} // namespace

std::string pretty(const Expr& e) {
    if (e.is_zero()) return "0";
    std::ostringstream out;
    bool first = true;
    for (auto& [k, t] : e.terms()) {
        Rat c = t.coeff;
        if (first) {
            if (c < 0) {
                out << "- ";
                c = -c;
            }
        } else {
            out << (c < 0 ? " - " : " + ");
            if (c < 0) c = -c;
        }
        first = false;
        if (c != 1) out << rat_str(c) << " ";
        for (auto& f : t.factors) {
            out << "<<";
            for (size_t i = 0; i < f.slots.size(); i++) {
                if (i) out << " ";
                out << pretty_slot(f.slots[i]);
            }
            out << ">>_" << f.genus << " ";
        }
    }
    std::string s = out.str();
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

RuleSet load_rules(const std::vector<std::string>& paths, DeltaReading dr) {
    RuleSet rs;
    for (auto& p : paths) {
        std::ifstream in(p);
        if (!in) throw InvalidInput("cannot open rule file " + p);
        json j;
        in >> j;
        Rule r;
        r.genus = j.at("genus").get<int>();
        r.tpow = j.at("tpow").get<int>();
        if (j.contains("rhs")) r.rhs = expr_from_json(j.at("rhs"), dr);
        rs.by_genus[r.genus] = std::move(r);
    }
    return rs;
}

} // namespace tautrec::gw
