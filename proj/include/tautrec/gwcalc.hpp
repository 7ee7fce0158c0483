#pragma once

#include "tautrec/rational.hpp"
#include "tautrec/strata.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tautrec::gw {

using nlohmann::json;
using tautrec::Rat;

/// One insertion slot: tpow applications of the descendant operator T to a
/// payload. Payload kinds:
///   W     - the generic vector field of the identity being manipulated
///   Dummy - one end of an eta-contracted index pair (id shared, up/down)
///   Ext   - opaque external atom used while reducing one factor in
///           isolation; never appears in user-facing expressions
///   Prod  - quantum product chain, left associated: [a,b,c] = (a o b) o c
struct Slot {
    enum Kind { W, Dummy, Ext, Prod };
    int tpow = 0;
    Kind kind = W;
    bool up = true;
    int id = -1;
    std::vector<Slot> chain;

    static Slot w(int t = 0) { return Slot{t, W, true, -1, {}}; }
    static Slot dummy(int pair, bool raised, int t = 0) { return Slot{t, Dummy, raised, pair, {}}; }
    static Slot ext(int idx, int t = 0) { return Slot{t, Ext, true, idx, {}}; }
    static Slot prod(std::vector<Slot> parts, int t = 0) {
        return Slot{t, Prod, true, -1, std::move(parts)};
    }
    bool operator==(const Slot&) const = default;
};

struct Factor {
    int genus = 0;
    std::vector<Slot> slots;
    bool operator==(const Factor&) const = default;
};

struct Term {
    Rat coeff;
    std::vector<Factor> factors;
};

/// Formal sum of correlator products, kept in canonical form: slots sorted
/// within factors, factors sorted, dummy pairs renumbered by first
/// occurrence and oriented (up first), like terms merged.
class Expr {
public:
    Expr() = default;
    explicit Expr(std::vector<Term> ts) { for (auto& t : ts) add_term(std::move(t)); }

    void add_term(Term t);
    void add(const Expr& o);
    Expr operator+(const Expr& o) const;
    Expr operator-(const Expr& o) const;
    Expr scaled(const Rat& r) const;
    /// Tensor product: factor lists concatenate; dummy ids are kept apart.
    Expr operator*(const Expr& o) const;

    bool is_zero() const { return terms_.empty(); }
    size_t size() const { return terms_.size(); }
    const std::map<std::string, Term>& terms() const { return terms_; }
    std::vector<Term> term_list() const;

    bool operator==(const Expr& o) const;

private:
    std::map<std::string, Term> terms_;  // canonical key -> canonical term
};

Expr expr_from_term(Term t);
Expr single(const Rat& c, int genus, std::vector<Slot> slots);

/// Canonical byte key of one term (coefficient excluded).
std::string canonical_term_key(Term& t);

/// Covariant derivative in direction `dir` (any insertion slot): appends
/// the direction by the product rule and expands wrapper derivatives of T
/// and of quantum products.
Expr differentiate(const Expr& e, const Slot& dir);

/// Descendant-elimination rule for one genus: <<T^tpow(W)>>_genus = rhs.
struct Rule {
    int genus = 0;
    int tpow = 0;
    Expr rhs;  // W is the pattern variable
};

struct RuleSet {
    std::map<int, Rule> by_genus;  // genus >= 1
    int max_genus() const { return by_genus.empty() ? 0 : by_genus.rbegin()->first; }
};

struct ReduceOptions {
    long budget = 200000000;  // coarse work units
    int scope_max_genus = 99; // rules above this genus are not applied
    uint64_t shuffle_seed = 0; // nonzero: randomize scan order (confluence tests)
};

struct ReduceStats {
    long steps = 0;
};

/// Normal form: quantum products expanded into genus-0 three-point factors,
/// genus-0 descendant slots eliminated, genus-g descendant powers at or
/// above the rule threshold eliminated. Throws InternalError with a trace
/// when the step budget is exhausted.
Expr reduce(const Expr& e, const RuleSet& rules, const ReduceOptions& opts = {},
            ReduceStats* stats = nullptr);

struct VerifyResult {
    bool ok = false;
    bool used_assoc_closure = false;  // equality needed the WDVV span step
    Expr residual;                    // empty when ok
};

/// reduce(lhs - rhs); when the residual is nonzero, tries to express it in
/// the span of quantum-product associativity (WDVV) relations at the same
/// shapes before giving a verdict.
VerifyResult verify_identity(const Expr& lhs, const Expr& rhs, const RuleSet& rules,
                             const ReduceOptions& opts = {});

/// Is `e` inside the WDVV span at its own shapes? Used by verify_identity.
bool wdvv_member(const Expr& e, int closure_depth = 3);

/// Strata-to-correlator dictionary on (g,1): one factor per vertex, a
/// contracted dummy pair per edge, W on leg 1, psi exponents becoming T
/// powers. Rejects kappa decorations.
Expr translate(const StrataVector& relation);

/// Inverse dictionary: each term must be a product of correlators whose
/// slots are T-powers of W (exactly one across the term) and dummy pairs.
StrataVector translate_inverse(const Expr& e);

enum class DeltaReading { Contraction, Alt };

Expr expr_from_json(const json& j, DeltaReading dr = DeltaReading::Contraction);
json expr_to_json(const Expr& e);
std::string pretty(const Expr& e);

RuleSet load_rules(const std::vector<std::string>& paths, DeltaReading dr = DeltaReading::Contraction);

} // namespace tautrec::gw
