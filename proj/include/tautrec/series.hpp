#pragma once

#include "tautrec/rational.hpp"
#include "tautrec/stable_graph.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace tautrec {

/// Term of a truncated polynomial in T, named psi symbols, zeta variables
/// (reduced mod zeta^2 = 1) and optional per-vertex kappa monomials.
struct ZTerm {
    int t = 0;
    uint32_t zeta = 0;
    std::vector<int> psi;                  // exponent per psi symbol
    std::vector<std::vector<int>> kappa;   // sorted indices, per vertex
};

/// Sparse truncated polynomial; the coefficient ring is exact rationals.
/// Multiplication truncates above `order` in T and drops terms rejected by
/// an optional pruner (used for per-vertex dimension bounds).
class ZetaPoly {
public:
    ZetaPoly(int order, int npsi, int nvert)
        : order_(order), npsi_(npsi), nvert_(nvert) {}

    int order() const { return order_; }
    int npsi() const { return npsi_; }
    int nvert() const { return nvert_; }
    bool is_zero() const { return terms_.empty(); }
    size_t size() const { return terms_.size(); }

    static ZetaPoly one(int order, int npsi, int nvert);

    void add_term(const ZTerm& t, const Rat& c);
    ZetaPoly operator+(const ZetaPoly& o) const;
    ZetaPoly operator-(const ZetaPoly& o) const;
    ZetaPoly operator*(const ZetaPoly& o) const;

    using Pruner = std::function<bool(const ZTerm&)>;
    ZetaPoly mul(const ZetaPoly& o, const Pruner& keep) const;

    void for_each(const std::function<void(const ZTerm&, const Rat&)>& f) const;

    /// Coefficient of T^t with exact zeta word; psi/kappa parts of the
    /// matching terms are returned through for_each-style callback.
    void extract(int t, uint32_t zeta,
                 const std::function<void(const ZTerm&, const Rat&)>& f) const;

    Rat coeff(const ZTerm& t) const;

    bool operator==(const ZetaPoly& o) const {
        return order_ == o.order_ && npsi_ == o.npsi_ && nvert_ == o.nvert_ && terms_ == o.terms_;
    }

private:
    int order_, npsi_, nvert_;
    std::map<std::string, Rat> terms_;

    std::string key(const ZTerm& t) const;
    ZTerm unkey(const std::string& k) const;
};

/// (6n)! / ((3n)! (2n)!)
Rat series_a_coeff(int n);
/// (6n+1)/(6n-1) * (6n)!/((3n)!(2n)!)
Rat series_b_coeff(int n);

/// A(T) and B(T) truncated; plain univariate (no psi, no zeta).
ZetaPoly series_A(int order);
ZetaPoly series_B(int order);

/// Chat_a with T replaced by psi*T, zeta being the given vertex bit.
/// a must not be 2 mod 3.
ZetaPoly chat(int a, int psi_symbol, int zeta_bit, int order, int npsi, int nvert);

/// Edge factor: exact quotient of
///   A(z1 p1 T) z2 B(z2 p2 T) + z1 B(z1 p1 T) A(z2 p2 T) + z1 + z2
/// by (p1 + p2) T. Division is polynomial long division per (T, zeta)
/// component; any non-exact stage throws InternalError.
ZetaPoly edge_factor(int psi1, int psi2, int zeta_bit1, int zeta_bit2,
                     int order, int npsi, int nvert);

/// K_{n,a} symbol produced by the brace operation.
struct KappaSymbol {
    int n;        // T-power / kappa index
    int parity;   // 0 or 1
    auto operator<=>(const KappaSymbol&) const = default;
};

enum class KappaVariant { Printed, PerVertex };

/// Cycle-sum conversion of a product of brace symbols into per-vertex kappa
/// monomials with zeta parities; kappa_0 is replaced by the scalar
/// 2g(v)-2+n(v). Both bookkeeping variants produce identical output.
ZetaPoly kappa_hat(const std::vector<KappaSymbol>& symbols, const StableGraph& g,
                   int order, int npsi, KappaVariant variant = KappaVariant::Printed);

/// Brace expansion of Chat_sigma (no psi substitution): list of
/// (symbol, coefficient) pairs with symbol.n <= order.
std::vector<std::pair<KappaSymbol, Rat>> brace_chat(int sigma_part, int order);

/// Brace expansion of 1 - Chat_0 (the exponent of the kappa generating
/// factor); constant term cancels, so all symbols have n >= 1.
std::vector<std::pair<KappaSymbol, Rat>> brace_one_minus_chat0(int order);

} // namespace tautrec
