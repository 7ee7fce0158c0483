#pragma once

#include <gmpxx.h>
#include <string>

namespace tautrec {

// Exact rational scalar used throughout. mpq_class keeps values canonical
// (reduced, positive denominator) as long as string construction goes
// through rat_parse.
using Rat = mpq_class;

/// Render as "p/q", or "p" when the denominator is 1.
std::string rat_str(const Rat& r);

/// Parse "p", "p/q" or "-p/q"; throws std::invalid_argument on junk.
Rat rat_parse(const std::string& s);

inline Rat rat_int(long v) { return Rat(v); }

/// p/q as a fraction of machine integers (convenience for literals in tests).
inline Rat frac(long p, long q) {
    Rat r(p, q);
    r.canonicalize();
    return r;
}

} // namespace tautrec
