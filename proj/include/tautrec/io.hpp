#pragma once

#include "tautrec/linalg.hpp"
#include "tautrec/stable_graph.hpp"
#include "tautrec/strata.hpp"

#include <json.hpp>

namespace tautrec {

using nlohmann::json;

json graph_to_json(const StableGraph& g);
StableGraph graph_from_json(const json& j);  // validates stability

json stratum_to_json(const DecoratedStratum& s);
DecoratedStratum stratum_from_json(const json& j);

/// [[hex code, "p/q"], ...] sorted by code.
json strata_vector_to_json(const StrataVector& v);
StrataVector strata_vector_from_json(const json& j);

json sparse_row_to_json(const SparseRow& r);
SparseRow sparse_row_from_json(const json& j);

/// Checkpoint layout: {"version":., "config":., "ncols":., "next_row":.,
/// "rows":[[pivot,[[col,"p/q"],...]],...]}
json rref_to_json(const Rref& r);
void rref_from_json(const json& j, Rref& r);

/// Write via temp file + rename so readers never see partial content.
void atomic_write(const std::string& path, const std::string& content);

} // namespace tautrec
