#include "tautrec/io.hpp"

#include "tautrec/errors.hpp"

#include <cstdio>
#include <fstream>

namespace tautrec {

json graph_to_json(const StableGraph& g) {
    json j;
    j["vertices"] = json::array();
    for (int gv : g.genus) j["vertices"].push_back({{"genus", gv}});
    j["legs"] = json::object();
    for (int l = 0; l < g.num_legs(); l++) j["legs"][std::to_string(l + 1)] = g.leg_vertex[l];
    j["edges"] = json::array();
    for (auto& [a, b] : g.edges) j["edges"].push_back({a, b});
    return j;
}

StableGraph graph_from_json(const json& j) {
    StableGraph g;
    for (auto& v : j.at("vertices")) g.genus.push_back(v.at("genus").get<int>());
    int n = static_cast<int>(j.at("legs").size());
    g.leg_vertex.assign(n, -1);
    for (auto& [k, v] : j.at("legs").items()) {
        int mark = std::stoi(k);
        if (mark < 1 || mark > n) throw InvalidInput("marking indices must be 1..n");
        g.leg_vertex[mark - 1] = v.get<int>();
    }
    for (auto& e : j.at("edges")) g.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    if (!g.is_stable()) throw InvalidInput("graph is not a stable graph");
    return g;
}

json stratum_to_json(const DecoratedStratum& s) {
    json j = graph_to_json(s.graph);
    j["kappa"] = s.deco.kappa;
    json phe = json::object();
    for (int e = 0; e < s.graph.num_edges(); e++) {
        for (int side = 0; side < 2; side++) {
            int p = s.deco.psi_edge[e][side];
            if (p) phe[std::to_string(e) + ":" + std::to_string(side)] = p;
        }
    }
    j["psi_half_edges"] = phe;
    json pl = json::object();
    for (int l = 0; l < s.graph.num_legs(); l++)
        if (s.deco.psi_leg[l]) pl[std::to_string(l + 1)] = s.deco.psi_leg[l];
    j["psi_legs"] = pl;
    j["code"] = code_to_hex(s.code);
    return j;
}

DecoratedStratum stratum_from_json(const json& j) {
    StableGraph g = graph_from_json(j);
    Decoration d = Decoration::empty(g);
    if (j.contains("kappa")) d.kappa = j.at("kappa").get<std::vector<std::vector<int>>>();
    if (d.kappa.size() != static_cast<size_t>(g.num_vertices()))
        throw InvalidInput("kappa list size mismatch");
    if (j.contains("psi_half_edges")) {
        for (auto& [k, v] : j.at("psi_half_edges").items()) {
            auto colon = k.find(':');
            if (colon == std::string::npos) throw InvalidInput("bad half-edge key");
            int e = std::stoi(k.substr(0, colon));
            int side = std::stoi(k.substr(colon + 1));
            if (e < 0 || e >= g.num_edges() || side < 0 || side > 1)
                throw InvalidInput("half-edge key out of range");
            d.psi_edge[e][side] = v.get<int>();
        }
    }
    if (j.contains("psi_legs")) {
        for (auto& [k, v] : j.at("psi_legs").items()) {
            int mark = std::stoi(k);
            if (mark < 1 || mark > g.num_legs()) throw InvalidInput("psi leg out of range");
            d.psi_leg[mark - 1] = v.get<int>();
        }
    }
    auto s = make_stratum(g, d);
    if (!s) throw InvalidInput("decoration violates a dimension bound");
    return *s;
}

json strata_vector_to_json(const StrataVector& v) {
    json j = json::array();
    for (auto& [c, x] : v.coeffs) j.push_back({code_to_hex(c), rat_str(x)});
    return j;
}

StrataVector strata_vector_from_json(const json& j) {
    StrataVector v;
    for (auto& e : j) v.add(code_from_hex(e.at(0).get<std::string>()), rat_parse(e.at(1).get<std::string>()));
    return v;
}

json sparse_row_to_json(const SparseRow& r) {
    json j = json::array();
    for (auto& [c, x] : r) j.push_back({c, rat_str(x)});
    return j;
}

SparseRow sparse_row_from_json(const json& j) {
    SparseRow r;
    for (auto& e : j) r.push_back({e.at(0).get<int>(), rat_parse(e.at(1).get<std::string>())});
    return r;
}

json rref_to_json(const Rref& r) {
    json rows = json::array();
    for (auto& [pivot, row] : r.rows()) rows.push_back({pivot, sparse_row_to_json(row)});
    return json{{"ncols", r.ncols()}, {"rows", rows}};
}

void rref_from_json(const json& j, Rref& r) {
    if (j.at("ncols").get<int>() != r.ncols()) throw InvalidInput("checkpoint column count mismatch");
    for (auto& e : j.at("rows")) {
        SparseRow row = sparse_row_from_json(e.at(1));
        if (row.empty() || row.front().first != e.at(0).get<int>() || row.front().second != 1)
            throw InvalidInput("corrupt checkpoint row");
        if (!r.absorb(row)) throw InvalidInput("redundant checkpoint row");
    }
}

void atomic_write(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidInput("cannot write " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw InvalidInput("cannot rename " + tmp + " -> " + path);
}

} // namespace tautrec
