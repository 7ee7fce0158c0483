#include "tautrec/errors.hpp"
#include "tautrec/gwcalc.hpp"
#include "tautrec/io.hpp"
#include "tautrec/linalg.hpp"
#include "tautrec/pixton.hpp"
#include "tautrec/series.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace tautrec::cli {

namespace fs = std::filesystem;
namespace gwc = tautrec::gw;

constexpr const char* kVersion = "0.1.0";

struct JobConfig {
    std::string command;
    int g = 0, n = 0, r = 0;
    std::vector<int> sigma, a;
    int threads = 1;
    std::string cache_dir;
    long checkpoint_every = 500;
    std::string kappa_variant = "printed";
    std::string delta_reading = "contraction";
    std::string rules_dir = "data";

    json to_json() const {
        return json{{"command", command},
                    {"g", g},
                    {"n", n},
                    {"r", r},
                    {"sigma", sigma},
                    {"a", a},
                    {"kappa_variant", kappa_variant},
                    {"delta_reading", delta_reading}};
    }
    KappaVariant variant() const {
        if (kappa_variant == "printed") return KappaVariant::Printed;
        if (kappa_variant == "per-vertex") return KappaVariant::PerVertex;
        throw InvalidInput("unknown kappa variant: " + kappa_variant);
    }
    gwc::DeltaReading delta() const {
        if (delta_reading == "contraction") return gwc::DeltaReading::Contraction;
        if (delta_reading == "alt") return gwc::DeltaReading::Alt;
        throw InvalidInput("unknown delta reading: " + delta_reading);
    }
    /// cache key: parameters that change mathematical output, plus version
    std::string cache_key() const {
        std::string s = command + "|" + std::to_string(g) + "," + std::to_string(n) + "," +
                        std::to_string(r) + "|" + kappa_variant + "|" + delta_reading + "|" +
                        kVersion;
        uint64_t h = 1469598103934665603ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
};

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::trunc);
    if (!file) throw InvalidInput("cannot open output file " + path);
    return file;
}

void emit_header(std::ostream& out, const JobConfig& cfg) {
    out << json{{"config", cfg.to_json()}, {"version", kVersion}}.dump() << "\n";
}

int cmd_graphs(const JobConfig& cfg, const std::string& out_path) {
    std::ofstream f;
    std::ostream& out = open_output(out_path, f);
    emit_header(out, cfg);
    auto graphs = enumerate_stable_graphs(cfg.g, cfg.n);
    for (auto& g : graphs) {
        out << json{{"graph", graph_to_json(g)},
                    {"code", code_to_hex(canonical_code(g))},
                    {"aut", automorphism_count(g)}}
                   .dump()
            << "\n";
    }
    out << json{{"count", graphs.size()}}.dump() << "\n";
    return 0;
}

int cmd_basis(const JobConfig& cfg, const std::string& out_path) {
    std::ofstream f;
    std::ostream& out = open_output(out_path, f);
    emit_header(out, cfg);
    auto basis = strata_basis(cfg.g, cfg.n, cfg.r);
    for (auto& s : basis) out << json{{"stratum", stratum_to_json(s)}}.dump() << "\n";
    out << json{{"count", basis.size()}, {"kappa_block", kappa_block_size(basis)}}.dump() << "\n";
    return 0;
}

int cmd_pixton(const JobConfig& cfg, const std::string& out_path) {
    PixtonInput in;
    in.g = cfg.g;
    in.n = cfg.n;
    in.r = cfg.r;
    in.sigma = cfg.sigma;
    in.a = cfg.a;
    if (in.a.empty()) in.a.assign(cfg.n, 0);
    StrataVector rel = pixton_relation(in, cfg.variant());
    std::ofstream f;
    std::ostream& out = open_output(out_path, f);
    emit_header(out, cfg);
    out << json{{"relation", strata_vector_to_json(rel)}}.dump() << "\n";
    return 0;
}

int cmd_rows(const JobConfig& cfg, const std::string& out_path) {
    std::ofstream f;
    std::ostream& out = open_output(out_path, f);
    emit_header(out, cfg);
    long total = for_each_relation_row(cfg.g, cfg.n, cfg.r, cfg.variant(),
                                       [&](long index, const StrataVector& row) {
                                           out << json::array({index, strata_vector_to_json(row)}).dump()
                                               << "\n";
                                       });
    out << json{{"rows", total}}.dump() << "\n";
    return 0;
}

struct DeriveResult {
    BasisIndex bi;
    Rref rref{0};
    long rows = 0;
};

// streaming elimination with optional resumable checkpointing
DeriveResult run_reduction(const JobConfig& cfg) {
    DeriveResult res{BasisIndex::build(cfg.g, cfg.n, cfg.r), Rref(0)};
    res.rref = Rref(static_cast<int>(res.bi.basis.size()), cfg.threads);

    fs::path ckpt;
    long start_index = 0;
    if (!cfg.cache_dir.empty()) {
        fs::create_directories(cfg.cache_dir);
        ckpt = fs::path(cfg.cache_dir) / (cfg.cache_key() + ".checkpoint.json");
        if (fs::exists(ckpt)) {
            std::ifstream in(ckpt);
            json j;
            try {
                in >> j;
                if (j.at("config") != cfg.to_json()) throw InvalidInput("checkpoint config mismatch");
                rref_from_json(j.at("rref"), res.rref);
                start_index = j.at("next_row").get<long>();
            } catch (const std::exception& e) {
                throw InvalidInput(std::string("corrupt checkpoint ") + ckpt.string() + ": " +
                                   e.what());
            }
            std::cerr << "resuming from checkpoint at row " << start_index << "\n";
        }
    }

    auto save = [&](long next) {
        if (ckpt.empty()) return;
        json j{{"config", cfg.to_json()},
               {"version", kVersion},
               {"next_row", next},
               {"rref", rref_to_json(res.rref)}};
        atomic_write(ckpt.string(), j.dump());
    };

    long last_saved = start_index;
    res.rows = for_each_relation_row(
        cfg.g, cfg.n, cfg.r, cfg.variant(),
        [&](long index, const StrataVector& row) {
            res.rref.absorb(res.bi.to_row(row));
            if (!ckpt.empty() && cfg.checkpoint_every > 0 &&
                index + 1 - last_saved >= cfg.checkpoint_every) {
                save(index + 1);
                last_saved = index + 1;
            }
        },
        start_index);
    save(res.rows);
    return res;
}

Code psi_power_code(int g, int r) {
    StableGraph sm;
    sm.genus = {g};
    sm.leg_vertex = {0};
    Decoration d = Decoration::empty(sm);
    d.psi_leg[0] = r;
    auto s = make_stratum(sm, d);
    if (!s) throw InvalidInput("psi power exceeds the dimension bound");
    return s->code;
}

int cmd_derive(JobConfig cfg, const std::string& out_path) {
    if (cfg.n != 1) throw InvalidInput("derive expects n = 1");
    if (cfg.r == 0) cfg.r = cfg.g;
    DeriveResult res = run_reduction(cfg);
    auto kfree = kappa_free_relations(res.rref, res.bi);

    std::ofstream f;
    std::ostream& out = open_output(out_path, f);
    emit_header(out, cfg);
    out << json{{"rows", res.rows},
                {"rank", res.rref.rank()},
                {"kappa_free_count", kfree.size()}}
               .dump()
        << "\n";
    for (auto& rel : kfree) out << json{{"kappa_free", strata_vector_to_json(rel)}}.dump() << "\n";

    auto solved = solve_for(psi_power_code(cfg.g, cfg.r), kfree, res.bi);
    if (!solved) {
        out << json{{"solved", nullptr}}.dump() << "\n";
        std::cerr << "psi_1^" << cfg.r << " is not determined by the relation set\n";
        return 1;
    }
    out << json{{"solved", strata_vector_to_json(*solved)}}.dump() << "\n";
    gwc::Expr corr = gwc::translate(*solved);
    out << json{{"correlator", gwc::expr_to_json(corr)}}.dump() << "\n";
    out << json{{"pretty", gwc::pretty(corr)}}.dump() << "\n";
    return 0;
}

int cmd_rank(const JobConfig& cfg, const std::string& out_path) {
    DeriveResult res = run_reduction(cfg);
    std::ofstream f;
    std::ostream& out = open_output(out_path, f);
    emit_header(out, cfg);
    out << json{{"rows", res.rows},
                {"rank", res.rref.rank()},
                {"kappa_free_count", kappa_free_relations(res.rref, res.bi).size()},
                {"basis", res.bi.basis.size()},
                {"kappa_block", res.bi.kappa_block}}
               .dump()
        << "\n";
    return 0;
}

int cmd_translate(const JobConfig& cfg, const std::string& in_path, const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) throw InvalidInput("cannot open " + in_path);
    StrataVector rel;
    std::string line;
    bool found = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.is_object() && j.contains("solved") && !j.at("solved").is_null()) {
            rel = strata_vector_from_json(j.at("solved"));
            found = true;
        } else if (j.is_object() && j.contains("relation")) {
            rel = strata_vector_from_json(j.at("relation"));
            found = true;
        } else if (j.is_array() && !j.empty() && j[0].is_array()) {
            rel = strata_vector_from_json(j);
            found = true;
        }
    }
    if (!found) throw InvalidInput("no relation found in " + in_path);
    gwc::Expr corr = gwc::translate(rel);
    std::ofstream f;
    std::ostream& out = open_output(out_path, f);
    emit_header(out, cfg);
    out << json{{"correlator", gwc::expr_to_json(corr)}}.dump() << "\n";
    out << json{{"pretty", gwc::pretty(corr)}}.dump() << "\n";
    return 0;
}

int cmd_verify(const JobConfig& cfg, const std::string& in_path, const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) throw InvalidInput("cannot open identity file " + in_path);
    json j;
    in >> j;
    gwc::Expr lhs = gwc::expr_from_json(j.at("lhs"), cfg.delta());
    gwc::Expr rhs = gwc::expr_from_json(j.at("rhs"), cfg.delta());
    std::vector<std::string> rule_paths;
    for (int g = 0; g <= 3; g++) {
        std::string p = cfg.rules_dir + "/rules/trr_genus" + std::to_string(g) + ".json";
        if (fs::exists(p)) rule_paths.push_back(p);
    }
    gwc::RuleSet rules = gwc::load_rules(rule_paths, cfg.delta());
    auto res = gwc::verify_identity(lhs, rhs, rules);
    std::ofstream f;
    std::ostream& out = open_output(out_path, f);
    emit_header(out, cfg);
    out << json{{"pass", res.ok},
                {"assoc_closure_used", res.used_assoc_closure},
                {"residual", res.ok ? json(nullptr) : gwc::expr_to_json(res.residual)},
                {"residual_pretty", res.ok ? "" : gwc::pretty(res.residual)}}
               .dump()
        << "\n";
    return res.ok ? 0 : 1;
}

int run(int argc, char** argv) {
    CLI::App app{"exact derivation of topological recursion relations from 3-spin relations"};
    app.require_subcommand(1);

    JobConfig cfg;
    if (const char* env = std::getenv("TAUTREC_CACHE_DIR")) cfg.cache_dir = env;
    std::string out_path, in_path, sigma_str, a_str;

    auto add_common = [&](CLI::App* sub, bool needs_r) {
        sub->add_option("--g", cfg.g, "genus")->required();
        sub->add_option("--n", cfg.n, "number of legs")->required();
        if (needs_r) sub->add_option("--r", cfg.r, "codimension")->required();
        sub->add_option("--threads", cfg.threads, "worker threads");
        sub->add_option("--cache-dir", cfg.cache_dir, "cache/checkpoint directory");
        sub->add_option("--checkpoint-every", cfg.checkpoint_every, "rows between checkpoints");
        sub->add_option("--kappa-variant", cfg.kappa_variant, "printed|per-vertex");
        sub->add_option("--delta-reading", cfg.delta_reading, "contraction|alt");
        sub->add_option("--out", out_path, "output file (default stdout)");
    };

    auto* graphs = app.add_subcommand("graphs", "enumerate stable graphs");
    add_common(graphs, false);
    auto* basis = app.add_subcommand("basis", "decorated strata basis");
    add_common(basis, true);
    auto* pixton = app.add_subcommand("pixton", "one relation class");
    add_common(pixton, true);
    pixton->add_option("--sigma", sigma_str, "partition, comma separated");
    pixton->add_option("--a", a_str, "per-leg values, comma separated");
    auto* rows = app.add_subcommand("rows", "relation row stream");
    add_common(rows, true);
    auto* derive = app.add_subcommand("derive", "kappa-free recursion relations");
    derive->add_option("--g", cfg.g, "genus")->required();
    derive->add_option("--n", cfg.n, "number of legs")->required();
    derive->add_option("--r", cfg.r, "codimension (default g)");
    derive->add_option("--threads", cfg.threads, "worker threads");
    derive->add_option("--cache-dir", cfg.cache_dir, "cache/checkpoint directory");
    derive->add_option("--checkpoint-every", cfg.checkpoint_every, "rows between checkpoints");
    derive->add_option("--kappa-variant", cfg.kappa_variant, "printed|per-vertex");
    derive->add_option("--delta-reading", cfg.delta_reading, "contraction|alt");
    derive->add_option("--out", out_path, "output file (default stdout)");
    auto* rank = app.add_subcommand("rank", "rank report of the relation matrix");
    add_common(rank, true);
    auto* translate = app.add_subcommand("translate", "strata relation to correlators");
    translate->add_option("--in", in_path, "relation file")->required();
    translate->add_option("--out", out_path, "output file (default stdout)");
    translate->add_option("--delta-reading", cfg.delta_reading, "contraction|alt");
    auto* verify = app.add_subcommand("verify", "check a correlator identity");
    verify->add_option("--in", in_path, "identity file with lhs/rhs")->required();
    verify->add_option("--rules-dir", cfg.rules_dir, "directory containing rules/");
    verify->add_option("--delta-reading", cfg.delta_reading, "contraction|alt");
    verify->add_option("--out", out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    auto parse_ints = [](const std::string& s) {
        std::vector<int> out;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) out.push_back(std::stoi(tok));
        return out;
    };
    cfg.sigma = parse_ints(sigma_str);
    cfg.a = parse_ints(a_str);

    if (graphs->parsed()) {
        cfg.command = "graphs";
        return cmd_graphs(cfg, out_path);
    }
    if (basis->parsed()) {
        cfg.command = "basis";
        return cmd_basis(cfg, out_path);
    }
    if (pixton->parsed()) {
        cfg.command = "pixton";
        return cmd_pixton(cfg, out_path);
    }
    if (rows->parsed()) {
        cfg.command = "rows";
        return cmd_rows(cfg, out_path);
    }
    if (derive->parsed()) {
        cfg.command = "derive";
        return cmd_derive(cfg, out_path);
    }
    if (rank->parsed()) {
        cfg.command = "rank";
        return cmd_rank(cfg, out_path);
    }
    if (translate->parsed()) {
        cfg.command = "translate";
        return cmd_translate(cfg, in_path, out_path);
    }
    if (verify->parsed()) {
        cfg.command = "verify";
        return cmd_verify(cfg, in_path, out_path);
    }
    return 2;
}

} // namespace tautrec::cli

int main(int argc, char** argv) {
    try {
        return tautrec::cli::run(argc, argv);
    } catch (const tautrec::InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const tautrec::InternalError& e) {
        std::cerr << "internal inconsistency: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
