#pragma once

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forestmat/digraph.hpp"
#include "forestmat/error.hpp"
#include "forestmat/forest_enum.hpp"
#include "forestmat/forest_matrices.hpp"
#include "forestmat/io.hpp"
#include "forestmat/markov.hpp"
#include "forestmat/ranking.hpp"
#include "forestmat/structure.hpp"

namespace forestmat::cli {

struct result {
    int exit_code = 0;
    std::string output;
};

// exit codes: 0 ok, 2 parse/validation, 3 numeric non-convergence, 4 explosion guard
inline int exit_code_for(errc c) {
    switch (c) {
        case errc::explosion_guard: return 4;
        case errc::no_convergence:
        case errc::inconsistent_dimension:
        case errc::singular_matrix: return 3;
        default: return 2;
    }
}

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::parse_error, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline double forest_cap_from_env() {
    if (const char* env = std::getenv("FORESTMAT_MAX_FORESTS")) {
        char* end = nullptr;
        double v = std::strtod(env, &end);
        if (end != env && v > 0) return v;
    }
    return kDefaultForestCap;
}

template <typename T>
json envelope(const std::string& command, const digraph<T>& g, json result_body) {
    return json{{"command", command},
                {"digest", digraph_digest(g)},
                {"mode", scalar_traits<T>::is_exact ? "rational" : "float"},
                {"digraph", digraph_to_json(g)},
                {"result", std::move(result_body)}};
}

template <typename T>
json knots_to_json(const std::vector<std::vector<int>>& knots) {
    json arr = json::array();
    for (const auto& k : knots) arr.push_back(k);
    return arr;
}

template <typename T>
json cmd_jbar(const digraph<T>& g, const std::string& method, double cap) {
    const structure_decomposition dec = decompose(g);
    const forest_polynomial_t<T> poly = forest_polynomial(g);
    const int top = g.order() - dec.forest_dimension;

    matrix<T> entries;
    if (method == "polynomial") {
        entries = poly.q[top] / poly.sigma[top];
    } else if (method == "limit") {
        entries = matrix<T>(g.order(), g.order());
        const matrix<double> jd = jbar_via_limit(to_double_matrix(kirchhoff(g)));
        for (int i = 0; i < g.order(); ++i)
            for (int j = 0; j < g.order(); ++j) entries(i, j) = T(jd(i, j));
    } else if (method == "enumerate") {
        const forest_family<T> fam = max_out_forests_block(g, cap);
        matrix<T> acc(g.order(), g.order());
        for (const auto& f : fam.members) {
            std::vector<int> parent(g.order() + 1, 0);
            for (const auto& [t, h] : f.arcs) parent[h] = t;
            for (int v = 1; v <= g.order(); ++v)
                acc(v - 1, forest_root_of(parent, v) - 1) += f.weight;
        }
        entries = acc / fam.total_weight;
    } else {
        throw error(errc::parse_error, "unknown method '" + method + "'");
    }

    json body{{"jbar", matrix_to_json(entries)},
              {"sigma", sig12(to_double(poly.sigma[top]))},
              {"forest_dimension", dec.forest_dimension},
              {"knots", knots_to_json<T>(dec.knots)},
              {"method", method}};
    return envelope("jbar", g, std::move(body));
}

inline json bundle_to_json(const limit_bundle& b, long period) {
    return json{{"b_jbar", matrix_to_json(b.b_jbar)},
                {"b_resolvent", matrix_to_json(b.b_resolvent)},
                {"b_partial", matrix_to_json(b.b_partial)},
                {"k_used", b.k_used},
                {"partial_converged", b.partial_converged},
                {"resolvent_converged", b.resolvent_converged},
                {"period", period},
                {"gaps",
                 json{{"jbar_resolvent", sig12(b.gap_jbar_resolvent)},
                      {"jbar_partial", sig12(b.gap_jbar_partial)},
                      {"resolvent_partial", sig12(b.gap_resolvent_partial)}}}};
}

template <typename T>
json cmd_markov_digraph(const digraph<T>& g, const std::string& alpha_text) {
    if (alpha_text.empty())
        throw error(errc::alpha_out_of_range, "digraph input needs --alpha");
    const T alpha = parse_weight_text<T>(alpha_text);
    const markov_chain<T> chain = related_chain(g, alpha);

    markov_chain<double> dchain{to_double_matrix(chain.p), to_double(alpha), false};
    limit_bundle bundle = cesaro_limit(dchain);
    if constexpr (scalar_traits<T>::is_exact)
        bundle.b_jbar = to_double_matrix(jbar(digraph_from_chain(chain, T(1))).entries);

    json body = bundle_to_json(bundle, chain_period(dchain.p));
    body["alpha"] = sig12(to_double(alpha));
    return envelope("markov", g, std::move(body));
}

template <typename T>
json cmd_markov_matrix(const matrix<T>& p_in) {
    // CLI inputs may be off by up to 1e-9 per row; normalize to the exact
    // stochastic matrix before building chains.
    matrix<T> p = p_in;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        T row_sum(0);
        for (std::size_t j = 0; j < p.cols(); ++j) {
            if (to_double(p(i, j)) < -1e-9)
                throw error(errc::not_stochastic, "negative entry in row " + std::to_string(i + 1));
            row_sum += p(i, j);
        }
        if (std::abs(to_double(row_sum) - 1.0) > 1e-9)
            throw error(errc::not_stochastic, "row " + std::to_string(i + 1) + " sum off by " +
                                                  std::to_string(to_double(row_sum) - 1.0));
        for (std::size_t j = 0; j < p.cols(); ++j) p(i, j) = p(i, j) / row_sum;
    }
    markov_chain<T> chain{p, std::nullopt, false};
    markov_chain<double> dchain{to_double_matrix(p), std::nullopt, false};
    limit_bundle bundle = cesaro_limit(dchain);
    if constexpr (scalar_traits<T>::is_exact)
        bundle.b_jbar = to_double_matrix(jbar(digraph_from_chain(chain, T(1))).entries);

    std::string canon = "p " + std::to_string(p.rows()) + "\n";
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < p.cols(); ++j)
            canon += (j ? " " : "") + weight_repr(p_in(i, j));
        canon += "\n";
    }
    json pj = json::array();
    for (std::size_t i = 0; i < p.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < p.cols(); ++j) row.push_back(sig12(to_double(p_in(i, j))));
        pj.push_back(std::move(row));
    }
    json body = bundle_to_json(bundle, chain_period(dchain.p));
    return json{{"command", "markov"},
                {"digest", fnv1a_hex(canon)},
                {"mode", scalar_traits<T>::is_exact ? "rational" : "float"},
                {"transition_matrix", std::move(pj)},
                {"result", std::move(body)}};
}

template <typename T>
json cmd_structure(const digraph<T>& g) {
    const structure_report_t<T> rep = structure_report(g);
    json membership = json::array();
    for (int v = 1; v <= g.order(); ++v) {
        if (rep.knot_of[v] >= 0)
            membership.push_back(json{{"vertex", v}, {"knot", rep.knot_of[v] + 1}});
        else {
            json from = json::array();
            for (int k : rep.reachable_from_knots[v]) from.push_back(k + 1);
            membership.push_back(json{{"vertex", v}, {"reachable_from_knots", std::move(from)}});
        }
    }
    json body{{"knots", knots_to_json<T>(rep.knots)},
              {"permutation", rep.permutation},
              {"jbar_blocked", matrix_to_json(rep.jbar_blocked)},
              {"membership", std::move(membership)},
              {"reachability", bool_matrix_to_json(rep.reachability)},
              {"mutual_reachability", bool_matrix_to_json(rep.mutual_reachability)},
              {"block_shape_ok", rep.block_shape_ok}};
    return envelope("structure", g, std::move(body));
}

template <typename T>
json cmd_rank(const digraph<T>& g, unsigned long seed) {
    const ranking_result<T> r = aggregate_score(g);
    const proximity_audit_t audit = proximity_audit(g, seed);
    json basis = json::array();
    for (const auto& x : r.basis) basis.push_back(vector_to_json(x));
    json tws = json::array();
    for (const auto& tw : r.tree_weights) tws.push_back(vector_to_json(tw));
    json order = json::array();
    for (const auto& grp : r.order) order.push_back(grp);
    json audit_json = json::array();
    for (const auto& e : audit.entries) {
        json item{{"condition", e.condition}, {"verdict", verdict_name(e.result)}};
        if (e.result == verdict::fails) {
            item["witness"] = e.witness;
            item["detail"] = e.witness_detail;
        }
        audit_json.push_back(std::move(item));
    }
    json body{{"basis", std::move(basis)},
              {"tree_weights", std::move(tws)},
              {"aggregate", vector_to_json(r.aggregate)},
              {"order", std::move(order)},
              {"lt_residual", sig12(r.lt_residual)},
              {"audit", std::move(audit_json)},
              {"audit_sampled", audit.sampled}};
    return envelope("rank", g, std::move(body));
}

template <typename T>
json cmd_forests(const digraph<T>& g, int k, double cap) {
    const forest_family<T> fam = enumerate_forests(g, k, cap);
    json members = json::array();
    for (const auto& f : fam.members) {
        json arcs = json::array();
        for (const auto& [t, h] : f.arcs) arcs.push_back({t, h});
        members.push_back(json{{"arcs", std::move(arcs)},
                               {"roots", f.roots},
                               {"weight", sig12(to_double(f.weight))}});
    }
    json body{{"k", k},
              {"count", fam.members.size()},
              {"total_weight", sig12(to_double(fam.total_weight))},
              {"forests", std::move(members)}};
    return envelope("forests", g, std::move(body));
}

template <typename T>
json cmd_reach(const digraph<T>& g, const std::string& tau_text) {
    const T tau = tau_text.empty() ? T(1) : parse_weight_text<T>(tau_text);
    auto r = reachability_matrix(g, tau);
    auto m = mutual_reachability_matrix(g, tau);
    json body{{"tau", sig12(to_double(tau))},
              {"reachability", bool_matrix_to_json(r)},
              {"mutual_reachability", bool_matrix_to_json(m)}};
    return envelope("reach", g, std::move(body));
}

template <typename T>
json dispatch(const std::string& command, const std::string& input_text,
              const std::string& alpha_text, const std::string& tau_text, int k,
              unsigned long seed, const std::string& method, double cap) {
    if (command == "markov" && detect_input_kind(input_text) == 'p') {
        std::istringstream in(input_text);
        return cmd_markov_matrix<T>(parse_matrix_file<T>(in));
    }
    const digraph<T> g = [&] {
        auto parsed = parse_digraph_string<T>(input_text);
        if (parsed.order() <= 1) throw error(errc::parse_error, "need at least 2 vertices");
        return parsed;
    }();
    if (command == "jbar") return cmd_jbar(g, method, cap);
    if (command == "markov") return cmd_markov_digraph(g, alpha_text);
    if (command == "structure") return cmd_structure(g);
    if (command == "rank") return cmd_rank(g, seed);
    if (command == "forests") return cmd_forests(g, k, cap);
    if (command == "reach") return cmd_reach(g, tau_text);
    throw error(errc::parse_error, "unknown command '" + command + "'");
}

} // namespace detail

inline result run(std::vector<std::string> args) {
    CLI::App app{"forest matrices of weighted digraphs"};
    app.require_subcommand(1);

    std::string input_path, alpha_text, tau_text, method = "polynomial";
    int k = 0;
    unsigned long seed = 1;
    bool exact = false;

    auto add_common = [&](CLI::App* sub, bool needs_input = true) {
        if (needs_input) sub->add_option("input", input_path, "input file")->required();
        sub->add_flag("--exact", exact, "exact rational arithmetic");
    };
    CLI::App* jbar_cmd = app.add_subcommand("jbar", "normalized matrix of maximum out forests");
    add_common(jbar_cmd);
    jbar_cmd->add_option("--method", method, "polynomial|limit|enumerate")
        ->check(CLI::IsMember({"polynomial", "limit", "enumerate"}));
    CLI::App* markov_cmd = app.add_subcommand("markov", "Cesaro limits of a related chain");
    add_common(markov_cmd);
    markov_cmd->add_option("--alpha", alpha_text, "alpha for P = I - alpha L");
    CLI::App* structure_cmd = app.add_subcommand("structure", "knots and block form");
    add_common(structure_cmd);
    CLI::App* rank_cmd = app.add_subcommand("rank", "score vectors and proximity audit");
    add_common(rank_cmd);
    rank_cmd->add_option("--seed", seed, "seed for sampled audit scans");
    CLI::App* forests_cmd = app.add_subcommand("forests", "enumerate k-arc forests");
    add_common(forests_cmd);
    forests_cmd->add_option("--k", k, "arc count")->required();
    CLI::App* reach_cmd = app.add_subcommand("reach", "reachability via the resolvent");
    add_common(reach_cmd);
    reach_cmd->add_option("--tau", tau_text, "resolvent parameter (default 1)");

    std::vector<const char*> argv;
    argv.push_back("forestmat");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return {0, app.help()};
    } catch (const CLI::ParseError& e) {
        return {2, std::string("error: ") + e.what() + "\n"};
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const double cap = detail::forest_cap_from_env();
    try {
        const std::string input_text = detail::read_file(input_path);
        json report = exact ? detail::dispatch<rational>(command, input_text, alpha_text,
                                                         tau_text, k, seed, method, cap)
                            : detail::dispatch<double>(command, input_text, alpha_text, tau_text,
                                                       k, seed, method, cap);
        return {0, report.dump(2) + "\n"};
    } catch (const error& e) {
        return {exit_code_for(e.code()), std::string("error: ") + e.what() + "\n"};
    } catch (const std::exception& e) {
        return {1, std::string("error: ") + e.what() + "\n"};
    }
}

} // namespace forestmat::cli
