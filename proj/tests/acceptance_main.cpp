// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "forestmat/cli.hpp"
#include "forestmat/forestmat.hpp"
#include "forestmat/io.hpp"
#include "testutil.hpp"

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s  criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    if (!pass) ++failures;
}

void run_criterion(int criterion, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        auto [pass, detail] = body();
        report(criterion, pass, detail);
    } catch (const std::exception& e) {
        report(criterion, false, std::string("exception: ") + e.what());
    }
}

// the displayed 13x13 matrix: four row archetypes over the two knots
fm::matrix<double> expected_jbar13() {
    const std::map<int, double> rowA = {{3, 0.2690}, {6, 0.4572}, {10, 0.2738}};
    const std::map<int, double> rowB = {{4, 0.2709}, {7, 0.2573}, {11, 0.2573}, {13, 0.2144}};
    const std::map<int, double> row19 = {{3, 0.1432}, {4, 0.1267}, {6, 0.2434}, {7, 0.1203},
                                         {10, 0.1458}, {11, 0.1203}, {13, 0.1003}};
    const std::map<int, double> row5 = {{3, 0.0916}, {4, 0.1786}, {6, 0.1557}, {7, 0.1697},
                                        {10, 0.0932}, {11, 0.1697}, {13, 0.1414}};
    fm::matrix<double> m(13, 13);
    for (int i = 1; i <= 13; ++i) {
        const std::map<int, double>* src = nullptr;
        if (i == 3 || i == 6 || i == 10)
            src = &rowA;
        else if (i == 1 || i == 9)
            src = &row19;
        else if (i == 5)
            src = &row5;
        else
            src = &rowB;
        for (const auto& [j, v] : *src) m(i - 1, j - 1) = v;
    }
    return m;
}

const std::vector<double> kExpectedX = {0,      0, 0.0911, 0.1791, 0,      0.1549, 0.1701,
                                        0,      0, 0.0928, 0.1701, 0,      0.1418};

double elapsed_seconds(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

} // namespace

int main() {
    const std::string fixture = fixture_path("knots13.digraph");

    // 1. the 13-vertex matrix through the CLI, every displayed entry to 5e-4
    run_criterion(1, [&]() -> std::pair<bool, std::string> {
        const auto start = std::chrono::steady_clock::now();
        auto r = forestmat::cli::run({"jbar", fixture});
        const double secs = elapsed_seconds(start);
        if (r.exit_code != 0) return {false, "cli exit " + std::to_string(r.exit_code)};
        auto report_json = fm::json::parse(r.output);
        const auto expected = expected_jbar13();
        double max_err = 0;
        for (int i = 0; i < 13; ++i)
            for (int j = 0; j < 13; ++j)
                max_err = std::max(max_err, std::abs(double(report_json["result"]["jbar"][i][j]) -
                                                     expected(i, j)));
        const bool pass = max_err <= 5e-4 && secs < 1.0;
        return {pass, "13-vertex jbar reproduction: max err " + fmt(max_err) + " (tol 5e-4), " +
                          fmt(secs) + " s (limit 1 s)"};
    });

    // 2. the frozen arc completion satisfies every reconstruction constraint
    run_criterion(2, [&]() -> std::pair<bool, std::string> {
        auto g = load_fixture_digraph("knots13.digraph");
        bool ok = g.order() == 13;

        const std::map<std::pair<int, int>, double> stated = {
            {{2, 12}, 1.33}, {{8, 2}, 1.5},  {{13, 8}, 0.9}, {{11, 8}, 1.1}, {{7, 4}, 0.95},
            {{7, 5}, 1.3},   {{7, 9}, 1.4},  {{5, 9}, 1.6},  {{6, 9}, 1.25}, {{6, 3}, 1.7},
            {{3, 10}, 1.67}, {{4, 13}, 1.2}, {{13, 5}, 1.2}};
        int nonunit = 0;
        for (const auto& a : g.arcs()) {
            auto it = stated.find({a.tail, a.head});
            if (it != stated.end()) {
                ++nonunit;
                ok = ok && a.weight == it->second;
            } else {
                ok = ok && a.weight == 1.0; // reconstructed arcs are unit
            }
        }
        ok = ok && nonunit == static_cast<int>(stated.size());

        auto dec = fm::decompose(g);
        const std::vector<std::vector<int>> comps = {
            {1, 5, 9}, {2, 8, 12}, {3, 6, 10}, {4, 7, 11, 13}};
        ok = ok && dec.strong_components == comps;
        ok = ok && dec.knots == std::vector<std::vector<int>>{{3, 6, 10}, {4, 7, 11, 13}};

        const double err = fm::jbar(g).entries.max_abs_diff(expected_jbar13());
        ok = ok && err <= 5e-4;
        return {ok, "frozen completion: 13 stated weights + unit arcs, components/knots as "
                    "stated, jbar err " + fmt(err)};
    });

    // 3. the ranking vector through the CLI
    run_criterion(3, [&]() -> std::pair<bool, std::string> {
        auto r = forestmat::cli::run({"rank", fixture});
        if (r.exit_code != 0) return {false, "cli exit " + std::to_string(r.exit_code)};
        auto report_json = fm::json::parse(r.output);
        double max_err = 0;
        for (int i = 0; i < 13; ++i)
            max_err = std::max(max_err, std::abs(double(report_json["result"]["aggregate"][i]) -
                                                 kExpectedX[i]));
        return {max_err <= 5e-4, "aggregate ranking: max err " + fmt(max_err) + " (tol 5e-4)"};
    });

    // 4. exact oracle equivalence on 500 random digraphs
    run_criterion(4, [&]() -> std::pair<bool, std::string> {
        const auto start = std::chrono::steady_clock::now();
        std::mt19937_64 rng(40001);
        int checked_phi = 0;
        for (int trial = 0; trial < 500; ++trial) {
            auto g = random_digraph_exact(rng, 6);
            const int n = g.order();
            auto poly = fm::forest_polynomial(g);
            auto fams = fm::enumerate_all_forest_families(g);
            for (int k = 0; k < n; ++k) {
                if (poly.sigma[k] != fams[k].total_weight)
                    return {false, "sigma mismatch at trial " + std::to_string(trial)};
                if (!(poly.q[k] == fm::forest_weight_table(g, k)))
                    return {false, "Q mismatch at trial " + std::to_string(trial)};
            }
            std::map<std::vector<int>, fm::rational> by_roots;
            for (const auto& fam : fams)
                for (const auto& f : fam.members) by_roots[f.roots] += f.weight;
            auto L = fm::kirchhoff(g);
            for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
                std::vector<int> phi;
                for (int v = 1; v <= n; ++v)
                    if (mask & (1u << (v - 1))) phi.push_back(v);
                auto it = by_roots.find(phi);
                const fm::rational expect = it == by_roots.end() ? fm::rational(0) : it->second;
                if (fm::forest_minor_weight(L, phi) != expect)
                    return {false, "minor weight mismatch at trial " + std::to_string(trial)};
                ++checked_phi;
            }
        }
        const double secs = elapsed_seconds(start);
        return {secs < 120.0, "500 exact digraphs, all sigma/Q/minor oracles equal (" +
                                  std::to_string(checked_phi) + " root sets), " + fmt(secs) +
                                  " s (limit 120 s)"};
    });

    // 5. identity suite on 200 random digraphs
    run_criterion(5, [&]() -> std::pair<bool, std::string> {
        std::mt19937_64 rng(50001);
        double worst = 0;
        for (int trial = 0; trial < 200; ++trial) {
            auto g = random_digraph(rng, 7);
            const int n = g.order();
            auto dec = fm::decompose(g);
            auto jb = fm::jbar(g);
            const auto& J = jb.entries;
            auto L = fm::kirchhoff(g);
            for (int i = 0; i < n; ++i) {
                double row = 0;
                for (int j = 0; j < n; ++j) {
                    if (J(i, j) < -1e-9) return {false, "negative entry, trial " + std::to_string(trial)};
                    row += J(i, j);
                }
                if (std::abs(row - 1.0) > 1e-9)
                    return {false, "row sum off, trial " + std::to_string(trial)};
            }
            worst = std::max(worst, (J * J).max_abs_diff(J));
            worst = std::max(worst, (L * J).max_abs());
            worst = std::max(worst, (J * L).max_abs());
            if (worst > 1e-8) return {false, "identity residual " + fmt(worst)};
            if (fm::numerical_rank(L) != static_cast<std::size_t>(n - dec.forest_dimension))
                return {false, "rank(L) != n-v, trial " + std::to_string(trial)};
            if (fm::numerical_rank(J) != static_cast<std::size_t>(dec.forest_dimension))
                return {false, "rank(J) != v, trial " + std::to_string(trial)};
            std::vector<bool> in_ktilde(n + 1, false);
            for (int v : dec.knot_union) in_ktilde[v] = true;
            auto poly = fm::forest_polynomial(g);
            auto raw = poly.q[n - dec.forest_dimension] / poly.sigma[n - dec.forest_dimension];
            for (int j = 1; j <= n; ++j) {
                auto reach_from_j = fm::reachable(g, j);
                for (int i = 1; i <= n; ++i) {
                    const bool expect = in_ktilde[j] && reach_from_j.count(i) > 0;
                    if (jb.zero_pattern[i - 1][j - 1] != expect)
                        return {false, "pattern mismatch, trial " + std::to_string(trial)};
                    if (expect && !(raw(i - 1, j - 1) > 0.0))
                        return {false, "predicted nonzero vanished, trial " + std::to_string(trial)};
                    if (!expect && std::abs(raw(i - 1, j - 1)) > 1e-8)
                        return {false, "predicted zero beyond roundoff, trial " + std::to_string(trial)};
                }
            }
            for (const auto& knot : dec.knots) {
                double s = 0;
                for (int j : knot) s += J(j - 1, j - 1);
                if (std::abs(s - 1.0) > 1e-9)
                    return {false, "knot diagonal sum off, trial " + std::to_string(trial)};
            }
        }
        return {true, "200 digraphs: stochastic, idempotent, LJ=JL=0 (worst residual " +
                          fmt(worst) + "), ranks n-v/v, certified pattern, knot sums"};
    });

    // 6. Markov equivalence
    run_criterion(6, [&]() -> std::pair<bool, std::string> {
        std::mt19937_64 rng(60001);
        std::uniform_real_distribution<double> ad(0.6, 0.95);
        double worst_partial = 0, worst_resolvent = 0;
        for (int trial = 0; trial < 100; ++trial) {
            auto g = random_digraph(rng, 7, 0.5, 2.0, 0.3, 0.6);
            auto J = fm::jbar(g).entries;
            const double maxdiag = fm::max_kirchhoff_diagonal(fm::kirchhoff(g));
            const double bound = maxdiag > 0 ? 1.0 / maxdiag : 1.0;
            auto chain = fm::related_chain(g, ad(rng) * bound);
            worst_partial =
                std::max(worst_partial, fm::cesaro_partial(chain, 100000).max_abs_diff(J));
            const fm::matrix<double> resolvent =
                fm::jbar_via_limit(fm::matrix<double>::identity(g.order()) - chain.p);
            worst_resolvent = std::max(worst_resolvent, resolvent.max_abs_diff(J));
        }
        bool pass = worst_partial <= 1e-3 && worst_resolvent <= 1e-6;

        fm::matrix<double> flip(2, 2);
        flip(0, 1) = flip(1, 0) = 1.0;
        auto bundle = fm::cesaro_limit({flip, std::nullopt, false});
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                pass = pass && std::abs(bundle.b_jbar(i, j) - 0.5) <= 1e-9;
                pass = pass && std::abs(bundle.b_partial(i, j) - 0.5) <= 1e-9;
                pass = pass && std::abs(bundle.b_resolvent(i, j) - 0.5) <= 1e-6;
            }
        return {pass, "100 chains: |B(1e5)-jbar| " + fmt(worst_partial) +
                          " (tol 1e-3), resolvent " + fmt(worst_resolvent) +
                          " (tol 1e-6); periodic fixture on all routes"};
    });

    // 7. block algorithm equals brute force on 300 digraphs
    run_criterion(7, [&]() -> std::pair<bool, std::string> {
        std::mt19937_64 rng(70001);
        long total_forests = 0;
        for (int trial = 0; trial < 300; ++trial) {
            auto g = random_digraph(rng, 7);
            auto dec = fm::decompose(g);
            auto blocked = fm::max_out_forests_block(g);
            auto brute = fm::enumerate_forests(g, g.order() - dec.forest_dimension);
            if (blocked.members.size() != brute.members.size())
                return {false, "member count mismatch, trial " + std::to_string(trial)};
            for (std::size_t i = 0; i < blocked.members.size(); ++i)
                if (blocked.members[i].arcs != brute.members[i].arcs)
                    return {false, "member set mismatch, trial " + std::to_string(trial)};
            total_forests += static_cast<long>(brute.members.size());
        }
        return {true, "300 digraphs, block construction set-equal to enumeration (" +
                          std::to_string(total_forests) + " forests)"};
    });

    // 8. threshold pattern equals the certified pattern on 500 unit digraphs
    run_criterion(8, [&]() -> std::pair<bool, std::string> {
        std::mt19937_64 rng(80001);
        for (int trial = 0; trial < 500; ++trial) {
            auto g = random_unit_digraph(rng, 6);
            if (fm::pattern_by_threshold(g) != fm::jbar_nonzero_pattern(g))
                return {false, "pattern mismatch, trial " + std::to_string(trial)};
        }
        return {true, "500 unit digraphs, thresholded resolvent pattern exact"};
    });

    // 9. audit consistency across the fixture set
    run_criterion(9, [&]() -> std::pair<bool, std::string> {
        std::vector<fm::digraph<double>> set = {two_cycle(), path3(), single_arc(), join3(),
                                                load_fixture_digraph("knots13.digraph")};
        std::mt19937_64 rng(90001);
        for (int trial = 0; trial < 50; ++trial) set.push_back(random_digraph(rng, 5));

        const std::set<std::string> never_fail = {"nonnegativity", "disconnection-backward",
                                                  "diagonal-maximality", "transit",
                                                  "monotonicity-item2"};
        for (std::size_t gi = 0; gi < set.size(); ++gi) {
            auto audit = fm::proximity_audit(set[gi]);
            for (const auto& e : audit.entries) {
                if (e.result == fm::verdict::fails && never_fail.count(e.condition))
                    return {false, e.condition + " failed on fixture " + std::to_string(gi) +
                                       " (" + e.witness_detail + ")"};
                if (e.result == fm::verdict::fails && e.witness.empty())
                    return {false, "failure without witness on fixture " + std::to_string(gi)};
            }
        }

        // predicted triangle witness on the 13-vertex digraph: i in a knot,
        // j,k in its exclusive reach outside the knot
        auto g13 = load_fixture_digraph("knots13.digraph");
        auto J = fm::jbar(g13).entries;
        auto p = [&](int i, int j) { return J(j - 1, i - 1); };
        bool witness_found = false;
        for (int i : {4, 7, 11, 13})
            for (int j : {2, 8, 12})
                for (int k : {2, 8, 12})
                    if (p(i, j) + p(i, k) - p(j, k) > p(i, i) + 1e-9) witness_found = true;
        auto audit13 = fm::proximity_audit(g13);
        bool triangle_fails = false;
        for (const auto& e : audit13.entries)
            if (e.condition == "triangle-inequality" && e.result == fm::verdict::fails)
                triangle_fails = true;
        const bool pass = witness_found && triangle_fails;
        return {pass, "55 fixtures: satisfied conditions never fail; predicted triangle "
                      "witness class found on the 13-vertex digraph"};
    });

    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    else std::printf("all 9 criteria passed\n");
    return failures;
}
