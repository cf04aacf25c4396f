#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "forestmat/digraph.hpp"
#include "forestmat/forest_matrices.hpp"
#include "forestmat/matrix.hpp"

namespace forestmat {

template <typename T>
struct ranking_result {
    // One score vector per knot: the Jbar row of any knot member, supported
    // exactly on that knot. Solves L^T x = 0.
    std::vector<std::vector<T>> basis;
    // Per knot, the within-knot spanning-tree weights eps(T^{i_s}).
    std::vector<std::vector<T>> tree_weights;
    std::vector<T> aggregate;            // mean of the Jbar rows; sums to 1
    std::vector<std::vector<int>> order; // tie groups by descending aggregate
    double lt_residual = 0;              // max |L^T x| over basis vectors
};

namespace detail {

template <typename T>
double ranking_tie_tol() {
    return scalar_traits<T>::is_exact ? 0.0 : 1e-10;
}

} // namespace detail

template <typename T>
ranking_result<T> daniels_basis(const digraph<T>& g) {
    const int n = g.order();
    const jbar_t<T> jb = jbar(g);
    const structure_decomposition dec = decompose(g);
    const matrix<T> L = kirchhoff(g);

    ranking_result<T> out;
    for (const auto& knot : dec.knots) {
        const int rep = knot.front();
        std::vector<T> x(n, T(0));
        for (int j = 0; j < n; ++j) x[j] = jb.entries(rep - 1, j);
        out.basis.push_back(std::move(x));

        std::vector<T> tw;
        if (knot.size() == 1) {
            tw.push_back(T(1)); // single-vertex knot: the arcless tree
        } else {
            auto [h, ids] = g.restriction(knot);
            const matrix<T> lk = kirchhoff(h);
            for (std::size_t s = 0; s < knot.size(); ++s)
                tw.push_back(forest_minor_weight(lk, {static_cast<int>(s + 1)}));
        }
        out.tree_weights.push_back(std::move(tw));
    }

    const matrix<T> lt = L.transpose();
    for (const auto& x : out.basis) {
        for (int i = 0; i < n; ++i) {
            T acc(0);
            for (int j = 0; j < n; ++j) acc += lt(i, j) * x[j];
            out.lt_residual = std::max(out.lt_residual, std::abs(to_double(acc)));
        }
    }
    return out;
}

// Aggregate Daniels scores: the arithmetic mean of the rows of Jbar, i.e. the
// limiting distribution under a uniform start. Tie groups use a 1e-10 band
// in float mode, exact equality in rational mode.
template <typename T>
ranking_result<T> aggregate_score(const digraph<T>& g) {
    const int n = g.order();
    ranking_result<T> out = daniels_basis(g);
    const jbar_t<T> jb = jbar(g);
    out.aggregate.assign(n, T(0));
    for (int j = 0; j < n; ++j) {
        T col(0);
        for (int i = 0; i < n; ++i) col += jb.entries(i, j);
        out.aggregate[j] = col / T(n);
    }

    std::vector<int> verts(n);
    for (int v = 1; v <= n; ++v) verts[v - 1] = v;
    std::sort(verts.begin(), verts.end(), [&](int a, int b) {
        const T& xa = out.aggregate[a - 1];
        const T& xb = out.aggregate[b - 1];
        if (xa != xb) return xb < xa;
        return a < b;
    });
    const double tie_tol = detail::ranking_tie_tol<T>();
    for (int v : verts) {
        if (!out.order.empty()) {
            const T& prev = out.aggregate[out.order.back().front() - 1];
            const T& cur = out.aggregate[v - 1];
            if (std::abs(to_double(prev) - to_double(cur)) <= tie_tol &&
                (!scalar_traits<T>::is_exact || prev == cur)) {
                out.order.back().push_back(v);
                continue;
            }
        }
        out.order.push_back({v});
    }
    return out;
}

// ---- proximity audit (conditions on the limiting-accessibility index) ----

enum class verdict { holds, holds_nonstrict, fails };

inline const char* verdict_name(verdict v) {
    switch (v) {
        case verdict::holds: return "holds";
        case verdict::holds_nonstrict: return "holds-nonstrict";
        case verdict::fails: return "fails";
    }
    return "?";
}

struct audit_entry {
    std::string condition;
    verdict result = verdict::holds;
    std::vector<int> witness;   // instantiating vertex tuple when it fails
    std::string witness_detail; // the violated inequality, instantiated
};

struct proximity_audit_t {
    std::vector<audit_entry> entries;
    bool sampled = false; // triple scans sampled rather than exhaustive
};

namespace detail {

inline std::string fmt_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

class audit_builder {
public:
    explicit audit_builder(double tol) : tol_(tol) {}

    void tie() {
        if (result_ == verdict::holds) result_ = verdict::holds_nonstrict;
    }
    void violation(std::vector<int> witness, std::string detail) {
        if (result_ != verdict::fails) {
            result_ = verdict::fails;
            witness_ = std::move(witness);
            detail_ = std::move(detail);
        }
    }
    // strict comparison a > b with tie tracking
    void require_strictly_greater(double a, double b, const std::vector<int>& w,
                                  const std::string& detail) {
        if (a < b - tol_)
            violation(w, detail);
        else if (a <= b + tol_)
            tie();
    }
    audit_entry finish(std::string name) && {
        return {std::move(name), result_, std::move(witness_), std::move(detail_)};
    }
    double tol() const { return tol_; }

private:
    double tol_;
    verdict result_ = verdict::holds;
    std::vector<int> witness_;
    std::string detail_;
};

// visits either all (i,j,k) triples or a seeded sample of them
template <typename F>
void scan_triples(int n, bool sampled, unsigned long seed, F&& visit) {
    if (!sampled) {
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j)
                for (int k = 1; k <= n; ++k) visit(i, j, k);
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> pick(1, n);
        for (int s = 0; s < 10000; ++s) visit(pick(rng), pick(rng), pick(rng));
    }
}

} // namespace detail

// Evaluates the proximity conditions on p = Jbar^T: nonnegativity, reversal,
// diagonal maximality, triangle inequality, metric representability, both
// directions of disconnection, transit, and the two monotonicity items
// (checked by a +10% single-arc perturbation with full recomputation).
// Every "fails" verdict carries a concrete witness.
template <typename T>
proximity_audit_t proximity_audit(const digraph<T>& g, unsigned long seed = 1) {
    const int n = g.order();
    const double tol = scalar_traits<T>::is_exact ? 0.0 : 1e-9;
    const matrix<T> jackets = jbar(g).entries;
    auto p = [&](int i, int j) { return to_double(jackets(j - 1, i - 1)); };

    proximity_audit_t out;
    out.sampled = n > 25;

    const auto reach = reachability_by_search(g);
    // reach_minus[k] = reachability of g with vertex k cut out
    std::vector<std::vector<std::vector<bool>>> reach_minus(n + 1);
    for (int k = 1; k <= n; ++k) {
        std::vector<std::vector<bool>> r(n + 1, std::vector<bool>(n + 1, false));
        for (int s = 1; s <= n; ++s) {
            if (s == k) continue;
            std::vector<int> stack{s};
            r[s][s] = true;
            while (!stack.empty()) {
                int v = stack.back();
                stack.pop_back();
                for (int idx : g.out_arcs(v)) {
                    int w = g.arcs()[idx].head;
                    if (w == k || r[s][w]) continue;
                    r[s][w] = true;
                    stack.push_back(w);
                }
            }
        }
        reach_minus[k] = std::move(r);
    }
    // every path from i to t passes through k
    auto through = [&](int i, int t, int k) { return i != k && t != k && !reach_minus[k][i][t]; };

    { // nonnegativity
        detail::audit_builder b(tol);
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j)
                if (p(i, j) < -tol)
                    b.violation({i, j}, "p(" + std::to_string(i) + "," + std::to_string(j) +
                                            ")=" + detail::fmt_num(p(i, j)) + " < 0");
        out.entries.push_back(std::move(b).finish("nonnegativity"));
    }

    { // reversal: accessibility of the reversed digraph must be the transpose
        detail::audit_builder b(tol);
        const matrix<T> jrev = jbar(g.reversed()).entries;
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) {
                const double prev_ij = to_double(jrev(j - 1, i - 1));
                if (std::abs(prev_ij - p(j, i)) > std::max(tol, 1e-9))
                    b.violation({i, j}, "reversed p(" + std::to_string(i) + "," +
                                            std::to_string(j) + ")=" + detail::fmt_num(prev_ij) +
                                            " != p(" + std::to_string(j) + "," +
                                            std::to_string(i) + ")=" + detail::fmt_num(p(j, i)));
            }
        out.entries.push_back(std::move(b).finish("reversal"));
    }

    { // diagonal maximality: p_ii > p_ij for i != j
        detail::audit_builder b(tol);
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) {
                if (i == j) continue;
                b.require_strictly_greater(p(i, i), p(i, j), {i, j},
                                           "p(" + std::to_string(i) + "," + std::to_string(i) +
                                               ")=" + detail::fmt_num(p(i, i)) + " vs p(" +
                                               std::to_string(i) + "," + std::to_string(j) +
                                               ")=" + detail::fmt_num(p(i, j)));
            }
        out.entries.push_back(std::move(b).finish("diagonal-maximality"));
    }

    { // triangle inequality for proximities
        detail::audit_builder b(tol);
        detail::scan_triples(n, out.sampled, seed, [&](int i, int j, int k) {
            const double lhs = p(i, j) + p(i, k) - p(j, k);
            if (lhs > p(i, i) + tol)
                b.violation({i, j, k},
                            "p(" + std::to_string(i) + "," + std::to_string(j) + ")+p(" +
                                std::to_string(i) + "," + std::to_string(k) + ")-p(" +
                                std::to_string(j) + "," + std::to_string(k) + ")=" +
                                detail::fmt_num(lhs) + " > p(" + std::to_string(i) + "," +
                                std::to_string(i) + ")=" + detail::fmt_num(p(i, i)));
            else if (j == k && i != j && lhs >= p(i, i) - tol)
                b.tie(); // the j = k case is required to be strict
        });
        out.entries.push_back(std::move(b).finish("triangle-inequality"));
    }

    { // metric representability of d_ij = p_ii + p_jj - p_ij - p_ji
        detail::audit_builder b(tol);
        auto d = [&](int i, int j) { return p(i, i) + p(j, j) - p(i, j) - p(j, i); };
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) {
                if (d(i, j) < -tol)
                    b.violation({i, j}, "d(" + std::to_string(i) + "," + std::to_string(j) +
                                            ")=" + detail::fmt_num(d(i, j)) + " < 0");
                if (i != j && d(i, j) <= tol)
                    b.violation({i, j}, "d(" + std::to_string(i) + "," + std::to_string(j) +
                                            ")=0 with distinct vertices");
            }
        detail::scan_triples(n, out.sampled, seed + 1, [&](int i, int j, int k) {
            if (d(i, k) > d(i, j) + d(j, k) + tol)
                b.violation({i, j, k}, "d(" + std::to_string(i) + "," + std::to_string(k) +
                                           ")=" + detail::fmt_num(d(i, k)) + " > d(" +
                                           std::to_string(i) + "," + std::to_string(j) + ")+d(" +
                                           std::to_string(j) + "," + std::to_string(k) + ")=" +
                                           detail::fmt_num(d(i, j) + d(j, k)));
        });
        out.entries.push_back(std::move(b).finish("metric-representability"));
    }

    { // disconnection '<=': unreachable implies zero
        detail::audit_builder b(tol);
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j)
                if (!reach[i - 1][j - 1] && std::abs(p(i, j)) > tol)
                    b.violation({i, j}, "p(" + std::to_string(i) + "," + std::to_string(j) +
                                            ")=" + detail::fmt_num(p(i, j)) +
                                            " though " + std::to_string(j) +
                                            " is unreachable from " + std::to_string(i));
        out.entries.push_back(std::move(b).finish("disconnection-backward"));
    }

    { // disconnection '=>': zero implies unreachable
        detail::audit_builder b(tol);
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j)
                if (std::abs(p(i, j)) <= tol && reach[i - 1][j - 1])
                    b.violation({i, j}, "p(" + std::to_string(i) + "," + std::to_string(j) +
                                            ")=0 yet " + std::to_string(j) +
                                            " is reachable from " + std::to_string(i));
        out.entries.push_back(std::move(b).finish("disconnection-forward"));
    }

    { // transit: path i->k, every path i->t through k  =>  p_ik > p_it
        detail::audit_builder b(tol);
        detail::scan_triples(n, out.sampled, seed + 2, [&](int i, int k, int t) {
            if (i == k || k == t) return;
            if (!reach[i - 1][k - 1]) return;
            if (!through(i, t, k)) return;
            b.require_strictly_greater(p(i, k), p(i, t), {i, k, t},
                                       "p(" + std::to_string(i) + "," + std::to_string(k) +
                                           ")=" + detail::fmt_num(p(i, k)) + " vs p(" +
                                           std::to_string(i) + "," + std::to_string(t) +
                                           ")=" + detail::fmt_num(p(i, t)));
        });
        out.entries.push_back(std::move(b).finish("transit"));
    }

    { // monotonicity under a +10% bump of each arc weight in turn
        detail::audit_builder b1(tol), b2(tol);
        for (const auto& a : g.arcs()) {
            const int k = a.tail, t = a.head;
            const digraph<T> bumped = g.with_weight(k, t, a.weight + a.weight / T(10));
            const matrix<T> jb2 = jbar(bumped).entries;
            auto dp = [&](int i, int j) { return to_double(jb2(j - 1, i - 1)) - p(i, j); };

            // item 1, first part: the bumped arc's own accessibility grows
            b1.require_strictly_greater(dp(k, t), 0.0, {k, t},
                                        "dp(" + std::to_string(k) + "," + std::to_string(t) +
                                            ")=" + detail::fmt_num(dp(k, t)));
            // item 1, second part: and grows more than any other entry
            for (int i = 1; i <= n; ++i)
                for (int j = 1; j <= n; ++j) {
                    if (i == k && j == t) continue;
                    b1.require_strictly_greater(
                        dp(k, t), dp(i, j), {k, t, i, j},
                        "dp(" + std::to_string(k) + "," + std::to_string(t) + ")=" +
                            detail::fmt_num(dp(k, t)) + " vs dp(" + std::to_string(i) + "," +
                            std::to_string(j) + ")=" + detail::fmt_num(dp(i, j)));
                }
            // item 2: vertices forced through k gain more toward t than toward k
            for (int i = 1; i <= n; ++i) {
                if (i == k || k == t) continue;
                if (!reach[i - 1][k - 1] || !through(i, t, k)) continue;
                b2.require_strictly_greater(dp(i, t), dp(i, k), {k, t, i},
                                            "dp(" + std::to_string(i) + "," + std::to_string(t) +
                                                ")=" + detail::fmt_num(dp(i, t)) + " vs dp(" +
                                                std::to_string(i) + "," + std::to_string(k) +
                                                ")=" + detail::fmt_num(dp(i, k)));
            }
        }
        out.entries.push_back(std::move(b1).finish("monotonicity-item1"));
        out.entries.push_back(std::move(b2).finish("monotonicity-item2"));
    }

    return out;
}

} // namespace forestmat
