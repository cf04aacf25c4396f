#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "forestmat/digraph.hpp"
#include "forestmat/error.hpp"
#include "forestmat/forest_matrices.hpp"
#include "forestmat/matrix.hpp"

namespace forestmat {

template <typename T>
struct structure_report_t {
    std::vector<std::vector<int>> knots;   // K_1..K_v, ordered by smallest vertex
    std::vector<int> permutation;          // new position -> original vertex id
    matrix<T> jbar_blocked;                // Jbar with rows/cols permuted (knots first)
    // per vertex: index of its knot, or -1 with the set of knots it is
    // reachable from
    std::vector<int> knot_of;              // 1-based vertex -> knot index or -1
    std::vector<std::vector<int>> reachable_from_knots; // for non-knot vertices
    std::vector<std::vector<bool>> reachability;        // (i,j): j reachable from i
    std::vector<std::vector<bool>> mutual_reachability;
    bool block_shape_ok = false;
};

template <typename T>
bool entry_is_zero(const T& x) {
    if constexpr (scalar_traits<T>::is_exact)
        return x == T(0);
    else
        return std::abs(to_double(x)) <= 1e-12;
}

// Block-shape predicate: after the permutation, columns outside the knot
// union vanish and the upper-left square is block diagonal with strictly
// positive diagonal blocks.
template <typename T>
bool has_block_shape(const matrix<T>& jp, const std::vector<std::vector<int>>& knots,
                     std::size_t ktilde_size) {
    const std::size_t n = jp.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = ktilde_size; j < n; ++j)
            if (!entry_is_zero(jp(i, j))) return false;
    std::size_t offset = 0;
    for (const auto& k : knots) {
        for (std::size_t i = 0; i < k.size(); ++i)
            for (std::size_t j = 0; j < ktilde_size; ++j) {
                const bool inside = j >= offset && j < offset + k.size();
                if (inside && !(to_double(jp(offset + i, j)) > 0)) return false;
                if (!inside && !entry_is_zero(jp(offset + i, j))) return false;
            }
        offset += k.size();
    }
    return true;
}

// Knots and membership recovered from the certified zero pattern of Jbar,
// cross-checked against the direct graph decomposition; vertices reordered
// knots-first, the rest grouped by identical row patterns.
template <typename T>
structure_report_t<T> structure_report(const digraph<T>& g) {
    const int n = g.order();
    const jbar_t<T> jb = jbar(g);
    const structure_decomposition dec = decompose(g);
    structure_report_t<T> rep;

    // K-tilde from the pattern: nonzero columns; same-knot iff mutually nonzero
    std::vector<int> ktilde;
    for (int j = 1; j <= n; ++j)
        for (int i = 1; i <= n; ++i)
            if (jb.zero_pattern[i - 1][j - 1]) {
                ktilde.push_back(j);
                break;
            }
    std::vector<int> knot_id(n + 1, -1);
    std::vector<std::vector<int>> knots;
    for (int j : ktilde) {
        if (knot_id[j] >= 0) continue;
        std::vector<int> knot;
        for (int i : ktilde)
            if (jb.zero_pattern[i - 1][j - 1] && jb.zero_pattern[j - 1][i - 1]) knot.push_back(i);
        for (int v : knot) knot_id[v] = static_cast<int>(knots.size());
        knots.push_back(std::move(knot));
    }
    std::sort(knots.begin(), knots.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (std::size_t k = 0; k < knots.size(); ++k)
        for (int v : knots[k]) knot_id[v] = static_cast<int>(k);
    if (knots != dec.knots)
        throw error(errc::inconsistent_dimension,
                    "pattern-derived knots disagree with the graph decomposition");
    rep.knots = knots;
    rep.knot_of.assign(n + 1, -1);
    for (std::size_t k = 0; k < knots.size(); ++k)
        for (int v : knots[k]) rep.knot_of[v] = static_cast<int>(k);

    // permutation: knot vertices first, then the rest grouped by identical
    // pattern rows (groups ordered by smallest member)
    for (const auto& k : rep.knots)
        rep.permutation.insert(rep.permutation.end(), k.begin(), k.end());
    std::map<std::vector<bool>, std::vector<int>> groups;
    rep.reachable_from_knots.assign(n + 1, {});
    for (int v = 1; v <= n; ++v) {
        if (rep.knot_of[v] >= 0) continue;
        groups[jb.zero_pattern[v - 1]].push_back(v);
        for (std::size_t k = 0; k < rep.knots.size(); ++k)
            if (jb.zero_pattern[v - 1][rep.knots[k].front() - 1])
                rep.reachable_from_knots[v].push_back(static_cast<int>(k));
    }
    std::vector<std::vector<int>> group_list;
    for (auto& [pat, members] : groups) group_list.push_back(members);
    std::sort(group_list.begin(), group_list.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (const auto& members : group_list)
        rep.permutation.insert(rep.permutation.end(), members.begin(), members.end());

    rep.jbar_blocked = matrix<T>(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            rep.jbar_blocked(i, j) = jb.entries(rep.permutation[i] - 1, rep.permutation[j] - 1);

    rep.reachability = reachability_by_search(g);
    rep.mutual_reachability.assign(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            rep.mutual_reachability[i][j] = rep.reachability[i][j] && rep.reachability[j][i];

    std::size_t ktilde_size = dec.knot_union.size();
    rep.block_shape_ok = has_block_shape(rep.jbar_blocked, rep.knots, ktilde_size);
    return rep;
}

// Threshold detection of the Jbar zero pattern for unit-weight digraphs:
// f = det(I + L) (the total forest weight), the entries of (I + f^2 L)^-1
// above 1/f sit exactly where Jbar is nonzero. The comparison is done in
// double up to f = 10^6 and in exact rationals beyond, where the float
// margins thin out.
template <typename T>
std::vector<std::vector<bool>> pattern_by_threshold(const digraph<T>& g) {
    const int n = g.order();
    for (const auto& a : g.arcs())
        if (!(a.weight == T(1)))
            throw error(errc::non_unit_weights, "threshold pattern needs unit weights");

    // exact integer determinant regardless of mode
    matrix<rational> L(n, n);
    for (const auto& a : g.arcs()) {
        L(a.head - 1, a.tail - 1) -= rational(1);
        L(a.head - 1, a.head - 1) += rational(1);
    }
    const rational f = (matrix<rational>::identity(n) + L).determinant();

    std::vector<std::vector<bool>> pat(n, std::vector<bool>(n, false));
    if (g.arcs().empty()) {
        // f = 1 and the strict threshold has no room; the resolvent is the
        // identity and so is the pattern
        for (int i = 0; i < n; ++i) pat[i][i] = true;
        return pat;
    }
    if (f > rational(1000000)) {
        const rational tau = f * f;
        const matrix<rational> q = q_tau<rational>(L, tau);
        const rational threshold = rational(1) / f;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) pat[i][j] = q(i, j) > threshold;
    } else {
        const double fd = to_double(f);
        const matrix<double> q = q_tau<double>(to_double_matrix(L), fd * fd);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) pat[i][j] = q(i, j) > 1.0 / fd;
    }
    return pat;
}

// Reachability through the resolvent: the nonzero pattern of Q(tau)
// transposed, for any tau > 0. Cross-checked against direct search.
template <typename T>
std::vector<std::vector<bool>> reachability_matrix(const digraph<T>& g, const T& tau = T(1)) {
    const int n = g.order();
    const matrix<T> q = q_tau<T>(kirchhoff(g), tau);
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if constexpr (scalar_traits<T>::is_exact)
                r[i][j] = q(j, i) != T(0);
            else
                r[i][j] = to_double(q(j, i)) > 1e-12;
        }
    if (r != reachability_by_search(g))
        throw error(errc::inconsistent_dimension,
                    "resolvent reachability disagrees with direct search");
    return r;
}

template <typename T>
std::vector<std::vector<bool>> mutual_reachability_matrix(const digraph<T>& g, const T& tau = T(1)) {
    auto r = reachability_matrix(g, tau);
    const int n = g.order();
    std::vector<std::vector<bool>> m(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m[i][j] = r[i][j] && r[j][i];
    return m;
}

} // namespace forestmat
