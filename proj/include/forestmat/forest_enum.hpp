#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "forestmat/digraph.hpp"
#include "forestmat/error.hpp"

namespace forestmat {

template <typename T>
struct forest {
    std::vector<std::pair<int, int>> arcs; // sorted (tail, head)
    std::vector<int> roots;                // indegree-0 vertices, sorted
    T weight;                              // product of arc weights, 1 if arcless

    friend bool operator==(const forest& a, const forest& b) { return a.arcs == b.arcs; }
    friend bool operator<(const forest& a, const forest& b) { return a.arcs < b.arcs; }
};

template <typename T>
struct forest_family {
    int arc_count = 0;
    std::vector<forest<T>> members; // lexicographic by arc list
    T total_weight = T(0);          // 0 for the empty family
};

inline constexpr double kDefaultForestCap = 1e7;

// Upper bound on the enumeration workload: every vertex independently picks
// an incoming arc or none.
template <typename T>
double forest_count_estimate(const digraph<T>& g) {
    double est = 1.0;
    for (int v = 1; v <= g.order(); ++v) est *= static_cast<double>(g.in_degree(v) + 1);
    return est;
}

namespace detail {

// parent[v] = chosen tail, or 0 for none; true iff the chosen arcs are circuit-free
inline bool parent_assignment_acyclic(const std::vector<int>& parent) {
    const int n = static_cast<int>(parent.size()) - 1;
    std::vector<char> state(n + 1, 0); // 0 unseen, 1 on current chain, 2 done
    for (int start = 1; start <= n; ++start) {
        if (state[start] != 0) continue;
        int v = start;
        while (v != 0 && state[v] == 0) {
            state[v] = 1;
            v = parent[v];
        }
        const bool circuit = (v != 0 && state[v] == 1);
        int u = start;
        while (u != 0 && state[u] == 1) {
            state[u] = 2;
            u = parent[u];
        }
        if (circuit) return false;
    }
    return true;
}

} // namespace detail

template <typename T>
bool is_diverging_forest(const digraph<T>& g, const std::vector<std::pair<int, int>>& arcs) {
    const int n = g.order();
    std::vector<int> parent(n + 1, 0);
    for (const auto& [tail, head] : arcs) {
        if (!g.has_arc(tail, head))
            throw error(errc::arc_not_in_digraph,
                        "(" + std::to_string(tail) + "," + std::to_string(head) + ")");
        if (parent[head] != 0) return false; // indegree two
        parent[head] = tail;
    }
    return detail::parent_assignment_acyclic(parent);
}

namespace detail {

template <typename T>
forest<T> forest_from_parents(const digraph<T>& g, const std::vector<int>& parent) {
    forest<T> f;
    f.weight = T(1);
    const int n = g.order();
    for (int v = 1; v <= n; ++v) {
        if (parent[v] == 0)
            f.roots.push_back(v);
        else {
            f.arcs.push_back({parent[v], v});
            f.weight *= g.weight(parent[v], v);
        }
    }
    std::sort(f.arcs.begin(), f.arcs.end());
    return f;
}

// Enumerate every assignment "vertex picks an incoming arc or none", keep the
// acyclic ones. want_k < 0 collects all arc counts.
template <typename T>
void enumerate_parent_assignments(const digraph<T>& g, int want_k, double cap,
                                  const std::function<void(const std::vector<int>&, int)>& emit) {
    const int n = g.order();
    if (forest_count_estimate(g) > cap)
        throw error(errc::explosion_guard, "forest-count estimate exceeds cap");
    std::vector<int> parent(n + 1, 0);
    std::function<void(int, int)> rec = [&](int v, int chosen) {
        if (want_k >= 0) {
            if (chosen > want_k) return;
            if (chosen + (n - v + 1) < want_k) return;
        }
        if (v > n) {
            if ((want_k < 0 || chosen == want_k) && parent_assignment_acyclic(parent))
                emit(parent, chosen);
            return;
        }
        parent[v] = 0;
        rec(v + 1, chosen);
        for (int idx : g.in_arcs(v)) {
            parent[v] = g.arcs()[idx].tail;
            rec(v + 1, chosen + 1);
        }
        parent[v] = 0;
    };
    rec(1, 0);
}

template <typename T>
void finalize_family(forest_family<T>& fam) {
    std::sort(fam.members.begin(), fam.members.end());
    fam.total_weight = T(0);
    for (const auto& f : fam.members) fam.total_weight += f.weight;
}

} // namespace detail

// All spanning diverging forests with exactly k arcs, in lexicographic order.
// The family is empty for any k past the maximum (in particular k > n - v).
template <typename T>
forest_family<T> enumerate_forests(const digraph<T>& g, int k, double cap = kDefaultForestCap) {
    if (k < 0) throw std::invalid_argument("forest arc count must be nonnegative");
    forest_family<T> fam;
    fam.arc_count = k;
    if (k > g.order() - 1) return fam;
    detail::enumerate_parent_assignments<T>(
        g, k, cap, [&](const std::vector<int>& parent, int) {
            fam.members.push_back(detail::forest_from_parents(g, parent));
        });
    detail::finalize_family(fam);
    return fam;
}

// Families for every k = 0..n-1 in one sweep (oracle workhorse).
template <typename T>
std::vector<forest_family<T>> enumerate_all_forest_families(const digraph<T>& g,
                                                            double cap = kDefaultForestCap) {
    const int n = g.order();
    std::vector<forest_family<T>> fams(n);
    for (int k = 0; k < n; ++k) fams[k].arc_count = k;
    detail::enumerate_parent_assignments<T>(
        g, -1, cap, [&](const std::vector<int>& parent, int chosen) {
            fams[chosen].members.push_back(detail::forest_from_parents(g, parent));
        });
    for (auto& fam : fams) detail::finalize_family(fam);
    return fams;
}

// root of the tree containing v, per member arc sets
inline int forest_root_of(const std::vector<int>& parent, int v) {
    while (parent[v] != 0) v = parent[v];
    return v;
}

// Entry (i-1, j-1) = eps(F_k^{j->i}): total weight of k-arc forests where i
// lies in the tree diverging from j.
template <typename T>
matrix<T> forest_weight_table(const digraph<T>& g, int k, double cap = kDefaultForestCap) {
    const int n = g.order();
    matrix<T> table(n, n);
    if (k < 0) throw std::invalid_argument("forest arc count must be nonnegative");
    if (k > n - 1) return table;
    detail::enumerate_parent_assignments<T>(
        g, k, cap, [&](const std::vector<int>& parent, int) {
            forest<T> f = detail::forest_from_parents(g, parent);
            for (int v = 1; v <= n; ++v)
                table(v - 1, forest_root_of(parent, v) - 1) += f.weight;
        });
    return table;
}

namespace detail {

// Spanning diverging trees of h rooted at r, as parent assignments.
template <typename T>
std::vector<std::vector<int>> spanning_trees_rooted_at(const digraph<T>& h, int r,
                                                       double cap = kDefaultForestCap) {
    const int n = h.order();
    std::vector<std::vector<int>> out;
    std::vector<int> parent(n + 1, 0);
    std::function<void(int)> rec = [&](int v) {
        if (v > n) {
            if (parent_assignment_acyclic(parent)) {
                if (static_cast<double>(out.size()) >= cap)
                    throw error(errc::explosion_guard, "tree count exceeds cap");
                out.push_back(parent);
            }
            return;
        }
        if (v == r) {
            parent[v] = 0;
            rec(v + 1);
            return;
        }
        if (h.in_arcs(v).empty()) return; // no way to cover v
        for (int idx : h.in_arcs(v)) {
            parent[v] = h.arcs()[idx].tail;
            rec(v + 1);
        }
        parent[v] = 0;
    };
    rec(1);
    return out;
}

template <typename T>
struct block_part {
    // alternative arc sets for one block, with weights
    std::vector<std::pair<std::vector<std::pair<int, int>>, T>> choices;
};

} // namespace detail

// The block construction of all maximum out forests:
//   1. undominated knots K_1..K_v and the sets K_i^+
//   2. all spanning diverging trees inside each K_i^+ (rooted within K_i)
//   3. strong components T_1..T_s of the restriction to the rest
//   4. external arcs drawn to a nonempty subset of entry vertices of each T_i
//   5a. spanning forests of T_i rooted at those vertices, via contraction of
//       the entry set into a single root
//   6. all unions across blocks
// The result equals enumerate_forests(g, n - v) as a set. The guard counts
// the forests actually accumulated, so it is exact rather than an estimate.
template <typename T>
forest_family<T> max_out_forests_block(const digraph<T>& g, double cap = kDefaultForestCap) {
    const int n = g.order();
    const structure_decomposition dec = decompose(g);

    std::vector<detail::block_part<T>> parts;

    // steps 1-2: trees spanning each K_i^+
    std::set<int> covered;
    for (std::size_t i = 0; i < dec.knots.size(); ++i) {
        const auto& kp = dec.k_plus[i];
        covered.insert(kp.begin(), kp.end());
        auto [h, ids] = g.restriction(kp);
        detail::block_part<T> part;
        for (int root : dec.knots[i]) {
            int local_root = static_cast<int>(
                std::lower_bound(ids.begin(), ids.end(), root) - ids.begin() + 1);
            for (const auto& parent : detail::spanning_trees_rooted_at(h, local_root, cap)) {
                std::vector<std::pair<int, int>> arcs;
                T w(1);
                for (int v = 1; v <= h.order(); ++v) {
                    if (parent[v] == 0) continue;
                    arcs.push_back({ids[parent[v] - 1], ids[v - 1]});
                    w *= h.weight(parent[v], v);
                }
                std::sort(arcs.begin(), arcs.end());
                part.choices.push_back({std::move(arcs), w});
            }
        }
        parts.push_back(std::move(part));
    }

    // step 3: remaining strong components
    std::vector<int> rest;
    for (int v = 1; v <= n; ++v)
        if (!covered.count(v)) rest.push_back(v);
    if (!rest.empty()) {
        auto [hrest, rest_ids] = g.restriction(rest);
        for (const auto& comp_local : detail::strong_components_of(hrest)) {
            std::vector<int> comp;
            for (int lv : comp_local) comp.push_back(rest_ids[lv - 1]);
            std::sort(comp.begin(), comp.end());
            std::set<int> comp_set(comp.begin(), comp.end());

            // step 4: external arcs into distinct vertices of this component
            std::map<int, std::vector<const arc<T>*>> ext_in;
            for (const auto& a : g.arcs())
                if (comp_set.count(a.head) && !comp_set.count(a.tail))
                    ext_in[a.head].push_back(&a);
            std::vector<int> entry;
            for (const auto& [v, list] : ext_in) entry.push_back(v);

            auto [hcomp, comp_ids] = g.restriction(comp);
            detail::block_part<T> part;

            const std::size_t m = entry.size();
            for (std::size_t mask = 1; mask < (std::size_t(1) << m); ++mask) {
                std::vector<int> chosen_entries;
                for (std::size_t b = 0; b < m; ++b)
                    if (mask & (std::size_t(1) << b)) chosen_entries.push_back(entry[b]);

                // step 5a: contract the chosen entry vertices into one root.
                // A contracted spanning tree is a parent assignment where
                // entry vertices pick nothing and the rest pick internal arcs;
                // tails inside the entry set all act as the merged root, so
                // the acyclicity check maps them to sentinel vertex 0 via a
                // virtual-root relabeling done below.
                const int cn = hcomp.order();
                std::set<int> entry_local;
                for (int ev : chosen_entries)
                    entry_local.insert(static_cast<int>(
                        std::lower_bound(comp_ids.begin(), comp_ids.end(), ev) -
                        comp_ids.begin() + 1));

                std::vector<std::vector<std::pair<int, int>>> internal_sets; // local (tail, head)
                std::vector<int> parent(cn + 1, 0);
                std::vector<int> contracted(cn + 1, 0); // parent with entry tails as root 0
                std::function<void(int)> rec = [&](int v) {
                    if (v > cn) {
                        if (detail::parent_assignment_acyclic(contracted)) {
                            if (static_cast<double>(internal_sets.size()) >= cap)
                                throw error(errc::explosion_guard, "forest count exceeds cap");
                            std::vector<std::pair<int, int>> arcs;
                            for (int u = 1; u <= cn; ++u)
                                if (parent[u] != 0) arcs.push_back({parent[u], u});
                            internal_sets.push_back(std::move(arcs));
                        }
                        return;
                    }
                    if (entry_local.count(v)) {
                        parent[v] = contracted[v] = 0;
                        rec(v + 1);
                        return;
                    }
                    if (hcomp.in_arcs(v).empty()) return;
                    for (int idx : hcomp.in_arcs(v)) {
                        int t = hcomp.arcs()[idx].tail;
                        parent[v] = t;
                        contracted[v] = entry_local.count(t) ? 0 : t;
                        rec(v + 1);
                    }
                    parent[v] = contracted[v] = 0;
                };
                rec(1);
                if (internal_sets.empty()) continue;

                // cross external-arc choices with internal forests
                std::vector<std::pair<std::vector<std::pair<int, int>>, T>> ext_choices{{{}, T(1)}};
                for (int ev : chosen_entries) {
                    std::vector<std::pair<std::vector<std::pair<int, int>>, T>> next;
                    for (const auto& [arcs, w] : ext_choices)
                        for (const arc<T>* a : ext_in[ev]) {
                            auto arcs2 = arcs;
                            arcs2.push_back({a->tail, a->head});
                            next.push_back({std::move(arcs2), w * a->weight});
                        }
                    ext_choices = std::move(next);
                }
                if (static_cast<double>(part.choices.size()) +
                        static_cast<double>(ext_choices.size()) * internal_sets.size() > cap)
                    throw error(errc::explosion_guard, "forest count exceeds cap");
                for (const auto& internal : internal_sets) {
                    T iw(1);
                    std::vector<std::pair<int, int>> internal_global;
                    for (const auto& [lt, lh] : internal) {
                        internal_global.push_back({comp_ids[lt - 1], comp_ids[lh - 1]});
                        iw *= hcomp.weight(lt, lh);
                    }
                    for (const auto& [ext, ew] : ext_choices) {
                        auto arcs = ext;
                        arcs.insert(arcs.end(), internal_global.begin(), internal_global.end());
                        std::sort(arcs.begin(), arcs.end());
                        part.choices.push_back({std::move(arcs), iw * ew});
                    }
                }
            }
            parts.push_back(std::move(part));
        }
    }

    // step 6: combine one choice per block
    forest_family<T> fam;
    fam.arc_count = n - dec.forest_dimension;
    double combined = 1.0;
    for (const auto& part : parts) combined *= static_cast<double>(part.choices.size());
    if (combined > cap)
        throw error(errc::explosion_guard, "maximum-forest count exceeds cap");
    std::vector<std::pair<std::vector<std::pair<int, int>>, T>> acc{{{}, T(1)}};
    for (const auto& part : parts) {
        std::vector<std::pair<std::vector<std::pair<int, int>>, T>> next;
        for (const auto& [arcs, w] : acc)
            for (const auto& [parcs, pw] : part.choices) {
                auto merged = arcs;
                merged.insert(merged.end(), parcs.begin(), parcs.end());
                next.push_back({std::move(merged), w * pw});
            }
        acc = std::move(next);
    }
    for (auto& [arcs, w] : acc) {
        forest<T> f;
        std::sort(arcs.begin(), arcs.end());
        f.arcs = std::move(arcs);
        f.weight = w;
        std::vector<bool> dominated(n + 1, false);
        for (const auto& [t, h] : f.arcs) dominated[h] = true;
        for (int v = 1; v <= n; ++v)
            if (!dominated[v]) f.roots.push_back(v);
        fam.members.push_back(std::move(f));
    }
    detail::finalize_family(fam);
    return fam;
}

// Decomposition check for an undominated knot K: the maximum out forests
// must equal {T union F : T spanning tree of G_K, F maximum out forest of
// G_{-K}} and the weights must factor accordingly.
template <typename T>
bool decompose_check(const digraph<T>& g, const std::vector<int>& knot,
                     double cap = kDefaultForestCap) {
    const structure_decomposition dec = decompose(g);
    std::vector<int> key = knot;
    std::sort(key.begin(), key.end());
    bool found = false;
    for (const auto& k : dec.knots)
        if (k == key) { found = true; break; }
    if (!found) throw error(errc::not_a_knot, "given set is not an undominated knot");

    const forest_family<T> whole = max_out_forests_block(g, cap);

    // spanning trees of the restriction to K
    auto [hk, ids] = g.restriction(key);
    std::vector<std::pair<std::vector<std::pair<int, int>>, T>> trees;
    T tree_total(0);
    for (int local_root = 1; local_root <= hk.order(); ++local_root) {
        for (const auto& parent : detail::spanning_trees_rooted_at(hk, local_root, cap)) {
            std::vector<std::pair<int, int>> arcs;
            T w(1);
            for (int v = 1; v <= hk.order(); ++v) {
                if (parent[v] == 0) continue;
                arcs.push_back({ids[parent[v] - 1], ids[v - 1]});
                w *= hk.weight(parent[v], v);
            }
            std::sort(arcs.begin(), arcs.end());
            trees.push_back({std::move(arcs), w});
            tree_total += w;
        }
    }

    // G_{-K}: same vertex set, knot-internal arcs removed
    std::set<int> kset(key.begin(), key.end());
    std::vector<arc<T>> rest_arcs;
    for (const auto& a : g.arcs())
        if (!(kset.count(a.tail) && kset.count(a.head))) rest_arcs.push_back(a);
    const digraph<T> gmk(g.order(), std::move(rest_arcs));
    const forest_family<T> peeled = max_out_forests_block(gmk, cap);

    std::set<std::vector<std::pair<int, int>>> product_set;
    for (const auto& [tarcs, tw] : trees)
        for (const auto& pf : peeled.members) {
            auto merged = tarcs;
            merged.insert(merged.end(), pf.arcs.begin(), pf.arcs.end());
            std::sort(merged.begin(), merged.end());
            product_set.insert(std::move(merged));
        }
    std::set<std::vector<std::pair<int, int>>> whole_set;
    for (const auto& f : whole.members) whole_set.insert(f.arcs);
    if (whole_set != product_set) return false;

    const T lhs = whole.total_weight;
    const T rhs = tree_total * peeled.total_weight;
    if constexpr (scalar_traits<T>::is_exact) return lhs == rhs;
    else {
        const double l = to_double(lhs), r = to_double(rhs);
        const double scale = std::max({1.0, std::abs(l), std::abs(r)});
        return std::abs(l - r) <= 1e-9 * scale;
    }
}

} // namespace forestmat
