#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "forestmat/error.hpp"
#include "forestmat/matrix.hpp"
#include "forestmat/rational.hpp"

namespace forestmat {

// Vertices are 1..n everywhere in the public interface. Matrix row/column
// k corresponds to vertex k+1.

template <typename T>
struct arc {
    int tail;
    int head;
    T weight;

    friend bool operator==(const arc& a, const arc& b) {
        return a.tail == b.tail && a.head == b.head && a.weight == b.weight;
    }
};

template <typename T>
class digraph {
public:
    // Validates and normalizes (arcs sorted by tail, then head). Single-vertex
    // digraphs arise internally as restrictions; the public builder requires
    // n > 1.
    digraph(int n, std::vector<arc<T>> arcs) : n_(n), arcs_(std::move(arcs)) {
        if (n_ < 1) throw error(errc::vertex_out_of_range, "need at least 1 vertex");
        for (const auto& a : arcs_) {
            if (a.tail < 1 || a.tail > n_ || a.head < 1 || a.head > n_)
                throw error(errc::vertex_out_of_range,
                            "arc (" + std::to_string(a.tail) + "," + std::to_string(a.head) + ")");
            if (a.tail == a.head)
                throw error(errc::loop_arc, "loop at vertex " + std::to_string(a.tail));
            if (!(a.weight > T(0)))
                throw error(errc::nonpositive_weight,
                            "arc (" + std::to_string(a.tail) + "," + std::to_string(a.head) + ")");
        }
        std::sort(arcs_.begin(), arcs_.end(), [](const arc<T>& a, const arc<T>& b) {
            return std::pair(a.tail, a.head) < std::pair(b.tail, b.head);
        });
        for (std::size_t i = 1; i < arcs_.size(); ++i)
            if (arcs_[i].tail == arcs_[i - 1].tail && arcs_[i].head == arcs_[i - 1].head)
                throw error(errc::duplicate_arc, "arc (" + std::to_string(arcs_[i].tail) + "," +
                                                     std::to_string(arcs_[i].head) + ")");
        out_.assign(n_ + 1, {});
        in_.assign(n_ + 1, {});
        for (std::size_t i = 0; i < arcs_.size(); ++i) {
            out_[arcs_[i].tail].push_back(static_cast<int>(i));
            in_[arcs_[i].head].push_back(static_cast<int>(i));
        }
    }

    int order() const { return n_; }
    const std::vector<arc<T>>& arcs() const { return arcs_; }
    const std::vector<int>& out_arcs(int v) const { return out_[v]; }
    const std::vector<int>& in_arcs(int v) const { return in_[v]; }
    int in_degree(int v) const { return static_cast<int>(in_[v].size()); }

    // index into arcs() of (tail, head), or -1
    int arc_index(int tail, int head) const {
        for (int idx : out_[tail])
            if (arcs_[idx].head == head) return idx;
        return -1;
    }

    bool has_arc(int tail, int head) const { return arc_index(tail, head) >= 0; }

    // arc weight epsilon_{tail,head}, zero when absent
    T weight(int tail, int head) const {
        int idx = arc_index(tail, head);
        return idx < 0 ? T(0) : arcs_[idx].weight;
    }

    digraph with_weight(int tail, int head, const T& w) const {
        std::vector<arc<T>> as = arcs_;
        for (auto& a : as)
            if (a.tail == tail && a.head == head) {
                a.weight = w;
                return digraph(n_, std::move(as));
            }
        as.push_back({tail, head, w});
        return digraph(n_, std::move(as));
    }

    digraph reversed() const {
        std::vector<arc<T>> as;
        as.reserve(arcs_.size());
        for (const auto& a : arcs_) as.push_back({a.head, a.tail, a.weight});
        return digraph(n_, std::move(as));
    }

    // Restriction to `verts`: induced subgraph, vertices renumbered 1..|verts|
    // in ascending original order. Second member maps new id -> original id.
    std::pair<digraph, std::vector<int>> restriction(const std::vector<int>& verts) const {
        std::vector<int> sorted = verts;
        std::sort(sorted.begin(), sorted.end());
        std::map<int, int> renum;
        for (std::size_t i = 0; i < sorted.size(); ++i) renum[sorted[i]] = static_cast<int>(i + 1);
        std::vector<arc<T>> as;
        for (const auto& a : arcs_) {
            auto t = renum.find(a.tail), h = renum.find(a.head);
            if (t != renum.end() && h != renum.end()) as.push_back({t->second, h->second, a.weight});
        }
        return {digraph(static_cast<int>(sorted.size()), std::move(as)), sorted};
    }

private:
    int n_;
    std::vector<arc<T>> arcs_;
    std::vector<std::vector<int>> out_, in_;
};

template <typename T>
digraph<T> build_digraph(int n, std::vector<arc<T>> arcs) {
    if (n <= 1) throw error(errc::vertex_out_of_range, "need at least 2 vertices");
    return digraph<T>(n, std::move(arcs));
}

// l_ij = -eps_ji for i != j, l_ii = sum of weights of arcs entering i.
// Every row sums to zero.
template <typename T>
matrix<T> kirchhoff(const digraph<T>& g) {
    const int n = g.order();
    matrix<T> L(n, n);
    for (const auto& a : g.arcs()) {
        L(a.head - 1, a.tail - 1) -= a.weight;
        L(a.head - 1, a.head - 1) += a.weight;
    }
    return L;
}

template <typename T>
std::set<int> reachable(const digraph<T>& g, int from) {
    if (from < 1 || from > g.order())
        throw error(errc::vertex_out_of_range, "vertex " + std::to_string(from));
    std::set<int> seen{from};
    std::vector<int> stack{from};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int idx : g.out_arcs(v)) {
            int w = g.arcs()[idx].head;
            if (seen.insert(w).second) stack.push_back(w);
        }
    }
    return seen;
}

// entry (i-1, j-1) true iff j reachable from i (reflexive, transitive)
template <typename T>
std::vector<std::vector<bool>> reachability_by_search(const digraph<T>& g) {
    const int n = g.order();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (int v = 1; v <= n; ++v)
        for (int w : reachable(g, v)) r[v - 1][w - 1] = true;
    return r;
}

struct structure_decomposition {
    std::vector<std::vector<int>> strong_components; // each sorted; ordered by smallest vertex
    std::vector<int> component_of;                   // 1-based vertex -> component index
    std::vector<std::pair<int, int>> condensation;   // arcs between component indices
    std::vector<std::vector<int>> knots;             // undominated knots K_1..K_v
    std::vector<int> knot_union;                     // sorted union of all knots
    std::vector<std::vector<int>> k_plus;            // K_i^+, parallel to knots
    int forest_dimension = 0;                        // v = number of knots
};

namespace detail {

// iterative Tarjan
template <typename T>
std::vector<std::vector<int>> strong_components_of(const digraph<T>& g) {
    const int n = g.order();
    std::vector<int> index(n + 1, -1), low(n + 1, 0);
    std::vector<bool> on_stack(n + 1, false);
    std::vector<int> stack;
    std::vector<std::vector<int>> comps;
    int counter = 0;

    struct frame {
        int v;
        std::size_t next;
    };
    for (int start = 1; start <= n; ++start) {
        if (index[start] != -1) continue;
        std::vector<frame> call{{start, 0}};
        index[start] = low[start] = counter++;
        stack.push_back(start);
        on_stack[start] = true;
        while (!call.empty()) {
            frame& f = call.back();
            const auto& outs = g.out_arcs(f.v);
            if (f.next < outs.size()) {
                int w = g.arcs()[outs[f.next++]].head;
                if (index[w] == -1) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    std::vector<int> comp;
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp.push_back(w);
                    } while (w != f.v);
                    std::sort(comp.begin(), comp.end());
                    comps.push_back(std::move(comp));
                }
                int v = f.v;
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            }
        }
    }
    std::sort(comps.begin(), comps.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return comps;
}

} // namespace detail

// Strong components, condensation, undominated knots, K_i^+ sets, and the
// forest dimension v (= number of knots).
template <typename T>
structure_decomposition decompose(const digraph<T>& g) {
    const int n = g.order();
    structure_decomposition d;
    d.strong_components = detail::strong_components_of(g);
    d.component_of.assign(n + 1, -1);
    for (std::size_t c = 0; c < d.strong_components.size(); ++c)
        for (int v : d.strong_components[c]) d.component_of[v] = static_cast<int>(c);

    std::set<std::pair<int, int>> cond;
    for (const auto& a : g.arcs()) {
        int ct = d.component_of[a.tail], ch = d.component_of[a.head];
        if (ct != ch) cond.insert({ct, ch});
    }
    d.condensation.assign(cond.begin(), cond.end());

    std::vector<bool> has_in(d.strong_components.size(), false);
    for (auto [ct, ch] : d.condensation) has_in[ch] = true;
    std::vector<int> knot_of_vertex(n + 1, -1);
    for (std::size_t c = 0; c < d.strong_components.size(); ++c) {
        if (has_in[c]) continue;
        for (int v : d.strong_components[c])
            knot_of_vertex[v] = static_cast<int>(d.knots.size());
        d.knots.push_back(d.strong_components[c]);
    }
    for (const auto& k : d.knots) d.knot_union.insert(d.knot_union.end(), k.begin(), k.end());
    std::sort(d.knot_union.begin(), d.knot_union.end());
    d.forest_dimension = static_cast<int>(d.knots.size());

    // K_i^+ = reachable from K_i, unreachable from every other knot
    std::vector<std::set<int>> reach_from_knot(d.knots.size());
    for (std::size_t i = 0; i < d.knots.size(); ++i)
        reach_from_knot[i] = reachable(g, d.knots[i].front());
    d.k_plus.resize(d.knots.size());
    for (int v = 1; v <= n; ++v) {
        int owner = -1;
        bool multiple = false;
        for (std::size_t i = 0; i < d.knots.size(); ++i) {
            if (reach_from_knot[i].count(v)) {
                if (owner >= 0) { multiple = true; break; }
                owner = static_cast<int>(i);
            }
        }
        if (owner >= 0 && !multiple) d.k_plus[owner].push_back(v);
    }
    return d;
}

} // namespace forestmat
