#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "forestmat/digraph.hpp"
#include "forestmat/error.hpp"
#include "forestmat/forest_matrices.hpp"
#include "forestmat/matrix.hpp"

namespace forestmat {

template <typename T>
struct markov_chain {
    matrix<T> p;            // row-stochastic transition matrix
    std::optional<T> alpha; // present when built from a digraph
    bool alpha_at_boundary = false;

    int states() const { return static_cast<int>(p.rows()); }
};

template <typename T>
void validate_stochastic(const matrix<T>& p, double tol = 1e-12) {
    if (p.rows() != p.cols() || p.rows() == 0)
        throw error(errc::not_stochastic, "matrix not square");
    for (std::size_t i = 0; i < p.rows(); ++i) {
        T row_sum(0);
        for (std::size_t j = 0; j < p.cols(); ++j) {
            if constexpr (scalar_traits<T>::is_exact) {
                if (p(i, j) < T(0))
                    throw error(errc::not_stochastic, "negative entry in row " + std::to_string(i + 1));
            } else {
                if (to_double(p(i, j)) < -tol)
                    throw error(errc::not_stochastic, "negative entry in row " + std::to_string(i + 1));
            }
            row_sum += p(i, j);
        }
        if constexpr (scalar_traits<T>::is_exact) {
            if (row_sum != T(1))
                throw error(errc::not_stochastic, "row " + std::to_string(i + 1) + " sum != 1");
        } else {
            if (std::abs(to_double(row_sum) - 1.0) > tol)
                throw error(errc::not_stochastic, "row " + std::to_string(i + 1) + " sum off by " +
                                                      std::to_string(to_double(row_sum) - 1.0));
        }
    }
}

template <typename T>
T max_kirchhoff_diagonal(const matrix<T>& L) {
    T m(0);
    for (std::size_t i = 0; i < L.rows(); ++i) m = std::max(m, L(i, i));
    return m;
}

// P = I - alpha L, stochastic exactly when 0 < alpha < (max l_ii)^-1.
template <typename T>
markov_chain<T> related_chain(const digraph<T>& g, const T& alpha) {
    const matrix<T> L = kirchhoff(g);
    const T maxdiag = max_kirchhoff_diagonal(L);
    if (!(alpha > T(0)) || (maxdiag > T(0) && !(alpha * maxdiag < T(1))))
        throw error(errc::alpha_out_of_range, "need 0 < alpha < 1/max l_ii");
    markov_chain<T> chain;
    chain.p = matrix<T>::identity(g.order()) - L * alpha;
    chain.alpha = alpha;
    return chain;
}

// Any chain is related to a family of digraphs with L = (I - P)/alpha; arcs
// run from j to i wherever p_ij > 0 (transitions point at the dominating end).
template <typename T>
digraph<T> digraph_from_chain(const markov_chain<T>& chain, const T& alpha) {
    validate_stochastic(chain.p);
    if (!(alpha > T(0))) throw error(errc::alpha_out_of_range, "alpha must be positive");
    const int n = chain.states();
    std::vector<arc<T>> arcs;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (chain.p(i, j) > T(0)) arcs.push_back({j + 1, i + 1, chain.p(i, j) / alpha});
        }
    return digraph<T>(n, std::move(arcs));
}

// The Q_1-based chain: alpha_1 = (sum of all arc weights)^-1. alpha_1 can sit
// exactly on the admissibility boundary (one vertex absorbs all weight);
// stochasticity still holds there, so it is flagged rather than rejected.
template <typename T>
markov_chain<T> q1_chain(const digraph<T>& g) {
    if (g.arcs().empty()) throw error(errc::no_arcs, "q1 chain needs at least one arc");
    T total(0);
    for (const auto& a : g.arcs()) total += a.weight;
    const T alpha1 = T(1) / total;
    const matrix<T> L = kirchhoff(g);
    markov_chain<T> chain;
    chain.p = matrix<T>::identity(g.order()) - L * alpha1;
    chain.alpha = alpha1;
    const T maxdiag = max_kirchhoff_diagonal(L);
    if constexpr (scalar_traits<T>::is_exact)
        chain.alpha_at_boundary = (alpha1 * maxdiag == T(1));
    else
        chain.alpha_at_boundary = std::abs(to_double(alpha1 * maxdiag) - 1.0) <= 1e-12;
    validate_stochastic(chain.p, 1e-9);
    return chain;
}

// B(k) = (1/k) sum_{t<k} P^t, assembled by index doubling:
// S(2m) = (I + P^m) S(m), S(2m+1) = S(2m) + P^{2m}.
namespace detail {

inline std::pair<matrix<double>, matrix<double>> cesaro_sum_and_power(const matrix<double>& p,
                                                                      long k) {
    if (k == 1) return {matrix<double>::identity(p.rows()), p};
    auto [s_half, p_half] = cesaro_sum_and_power(p, k / 2);
    matrix<double> s = s_half + p_half * s_half;
    matrix<double> pk = p_half * p_half;
    if (k % 2 == 1) {
        s = s + pk;
        pk = pk * p;
    }
    return {std::move(s), std::move(pk)};
}

} // namespace detail

inline matrix<double> cesaro_partial(const markov_chain<double>& chain, long k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    auto [s, pk] = detail::cesaro_sum_and_power(chain.p, k);
    return s / static_cast<double>(k);
}

struct limit_bundle {
    matrix<double> b_jbar;      // combinatorial route, through the related digraph
    matrix<double> b_resolvent; // lim (I - tau(P - I))^-1
    matrix<double> b_partial;   // B(k) at the last k tried
    long k_used = 0;
    bool partial_converged = false;
    bool resolvent_converged = false;
    double gap_jbar_resolvent = 0;
    double gap_jbar_partial = 0;
    double gap_resolvent_partial = 0;
};

// All three routes to the Cesaro limit. The combinatorial route is exact-path
// (closed form); the others iterate, flag their convergence, and report gaps.
inline limit_bundle cesaro_limit(const markov_chain<double>& chain,
                                 double partial_tol = 1e-6, long partial_cap = 1000000) {
    validate_stochastic(chain.p, 1e-9);
    limit_bundle out;

    // alpha = 1 always yields a valid Kirchhoff matrix for a stochastic P
    const digraph<double> g = digraph_from_chain(chain, 1.0);
    out.b_jbar = to_double_matrix(jbar(g).entries);

    const matrix<double> L = matrix<double>::identity(chain.p.rows()) - chain.p;
    tau_limit_result resolvent = jbar_via_limit_tracked(L);
    out.b_resolvent = std::move(resolvent.value);
    out.resolvent_converged = resolvent.converged;

    matrix<double> prev = cesaro_partial(chain, 1);
    long k = 2;
    for (; k <= partial_cap; k *= 2) {
        matrix<double> cur = cesaro_partial(chain, k);
        if (prev.max_abs_diff(cur) < partial_tol) {
            out.partial_converged = true;
            prev = std::move(cur);
            break;
        }
        prev = std::move(cur);
    }
    out.b_partial = std::move(prev);
    out.k_used = std::min(k, partial_cap);

    out.gap_jbar_resolvent = out.b_jbar.max_abs_diff(out.b_resolvent);
    out.gap_jbar_partial = out.b_jbar.max_abs_diff(out.b_partial);
    out.gap_resolvent_partial = out.b_resolvent.max_abs_diff(out.b_partial);
    return out;
}

// Period of the chain from the cycle structure of the support digraph:
// lcm over closed communicating classes of the gcd of within-class cycle
// lengths (capped at the state count). Used by the subsequence-average
// cross-checks in tests.
inline long chain_period(const matrix<double>& p) {
    const int n = static_cast<int>(p.rows());
    std::vector<arc<double>> arcs;
    std::vector<bool> self_loop(n + 1, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (p(i, j) <= 0.0) continue;
            if (i == j)
                self_loop[i + 1] = true;
            else
                arcs.push_back({i + 1, j + 1, p(i, j)});
        }
    const digraph<double> support(n, std::move(arcs));
    const structure_decomposition dec = decompose(support);

    // closed classes: strong components with no outgoing condensation arc
    std::vector<bool> has_out(dec.strong_components.size(), false);
    for (auto [ct, ch] : dec.condensation) has_out[ct] = true;

    long period = 1;
    auto gcd = [](long a, long b) {
        while (b) { a %= b; std::swap(a, b); }
        return a;
    };
    for (std::size_t c = 0; c < dec.strong_components.size(); ++c) {
        if (has_out[c]) continue;
        const auto& comp = dec.strong_components[c];
        long class_period = 0;
        if (std::any_of(comp.begin(), comp.end(), [&](int v) { return self_loop[v]; }))
            class_period = 1;
        else {
            // BFS levels from one vertex; gcd of (level(u) + 1 - level(w))
            std::vector<long> level(n + 1, -1);
            std::vector<int> queue{comp.front()};
            level[comp.front()] = 0;
            for (std::size_t qi = 0; qi < queue.size(); ++qi) {
                int u = queue[qi];
                for (int idx : support.out_arcs(u)) {
                    int w = support.arcs()[idx].head;
                    if (dec.component_of[w] != static_cast<int>(c)) continue;
                    if (level[w] < 0) {
                        level[w] = level[u] + 1;
                        queue.push_back(w);
                    }
                    class_period = gcd(class_period, std::abs(level[u] + 1 - level[w]));
                }
            }
            if (class_period == 0) class_period = 1;
        }
        period = period / gcd(period, class_period) * class_period;
        if (period > n) return n; // cap per the state count
    }
    return period;
}

} // namespace forestmat
