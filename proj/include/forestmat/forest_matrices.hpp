#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "forestmat/digraph.hpp"
#include "forestmat/error.hpp"
#include "forestmat/matrix.hpp"

namespace forestmat {

// Coefficients of (I + tau L)^-1 = sum tau^k Q_k / sum tau^k sigma_k.
// Q_k holds the weights of the k-arc spanning diverging forests classified by
// tree membership, sigma_k the total weight of that family.
template <typename T>
struct forest_polynomial_t {
    std::vector<matrix<T>> q;  // Q_0 .. Q_{n-1}
    std::vector<T> sigma;      // sigma_0 .. sigma_{n-1}
    int forest_dimension = 0;  // v, from the digraph structure
};

// Faddeev-LeVerrier-style recurrence:
//   Q_0 = I,  sigma_k = tr(L Q_{k-1}) / k,  Q_k = sigma_k I - L Q_{k-1}.
// v is taken from decompose(); the sigma tail is only verified against it.
template <typename T>
forest_polynomial_t<T> forest_polynomial(const digraph<T>& g) {
    const int n = g.order();
    const matrix<T> L = kirchhoff(g);
    forest_polynomial_t<T> poly;
    poly.forest_dimension = decompose(g).forest_dimension;
    poly.q.reserve(n);
    poly.sigma.reserve(n);
    poly.q.push_back(matrix<T>::identity(n));
    poly.sigma.push_back(T(1));
    for (int k = 1; k < n; ++k) {
        const matrix<T> lq = L * poly.q.back();
        const T sk = lq.trace() / T(k);
        matrix<T> qk = matrix<T>::identity(n) * sk - lq;
        poly.sigma.push_back(sk);
        poly.q.push_back(std::move(qk));
    }

    const int top = n - poly.forest_dimension;
    T max_sigma(0);
    for (const T& s : poly.sigma) max_sigma = std::max(max_sigma, matrix<T>::abs_value(s));
    if constexpr (scalar_traits<T>::is_exact) {
        if (!(poly.sigma[top] > T(0)))
            throw error(errc::inconsistent_dimension, "sigma_{n-v} vanished");
        for (int k = top + 1; k < n; ++k)
            if (poly.sigma[k] != T(0))
                throw error(errc::inconsistent_dimension,
                            "sigma_" + std::to_string(k) + " nonzero past n-v");
    } else {
        const double tail_tol = 1e-8 * to_double(max_sigma);
        if (!(to_double(poly.sigma[top]) > tail_tol))
            throw error(errc::inconsistent_dimension, "sigma_{n-v} vanished numerically");
        for (int k = top + 1; k < n; ++k)
            if (std::abs(to_double(poly.sigma[k])) > tail_tol)
                throw error(errc::inconsistent_dimension,
                            "sigma_" + std::to_string(k) + " fails the zero check");
    }
    return poly;
}

// Q(tau) = (I + tau L)^-1, tau > 0
template <typename T>
matrix<T> q_tau(const matrix<T>& L, const T& tau) {
    const matrix<T> m = matrix<T>::identity(L.rows()) + L * tau;
    return m.inverse();
}

template <typename T>
struct jbar_t {
    matrix<T> entries;                          // row-stochastic, idempotent
    T sigma;                                    // eps(F_{n-v})
    std::vector<std::vector<bool>> zero_pattern; // true where the entry is provably nonzero
    int forest_dimension = 0;
};

// Certified nonzero pattern: entry (i,j) nonzero iff j lies in some
// undominated knot and i is reachable from j.
template <typename T>
std::vector<std::vector<bool>> jbar_nonzero_pattern(const digraph<T>& g) {
    const int n = g.order();
    const structure_decomposition dec = decompose(g);
    std::vector<bool> in_ktilde(n + 1, false);
    for (int v : dec.knot_union) in_ktilde[v] = true;
    std::vector<std::vector<bool>> pat(n, std::vector<bool>(n, false));
    for (int j = 1; j <= n; ++j) {
        if (!in_ktilde[j]) continue;
        for (int i : reachable(g, j)) pat[i - 1][j - 1] = true;
    }
    return pat;
}

// Jbar = Q_{n-v} / sigma_{n-v}, the normalized matrix of maximum out forests.
// Entries the certified pattern proves zero are checked against the computed
// values (they only carry roundoff) and then snapped to exact zeros.
template <typename T>
jbar_t<T> jbar(const digraph<T>& g) {
    const forest_polynomial_t<T> poly = forest_polynomial(g);
    const int n = g.order();
    const int top = n - poly.forest_dimension;
    jbar_t<T> out;
    out.sigma = poly.sigma[top];
    out.entries = poly.q[top] / out.sigma;
    out.zero_pattern = jbar_nonzero_pattern(g);
    out.forest_dimension = poly.forest_dimension;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (out.zero_pattern[i][j]) continue;
            if constexpr (scalar_traits<T>::is_exact) {
                if (out.entries(i, j) != T(0))
                    throw error(errc::inconsistent_dimension,
                                "certified zero entry is nonzero");
            } else {
                if (std::abs(to_double(out.entries(i, j))) > 1e-8)
                    throw error(errc::inconsistent_dimension,
                                "certified zero entry exceeds roundoff");
                out.entries(i, j) = T(0);
            }
        }
    return out;
}

struct tau_limit_result {
    matrix<double> value; // iterate with the smallest successive difference
    bool converged = false;
    double achieved_diff = 0; // successive difference at that iterate
};

// Jbar as the limit of (I + tau L)^-1 along an escalating tau ladder. The
// limit is invariant under scaling L, so L is normalized first; that keeps
// the ladder's effective range the same for every weight scale. Rungs grow
// by 10x: with 1000x rungs the successive differences bottom out above the
// stop tolerance before roundoff takes over.
inline tau_limit_result jbar_via_limit_tracked(const matrix<double>& L, double stop_tol = 1e-7,
                                               double tau_cap = 1e12) {
    double scale = 0;
    for (std::size_t i = 0; i < L.rows(); ++i) scale = std::max(scale, L(i, i));
    const matrix<double> ln = scale > 0 ? L / scale : L;
    tau_limit_result best;
    best.achieved_diff = std::numeric_limits<double>::infinity();
    matrix<double> prev;
    bool have_prev = false;
    for (double tau = 1e3; tau <= tau_cap; tau *= 10) {
        matrix<double> cur = q_tau<double>(ln, tau);
        if (have_prev) {
            const double diff = prev.max_abs_diff(cur);
            if (diff < best.achieved_diff) {
                best.achieved_diff = diff;
                best.value = cur;
            }
            if (diff < stop_tol) {
                best.converged = true;
                return best;
            }
        }
        prev = std::move(cur);
        have_prev = true;
    }
    return best;
}

inline matrix<double> jbar_via_limit(const matrix<double>& L, double stop_tol = 1e-7,
                                     double tau_cap = 1e12) {
    tau_limit_result r = jbar_via_limit_tracked(L, stop_tol, tau_cap);
    if (!r.converged) throw error(errc::no_convergence, "tau ladder exhausted");
    return std::move(r.value);
}

// det of L with rows and columns of phi removed; equals the total weight of
// spanning diverging forests rooted exactly at phi.
template <typename T>
T forest_minor_weight(const matrix<T>& L, const std::vector<int>& phi) {
    if (phi.empty()) throw error(errc::empty_subset, "phi must be nonempty");
    if (phi.size() >= L.rows()) throw error(errc::full_subset, "phi must be a proper subset");
    std::vector<std::size_t> drop;
    for (int v : phi) {
        if (v < 1 || v > static_cast<int>(L.rows()))
            throw error(errc::vertex_out_of_range, "vertex " + std::to_string(v));
        drop.push_back(static_cast<std::size_t>(v - 1));
    }
    return L.minor_excluding(drop, drop).determinant();
}

} // namespace forestmat
