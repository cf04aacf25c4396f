#pragma once

#include <stdexcept>
#include <string>

namespace forestmat {

enum class errc {
    loop_arc,
    duplicate_arc,
    nonpositive_weight,
    vertex_out_of_range,
    arc_not_in_digraph,
    not_a_knot,
    explosion_guard,
    inconsistent_dimension,
    singular_matrix,
    no_convergence,
    alpha_out_of_range,
    not_stochastic,
    no_arcs,
    empty_subset,
    full_subset,
    non_unit_weights,
    parse_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::loop_arc: return "LoopArc";
        case errc::duplicate_arc: return "DuplicateArc";
        case errc::nonpositive_weight: return "NonpositiveWeight";
        case errc::vertex_out_of_range: return "VertexOutOfRange";
        case errc::arc_not_in_digraph: return "ArcNotInDigraph";
        case errc::not_a_knot: return "NotAKnot";
        case errc::explosion_guard: return "ExplosionGuard";
        case errc::inconsistent_dimension: return "InconsistentDimension";
        case errc::singular_matrix: return "SingularMatrix";
        case errc::no_convergence: return "NoConvergence";
        case errc::alpha_out_of_range: return "AlphaOutOfRange";
        case errc::not_stochastic: return "NotStochastic";
        case errc::no_arcs: return "NoArcs";
        case errc::empty_subset: return "EmptySubset";
        case errc::full_subset: return "FullSubset";
        case errc::non_unit_weights: return "NonUnitWeights";
        case errc::parse_error: return "ParseError";
    }
    return "Unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace forestmat
