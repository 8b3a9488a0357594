#pragma once

#include "rmdp/model.hpp"

namespace rmdp {

// *******************************************************
// Canonical constructors
// *******************************************************

/// Per-successor interval bounds on a distribution.
struct IntervalBounds {
    numvec lower;
    numvec upper;

    bool operator==(const IntervalBounds&) const = default;
};

/// Canonical polytope of an interval-bounded distribution over k
/// successors: rows (-1^T; 1^T; -I; I) with rhs (-1; 1; -lower; upper),
/// 2k+2 rows over k columns. The feasible set is
/// { u >= 0 : sum u = 1, lower <= u <= upper }.
Polytope imdp_to_polytope(const IntervalBounds& bounds);
Polytope imdp_to_polytope(const numvec& lower, const numvec& upper);

/// Interval bounds of the L-infinity ball of radius eps around a center
/// distribution, clipped to [0, 1] per coordinate. Within the simplex the
/// clipped box and the ball coincide, so the translation is exact.
IntervalBounds linf_to_imdp(const numvec& center, prec_t eps);

/// Lifted polytope of the L1 ball of radius eps around a center
/// distribution over k successors. Coordinates are (u, t) with t the
/// per-coordinate deviation bound; rows
///     ( 1^T  0) <= 1
///     (-1^T  0) <= -1
///     ( 0   1^T) <= eps
///     ( I   -I ) <= center
///     (-I   -I ) <= -center
/// give 2k+3 rows over 2k columns with lifted_split = k. Projecting the
/// feasible set onto u yields exactly { u in simplex : |u - center|_1 <= eps }.
Polytope l1_to_lifted_polytope(const numvec& center, prec_t eps);

/// Couplings of two distributions over k points each: joint matrices
/// flattened row-major into k*k coordinates, constrained by both marginals
/// and total mass. Rows (C_row; -C_row; C_col; -C_col; 1^T; -1^T) with
/// rhs (mu; -mu; nu; -nu; 1; -1): 4k+2 rows over k*k columns.
Polytope coupling_polytope(const numvec& mu, const numvec& nu);

/// Distributions supported on a subset of coordinates: rows (+-1^T on the
/// support) plus a zero upper bound per off-support coordinate, so
/// 2 + (dim - |support|) rows. The vertex set is exactly the unit vectors
/// of the support.
Polytope simplex_over_support(const indvec& support, long dim);

// *******************************************************
// Geometric validation
// *******************************************************

/// LP-verified geometry of one polytope.
struct PolytopeValidation {
    bool feasible = false;
    bool bounded = false;
    bool in_simplex = false;

    bool ok() const { return feasible && bounded && in_simplex; }
};

/// Checks nonemptiness by a phase-1 solve, then boundedness and simplex
/// membership through coordinate-extremum LPs on the real coordinates
/// plus extremum LPs on their sum (every feasible projection must sum
/// to 1). Lifted auxiliary coordinates are only checked for boundedness.
PolytopeValidation validate_polytope(const Polytope& p);

/// validate_polytope that throws: EmptyUncertainty when infeasible,
/// ModelError when unbounded or escaping the simplex.
void require_valid_polytope(const Polytope& p);

/// Runs require_valid_polytope on every enabled state-action polytope.
/// Validations are independent and run in parallel.
void validate_rmdp_polytopes(const Rmdp& rmdp);

// *******************************************************
// Structural presolve
// *******************************************************

/// A polytope with provably-zero coordinates removed. Rows with
/// nonnegative coefficients and nonpositive right side force their
/// positive-coefficient coordinates to zero (likewise sign-definite
/// equality rows with zero right side); dropping those coordinates and
/// the rows they empty changes no feasible point. Coupling polytopes of
/// sparse marginals shrink from k*k to |supp mu| * |supp nu| columns.
struct TrimmedPolytope {
    Polytope p;        // reduced polytope over the kept coordinates
    indvec kept;       // reduced coordinate -> original coordinate
    bool empty;        // the presolve proved infeasibility outright

    /// Expands a reduced real-coordinate vector back to the original
    /// real dimension, zeros on the dropped coordinates.
    numvec expand_real(const numvec& reduced, long original_real_dim) const;
};

TrimmedPolytope trim_zero_coordinates(const Polytope& src);

}  // namespace rmdp
