#pragma once

// Robust Bellman machinery: the inner minimization over an uncertainty
// polytope, the robust Bellman operator, and exact policy evaluation through
// one dual linear program per policy.

#include "rmdp/model.hpp"
#include "rmdp/types.hpp"

namespace rmdp {

/// Result of minimizing u^T v over an uncertainty polytope. The witness is a
/// minimizing point expressed over the original real coordinates (auxiliary
/// lifted coordinates are not reported). Ties between minimizing vertices are
/// broken by whichever vertex the simplex solver reaches; only the value is
/// deterministic across runs.
struct InnerSolution {
    prec_t value;
    numvec witness;
};

/// Minimizes u^T v over the polytope's real coordinates (auxiliary lifted
/// coordinates carry zero objective). The vector length must equal the
/// polytope's real dimension. Provably-zero coordinates are trimmed before
/// the solve, so the cost scales with the support, not the dimension.
/// Throws EmptyUncertainty when the polytope is infeasible and ModelError
/// when the minimum is unbounded below (the set escapes the simplex).
InnerSolution inner_min(const Polytope& polytope, const numvec& v);

/// One application of the robust Bellman operator:
///   B(v)(s) = max over enabled a of R(s,a) + discount * min_{u in U_sa} u^T v.
/// The per-state work runs in parallel; results are bitwise identical to the
/// serial reference because states are independent.
numvec robust_bellman_apply(const Rmdp& rmdp, const numvec& v);

/// Serial reference implementation of the same operator, kept for regression
/// tests and the kernel benchmark.
numvec robust_bellman_apply_serial(const Rmdp& rmdp, const numvec& v);

/// Robust Bellman operator together with a greedy policy: argmax actions with
/// ties broken toward the lowest action index.
numvec robust_bellman_greedy(const Rmdp& rmdp, const numvec& v, Policy& policy_out);

/// Exact robust value of a fixed policy, computed by a single linear program.
/// The program maximizes sum_s v(s) subject to, per state s with trimmed
/// uncertainty rows D u <= b, E u = d over u >= 0:
///
///   v(s) + b^T w_s + d^T y_s <= R(s, pi(s))        (w_s >= 0, y_s free)
///   -(D^T w_s)_x - (E^T y_s)_x - discount * v(x) <= 0   for real coords x
///   -(D^T w_s)_x - (E^T y_s)_x <= 0                     for lifted coords x
///
/// The coordinate blocks are the dual of the inner minimization taken over
/// the nonnegativity-augmented system, so they are valid for polytopes whose
/// rows do not by themselves imply u >= 0. At the optimum v is the robust
/// value of pi; the certificate is LpExact.
///
/// Requires every uncertainty polytope of the policy to be non-lifted; use
/// robust_policy_evaluation_lifted for lifted representations. Throws
/// EmptyUncertainty when some uncertainty set is empty (detected during
/// presolve or as an unbounded evaluation program) and NumericalFailure when
/// the program is infeasible, which a valid model cannot produce.
ValueFunction robust_policy_evaluation(const Rmdp& rmdp, const Policy& policy);

/// Policy evaluation for models whose uncertainty sets are lifted polytopes
/// (lifted_split equal to the state count). Same contract and dual assembly
/// as robust_policy_evaluation; the lifted coordinate block carries no value
/// terms. The two representations may not be mixed within one model.
ValueFunction robust_policy_evaluation_lifted(const Rmdp& rmdp, const Policy& policy);

}  // namespace rmdp
