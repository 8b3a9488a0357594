#pragma once

// Bisimulation metrics between the states of a plain MDP, three ways: the
// Kantorovich transport distance as a building block, direct fixed-point
// iteration of the metric operator, and the reduction to a product robust
// MDP whose worst-case optimal value coincides with the metric.

#include "rmdp/model.hpp"
#include "rmdp/solvers.hpp"
#include "rmdp/types.hpp"

namespace rmdp {

/// Symmetric nonnegative table with zero diagonal, stored row-major.
struct Pseudometric {
    long n = 0;
    numvec table;

    Pseudometric() = default;
    explicit Pseudometric(long states) : n(states), table(states * states, 0.0) {}

    prec_t at(long i, long j) const { return table[i * n + j]; }
    prec_t& at(long i, long j) { return table[i * n + j]; }
};

/// Weights of the metric operator: c_R scales reward differences, c_T scales
/// the transport distance between successor distributions. Requires both
/// nonnegative with c_R + c_T <= 1; the fixed point is unique for c_T < 1.
struct BisimWeights {
    prec_t c_R;
    prec_t c_T;
};

/// The standard weight choice (1 - discount, discount), under which the
/// product-RMDP value table equals the metric.
BisimWeights default_bisim_weights(prec_t discount);

void validate_weights(const BisimWeights& w);

/// Minimum expected ground distance over couplings of mu and nu: solves the
/// transport program over coupling_polytope(mu, nu) with cost d(j,k). The
/// witness is a minimizing coupling, row-major over the full index square.
/// Support trimming shrinks the program to |supp mu| * |supp nu| variables.
std::pair<prec_t, numvec> kantorovich_distance(const Pseudometric& d, const numvec& mu,
                                               const numvec& nu);

/// Least fixed point of the metric operator
///   F(d)(s1,s2) = max_a [ c_R |R(s1,a)-R(s2,a)| + c_T K(d)(P(s1,a), P(s2,a)) ]
/// iterated from d = 0 by Jacobi sweeps (every pair updated from the
/// previous iterate, so sweep order cannot affect the result). Stops when
/// the sweep moved no entry by more than eps*(1-c_T)/c_T, which bounds the
/// distance to the fixed point by eps; for c_T = 0 one sweep is exact.
/// Requires every state to share one enabled action set (ActionMismatch
/// otherwise). Throws IterationCapExceeded after iteration_cap sweeps
/// (0 picks the default); sweeps_out, when given, receives the sweep count.
Pseudometric bisim_fixed_point(const Mdp& mdp, const BisimWeights& weights, prec_t eps,
                               long iteration_cap = 0, long* sweeps_out = nullptr);

/// Product robust MDP over state pairs: state (i,j) sits at index i*|S|+j
/// with name "ni|nj", reward (1-discount)*|R(i,a)-R(j,a)|, and the coupling
/// polytope of the two successor distributions as its uncertainty set. The
/// initial state is the pair (s1,s2). All states must share one enabled
/// action set (ActionMismatch otherwise); every polytope is validated.
Rmdp build_bisim_rmdp(const Mdp& mdp, long s1, long s2);

/// Bisimulation distance of one pair, computed by robust policy iteration
/// on the product RMDP. Equals the fixed point of the metric operator under
/// the default weights.
prec_t bisim_via_rpi(const Mdp& mdp, long s1, long s2, const SolverConfig& config);

/// Full distance table from one robust solve of the product RMDP; also
/// reports the trace so callers can inspect iteration counts.
Pseudometric bisim_table_via_rpi(const Mdp& mdp, const SolverConfig& config,
                                 RpiTrace* trace_out = nullptr);

}  // namespace rmdp
