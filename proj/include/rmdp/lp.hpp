#pragma once

#include "rmdp/types.hpp"

namespace rmdp {

enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class LpSense { Minimize, Maximize };

/// Linear program over variables x[0..n):
///
///     optimize   objective . x          (sense)
///     subject to ineq[i] . x <= ineq_rhs[i]
///                eq[i]   . x == eq_rhs[i]
///                lower <= x <= upper
///
/// Bounds may be +-infinity; empty bound vectors mean all variables free.
/// Equality rows are passed to the solver natively, never split into
/// inequality pairs.
struct LpProblem {
    LpSense sense = LpSense::Minimize;
    numvec objective;
    std::vector<SparseRow> ineq;
    numvec ineq_rhs;
    std::vector<SparseRow> eq;
    numvec eq_rhs;
    numvec lower;
    numvec upper;

    long num_vars() const { return static_cast<long>(objective.size()); }

    void add_ineq(SparseRow row, prec_t rhs) {
        ineq.push_back(std::move(row));
        ineq_rhs.push_back(rhs);
    }

    void add_eq(SparseRow row, prec_t rhs) {
        eq.push_back(std::move(row));
        eq_rhs.push_back(rhs);
    }

    /// Sets per-variable bounds, allocating free bounds on first use.
    void set_bounds(long var, prec_t lo, prec_t hi) {
        if (lower.empty()) lower.assign(objective.size(), -inf);
        if (upper.empty()) upper.assign(objective.size(), inf);
        lower[var] = lo;
        upper[var] = hi;
    }
};

/// Result of a solve. solution and objective_value are meaningful only
/// when status == Optimal; the solution then satisfies every constraint
/// within 1e-7.
struct LpOutcome {
    LpStatus status = LpStatus::Optimal;
    numvec solution;
    prec_t objective_value = 0.0;
};

/// Solves the program with a two-phase bounded-variable revised simplex:
/// Dantzig pricing with a switch to Bland's rule after 2(m+n) consecutive
/// degenerate pivots, pivot tolerance 1e-10, feasibility and optimality
/// tolerances 1e-9. Deterministic for a fixed input regardless of thread
/// count. Throws ModelError for malformed input and NumericalFailure when
/// the basis cannot be kept accurate enough to report a solution.
LpOutcome solve_lp(const LpProblem& problem);

}  // namespace rmdp
