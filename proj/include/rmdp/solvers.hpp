#pragma once

// Solvers for the worst-case optimal control problem: robust policy
// iteration with an optional suboptimal-action elimination test, robust
// bounded value iteration, and the threshold decision procedure.

#include <cstdint>
#include <variant>
#include <vector>

#include "rmdp/model.hpp"
#include "rmdp/types.hpp"

namespace rmdp {

/// Start policy iteration from the lowest enabled action in every state.
struct FirstAction {};

/// Start policy iteration from a uniformly random enabled action per state,
/// drawn from the library PRNG so runs reproduce across platforms.
struct SeededPolicy {
    std::uint64_t seed;
};

struct SolverConfig {
    /// Convergence gap for value iteration; must be positive.
    prec_t eps = 1e-6;
    /// An action counts as improving only when its normalized advantage
    /// exceeds this margin, absorbing LP tolerance in the improvement test.
    prec_t improvement_margin = 1e-7;
    /// Hard iteration limit; 0 picks a documented per-solver default.
    long iteration_cap = 0;
    std::variant<FirstAction, SeededPolicy> initial_policy = FirstAction{};
    /// Enables the suboptimality filter that shrinks the candidate action
    /// sets between policy-iteration rounds.
    bool use_optimality_test = false;
};

enum class RpiTermination { NoImprovingAction, IterationCap };

/// One recorded round of policy iteration: the policy that was evaluated,
/// its exact value, the normalized advantages (negative infinity marks pairs
/// that were not computed, i.e. previously eliminated actions), and the
/// candidate action sets after this round's filter.
struct RpiIteration {
    Policy policy;
    numvec values;
    std::vector<numvec> deltas;
    std::vector<indvec> surviving;
};

struct RpiTrace {
    long iterations = 0;
    std::vector<RpiIteration> steps;
    RpiTermination terminated_by = RpiTermination::NoImprovingAction;
};

struct RpiResult {
    Policy policy;
    ValueFunction value;
    RpiTrace trace;
};

/// Robust policy iteration. Each round evaluates the incumbent policy
/// exactly (one dual LP), computes the normalized advantage
///   delta(s,a) = R(s,a) + discount * inner_min(U_sa, V) - V(s)
/// for every surviving action, and moves to the per-state argmax with ties
/// broken toward the incumbent, then the lowest action index. Terminates
/// when no action improves by more than the configured margin; hitting the
/// iteration cap is recorded in the trace and returns the best policy found
/// rather than throwing, since the incumbent value is still exact.
RpiResult robust_policy_iteration(const Rmdp& rmdp, const SolverConfig& config);

/// Suboptimal-action elimination. Keeps action a at state s iff
///   delta(s,a) >= max_a' delta(s,a') - discount/(1-discount) * span
/// where span is taken over the per-state maxima of delta across states.
/// The per-state argmax always survives; sets only ever shrink. Entries of
/// deltas outside the current sets are ignored.
std::vector<indvec> suboptimality_filter(const std::vector<numvec>& deltas, prec_t discount,
                                         const std::vector<indvec>& current_sets);

/// Value iteration between monotone bounds: the lower iterate starts at
/// min R/(1-discount), the upper at max R/(1-discount), both move through
/// the robust Bellman operator, and iteration stops once the componentwise
/// gap is at most eps. Values are the midpoint and the certificate keeps
/// both bounds. Throws IterationCapExceeded when the cap is hit first;
/// iterations_out, when given, receives the number of completed sweeps.
ValueFunction robust_value_iteration(const Rmdp& rmdp, const SolverConfig& config,
                                     long* iterations_out = nullptr);

struct ThresholdOutcome {
    /// Whether some policy reaches the threshold at the initial state.
    bool satisfied;
    /// The optimal policy; a witness exactly when satisfied.
    Policy policy;
    /// Optimal robust value at the initial state; the refutation bound when
    /// not satisfied.
    prec_t bound;
};

/// Decides whether any policy achieves robust value at least kappa at the
/// initial state, by solving for the optimal policy and comparing within a
/// 1e-7 slack.
ThresholdOutcome threshold_decision(const Rmdp& rmdp, prec_t kappa, const SolverConfig& config);

/// Worst-case round bound for policy iteration,
///   T * (total enabled actions - |S|)  with
///   T = floor(|S|/(1-discount) * ln(|S|^2/(1-discount))) + 1.
/// Meaningful only when positive; used as the default iteration cap.
long rpi_iteration_bound(const Rmdp& rmdp);

}  // namespace rmdp
