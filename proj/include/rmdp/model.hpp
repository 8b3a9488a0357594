#pragma once

#include <optional>
#include <variant>

#include "rmdp/types.hpp"

namespace rmdp {

// *******************************************************
// Transitions
// *******************************************************

/// Sparse probability distribution over successor states: strictly
/// ascending state indices with matching probabilities.
struct Transition {
    indvec succs;
    numvec probs;

    Transition() = default;
    Transition(indvec s, numvec p) : succs(std::move(s)), probs(std::move(p)) {}

    size_t size() const { return succs.size(); }

    prec_t sum() const {
        prec_t r = 0.0;
        for (prec_t p : probs) r += p;
        return r;
    }

    /// Probability of one successor (0 when outside the support).
    prec_t prob_of(long state) const {
        for (size_t i = 0; i < succs.size(); ++i)
            if (succs[i] == state) return probs[i];
        return 0.0;
    }

    /// Dense distribution over num_states states.
    numvec dense(long num_states) const {
        numvec r(static_cast<size_t>(num_states), 0.0);
        for (size_t i = 0; i < succs.size(); ++i) r[succs[i]] += probs[i];
        return r;
    }

    /// Expected value of a dense vector under this distribution.
    prec_t expectation(const numvec& v) const {
        prec_t r = 0.0;
        for (size_t i = 0; i < succs.size(); ++i) r += probs[i] * v[succs[i]];
        return r;
    }

    bool operator==(const Transition&) const = default;
};

/// Builds a sparse transition from a dense distribution, dropping zeros.
Transition transition_from_dense(const numvec& dense);

// *******************************************************
// Markov decision processes
// *******************************************************

/// Finite MDP with state-action rewards and a discount in [0, 1).
/// Actions come from a global list; each state enables a nonempty subset.
/// transitions[s][a] and rewards[s][a] are meaningful only for enabled a.
struct Mdp {
    std::vector<std::string> state_names;
    std::vector<std::string> action_names;
    std::vector<indvec> enabled;
    std::vector<std::vector<Transition>> transitions;
    std::vector<numvec> rewards;
    long initial_state = 0;
    prec_t discount = 0.9;

    long num_states() const { return static_cast<long>(state_names.size()); }
    long num_actions() const { return static_cast<long>(action_names.size()); }

    bool is_enabled(long s, long a) const {
        for (long e : enabled[s])
            if (e == a) return true;
        return false;
    }

    bool operator==(const Mdp&) const = default;
};

/// Checks the structural invariants: consistent shapes, nonempty enabled
/// sets, distributions nonnegative and summing to 1 within 1e-9, finite
/// rewards, discount in [0, 1), valid initial state.
/// Throws ModelError on the first violation.
void validate_mdp(const Mdp& mdp);

// *******************************************************
// Polytopic uncertainty sets
// *******************************************************

/// Convex polytope of (possibly lifted) probability vectors in halfspace
/// form. The feasible set is
///     { x in R^dim : x >= 0, D x <= rhs, E x = eq_rhs }
/// where D stacks `rows` and E stacks `eq_rows`. Nonnegativity is implicit
/// (variable lower bounds in the solver), never stored as rows.
///
/// A lifted polytope carries auxiliary coordinates after the first
/// `lifted_split` real ones; only the real coordinates form the
/// distribution.
struct Polytope {
    long dim = 0;
    std::vector<SparseRow> rows;
    numvec rhs;
    std::vector<SparseRow> eq_rows;
    numvec eq_rhs;
    std::optional<long> lifted_split;

    long num_rows() const { return static_cast<long>(rows.size()); }
    long num_eq_rows() const { return static_cast<long>(eq_rows.size()); }

    /// Number of real (distribution) coordinates.
    long real_dim() const { return lifted_split ? *lifted_split : dim; }

    bool is_lifted() const { return lifted_split.has_value(); }

    bool operator==(const Polytope&) const = default;
};

/// Checks shape invariants of one polytope: at least one row, column
/// indices within dim, finite entries, lifted_split within (0, dim] when
/// present. Throws ModelError.
void validate_polytope_shape(const Polytope& p);

// *******************************************************
// Robust MDPs
// *******************************************************

/// Robust MDP with one uncertainty polytope per enabled state-action pair.
/// Real polytope coordinates index successor states, so real_dim of every
/// polytope equals the number of states.
struct Rmdp {
    std::vector<std::string> state_names;
    std::vector<std::string> action_names;
    std::vector<indvec> enabled;
    std::vector<std::vector<Polytope>> uncertainty;
    std::vector<numvec> rewards;
    long initial_state = 0;
    prec_t discount = 0.9;

    long num_states() const { return static_cast<long>(state_names.size()); }
    long num_actions() const { return static_cast<long>(action_names.size()); }

    bool is_enabled(long s, long a) const {
        for (long e : enabled[s])
            if (e == a) return true;
        return false;
    }

    bool operator==(const Rmdp&) const = default;
};

/// Checks the structural invariants: consistent shapes, nonempty enabled
/// sets, polytope shapes valid with real_dim == num_states, finite rewards,
/// discount in [0, 1), valid initial state. Polytope geometry (nonempty,
/// bounded, inside the simplex) is checked separately by LP-based
/// validation in the uncertainty module. Throws ModelError.
void validate_rmdp(const Rmdp& rmdp);

/// Embeds an MDP as a robust MDP whose uncertainty sets are the single
/// points {p_sa}, written in the canonical interval form
///     rows (-1^T; 1^T; -I; I), rhs (-1; 1; -p; p).
/// Robust solvers on the result reproduce the classical values exactly.
Rmdp mdp_as_degenerate_rmdp(const Mdp& mdp);

/// Disjoint union of two MDPs over the same action set and discount. State
/// names are prefixed "0/" and "1/" so they stay unique; the second MDP's
/// states follow the first's, shifted by its state count. The initial state
/// is the first MDP's. The union lets the bisimulation machinery compare
/// states of two different models. Throws ModelError when the action sets
/// or discounts differ.
Mdp disjoint_union(const Mdp& first, const Mdp& second);

// *******************************************************
// Policies and value functions
// *******************************************************

/// Memoryless deterministic policy: one enabled action index per state.
using Policy = indvec;

/// Checks that the policy selects an enabled action in every state.
void validate_policy(const Mdp& mdp, const Policy& policy);
void validate_policy(const Rmdp& rmdp, const Policy& policy);

/// Certificate: values came out of an exact LP solve.
struct LpExact {
    bool operator==(const LpExact&) const = default;
};

/// Certificate: values are midpoints of monotone bounds with
/// max(upper - lower) <= eps.
struct BoundedGap {
    numvec lower;
    numvec upper;
    prec_t eps = 0.0;

    bool operator==(const BoundedGap&) const = default;
};

/// Value vector over states together with the certificate of how it
/// was obtained.
struct ValueFunction {
    numvec values;
    std::variant<LpExact, BoundedGap> certificate;

    prec_t at(long state) const { return values[state]; }

    bool operator==(const ValueFunction&) const = default;
};

// *******************************************************
// Two-player discounted games
// *******************************************************

/// Turn-based discounted game: the protagonist picks an action, the
/// antagonist then picks any successor from a nonempty set. Every action
/// is available in every state.
struct DiscountedGame {
    std::vector<std::string> state_names;
    std::vector<std::string> action_names;
    std::vector<std::vector<indvec>> successors;
    std::vector<numvec> rewards;
    long initial_state = 0;
    prec_t discount = 0.9;

    long num_states() const { return static_cast<long>(state_names.size()); }
    long num_actions() const { return static_cast<long>(action_names.size()); }

    bool operator==(const DiscountedGame&) const = default;
};

/// Checks the structural invariants: consistent shapes, every successor
/// set nonempty with valid ascending state indices, finite rewards,
/// discount in [0, 1), valid initial state. Throws ModelError.
void validate_game(const DiscountedGame& game);

}  // namespace rmdp
