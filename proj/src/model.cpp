#include "rmdp/model.hpp"

#include <cmath>
#include <sstream>

namespace rmdp {

namespace {

constexpr prec_t STOCHASTIC_TOL = 1e-9;

std::string loc(long s, long a) {
    std::ostringstream out;
    out << "state " << s << ", action " << a;
    return out.str();
}

void check_finite(prec_t v, const std::string& what) {
    if (!std::isfinite(v)) throw ModelError(what + " is not finite");
}

/// Shape checks shared by Mdp and Rmdp: names, enabled sets, rewards,
/// discount, initial state. Per-(s,a) payloads are checked by the caller.
template <class Model>
void check_frame(const Model& m, size_t payload_states) {
    const size_t n = m.state_names.size();
    const size_t na = m.action_names.size();
    if (n == 0) throw ModelError("model has no states");
    if (na == 0) throw ModelError("model has no actions");
    if (m.enabled.size() != n) throw ModelError("enabled sets do not match state count");
    if (payload_states != n) throw ModelError("per-state payload does not match state count");
    if (m.rewards.size() != n) throw ModelError("rewards do not match state count");
    if (m.initial_state < 0 || static_cast<size_t>(m.initial_state) >= n)
        throw ModelError("initial state out of range");
    if (!(m.discount >= 0.0) || !(m.discount < 1.0))
        throw ModelError("discount must lie in [0, 1)");
    for (size_t s = 0; s < n; ++s) {
        const indvec& acts = m.enabled[s];
        if (acts.empty())
            throw ModelError("state " + std::to_string(s) + " enables no action");
        long prev = -1;
        for (long a : acts) {
            if (a < 0 || static_cast<size_t>(a) >= na)
                throw ModelError("enabled action out of range in state " + std::to_string(s));
            if (a <= prev)
                throw ModelError("enabled actions not strictly ascending in state " +
                                 std::to_string(s));
            prev = a;
        }
        if (m.rewards[s].size() != na)
            throw ModelError("reward row has wrong length in state " + std::to_string(s));
        for (long a : acts) check_finite(m.rewards[s][a], "reward at " + loc(s, a));
    }
}

}  // namespace

Transition transition_from_dense(const numvec& dense) {
    Transition t;
    for (size_t i = 0; i < dense.size(); ++i)
        if (dense[i] != 0.0) {
            t.succs.push_back(static_cast<long>(i));
            t.probs.push_back(dense[i]);
        }
    return t;
}

void validate_mdp(const Mdp& mdp) {
    check_frame(mdp, mdp.transitions.size());
    const long n = mdp.num_states();
    for (long s = 0; s < n; ++s) {
        if (mdp.transitions[s].size() != static_cast<size_t>(mdp.num_actions()))
            throw ModelError("transition row has wrong length in state " + std::to_string(s));
        for (long a : mdp.enabled[s]) {
            const Transition& t = mdp.transitions[s][a];
            if (t.succs.size() != t.probs.size())
                throw ModelError("transition indices and probabilities differ at " + loc(s, a));
            if (t.succs.empty()) throw ModelError("empty transition at " + loc(s, a));
            long prev = -1;
            for (size_t i = 0; i < t.succs.size(); ++i) {
                if (t.succs[i] <= prev || t.succs[i] >= n)
                    throw ModelError("bad successor index at " + loc(s, a));
                prev = t.succs[i];
                check_finite(t.probs[i], "probability at " + loc(s, a));
                if (t.probs[i] < 0.0)
                    throw ModelError("negative probability at " + loc(s, a));
            }
            if (std::abs(t.sum() - 1.0) > STOCHASTIC_TOL)
                throw ModelError("probabilities do not sum to 1 at " + loc(s, a));
        }
    }
}

void validate_polytope_shape(const Polytope& p) {
    if (p.dim <= 0) throw ModelError("polytope has no columns");
    if (p.rows.empty() && p.eq_rows.empty()) throw ModelError("polytope has no rows");
    if (p.rows.size() != p.rhs.size())
        throw ModelError("polytope row count does not match rhs length");
    if (p.eq_rows.size() != p.eq_rhs.size())
        throw ModelError("polytope equality row count does not match rhs length");
    if (p.lifted_split && (*p.lifted_split <= 0 || *p.lifted_split > p.dim))
        throw ModelError("lifted split outside (0, dim]");
    auto check_rows = [&](const std::vector<SparseRow>& rows, const numvec& rhs) {
        for (size_t i = 0; i < rows.size(); ++i) {
            check_finite(rhs[i], "polytope rhs entry");
            const SparseRow& row = rows[i];
            if (row.cols.size() != row.vals.size())
                throw ModelError("polytope row indices and values differ in length");
            long prev = -1;
            for (size_t j = 0; j < row.cols.size(); ++j) {
                if (row.cols[j] <= prev || row.cols[j] >= p.dim)
                    throw ModelError("polytope row has a bad column index");
                prev = row.cols[j];
                check_finite(row.vals[j], "polytope coefficient");
            }
        }
    };
    check_rows(p.rows, p.rhs);
    check_rows(p.eq_rows, p.eq_rhs);
}

void validate_rmdp(const Rmdp& rmdp) {
    check_frame(rmdp, rmdp.uncertainty.size());
    const long n = rmdp.num_states();
    for (long s = 0; s < n; ++s) {
        if (rmdp.uncertainty[s].size() != static_cast<size_t>(rmdp.num_actions()))
            throw ModelError("uncertainty row has wrong length in state " + std::to_string(s));
        for (long a : rmdp.enabled[s]) {
            const Polytope& p = rmdp.uncertainty[s][a];
            try {
                validate_polytope_shape(p);
            } catch (const ModelError& e) {
                throw ModelError(std::string(e.what()) + " at " + loc(s, a));
            }
            if (p.real_dim() != n)
                throw ModelError("polytope real dimension differs from state count at " +
                                 loc(s, a));
        }
    }
}

Rmdp mdp_as_degenerate_rmdp(const Mdp& mdp) {
    validate_mdp(mdp);
    const long n = mdp.num_states();
    const long na = mdp.num_actions();

    Rmdp out;
    out.state_names = mdp.state_names;
    out.action_names = mdp.action_names;
    out.enabled = mdp.enabled;
    out.rewards = mdp.rewards;
    out.initial_state = mdp.initial_state;
    out.discount = mdp.discount;
    out.uncertainty.assign(n, std::vector<Polytope>(na));

    for (long s = 0; s < n; ++s)
        for (long a : mdp.enabled[s]) {
            const numvec p = mdp.transitions[s][a].dense(n);
            Polytope& u = out.uncertainty[s][a];
            u.dim = n;
            u.rows.reserve(2 * n + 2);
            u.rhs.reserve(2 * n + 2);

            SparseRow all_ones;
            for (long x = 0; x < n; ++x) {
                all_ones.cols.push_back(x);
                all_ones.vals.push_back(1.0);
            }
            SparseRow neg_ones = all_ones;
            for (prec_t& v : neg_ones.vals) v = -1.0;

            u.rows.push_back(neg_ones);
            u.rhs.push_back(-1.0);
            u.rows.push_back(all_ones);
            u.rhs.push_back(1.0);
            for (long x = 0; x < n; ++x) {
                u.rows.push_back(SparseRow({x}, {-1.0}));
                u.rhs.push_back(-p[x]);
            }
            for (long x = 0; x < n; ++x) {
                u.rows.push_back(SparseRow({x}, {1.0}));
                u.rhs.push_back(p[x]);
            }
        }
    return out;
}

Mdp disjoint_union(const Mdp& first, const Mdp& second) {
    validate_mdp(first);
    validate_mdp(second);
    if (first.action_names != second.action_names)
        throw ModelError("disjoint union needs identical action sets");
    if (first.discount != second.discount)
        throw ModelError("disjoint union needs matching discounts");

    const long shift = first.num_states();
    Mdp out;
    out.action_names = first.action_names;
    out.discount = first.discount;
    out.initial_state = first.initial_state;
    out.state_names.reserve(first.state_names.size() + second.state_names.size());
    for (const auto& name : first.state_names) out.state_names.push_back("0/" + name);
    for (const auto& name : second.state_names) out.state_names.push_back("1/" + name);

    out.enabled = first.enabled;
    out.enabled.insert(out.enabled.end(), second.enabled.begin(), second.enabled.end());
    out.rewards = first.rewards;
    out.rewards.insert(out.rewards.end(), second.rewards.begin(), second.rewards.end());

    out.transitions = first.transitions;
    for (const auto& row : second.transitions) {
        auto& shifted = out.transitions.emplace_back(row);
        for (auto& tran : shifted)
            for (long& succ : tran.succs) succ += shift;
    }

    validate_mdp(out);
    return out;
}

void validate_policy(const Mdp& mdp, const Policy& policy) {
    if (policy.size() != static_cast<size_t>(mdp.num_states()))
        throw ModelError("policy length does not match state count");
    for (long s = 0; s < mdp.num_states(); ++s)
        if (!mdp.is_enabled(s, policy[s]))
            throw ModelError("policy picks a disabled action in state " + std::to_string(s));
}

void validate_policy(const Rmdp& rmdp, const Policy& policy) {
    if (policy.size() != static_cast<size_t>(rmdp.num_states()))
        throw ModelError("policy length does not match state count");
    for (long s = 0; s < rmdp.num_states(); ++s)
        if (!rmdp.is_enabled(s, policy[s]))
            throw ModelError("policy picks a disabled action in state " + std::to_string(s));
}

void validate_game(const DiscountedGame& game) {
    const long n = game.num_states();
    const long na = game.num_actions();
    if (n == 0) throw ModelError("game has no states");
    if (na == 0) throw ModelError("game has no actions");
    if (game.successors.size() != static_cast<size_t>(n))
        throw ModelError("successor sets do not match state count");
    if (game.rewards.size() != static_cast<size_t>(n))
        throw ModelError("rewards do not match state count");
    if (game.initial_state < 0 || game.initial_state >= n)
        throw ModelError("initial state out of range");
    if (!(game.discount >= 0.0) || !(game.discount < 1.0))
        throw ModelError("discount must lie in [0, 1)");
    for (long s = 0; s < n; ++s) {
        if (game.rewards[s].size() != static_cast<size_t>(na))
            throw ModelError("reward row has wrong length in state " + std::to_string(s));
        for (long a = 0; a < na; ++a) check_finite(game.rewards[s][a], "reward at " + loc(s, a));
        if (game.successors[s].size() != static_cast<size_t>(game.num_actions()))
            throw ModelError("successor row has wrong length in state " + std::to_string(s));
        for (long a = 0; a < game.num_actions(); ++a) {
            const indvec& succ = game.successors[s][a];
            if (succ.empty()) throw ModelError("empty successor set at " + loc(s, a));
            long prev = -1;
            for (long t : succ) {
                if (t <= prev || t >= n) throw ModelError("bad successor index at " + loc(s, a));
                prev = t;
            }
        }
    }
}

}  // namespace rmdp
