#include "rmdp/robust_eval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rmdp/lp.hpp"
#include "rmdp/parallel.hpp"
#include "rmdp/uncertainty.hpp"

namespace rmdp {

namespace {

/// Inner minimization over an already-trimmed polytope. Shared by inner_min
/// and the Bellman kernels so the trim work is not repeated.
InnerSolution inner_min_trimmed(const TrimmedPolytope& t, const numvec& v, long original_real) {
    if (t.empty) throw EmptyUncertainty("uncertainty set is empty");
    if (t.kept.empty()) {
        // only the origin survived trimming; its inner product is zero
        return {0.0, numvec(static_cast<size_t>(original_real), 0.0)};
    }

    const Polytope& p = t.p;
    LpProblem lp;
    lp.objective.assign(p.dim, 0.0);
    const long rreal = p.real_dim();
    for (long x = 0; x < rreal; ++x) lp.objective[x] = v[t.kept[x]];
    lp.lower.assign(p.dim, 0.0);
    lp.upper.assign(p.dim, inf);
    lp.ineq = p.rows;
    lp.ineq_rhs = p.rhs;
    lp.eq = p.eq_rows;
    lp.eq_rhs = p.eq_rhs;

    const LpOutcome o = solve_lp(lp);
    if (o.status == LpStatus::Infeasible)
        throw EmptyUncertainty("uncertainty set is empty");
    if (o.status == LpStatus::Unbounded)
        throw ModelError("inner minimization is unbounded; the uncertainty set escapes the simplex");

    numvec reduced(o.solution.begin(), o.solution.begin() + rreal);
    return {o.objective_value, t.expand_real(reduced, original_real)};
}

prec_t bellman_state(const Rmdp& r, const numvec& v, long s) {
    prec_t best = -inf;
    for (long a : r.enabled[s]) {
        if (r.uncertainty[s][a].real_dim() != r.num_states())
            throw ModelError("uncertainty polytope dimension does not match the state count");
        const TrimmedPolytope t = trim_zero_coordinates(r.uncertainty[s][a]);
        const prec_t q =
            r.rewards[s][a] + r.discount * inner_min_trimmed(t, v, r.num_states()).value;
        if (q > best) best = q;
    }
    return best;
}

void check_value_length(const Rmdp& r, const numvec& v) {
    if (v.size() != static_cast<size_t>(r.num_states()))
        throw ModelError("value vector length does not match the state count");
}

/// Runs f(s) for every state, forwarding the first exception by state order.
/// Exceptions cannot cross the parallel region, so they are carried out as
/// flagged messages and rethrown afterwards.
template <class F>
void for_each_state_collecting(long n, F&& f) {
    std::vector<int> kind(n, 0);  // 0 fine, 1 empty, 2 model error
    std::vector<std::string> message(n);
    parallel_for(static_cast<size_t>(n), [&](size_t s) {
        try {
            f(static_cast<long>(s));
        } catch (const EmptyUncertainty& e) {
            kind[s] = 1;
            message[s] = e.what();
        } catch (const std::exception& e) {
            kind[s] = 2;
            message[s] = e.what();
        }
    });
    for (long s = 0; s < n; ++s) {
        if (kind[s] == 0) continue;
        const std::string where = " at state " + std::to_string(s);
        if (kind[s] == 1) throw EmptyUncertainty(message[s] + where);
        throw ModelError(message[s] + where);
    }
}

ValueFunction evaluate_policy_dual(const Rmdp& r, const Policy& pi) {
    const long n = r.num_states();

    std::vector<TrimmedPolytope> trimmed(n);
    for_each_state_collecting(n, [&](long s) {
        if (r.uncertainty[s][pi[s]].real_dim() != n)
            throw ModelError("uncertainty polytope dimension does not match the state count");
        trimmed[s] = trim_zero_coordinates(r.uncertainty[s][pi[s]]);
        if (trimmed[s].empty) throw EmptyUncertainty("uncertainty set is empty");
    });

    // variable layout: v block, then per state one w block (inequality
    // multipliers, nonnegative) and one y block (equality multipliers, free)
    indvec w_base(n), y_base(n);
    long nv = n;
    for (long s = 0; s < n; ++s) {
        w_base[s] = nv;
        nv += trimmed[s].p.num_rows();
        y_base[s] = nv;
        nv += trimmed[s].p.num_eq_rows();
    }

    LpProblem lp;
    lp.sense = LpSense::Maximize;
    lp.objective.assign(nv, 0.0);
    lp.lower.assign(nv, 0.0);
    lp.upper.assign(nv, inf);
    for (long s = 0; s < n; ++s) {
        lp.objective[s] = 1.0;
        lp.lower[s] = -inf;
        for (long j = 0; j < trimmed[s].p.num_eq_rows(); ++j) lp.lower[y_base[s] + j] = -inf;
    }

    for (long s = 0; s < n; ++s) {
        const Polytope& tp = trimmed[s].p;
        const long rreal = tp.dim > 0 ? tp.real_dim() : 0;

        SparseRow value_row;
        value_row.cols.push_back(s);
        value_row.vals.push_back(1.0);
        for (long i = 0; i < tp.num_rows(); ++i)
            if (tp.rhs[i] != 0.0) {
                value_row.cols.push_back(w_base[s] + i);
                value_row.vals.push_back(tp.rhs[i]);
            }
        for (long j = 0; j < tp.num_eq_rows(); ++j)
            if (tp.eq_rhs[j] != 0.0) {
                value_row.cols.push_back(y_base[s] + j);
                value_row.vals.push_back(tp.eq_rhs[j]);
            }
        lp.add_ineq(std::move(value_row), r.rewards[s][pi[s]]);

        // transpose of the trimmed polytope rows, one LP row per coordinate;
        // real coordinates additionally couple back to the value variables
        std::vector<SparseRow> coord(tp.dim);
        for (long x = 0; x < rreal; ++x) {
            coord[x].cols.push_back(trimmed[s].kept[x]);
            coord[x].vals.push_back(-r.discount);
        }
        for (long i = 0; i < tp.num_rows(); ++i)
            for (size_t k = 0; k < tp.rows[i].cols.size(); ++k) {
                coord[tp.rows[i].cols[k]].cols.push_back(w_base[s] + i);
                coord[tp.rows[i].cols[k]].vals.push_back(-tp.rows[i].vals[k]);
            }
        for (long j = 0; j < tp.num_eq_rows(); ++j)
            for (size_t k = 0; k < tp.eq_rows[j].cols.size(); ++k) {
                coord[tp.eq_rows[j].cols[k]].cols.push_back(y_base[s] + j);
                coord[tp.eq_rows[j].cols[k]].vals.push_back(-tp.eq_rows[j].vals[k]);
            }
        for (long x = 0; x < tp.dim; ++x) lp.add_ineq(std::move(coord[x]), 0.0);
    }

    const LpOutcome o = solve_lp(lp);
    if (o.status == LpStatus::Unbounded)
        throw EmptyUncertainty(
            "policy evaluation is unbounded; some uncertainty set is empty");
    if (o.status == LpStatus::Infeasible)
        throw NumericalFailure("policy evaluation program is infeasible");

    ValueFunction out;
    out.values.assign(o.solution.begin(), o.solution.begin() + n);
    out.certificate = LpExact{};
    return out;
}

}  // namespace

InnerSolution inner_min(const Polytope& polytope, const numvec& v) {
    if (static_cast<long>(v.size()) != polytope.real_dim())
        throw ModelError("value vector length does not match the polytope dimension");
    return inner_min_trimmed(trim_zero_coordinates(polytope), v, polytope.real_dim());
}

numvec robust_bellman_apply(const Rmdp& rmdp, const numvec& v) {
    check_value_length(rmdp, v);
    const long n = rmdp.num_states();
    numvec out(n);
    for_each_state_collecting(n, [&](long s) { out[s] = bellman_state(rmdp, v, s); });
    return out;
}

numvec robust_bellman_apply_serial(const Rmdp& rmdp, const numvec& v) {
    check_value_length(rmdp, v);
    const long n = rmdp.num_states();
    numvec out(n);
    for (long s = 0; s < n; ++s) out[s] = bellman_state(rmdp, v, s);
    return out;
}

numvec robust_bellman_greedy(const Rmdp& rmdp, const numvec& v, Policy& policy_out) {
    check_value_length(rmdp, v);
    const long n = rmdp.num_states();
    numvec out(n);
    policy_out.assign(n, -1);
    for_each_state_collecting(n, [&](long s) {
        prec_t best = -inf;
        long best_a = -1;
        for (long a : rmdp.enabled[s]) {
            if (rmdp.uncertainty[s][a].real_dim() != n)
                throw ModelError("uncertainty polytope dimension does not match the state count");
            const TrimmedPolytope t = trim_zero_coordinates(rmdp.uncertainty[s][a]);
            const prec_t q =
                rmdp.rewards[s][a] + rmdp.discount * inner_min_trimmed(t, v, n).value;
            if (q > best) {
                best = q;
                best_a = a;
            }
        }
        out[s] = best;
        policy_out[s] = best_a;
    });
    return out;
}

ValueFunction robust_policy_evaluation(const Rmdp& rmdp, const Policy& policy) {
    validate_policy(rmdp, policy);
    for (long s = 0; s < rmdp.num_states(); ++s)
        if (rmdp.uncertainty[s][policy[s]].is_lifted())
            throw ModelError(
                "lifted uncertainty polytope passed to the non-lifted evaluation; "
                "use robust_policy_evaluation_lifted");
    return evaluate_policy_dual(rmdp, policy);
}

ValueFunction robust_policy_evaluation_lifted(const Rmdp& rmdp, const Policy& policy) {
    validate_policy(rmdp, policy);
    for (long s = 0; s < rmdp.num_states(); ++s) {
        const Polytope& p = rmdp.uncertainty[s][policy[s]];
        if (!p.is_lifted())
            throw ModelError(
                "non-lifted uncertainty polytope passed to the lifted evaluation; "
                "use robust_policy_evaluation");
        if (p.real_dim() != rmdp.num_states())
            throw ModelError("lifted split does not match the state count");
    }
    return evaluate_policy_dual(rmdp, policy);
}

}  // namespace rmdp
