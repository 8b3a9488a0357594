#include "rmdp/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rmdp/parallel.hpp"
#include "rmdp/robust_eval.hpp"
#include "rmdp/uncertainty.hpp"

namespace rmdp {

namespace {

/// True when every enabled uncertainty set is lifted, false when none is.
/// Mixing the two representations within one model is rejected.
bool model_is_lifted(const Rmdp& r) {
    bool lifted = false, seen = false;
    for (long s = 0; s < r.num_states(); ++s)
        for (long a : r.enabled[s]) {
            const bool is = r.uncertainty[s][a].is_lifted();
            if (!seen) {
                lifted = is;
                seen = true;
            } else if (is != lifted) {
                throw ModelError(
                    "lifted and non-lifted uncertainty sets are mixed within one model");
            }
        }
    return lifted;
}

ValueFunction evaluate_policy(const Rmdp& r, const Policy& pi, bool lifted) {
    return lifted ? robust_policy_evaluation_lifted(r, pi) : robust_policy_evaluation(r, pi);
}

Policy initial_policy(const Rmdp& r, const SolverConfig& cfg) {
    const long n = r.num_states();
    Policy pi(n);
    if (std::holds_alternative<FirstAction>(cfg.initial_policy)) {
        for (long s = 0; s < n; ++s) pi[s] = r.enabled[s].front();
    } else {
        Xorshift64 rng(std::get<SeededPolicy>(cfg.initial_policy).seed);
        for (long s = 0; s < n; ++s)
            pi[s] = r.enabled[s][rng.next_below(r.enabled[s].size())];
    }
    return pi;
}

/// Normalized advantages for every surviving action. The incumbent's entry
/// is zero by definition and skips its LP. Pairs outside the surviving sets
/// stay at -inf. Runs one inner minimization per remaining pair, in
/// parallel; the error of the lowest flattened index wins, matching serial
/// execution.
std::vector<numvec> advantage_matrix(const Rmdp& r, const Policy& pi, const numvec& values,
                                     const std::vector<indvec>& surviving) {
    const long n = r.num_states();
    std::vector<numvec> deltas(n, numvec(r.num_actions(), -inf));
    std::vector<std::pair<long, long>> pairs;
    for (long s = 0; s < n; ++s) {
        deltas[s][pi[s]] = 0.0;
        for (long a : surviving[s])
            if (a != pi[s]) pairs.emplace_back(s, a);
    }

    std::vector<int> kind(pairs.size(), 0);
    std::vector<std::string> message(pairs.size());
    parallel_for(pairs.size(), [&](size_t i) {
        const auto [s, a] = pairs[i];
        try {
            deltas[s][a] = r.rewards[s][a] +
                           r.discount * inner_min(r.uncertainty[s][a], values).value -
                           values[s];
        } catch (const EmptyUncertainty& e) {
            kind[i] = 1;
            message[i] = e.what();
        } catch (const std::exception& e) {
            kind[i] = 2;
            message[i] = e.what();
        }
    });
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (kind[i] == 0) continue;
        const std::string where = " at state " + std::to_string(pairs[i].first) + ", action " +
                                  std::to_string(pairs[i].second);
        if (kind[i] == 1) throw EmptyUncertainty(message[i] + where);
        throw ModelError(message[i] + where);
    }
    return deltas;
}

}  // namespace

long rpi_iteration_bound(const Rmdp& r) {
    const prec_t n = static_cast<prec_t>(r.num_states());
    long total_actions = 0;
    for (const indvec& acts : r.enabled) total_actions += static_cast<long>(acts.size());
    const prec_t horizon = 1.0 / (1.0 - r.discount);
    const long T = static_cast<long>(std::floor(n * horizon * std::log(n * n * horizon))) + 1;
    return T * (total_actions - r.num_states());
}

std::vector<indvec> suboptimality_filter(const std::vector<numvec>& deltas, prec_t discount,
                                         const std::vector<indvec>& current_sets) {
    const long n = static_cast<long>(current_sets.size());
    numvec state_max(n, -inf);
    for (long s = 0; s < n; ++s)
        for (long a : current_sets[s]) state_max[s] = std::max(state_max[s], deltas[s][a]);

    prec_t span_hi = -inf, span_lo = inf;
    for (long s = 0; s < n; ++s) {
        if (current_sets[s].empty()) continue;
        span_hi = std::max(span_hi, state_max[s]);
        span_lo = std::min(span_lo, state_max[s]);
    }
    const prec_t allowance =
        span_hi >= span_lo ? discount / (1.0 - discount) * (span_hi - span_lo) : 0.0;

    std::vector<indvec> kept(n);
    for (long s = 0; s < n; ++s)
        for (long a : current_sets[s])
            if (deltas[s][a] >= state_max[s] - allowance) kept[s].push_back(a);
    return kept;
}

RpiResult robust_policy_iteration(const Rmdp& rmdp, const SolverConfig& config) {
    validate_rmdp(rmdp);
    const bool lifted = model_is_lifted(rmdp);
    const long n = rmdp.num_states();

    const long default_cap = std::max<long>(rpi_iteration_bound(rmdp), 1000);
    const long cap = config.iteration_cap > 0 ? config.iteration_cap : default_cap;

    Policy pi = initial_policy(rmdp, config);
    std::vector<indvec> surviving = rmdp.enabled;

    RpiResult out;
    out.trace.terminated_by = RpiTermination::IterationCap;
    while (out.trace.iterations < cap) {
        ++out.trace.iterations;
        const ValueFunction value = evaluate_policy(rmdp, pi, lifted);
        const std::vector<numvec> deltas = advantage_matrix(rmdp, pi, value.values, surviving);

        if (config.use_optimality_test)
            surviving = suboptimality_filter(deltas, rmdp.discount, surviving);

        // improving actions: strictly positive advantage beyond the margin
        bool any_improving = false;
        Policy next = pi;
        for (long s = 0; s < n; ++s) {
            prec_t best = -inf;
            for (long a : surviving[s]) best = std::max(best, deltas[s][a]);
            if (best <= config.improvement_margin) continue;  // keep the incumbent
            any_improving = true;
            if (deltas[s][pi[s]] == best) continue;  // incumbent among the maximizers
            for (long a : surviving[s])
                if (deltas[s][a] == best) {
                    next[s] = a;
                    break;
                }
        }

        out.trace.steps.push_back({pi, value.values, deltas, surviving});
        out.policy = pi;
        out.value = value;

        if (!any_improving) {
            out.trace.terminated_by = RpiTermination::NoImprovingAction;
            break;
        }
        pi = next;
    }
    return out;
}

ValueFunction robust_value_iteration(const Rmdp& rmdp, const SolverConfig& config,
                                     long* iterations_out) {
    validate_rmdp(rmdp);
    if (!(config.eps > 0.0)) throw ModelError("convergence gap must be positive");
    const long cap = config.iteration_cap > 0 ? config.iteration_cap : 500000;
    const long n = rmdp.num_states();

    prec_t rmin = inf, rmax = -inf;
    for (long s = 0; s < n; ++s)
        for (long a : rmdp.enabled[s]) {
            rmin = std::min(rmin, rmdp.rewards[s][a]);
            rmax = std::max(rmax, rmdp.rewards[s][a]);
        }
    const prec_t horizon = 1.0 / (1.0 - rmdp.discount);
    numvec lower(n, rmin * horizon);
    numvec upper(n, rmax * horizon);

    long iterations = 0;
    prec_t gap = [&] {
        prec_t g = 0.0;
        for (long s = 0; s < n; ++s) g = std::max(g, upper[s] - lower[s]);
        return g;
    }();
    while (gap > config.eps) {
        if (iterations >= cap)
            throw IterationCapExceeded("value iteration did not reach the requested gap in " +
                                       std::to_string(cap) + " iterations");
        lower = robust_bellman_apply(rmdp, lower);
        upper = robust_bellman_apply(rmdp, upper);
        ++iterations;
        gap = 0.0;
        for (long s = 0; s < n; ++s) gap = std::max(gap, upper[s] - lower[s]);
    }
    if (iterations_out) *iterations_out = iterations;

    ValueFunction out;
    out.values.resize(n);
    for (long s = 0; s < n; ++s) out.values[s] = 0.5 * (lower[s] + upper[s]);
    out.certificate = BoundedGap{std::move(lower), std::move(upper), config.eps};
    return out;
}

ThresholdOutcome threshold_decision(const Rmdp& rmdp, prec_t kappa, const SolverConfig& config) {
    const RpiResult solved = robust_policy_iteration(rmdp, config);
    const prec_t at_initial = solved.value.values[rmdp.initial_state];
    return {at_initial >= kappa - 1e-7, solved.policy, at_initial};
}

}  // namespace rmdp
