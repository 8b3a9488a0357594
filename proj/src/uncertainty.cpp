#include "rmdp/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rmdp/lp.hpp"
#include "rmdp/parallel.hpp"

namespace rmdp {

namespace {

constexpr prec_t SUM_TOL = 1e-9;

void check_distribution(const numvec& p, const char* what) {
    if (p.empty()) throw ModelError(std::string(what) + " is empty");
    prec_t sum = 0.0;
    for (prec_t v : p) {
        if (!std::isfinite(v)) throw ModelError(std::string(what) + " has a non-finite entry");
        if (v < -1e-12) throw ModelError(std::string(what) + " has a negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > SUM_TOL)
        throw ModelError(std::string(what) + " does not sum to 1");
}

SparseRow ones_row(long from, long count, prec_t value) {
    SparseRow row;
    row.cols.reserve(count);
    row.vals.assign(count, value);
    for (long j = 0; j < count; ++j) row.cols.push_back(from + j);
    return row;
}

/// Base LP over a polytope: nonnegative variables, polytope rows, zero
/// objective. Extrema are taken by swapping in an objective.
LpProblem polytope_lp(const Polytope& p) {
    LpProblem lp;
    lp.objective.assign(p.dim, 0.0);
    lp.lower.assign(p.dim, 0.0);
    lp.upper.assign(p.dim, inf);
    lp.ineq = p.rows;
    lp.ineq_rhs = p.rhs;
    lp.eq = p.eq_rows;
    lp.eq_rhs = p.eq_rhs;
    return lp;
}

}  // namespace

// *******************************************************
// Canonical constructors
// *******************************************************

Polytope imdp_to_polytope(const IntervalBounds& bounds) {
    return imdp_to_polytope(bounds.lower, bounds.upper);
}

Polytope imdp_to_polytope(const numvec& lower, const numvec& upper) {
    const long k = static_cast<long>(lower.size());
    if (k == 0) throw ModelError("interval bounds are empty");
    if (upper.size() != lower.size())
        throw ModelError("interval bounds differ in length");
    for (long j = 0; j < k; ++j) {
        if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]))
            throw ModelError("interval bound is not finite");
        if (lower[j] > upper[j])
            throw ModelError("interval lower bound exceeds upper bound");
    }

    Polytope p;
    p.dim = k;
    p.rows.reserve(2 * k + 2);
    p.rhs.reserve(2 * k + 2);
    p.rows.push_back(ones_row(0, k, -1.0));
    p.rhs.push_back(-1.0);
    p.rows.push_back(ones_row(0, k, 1.0));
    p.rhs.push_back(1.0);
    for (long j = 0; j < k; ++j) {
        p.rows.push_back(SparseRow({j}, {-1.0}));
        p.rhs.push_back(-lower[j]);
    }
    for (long j = 0; j < k; ++j) {
        p.rows.push_back(SparseRow({j}, {1.0}));
        p.rhs.push_back(upper[j]);
    }
    return p;
}

IntervalBounds linf_to_imdp(const numvec& center, prec_t eps) {
    check_distribution(center, "linf center");
    if (!(eps >= 0.0)) throw ModelError("linf radius must be nonnegative");
    IntervalBounds b;
    b.lower.reserve(center.size());
    b.upper.reserve(center.size());
    for (prec_t c : center) {
        b.lower.push_back(std::max(c - eps, 0.0));
        b.upper.push_back(std::min(c + eps, 1.0));
    }
    return b;
}

Polytope l1_to_lifted_polytope(const numvec& center, prec_t eps) {
    check_distribution(center, "l1 center");
    if (!(eps >= 0.0)) throw ModelError("l1 radius must be nonnegative");
    const long k = static_cast<long>(center.size());

    Polytope p;
    p.dim = 2 * k;
    p.lifted_split = k;
    p.rows.reserve(2 * k + 3);
    p.rhs.reserve(2 * k + 3);

    p.rows.push_back(ones_row(0, k, 1.0));
    p.rhs.push_back(1.0);
    p.rows.push_back(ones_row(0, k, -1.0));
    p.rhs.push_back(-1.0);
    p.rows.push_back(ones_row(k, k, 1.0));
    p.rhs.push_back(eps);
    for (long j = 0; j < k; ++j) {
        p.rows.push_back(SparseRow({j, k + j}, {1.0, -1.0}));
        p.rhs.push_back(center[j]);
    }
    for (long j = 0; j < k; ++j) {
        p.rows.push_back(SparseRow({j, k + j}, {-1.0, -1.0}));
        p.rhs.push_back(-center[j]);
    }
    return p;
}

Polytope coupling_polytope(const numvec& mu, const numvec& nu) {
    check_distribution(mu, "coupling row marginal");
    check_distribution(nu, "coupling column marginal");
    if (mu.size() != nu.size())
        throw ModelError("coupling marginals differ in length");
    const long k = static_cast<long>(mu.size());

    Polytope p;
    p.dim = k * k;
    p.rows.reserve(4 * k + 2);
    p.rhs.reserve(4 * k + 2);

    // row sums: sum_c lambda(r, c) = mu(r)
    for (long r = 0; r < k; ++r) {
        p.rows.push_back(ones_row(r * k, k, 1.0));
        p.rhs.push_back(mu[r]);
    }
    for (long r = 0; r < k; ++r) {
        p.rows.push_back(ones_row(r * k, k, -1.0));
        p.rhs.push_back(-mu[r]);
    }
    // column sums: sum_r lambda(r, c) = nu(c)
    std::vector<SparseRow> col_rows;
    for (long c = 0; c < k; ++c) {
        SparseRow pos;
        for (long r = 0; r < k; ++r) {
            pos.cols.push_back(r * k + c);
            pos.vals.push_back(1.0);
        }
        col_rows.push_back(std::move(pos));
    }
    for (long c = 0; c < k; ++c) {
        p.rows.push_back(col_rows[c]);
        p.rhs.push_back(nu[c]);
    }
    for (long c = 0; c < k; ++c) {
        SparseRow neg = col_rows[c];
        for (prec_t& v : neg.vals) v = -1.0;
        p.rows.push_back(std::move(neg));
        p.rhs.push_back(-nu[c]);
    }
    // total mass, redundant given the marginals but part of the canonical shape
    p.rows.push_back(ones_row(0, k * k, 1.0));
    p.rhs.push_back(1.0);
    p.rows.push_back(ones_row(0, k * k, -1.0));
    p.rhs.push_back(-1.0);
    return p;
}

Polytope simplex_over_support(const indvec& support, long dim) {
    if (dim <= 0) throw ModelError("simplex dimension must be positive");
    if (support.empty()) throw ModelError("support is empty");
    long prev = -1;
    for (long s : support) {
        if (s <= prev || s >= dim) throw ModelError("support indices bad or not ascending");
        prev = s;
    }

    Polytope p;
    p.dim = dim;
    SparseRow pos;
    for (long s : support) {
        pos.cols.push_back(s);
        pos.vals.push_back(1.0);
    }
    SparseRow neg = pos;
    for (prec_t& v : neg.vals) v = -1.0;
    p.rows.push_back(std::move(pos));
    p.rhs.push_back(1.0);
    p.rows.push_back(std::move(neg));
    p.rhs.push_back(-1.0);
    size_t si = 0;
    for (long j = 0; j < dim; ++j) {
        if (si < support.size() && support[si] == j) {
            ++si;
            continue;
        }
        p.rows.push_back(SparseRow({j}, {1.0}));
        p.rhs.push_back(0.0);
    }
    return p;
}

// *******************************************************
// Structural presolve
// *******************************************************

TrimmedPolytope trim_zero_coordinates(const Polytope& src) {
    TrimmedPolytope out;
    out.empty = false;

    std::vector<char> zero(src.dim, 0);
    bool changed = true;
    while (changed && !out.empty) {
        changed = false;
        auto scan = [&](const SparseRow& row, prec_t rhs, bool equality) {
            bool all_nonneg = true, all_nonpos = true, any_kept = false;
            for (size_t i = 0; i < row.cols.size(); ++i) {
                if (zero[row.cols[i]] || row.vals[i] == 0.0) continue;
                any_kept = true;
                if (row.vals[i] < 0.0) all_nonneg = false;
                if (row.vals[i] > 0.0) all_nonpos = false;
            }
            if (!any_kept) return;
            auto force = [&](bool positives) {
                for (size_t i = 0; i < row.cols.size(); ++i) {
                    const prec_t v = row.vals[i];
                    if (zero[row.cols[i]]) continue;
                    if ((positives && v > 0.0) || (!positives && v < 0.0)) {
                        zero[row.cols[i]] = 1;
                        changed = true;
                    }
                }
            };
            if (all_nonneg) {
                if (rhs < -SUM_TOL)
                    out.empty = true;  // nonnegative mass cannot stay below a negative bound
                else if (rhs <= 0.0)
                    force(true);
            } else if (equality && all_nonpos) {
                if (rhs > SUM_TOL)
                    out.empty = true;
                else if (rhs >= 0.0)
                    force(false);
            }
        };
        for (size_t i = 0; i < src.rows.size() && !out.empty; ++i)
            scan(src.rows[i], src.rhs[i], false);
        for (size_t i = 0; i < src.eq_rows.size() && !out.empty; ++i)
            scan(src.eq_rows[i], src.eq_rhs[i], true);
    }
    if (out.empty) return out;

    indvec col_map(src.dim, -1);
    long kept_real = 0;
    const long real = src.real_dim();
    for (long j = 0; j < src.dim; ++j) {
        if (zero[j]) continue;
        col_map[j] = static_cast<long>(out.kept.size());
        out.kept.push_back(j);
        if (j < real) ++kept_real;
    }

    Polytope& p = out.p;
    p.dim = static_cast<long>(out.kept.size());
    if (src.lifted_split && p.dim > 0 && kept_real > 0) p.lifted_split = kept_real;

    auto rebuild = [&](const std::vector<SparseRow>& rows, const numvec& rhs, bool equality,
                       std::vector<SparseRow>& dst_rows, numvec& dst_rhs) {
        for (size_t i = 0; i < rows.size(); ++i) {
            SparseRow reduced;
            for (size_t k = 0; k < rows[i].cols.size(); ++k) {
                const long nc = col_map[rows[i].cols[k]];
                if (nc >= 0) {
                    reduced.cols.push_back(nc);
                    reduced.vals.push_back(rows[i].vals[k]);
                }
            }
            if (reduced.cols.empty()) {
                // the row degenerated to 0 <=/== rhs
                if (equality ? std::abs(rhs[i]) > SUM_TOL : rhs[i] < -SUM_TOL) {
                    out.empty = true;
                    return;
                }
                continue;
            }
            dst_rows.push_back(std::move(reduced));
            dst_rhs.push_back(rhs[i]);
        }
    };
    rebuild(src.rows, src.rhs, false, p.rows, p.rhs);
    if (!out.empty) rebuild(src.eq_rows, src.eq_rhs, true, p.eq_rows, p.eq_rhs);
    return out;
}

numvec TrimmedPolytope::expand_real(const numvec& reduced, long original_real_dim) const {
    numvec full(static_cast<size_t>(original_real_dim), 0.0);
    size_t r = 0;
    for (long orig : kept) {
        if (orig >= original_real_dim) break;  // kept is ascending, aux coords follow
        full[orig] = reduced[r++];
    }
    return full;
}

// *******************************************************
// Geometric validation
// *******************************************************

PolytopeValidation validate_polytope(const Polytope& p) {
    validate_polytope_shape(p);
    PolytopeValidation out;

    TrimmedPolytope trimmed = trim_zero_coordinates(p);
    if (trimmed.empty) return out;
    if (trimmed.kept.empty()) {
        // only the origin is left; its real mass is 0, not a distribution
        out.feasible = true;
        out.bounded = true;
        out.in_simplex = false;
        return out;
    }

    const Polytope& t = trimmed.p;
    const long rreal = t.real_dim();
    LpProblem base = polytope_lp(t);

    if (solve_lp(base).status != LpStatus::Optimal) return out;
    out.feasible = true;
    out.bounded = true;
    out.in_simplex = true;

    // coordinate maxima (minima are pinned at >= 0 by the domain)
    for (long j = 0; j < t.dim; ++j) {
        LpProblem q = base;
        q.sense = LpSense::Maximize;
        q.objective[j] = 1.0;
        const LpOutcome o = solve_lp(q);
        if (o.status == LpStatus::Unbounded) {
            out.bounded = false;
            if (j < rreal) out.in_simplex = false;
            continue;
        }
        if (j < rreal && o.objective_value > 1.0 + SUM_TOL) out.in_simplex = false;
    }

    // total real mass must be pinned to 1 from both sides
    LpProblem mass = polytope_lp(t);
    for (long j = 0; j < rreal; ++j) mass.objective[j] = 1.0;
    mass.sense = LpSense::Minimize;
    LpOutcome lo = solve_lp(mass);
    mass.sense = LpSense::Maximize;
    LpOutcome hi = solve_lp(mass);
    if (lo.status != LpStatus::Optimal || lo.objective_value < 1.0 - SUM_TOL)
        out.in_simplex = false;
    if (hi.status != LpStatus::Optimal || hi.objective_value > 1.0 + SUM_TOL)
        out.in_simplex = false;

    return out;
}

void require_valid_polytope(const Polytope& p) {
    const PolytopeValidation v = validate_polytope(p);
    if (!v.feasible) throw EmptyUncertainty("uncertainty polytope is empty");
    if (!v.bounded) throw ModelError("uncertainty polytope is unbounded");
    if (!v.in_simplex)
        throw ModelError("uncertainty polytope escapes the probability simplex");
}

void validate_rmdp_polytopes(const Rmdp& rmdp) {
    std::vector<std::pair<long, long>> pairs;
    for (long s = 0; s < rmdp.num_states(); ++s)
        for (long a : rmdp.enabled[s]) pairs.emplace_back(s, a);

    // 0 = fine, 1 = empty, 2 = model error
    std::vector<int> verdict(pairs.size(), 0);
    std::vector<std::string> message(pairs.size());
    parallel_for(pairs.size(), [&](size_t i) {
        try {
            require_valid_polytope(rmdp.uncertainty[pairs[i].first][pairs[i].second]);
        } catch (const EmptyUncertainty& e) {
            verdict[i] = 1;
            message[i] = e.what();
        } catch (const std::exception& e) {
            verdict[i] = 2;
            message[i] = e.what();
        }
    });
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (verdict[i] == 0) continue;
        const std::string where = " at state " + std::to_string(pairs[i].first) + ", action " +
                                  std::to_string(pairs[i].second);
        if (verdict[i] == 1) throw EmptyUncertainty(message[i] + where);
        throw ModelError(message[i] + where);
    }
}

}  // namespace rmdp
