#include "rmdp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rmdp/parallel.hpp"

namespace rmdp {

namespace {

constexpr prec_t PIVOT_TOL = 1e-10;   // smallest pivot element accepted
constexpr prec_t FEAS_TOL = 1e-9;     // feasibility declaration tolerance
constexpr prec_t OPT_TOL = 1e-9;      // reduced-cost optimality tolerance
constexpr prec_t REPORT_TOL = 1e-7;   // violation allowed in reported solutions
constexpr prec_t DEGEN_TOL = 1e-12;   // steps at most this count as degenerate
constexpr prec_t RATIO_TIE = 1e-9;    // ratio-test ties within this band

enum class VarStatus : unsigned char { Basic, AtLower, AtUpper, FreeNonbasic };

void validate_problem(const LpProblem& p) {
    const long n = p.num_vars();
    if (n == 0) throw ModelError("lp has no variables");
    for (prec_t c : p.objective)
        if (!std::isfinite(c)) throw ModelError("lp objective entry is not finite");
    if (p.ineq.size() != p.ineq_rhs.size())
        throw ModelError("lp inequality rows and rhs differ in length");
    if (p.eq.size() != p.eq_rhs.size())
        throw ModelError("lp equality rows and rhs differ in length");
    if (!p.lower.empty() && p.lower.size() != static_cast<size_t>(n))
        throw ModelError("lp lower bounds have wrong length");
    if (!p.upper.empty() && p.upper.size() != static_cast<size_t>(n))
        throw ModelError("lp upper bounds have wrong length");
    auto check_rows = [&](const std::vector<SparseRow>& rows, const numvec& rhs) {
        for (size_t i = 0; i < rows.size(); ++i) {
            if (!std::isfinite(rhs[i])) throw ModelError("lp rhs entry is not finite");
            const SparseRow& row = rows[i];
            if (row.cols.size() != row.vals.size())
                throw ModelError("lp row indices and values differ in length");
            long prev = -1;
            for (size_t k = 0; k < row.cols.size(); ++k) {
                if (row.cols[k] <= prev || row.cols[k] >= n)
                    throw ModelError("lp row has a bad column index");
                prev = row.cols[k];
                if (!std::isfinite(row.vals[k]))
                    throw ModelError("lp coefficient is not finite");
            }
        }
    };
    check_rows(p.ineq, p.ineq_rhs);
    check_rows(p.eq, p.eq_rhs);
    for (prec_t b : p.lower)
        if (std::isnan(b)) throw ModelError("lp lower bound is NaN");
    for (prec_t b : p.upper)
        if (std::isnan(b)) throw ModelError("lp upper bound is NaN");
}

/// Bounded-variable two-phase revised simplex with an explicit dense
/// basis inverse. Column layout: structural variables, one slack per
/// inequality row, then phase-1 artificials. Row layout: inequalities
/// first, equalities after.
class Simplex {
public:
    explicit Simplex(const LpProblem& p) : prob_(p) { build(); }

    LpOutcome run() {
        if (bounds_crossed_) return {LpStatus::Infeasible, {}, 0.0};
        setup_basis();

        if (first_artificial_ < ncols_) {
            // phase 1: minimize the artificial mass
            phase1_ = true;
            phase_cost_.assign(ncols_, 0.0);
            for (long j = first_artificial_; j < ncols_; ++j) phase_cost_[j] = 1.0;
            const LpStatus st = iterate();
            if (st == LpStatus::Unbounded)
                throw NumericalFailure("phase 1 reported an unbounded direction");
            refresh_basic_values();
            if (artificial_mass() > FEAS_TOL * rhs_scale_)
                return {LpStatus::Infeasible, {}, 0.0};
            retire_artificials();
        }

        // phase 2: the real objective
        phase1_ = false;
        phase_cost_ = cost_;
        degen_run_ = 0;
        bland_ = false;
        const LpStatus st = iterate();
        if (st == LpStatus::Unbounded) return {LpStatus::Unbounded, {}, 0.0};

        refresh_basic_values();
        if (worst_violation() > REPORT_TOL) {
            // the incremental inverse drifted; rebuild it once and recheck
            if (!refactorize()) throw NumericalFailure("basis became singular");
            refresh_basic_values();
            if (worst_violation() > REPORT_TOL)
                throw NumericalFailure("solution violates constraints beyond tolerance");
        }

        LpOutcome out;
        out.status = LpStatus::Optimal;
        out.solution.assign(xval_.begin(), xval_.begin() + n_);
        prec_t obj = 0.0;
        for (long j = 0; j < n_; ++j) obj += prob_.objective[j] * xval_[j];
        out.objective_value = obj;
        return out;
    }

private:
    const LpProblem& prob_;

    long n_ = 0;      // structural columns
    long mi_ = 0;     // inequality rows
    long m_ = 0;      // total rows
    long ncols_ = 0;  // all columns including artificials
    long first_artificial_ = 0;
    bool bounds_crossed_ = false;

    // CSC of all columns
    std::vector<long> col_start_;
    indvec col_rows_;
    numvec col_vals_;

    numvec cost_;  // phase-2 cost, internal minimize form
    numvec lb_, ub_;
    numvec row_rhs_;
    prec_t rhs_scale_ = 1.0;

    numvec xval_;
    std::vector<VarStatus> status_;
    indvec basic_;  // row -> column
    numvec binv_;   // m x m row-major

    numvec phase_cost_;
    bool phase1_ = false;
    long total_pivots_ = 0;
    long degen_run_ = 0;
    bool bland_ = false;

    numvec y_, w_, scratch_;

    bool is_fixed(long j) const { return ub_[j] - lb_[j] <= 0.0; }

    void push_col(long row, prec_t val) {
        col_rows_.push_back(row);
        col_vals_.push_back(val);
        col_start_.push_back(static_cast<long>(col_rows_.size()));
    }

    void build() {
        n_ = prob_.num_vars();
        mi_ = static_cast<long>(prob_.ineq.size());
        m_ = mi_ + static_cast<long>(prob_.eq.size());
        const bool minimize = prob_.sense == LpSense::Minimize;

        cost_.assign(n_, 0.0);
        for (long j = 0; j < n_; ++j)
            cost_[j] = minimize ? prob_.objective[j] : -prob_.objective[j];

        lb_.assign(n_, -inf);
        ub_.assign(n_, inf);
        if (!prob_.lower.empty()) lb_ = prob_.lower;
        if (!prob_.upper.empty()) ub_ = prob_.upper;
        for (long j = 0; j < n_; ++j)
            if (lb_[j] > ub_[j]) bounds_crossed_ = true;

        row_rhs_.assign(m_, 0.0);
        for (long i = 0; i < mi_; ++i) row_rhs_[i] = prob_.ineq_rhs[i];
        for (size_t i = 0; i < prob_.eq.size(); ++i) row_rhs_[mi_ + i] = prob_.eq_rhs[i];
        rhs_scale_ = 1.0 + linf_norm(row_rhs_);

        // structural columns, gathered from the sparse rows
        std::vector<std::vector<std::pair<long, prec_t>>> cols(n_);
        for (long i = 0; i < mi_; ++i) {
            const SparseRow& row = prob_.ineq[i];
            for (size_t k = 0; k < row.cols.size(); ++k)
                cols[row.cols[k]].emplace_back(i, row.vals[k]);
        }
        for (size_t i = 0; i < prob_.eq.size(); ++i) {
            const SparseRow& row = prob_.eq[i];
            for (size_t k = 0; k < row.cols.size(); ++k)
                cols[row.cols[k]].emplace_back(mi_ + static_cast<long>(i), row.vals[k]);
        }
        col_start_.assign(1, 0);
        for (long j = 0; j < n_; ++j) {
            for (const auto& [row, val] : cols[j]) {
                col_rows_.push_back(row);
                col_vals_.push_back(val);
            }
            col_start_.push_back(static_cast<long>(col_rows_.size()));
        }
        // slack columns
        for (long i = 0; i < mi_; ++i) push_col(i, 1.0);

        ncols_ = n_ + mi_;
        first_artificial_ = ncols_;
        cost_.resize(ncols_, 0.0);
        lb_.resize(ncols_, 0.0);
        ub_.resize(ncols_, inf);
    }

    void setup_basis() {
        xval_.assign(ncols_, 0.0);
        status_.assign(ncols_, VarStatus::AtLower);
        for (long j = 0; j < n_; ++j) {
            if (std::isfinite(lb_[j])) {
                status_[j] = VarStatus::AtLower;
                xval_[j] = lb_[j];
            } else if (std::isfinite(ub_[j])) {
                status_[j] = VarStatus::AtUpper;
                xval_[j] = ub_[j];
            } else {
                status_[j] = VarStatus::FreeNonbasic;
                xval_[j] = 0.0;
            }
        }

        // row activity of the nonbasic point
        numvec act(m_, 0.0);
        for (long j = 0; j < n_; ++j) {
            const prec_t xv = xval_[j];
            if (xv == 0.0) continue;
            for (long k = col_start_[j]; k < col_start_[j + 1]; ++k)
                act[col_rows_[k]] += col_vals_[k] * xv;
        }

        basic_.assign(m_, -1);
        numvec binv_diag(m_, 1.0);
        for (long i = 0; i < mi_; ++i) {
            const prec_t sval = row_rhs_[i] - act[i];
            if (sval >= 0.0) {
                basic_[i] = n_ + i;
                status_[n_ + i] = VarStatus::Basic;
                xval_[n_ + i] = sval;
            } else {
                // slack stays at zero; artificial covers the violation
                xval_[n_ + i] = 0.0;
                push_col(i, -1.0);
                add_artificial(i, -sval, -1.0, binv_diag);
            }
        }
        for (long i = mi_; i < m_; ++i) {
            const prec_t resid = row_rhs_[i] - act[i];
            const prec_t sign = resid >= 0.0 ? 1.0 : -1.0;
            push_col(i, sign);
            add_artificial(i, std::abs(resid), sign, binv_diag);
        }

        binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
        for (long i = 0; i < m_; ++i) binv_[i * m_ + i] = binv_diag[i];
    }

    void add_artificial(long row, prec_t value, prec_t sign, numvec& binv_diag) {
        const long j = ncols_++;
        cost_.push_back(0.0);
        lb_.push_back(0.0);
        ub_.push_back(inf);
        xval_.push_back(value);
        status_.push_back(VarStatus::Basic);
        basic_[row] = j;
        binv_diag[row] = sign;  // the basis column is sign * e_row
    }

    /// Total absolute artificial mass; the phase-1 objective up to drift.
    prec_t artificial_mass() const {
        prec_t s = 0.0;
        for (long j = first_artificial_; j < ncols_; ++j) s += std::abs(xval_[j]);
        return s;
    }

    /// Largest artificial value; zero means a feasible basis was reached.
    prec_t artificial_max() const {
        prec_t s = 0.0;
        for (long j = first_artificial_; j < ncols_; ++j) s = std::max(s, xval_[j]);
        return s;
    }

    /// Seals artificials so they can never re-enter, then pivots basic
    /// ones out where a usable pivot exists. Artificials stuck on
    /// redundant rows stay basic at zero and block nothing.
    void retire_artificials() {
        for (long j = first_artificial_; j < ncols_; ++j) {
            lb_[j] = ub_[j] = 0.0;
            if (status_[j] != VarStatus::Basic) {
                status_[j] = VarStatus::AtLower;
                xval_[j] = 0.0;
            }
        }
        for (long i = 0; i < m_; ++i) {
            const long av = basic_[i];
            if (av < first_artificial_) continue;
            long enter = -1;
            for (long j = 0; j < first_artificial_ && enter < 0; ++j) {
                if (status_[j] == VarStatus::Basic || is_fixed(j)) continue;
                prec_t alpha = 0.0;
                const prec_t* row = &binv_[i * m_];
                for (long k = col_start_[j]; k < col_start_[j + 1]; ++k)
                    alpha += row[col_rows_[k]] * col_vals_[k];
                if (std::abs(alpha) > 1e-8) enter = j;
            }
            if (enter >= 0) {
                ftran(enter, w_);
                pivot(enter, i, /*t=*/0.0, /*qdir=*/+1);
            }
        }
    }

    // y = phase cost of basics through the inverse: y^T = c_B^T B^{-1}
    void btran(numvec& y) const {
        y.assign(m_, 0.0);
        for (long i = 0; i < m_; ++i) {
            const prec_t cb = phase_cost_[basic_[i]];
            if (cb == 0.0) continue;
            const prec_t* row = &binv_[i * m_];
            for (long k = 0; k < m_; ++k) y[k] += cb * row[k];
        }
    }

    // w = B^{-1} A_col
    void ftran(long col, numvec& w) const {
        w.assign(m_, 0.0);
        const long s = col_start_[col], e = col_start_[col + 1];
        const long m = m_;
        const indvec& rows = col_rows_;
        const numvec& vals = col_vals_;
        const numvec& binv = binv_;
        parallel_for(static_cast<size_t>(m), [&](size_t i) {
            const prec_t* row = &binv[i * m];
            prec_t acc = 0.0;
            for (long k = s; k < e; ++k) acc += row[rows[k]] * vals[k];
            w[i] = acc;
        });
    }

    prec_t reduced_cost(long j, const numvec& y) const {
        prec_t d = phase_cost_[j];
        for (long k = col_start_[j]; k < col_start_[j + 1]; ++k)
            d -= y[col_rows_[k]] * col_vals_[k];
        return d;
    }

    void update_binv(long r, const numvec& w) {
        const long m = m_;
        prec_t* prow = &binv_[r * m];
        const prec_t piv_inv = 1.0 / w[r];
        for (long k = 0; k < m; ++k) prow[k] *= piv_inv;
        numvec& binv = binv_;
        parallel_for(static_cast<size_t>(m), [&](size_t i) {
            if (static_cast<long>(i) == r) return;
            const prec_t factor = w[i];
            if (factor == 0.0) return;
            prec_t* row = &binv[i * m];
            for (long k = 0; k < m; ++k) row[k] -= factor * prow[k];
        });
    }

    /// Rebuilds the inverse from the basis columns by Gauss-Jordan with
    /// partial pivoting. Returns false when the basis is singular.
    bool refactorize() {
        const long m = m_;
        if (m == 0) return true;
        numvec mat(static_cast<size_t>(m) * m, 0.0);
        for (long i = 0; i < m; ++i) {
            const long c = basic_[i];
            for (long k = col_start_[c]; k < col_start_[c + 1]; ++k)
                mat[static_cast<size_t>(col_rows_[k]) * m + i] = col_vals_[k];
        }
        binv_.assign(static_cast<size_t>(m) * m, 0.0);
        for (long i = 0; i < m; ++i) binv_[i * m + i] = 1.0;
        for (long c = 0; c < m; ++c) {
            long piv = -1;
            prec_t best = 1e-12;
            for (long i = c; i < m; ++i) {
                const prec_t cand = std::abs(mat[i * m + c]);
                if (cand > best) {
                    best = cand;
                    piv = i;
                }
            }
            if (piv < 0) return false;
            if (piv != c) {
                // row swaps are plain row operations on [B | I]; the
                // basis position of each column never moves
                for (long k = 0; k < m; ++k) {
                    std::swap(mat[piv * m + k], mat[c * m + k]);
                    std::swap(binv_[piv * m + k], binv_[c * m + k]);
                }
            }
            const prec_t inv = 1.0 / mat[c * m + c];
            for (long k = 0; k < m; ++k) {
                mat[c * m + k] *= inv;
                binv_[c * m + k] *= inv;
            }
            numvec& bv = binv_;
            parallel_for(static_cast<size_t>(m), [&](size_t i) {
                if (static_cast<long>(i) == c) return;
                const prec_t f = mat[i * m + c];
                if (f == 0.0) return;
                for (long k = 0; k < m; ++k) {
                    mat[i * m + k] -= f * mat[c * m + k];
                    bv[i * m + k] -= f * bv[c * m + k];
                }
            });
        }
        return true;
    }

    /// Recomputes the basic values from the nonbasic point through the
    /// current inverse.
    void refresh_basic_values() {
        if (m_ == 0) return;
        numvec act = row_rhs_;
        for (long j = 0; j < ncols_; ++j) {
            if (status_[j] == VarStatus::Basic) continue;
            const prec_t xv = xval_[j];
            if (xv == 0.0) continue;
            for (long k = col_start_[j]; k < col_start_[j + 1]; ++k)
                act[col_rows_[k]] -= col_vals_[k] * xv;
        }
        scratch_.assign(m_, 0.0);
        const long m = m_;
        const numvec& binv = binv_;
        numvec& xb = scratch_;
        parallel_for(static_cast<size_t>(m), [&](size_t i) {
            const prec_t* row = &binv[i * m];
            prec_t acc = 0.0;
            for (long k = 0; k < m; ++k) acc += row[k] * act[k];
            xb[i] = acc;
        });
        for (long i = 0; i < m_; ++i) xval_[basic_[i]] = xb[i];
    }

    prec_t worst_violation() const {
        prec_t worst = 0.0;
        for (size_t i = 0; i < prob_.ineq.size(); ++i) {
            prec_t act = 0.0;
            const SparseRow& row = prob_.ineq[i];
            for (size_t k = 0; k < row.cols.size(); ++k)
                act += row.vals[k] * xval_[row.cols[k]];
            worst = std::max(worst, act - prob_.ineq_rhs[i]);
        }
        for (size_t i = 0; i < prob_.eq.size(); ++i) {
            prec_t act = 0.0;
            const SparseRow& row = prob_.eq[i];
            for (size_t k = 0; k < row.cols.size(); ++k)
                act += row.vals[k] * xval_[row.cols[k]];
            worst = std::max(worst, std::abs(act - prob_.eq_rhs[i]));
        }
        for (long j = 0; j < n_; ++j) {
            if (std::isfinite(lb_[j])) worst = std::max(worst, lb_[j] - xval_[j]);
            if (std::isfinite(ub_[j])) worst = std::max(worst, xval_[j] - ub_[j]);
        }
        return worst;
    }

    /// One simplex run to optimality or unboundedness with the active cost.
    LpStatus iterate() {
        const long iter_cap = 2000 + 40 * (m_ + ncols_);
        long iters = 0;
        while (true) {
            if (++iters > iter_cap)
                throw NumericalFailure("simplex iteration limit reached");
            if (phase1_ && artificial_max() <= 1e-12 * rhs_scale_) return LpStatus::Optimal;

            btran(y_);

            // pricing
            long q = -1;
            int qdir = 0;
            prec_t best = 0.0;
            for (long j = 0; j < ncols_; ++j) {
                if (status_[j] == VarStatus::Basic || is_fixed(j)) continue;
                const prec_t d = reduced_cost(j, y_);
                prec_t viol = 0.0;
                int dir = 0;
                if ((status_[j] == VarStatus::AtLower || status_[j] == VarStatus::FreeNonbasic) &&
                    d < -OPT_TOL) {
                    viol = -d;
                    dir = +1;
                } else if ((status_[j] == VarStatus::AtUpper ||
                            status_[j] == VarStatus::FreeNonbasic) &&
                           d > OPT_TOL) {
                    viol = d;
                    dir = -1;
                } else {
                    continue;
                }
                if (bland_) {
                    q = j;
                    qdir = dir;
                    break;
                }
                if (viol > best) {
                    best = viol;
                    q = j;
                    qdir = dir;
                }
            }
            if (q < 0) return LpStatus::Optimal;

            ftran(q, w_);

            // ratio test: how far can x_q move before a basic variable or
            // its own opposite bound blocks
            prec_t t = ub_[q] - lb_[q];  // +inf for free entering variables
            long leave = -1;
            for (long i = 0; i < m_; ++i) {
                const prec_t rate = qdir * w_[i];
                const long bc = basic_[i];
                prec_t ti;
                if (rate > PIVOT_TOL) {
                    if (!std::isfinite(lb_[bc])) continue;
                    ti = (xval_[bc] - lb_[bc]) / rate;
                } else if (rate < -PIVOT_TOL) {
                    if (!std::isfinite(ub_[bc])) continue;
                    ti = (xval_[bc] - ub_[bc]) / rate;
                } else {
                    continue;
                }
                if (ti < 0.0) ti = 0.0;
                if (ti < t - RATIO_TIE) {
                    t = ti;
                    leave = i;
                } else if (ti <= t + RATIO_TIE && leave >= 0) {
                    // tied: Bland wants the smallest variable index,
                    // otherwise prefer the larger pivot for stability
                    if (bland_ ? basic_[i] < basic_[leave]
                               : std::abs(w_[i]) > std::abs(w_[leave])) {
                        t = std::min(t, ti);
                        leave = i;
                    }
                } else if (ti < t) {
                    t = ti;
                    leave = i;
                }
            }

            if (leave < 0) {
                if (!std::isfinite(t)) {
                    if (phase1_)
                        throw NumericalFailure("phase 1 reported an unbounded direction");
                    return LpStatus::Unbounded;
                }
                // bound flip: the entering variable crosses to its other bound
                for (long i = 0; i < m_; ++i)
                    if (w_[i] != 0.0) xval_[basic_[i]] -= qdir * w_[i] * t;
                if (qdir > 0) {
                    status_[q] = VarStatus::AtUpper;
                    xval_[q] = ub_[q];
                } else {
                    status_[q] = VarStatus::AtLower;
                    xval_[q] = lb_[q];
                }
                note_step(t);
                continue;
            }

            pivot(q, leave, t, qdir);
            note_step(t);
        }
    }

    void note_step(prec_t t) {
        if (t <= DEGEN_TOL) {
            if (++degen_run_ > 2 * (m_ + ncols_)) bland_ = true;
        } else {
            degen_run_ = 0;
            bland_ = false;
        }
    }

    /// Executes the basis change (entering q, leaving row, step t along
    /// direction qdir). w_ must hold B^{-1} A_q.
    void pivot(long q, long row, prec_t t, int qdir) {
        if (std::abs(w_[row]) <= PIVOT_TOL * 0.5)
            throw NumericalFailure("pivot element too small");
        for (long i = 0; i < m_; ++i)
            if (i != row && w_[i] != 0.0) xval_[basic_[i]] -= qdir * w_[i] * t;

        const long lv = basic_[row];
        if (qdir * w_[row] > 0.0) {
            status_[lv] = VarStatus::AtLower;
            xval_[lv] = lb_[lv];
        } else {
            status_[lv] = VarStatus::AtUpper;
            xval_[lv] = ub_[lv];
        }

        prec_t base;
        switch (status_[q]) {
            case VarStatus::AtLower: base = lb_[q]; break;
            case VarStatus::AtUpper: base = ub_[q]; break;
            default: base = 0.0; break;
        }
        xval_[q] = base + qdir * t;
        status_[q] = VarStatus::Basic;
        basic_[row] = q;

        update_binv(row, w_);

        if (++total_pivots_ % 4000 == 0) {
            if (!refactorize()) throw NumericalFailure("basis became singular");
            refresh_basic_values();
        }
    }
};

}  // namespace

LpOutcome solve_lp(const LpProblem& problem) {
    validate_problem(problem);
    Simplex solver(problem);
    return solver.run();
}

}  // namespace rmdp
