// Dense two-phase revised simplex for programs whose blocks are all 1x1.
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qrt/conic.hpp"

namespace qrt::conic {

using qla::CMatrix;

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;

struct Standard {
    // min c.x  s.t.  A x = b, x >= 0
    int rows = 0, cols = 0;
    std::vector<std::vector<double>> a;  // row-major
    std::vector<double> b;
    std::vector<double> c;
    // bookkeeping
    std::vector<double> row_flip;          // +-1 applied to reach b >= 0
    std::vector<int> row_kind;             // 0 = equality r, 1 = block k (stored in row_ref)
    std::vector<int> row_ref;
    std::vector<int> var_pos_col;          // column of x_i (or x_i^+)
    std::vector<int> var_neg_col;          // column of x_i^- or -1
    std::vector<int> slack_col;            // per block row
};

Standard to_standard(const ConicProgram& p) {
    Standard s;
    const int n = p.num_vars;
    s.var_pos_col.assign(n, -1);
    s.var_neg_col.assign(n, -1);
    int col = 0;
    for (int i = 0; i < n; ++i) {
        s.var_pos_col[i] = col++;
        if (p.nonneg.empty() || !p.nonneg[i]) s.var_neg_col[i] = col++;
    }
    const int nblocks = int(p.lmis.size());
    s.slack_col.assign(nblocks, -1);
    for (int k = 0; k < nblocks; ++k) s.slack_col[k] = col++;
    s.cols = col;
    s.rows = int(p.equalities.size()) + nblocks;
    s.a.assign(s.rows, std::vector<double>(s.cols, 0.0));
    s.b.assign(s.rows, 0.0);
    s.c.assign(s.cols, 0.0);
    s.row_flip.assign(s.rows, 1.0);
    s.row_kind.assign(s.rows, 0);
    s.row_ref.assign(s.rows, 0);

    for (int i = 0; i < n; ++i) {
        s.c[s.var_pos_col[i]] = p.objective[i];
        if (s.var_neg_col[i] >= 0) s.c[s.var_neg_col[i]] = -p.objective[i];
    }
    int r = 0;
    for (size_t e = 0; e < p.equalities.size(); ++e, ++r) {
        s.row_kind[r] = 0;
        s.row_ref[r] = int(e);
        for (auto& [i, v] : p.equalities[e].coeffs) {
            s.a[r][s.var_pos_col[i]] += v;
            if (s.var_neg_col[i] >= 0) s.a[r][s.var_neg_col[i]] -= v;
        }
        s.b[r] = p.equalities[e].rhs;
    }
    for (int k = 0; k < nblocks; ++k, ++r) {
        s.row_kind[r] = 1;
        s.row_ref[r] = k;
        for (auto& [i, g] : p.lmis[k].terms) {
            double v = g(0, 0).real();
            s.a[r][s.var_pos_col[i]] += v;
            if (s.var_neg_col[i] >= 0) s.a[r][s.var_neg_col[i]] -= v;
        }
        s.a[r][s.slack_col[k]] = -1.0;
        s.b[r] = -p.lmis[k].constant(0, 0).real();
    }
    for (int i = 0; i < s.rows; ++i)
        if (s.b[i] < 0) {
            s.row_flip[i] = -1.0;
            s.b[i] = -s.b[i];
            for (double& v : s.a[i]) v = -v;
        }
    return s;
}

struct SimplexState {
    std::vector<int> basis;                  // basic column per row
    std::vector<std::vector<double>> binv;   // explicit basis inverse
    std::vector<double> xb;                  // basic values
};

// one simplex run over the given cost vector; artificial columns occupy
// [art_start, art_start + rows)
int run_simplex(const Standard& s, SimplexState& st, const std::vector<double>& cost,
                int art_start, bool ban_artificials, std::vector<double>* ray_out) {
    const int m = s.rows;
    const int ncols = int(cost.size());
    int degenerate_streak = 0;
    bool bland = false;
    for (int iter = 0; iter < 50000; ++iter) {
        // y = c_B B^{-1}
        std::vector<double> y(m, 0.0);
        for (int i = 0; i < m; ++i) {
            const double cb = cost[st.basis[i]];
            if (cb == 0.0) continue;
            for (int j = 0; j < m; ++j) y[j] += cb * st.binv[i][j];
        }
        auto reduced_cost = [&](int j) {
            double rc = cost[j];
            if (j >= art_start) {
                rc -= y[j - art_start];
            } else {
                for (int i = 0; i < m; ++i) rc -= y[i] * s.a[i][j];
            }
            return rc;
        };
        int enter = -1;
        double best = -kCostTol;
        for (int j = 0; j < ncols; ++j) {
            if (ban_artificials && j >= art_start) continue;
            bool basic = false;
            for (int i = 0; i < m; ++i)
                if (st.basis[i] == j) {
                    basic = true;
                    break;
                }
            if (basic) continue;
            double rc = reduced_cost(j);
            if (bland) {
                if (rc < -kCostTol) {
                    enter = j;
                    break;
                }
            } else if (rc < best) {
                best = rc;
                enter = j;
            }
        }
        if (enter < 0) return 0;  // optimal

        // direction d = B^{-1} A_enter
        std::vector<double> d(m, 0.0);
        if (enter >= art_start) {
            const int rr = enter - art_start;
            for (int i = 0; i < m; ++i) d[i] = st.binv[i][rr];
        } else {
            for (int i = 0; i < m; ++i) {
                double acc = 0;
                for (int k = 0; k < m; ++k) acc += st.binv[i][k] * s.a[k][enter];
                d[i] = acc;
            }
        }
        int leave = -1;
        double theta = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            if (d[i] > kPivotTol) {
                double t = st.xb[i] / d[i];
                if (t < theta - 1e-12 || (t < theta + 1e-12 &&
                                          (leave < 0 || st.basis[i] < st.basis[leave]))) {
                    theta = t;
                    leave = i;
                }
            }
        }
        if (leave < 0) {
            if (ray_out) {
                ray_out->assign(ncols, 0.0);
                (*ray_out)[enter] = 1.0;
                for (int i = 0; i < m; ++i) (*ray_out)[st.basis[i]] = -d[i];
            }
            return 1;  // unbounded
        }
        if (theta < 1e-12) {
            if (++degenerate_streak > 64) bland = true;
        } else {
            degenerate_streak = 0;
        }
        // pivot
        const double piv = d[leave];
        for (int j = 0; j < m; ++j) st.binv[leave][j] /= piv;
        st.xb[leave] = theta;
        for (int i = 0; i < m; ++i) {
            if (i == leave) continue;
            const double f = d[i];
            if (f == 0.0) continue;
            for (int j = 0; j < m; ++j) st.binv[i][j] -= f * st.binv[leave][j];
            st.xb[i] -= f * theta;
            if (st.xb[i] < 0 && st.xb[i] > -1e-11) st.xb[i] = 0;
        }
        st.basis[leave] = enter;
    }
    return 2;  // iteration cap
}

}  // namespace

ConicSolution solve_simplex(const ConicProgram& p, const SolverConfig&) {
    p.validate();
    for (const auto& blk : p.lmis)
        if (blk.dim() != 1)
            throw dimension_error("solve_simplex: requires 1x1 blocks only");

    Standard s = to_standard(p);
    const int m = s.rows;
    const int n = p.num_vars;

    ConicSolution out;
    out.x.assign(n, 0.0);
    out.eq_duals.assign(p.equalities.size(), 0.0);
    out.sign_duals.assign(n, 0.0);
    out.lmi_duals.assign(p.lmis.size(), CMatrix(1, 1));

    SimplexState st;
    st.basis.resize(m);
    st.binv.assign(m, std::vector<double>(m, 0.0));
    st.xb = s.b;
    for (int i = 0; i < m; ++i) {
        st.basis[i] = s.cols + i;  // artificial
        st.binv[i][i] = 1.0;
    }

    // phase 1
    std::vector<double> cost1(s.cols + m, 0.0);
    for (int i = 0; i < m; ++i) cost1[s.cols + i] = 1.0;
    int rc1 = run_simplex(s, st, cost1, s.cols, false, nullptr);
    double art_sum = 0;
    for (int i = 0; i < m; ++i)
        if (st.basis[i] >= s.cols) art_sum += st.xb[i];
    double scale = 1.0;
    for (double v : s.b) scale = std::max(scale, std::abs(v));
    if (rc1 == 2) {
        out.status = SolveStatus::numerical_failure;
        out.note = "simplex phase-1 iteration cap";
        return out;
    }
    if (art_sum > 1e-8 * scale) {
        out.status = SolveStatus::infeasible;
        // Farkas certificate from phase-1 duals: y with A'y <= 0, b'y > 0
        std::vector<double> y(m, 0.0);
        for (int i = 0; i < m; ++i) {
            const double cb = cost1[st.basis[i]];
            if (cb == 0.0) continue;
            for (int j = 0; j < m; ++j) y[j] += cb * st.binv[i][j];
        }
        for (int r = 0; r < m; ++r) {
            double yo = s.row_flip[r] * y[r];
            if (s.row_kind[r] == 0)
                out.eq_duals[s.row_ref[r]] = yo;
            else
                out.lmi_duals[s.row_ref[r]](0, 0) = yo;
        }
        out.note = "phase-1 infeasibility certificate in dual multipliers";
        return out;
    }
    // pivot remaining artificials out where possible
    for (int i = 0; i < m; ++i) {
        if (st.basis[i] < s.cols) continue;
        int pivot_col = -1;
        for (int j = 0; j < s.cols && pivot_col < 0; ++j) {
            double acc = 0;
            for (int k = 0; k < m; ++k) acc += st.binv[i][k] * s.a[k][j];
            if (std::abs(acc) > 1e-7) {
                bool basic = false;
                for (int r = 0; r < m; ++r)
                    if (st.basis[r] == j) basic = true;
                if (!basic) pivot_col = j;
            }
        }
        if (pivot_col >= 0) {
            std::vector<double> d(m, 0.0);
            for (int r = 0; r < m; ++r) {
                double acc = 0;
                for (int k = 0; k < m; ++k) acc += st.binv[r][k] * s.a[k][pivot_col];
                d[r] = acc;
            }
            const double piv = d[i];
            for (int j = 0; j < m; ++j) st.binv[i][j] /= piv;
            st.xb[i] /= piv;
            for (int r = 0; r < m; ++r) {
                if (r == i) continue;
                const double f = d[r];
                if (f == 0.0) continue;
                for (int j = 0; j < m; ++j) st.binv[r][j] -= f * st.binv[i][j];
                st.xb[r] -= f * st.xb[i];
            }
            st.basis[i] = pivot_col;
        }
    }

    // phase 2
    std::vector<double> cost2(s.cols + m, 0.0);
    for (int j = 0; j < s.cols; ++j) cost2[j] = s.c[j];
    for (int i = 0; i < m; ++i) cost2[s.cols + i] = 1e30;  // artificials must not re-enter
    std::vector<double> ray;
    int rc2 = run_simplex(s, st, cost2, s.cols, true, &ray);
    if (rc2 == 2) {
        out.status = SolveStatus::numerical_failure;
        out.note = "simplex phase-2 iteration cap";
        return out;
    }
    if (rc2 == 1) {
        out.status = SolveStatus::unbounded;
        for (int i = 0; i < n; ++i) {
            double v = ray[s.var_pos_col[i]];
            if (s.var_neg_col[i] >= 0) v -= ray[s.var_neg_col[i]];
            out.x[i] = v;
        }
        out.note = "improving primal ray in x";
        return out;
    }

    // primal values
    std::vector<double> full(s.cols, 0.0);
    for (int i = 0; i < m; ++i)
        if (st.basis[i] < s.cols) full[st.basis[i]] = st.xb[i];
    for (int i = 0; i < n; ++i) {
        double v = full[s.var_pos_col[i]];
        if (s.var_neg_col[i] >= 0) v -= full[s.var_neg_col[i]];
        out.x[i] = v;
    }
    // duals
    std::vector<double> y(m, 0.0);
    for (int i = 0; i < m; ++i) {
        const double cb = cost2[st.basis[i]];
        if (cb == 0.0 || st.basis[i] >= s.cols) continue;
        for (int j = 0; j < m; ++j) y[j] += cb * st.binv[i][j];
    }
    for (int r = 0; r < m; ++r) {
        double yo = s.row_flip[r] * y[r];
        if (s.row_kind[r] == 0)
            out.eq_duals[s.row_ref[r]] = yo;
        else
            out.lmi_duals[s.row_ref[r]](0, 0) = std::max(0.0, yo);
    }
    for (int i = 0; i < n; ++i) {
        if (p.nonneg.empty() || !p.nonneg[i]) continue;
        double rc = p.objective[i];
        for (int r = 0; r < m; ++r) rc -= y[r] * s.a[r][s.var_pos_col[i]];
        out.sign_duals[i] = std::max(0.0, rc);
    }

    out.status = SolveStatus::optimal;
    double pobj = 0;
    for (int i = 0; i < n; ++i) pobj += p.objective[i] * out.x[i];
    double dobj = 0;
    for (size_t r = 0; r < p.equalities.size(); ++r) dobj += p.equalities[r].rhs * out.eq_duals[r];
    for (size_t k = 0; k < p.lmis.size(); ++k)
        dobj -= p.lmis[k].constant(0, 0).real() * out.lmi_duals[k](0, 0).real();
    out.primal_value = pobj;
    out.dual_value = dobj;
    out.gap = std::abs(pobj - dobj) / std::max(1.0, std::abs(pobj));

    double pres = 0;
    for (const auto& row : p.equalities) {
        double lhs = -row.rhs;
        for (auto& [i, v] : row.coeffs) lhs += v * out.x[i];
        pres = std::max(pres, std::abs(lhs) / std::max(1.0, std::abs(row.rhs)));
    }
    for (const auto& blk : p.lmis) {
        double lhs = blk.constant(0, 0).real();
        for (auto& [i, g] : blk.terms) lhs += g(0, 0).real() * out.x[i];
        pres = std::max(pres, -lhs);
    }
    for (int i = 0; i < n; ++i)
        if (!p.nonneg.empty() && p.nonneg[i]) pres = std::max(pres, -out.x[i]);
    out.primal_residual = pres;
    out.dual_residual = 0;
    return out;
}

}  // namespace qrt::conic
