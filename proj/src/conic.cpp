#include "qrt/conic.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace qrt::conic {

using qla::CMatrix;
using qla::cplx;
using qla::Hermitian;

SolverConfig config_from_tolerances() {
    SolverConfig cfg;
    cfg.accept_gap = tol().solver_gap;
    cfg.accept_feas = tol().solver_feasibility;
    cfg.accept_dual_feas = 10 * tol().solver_feasibility;
    return cfg;
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        default: return "numerical-failure";
    }
}

void ConicProgram::validate() const {
    if (int(objective.size()) != num_vars)
        throw dimension_error("conic: objective length != variable count");
    if (!nonneg.empty() && int(nonneg.size()) != num_vars)
        throw dimension_error("conic: sign-constraint vector length mismatch");
    for (const auto& row : equalities)
        for (auto& [i, v] : row.coeffs) {
            (void)v;
            if (i < 0 || i >= num_vars) throw dimension_error("conic: bad variable in equality");
        }
    for (const auto& blk : lmis) {
        if (blk.constant.rows() != blk.constant.cols())
            throw dimension_error("conic: non-square LMI block");
        for (auto& [i, g] : blk.terms) {
            if (i < 0 || i >= num_vars) throw dimension_error("conic: bad variable in LMI");
            if (g.rows() != blk.dim() || g.cols() != blk.dim())
                throw dimension_error("conic: LMI coefficient dimension mismatch");
        }
    }
}

// --- Hermitian basis ---------------------------------------------------------

std::vector<CMatrix> hermitian_basis(int dim) {
    std::vector<CMatrix> basis;
    basis.reserve(size_t(dim) * dim);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < dim; ++i) {
        CMatrix b(dim, dim);
        b(i, i) = 1.0;
        basis.push_back(std::move(b));
    }
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            CMatrix re(dim, dim), im(dim, dim);
            re(i, j) = inv_sqrt2;
            re(j, i) = inv_sqrt2;
            im(i, j) = cplx(0, inv_sqrt2);
            im(j, i) = cplx(0, -inv_sqrt2);
            basis.push_back(std::move(re));
            basis.push_back(std::move(im));
        }
    return basis;
}

// --- expressions and builder -------------------------------------------------

void HermExpr::add_constant(const CMatrix& c) { constant_ += c; }

void HermExpr::add_term(int var, const CMatrix& coeff) {
    auto it = terms_.find(var);
    if (it == terms_.end())
        terms_.emplace(var, coeff);
    else
        it->second += coeff;
}

HermExpr& HermExpr::operator+=(const HermExpr& o) {
    constant_ += o.constant_;
    for (auto& [i, k] : o.terms_) add_term(i, k);
    return *this;
}

HermExpr HermExpr::scaled(double s) const {
    HermExpr r(dim());
    r.constant_ = cplx(s) * constant_;
    for (auto& [i, k] : terms_) r.terms_.emplace(i, cplx(s) * k);
    return r;
}

HermExpr HermExpr::map(int out_dim, const std::function<CMatrix(const CMatrix&)>& f) const {
    HermExpr r(out_dim);
    r.constant_ = f(constant_);
    for (auto& [i, k] : terms_) {
        CMatrix mapped = f(k);
        if (mapped.frobenius_norm() > 0) r.terms_.emplace(i, std::move(mapped));
    }
    return r;
}

LinExpr trace_of(const HermExpr& e) {
    LinExpr r;
    r.constant = e.constant_part().trace().real();
    for (auto& [i, k] : e.terms()) {
        double t = k.trace().real();
        if (t != 0.0) r.coeffs[i] += t;
    }
    return r;
}

LinExpr inner_with(const CMatrix& w, const HermExpr& e) {
    LinExpr r;
    r.constant = qla::inner(w, e.constant_part()).real();
    for (auto& [i, k] : e.terms()) {
        double t = qla::inner(w, k).real();
        if (std::abs(t) > 1e-300) r.coeffs[i] += t;
    }
    return r;
}

HermExpr HermVar::expr() const {
    HermExpr e(dim);
    auto basis = hermitian_basis(dim);
    for (int a = 0; a < dim * dim; ++a) e.add_term(first_var + a, basis[a]);
    return e;
}

CMatrix HermVar::value(const std::vector<double>& x) const {
    auto basis = hermitian_basis(dim);
    CMatrix m(dim, dim);
    for (int a = 0; a < dim * dim; ++a) m += cplx(x[size_t(first_var) + a]) * basis[a];
    return m;
}

int ProgramBuilder::add_var(double objective_coeff, bool nonneg) {
    prog_.objective.push_back(objective_coeff);
    prog_.nonneg.push_back(nonneg ? 1 : 0);
    return prog_.num_vars++;
}

HermVar ProgramBuilder::add_hermitian_var(int dim) {
    HermVar v{prog_.num_vars, dim};
    for (int a = 0; a < dim * dim; ++a) add_var(0.0, false);
    return v;
}

void ProgramBuilder::set_objective_coeff(int var, double coeff) { prog_.objective[var] = coeff; }

void ProgramBuilder::add_lmi(const HermExpr& e) {
    LmiBlock blk;
    blk.constant = e.constant_part();
    for (auto& [i, k] : e.terms())
        if (k.frobenius_norm() > 0) blk.terms.emplace_back(i, k);
    prog_.lmis.push_back(std::move(blk));
}

void ProgramBuilder::add_equality(const LinExpr& lhs, double rhs) {
    EqualityRow row;
    row.rhs = rhs - lhs.constant;
    for (auto& [i, v] : lhs.coeffs)
        if (v != 0.0) row.coeffs.emplace_back(i, v);
    prog_.equalities.push_back(std::move(row));
}

void ProgramBuilder::add_hermitian_equality(const HermExpr& e) {
    auto basis = hermitian_basis(e.dim());
    for (const auto& b : basis) {
        LinExpr row = inner_with(b, e);
        if (row.coeffs.empty() && std::abs(row.constant) < 1e-12) continue;
        add_equality(row, 0.0);
    }
}

namespace {

// Modified Gram-Schmidt pruning of dependent equality rows. A dependent row
// with an inconsistent right-hand side means the caller built contradictory
// constraints, which is a bug upstream.
void prune_equalities(ConicProgram& p) {
    if (p.equalities.empty()) return;
    const int n = p.num_vars;
    std::vector<std::vector<double>> kept_dirs;
    std::vector<double> kept_rhs;
    std::vector<EqualityRow> kept_rows;
    for (const auto& row : p.equalities) {
        std::vector<double> v(n, 0.0);
        for (auto& [i, c] : row.coeffs) v[i] = c;
        double rhs = row.rhs;
        double norm0 = 0;
        for (double c : v) norm0 += c * c;
        norm0 = std::sqrt(norm0);
        if (norm0 < 1e-14) {
            if (std::abs(rhs) > 1e-9) throw numerical_error("conic: inconsistent zero equality");
            continue;
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (size_t k = 0; k < kept_dirs.size(); ++k) {
                double dot = 0;
                for (int i = 0; i < n; ++i) dot += kept_dirs[k][i] * v[i];
                for (int i = 0; i < n; ++i) v[i] -= dot * kept_dirs[k][i];
                rhs -= dot * kept_rhs[k];
            }
        }
        double norm = 0;
        for (double c : v) norm += c * c;
        norm = std::sqrt(norm);
        if (norm > 1e-10 * norm0) {
            for (double& c : v) c /= norm;
            rhs /= norm;
            kept_dirs.push_back(std::move(v));
            kept_rhs.push_back(rhs);
            kept_rows.push_back(row);
        } else if (std::abs(rhs) > 1e-8 * (1.0 + std::abs(row.rhs))) {
            throw numerical_error("conic: dependent equality row with inconsistent rhs");
        }
    }
    p.equalities = std::move(kept_rows);
}

}  // namespace

ConicProgram ProgramBuilder::take(bool prune) {
    ConicProgram p = std::move(prog_);
    prog_ = ConicProgram{};
    p.validate();
    if (prune) prune_equalities(p);
    return p;
}

// --- interior-point solver ---------------------------------------------------

namespace {

struct Triplet {
    int r, c;
    cplx v;
};

struct Block {
    int dim = 0;
    CMatrix g0;
    std::vector<int> vars;
    std::vector<std::vector<Triplet>> trips;  // aligned with vars
    size_t total_nnz = 0;
    bool from_sign = false;
    int sign_var = -1;
    int source_lmi = -1;
};

std::vector<Triplet> extract_triplets(const CMatrix& m) {
    std::vector<Triplet> t;
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            if (m(r, c) != cplx(0.0)) t.push_back({r, c, m(r, c)});
    return t;
}

double trip_dot(const std::vector<Triplet>& t, const CMatrix& m) {
    cplx s = 0;
    for (const auto& e : t) s += std::conj(e.v) * m(e.r, e.c);
    return s.real();
}

// dense real symmetric matrix for the Schur system
struct RealMat {
    int n = 0;
    std::vector<double> a;
    RealMat() = default;
    explicit RealMat(int n_) : n(n_), a(size_t(n_) * n_, 0.0) {}
    double& at(int i, int j) { return a[size_t(i) * n + j]; }
    double at(int i, int j) const { return a[size_t(i) * n + j]; }
};

bool chol_real(RealMat& m, double ridge) {
    const int n = m.n;
    if (ridge > 0)
        for (int i = 0; i < n; ++i) m.at(i, i) += ridge;
    for (int j = 0; j < n; ++j) {
        double d = m.at(j, j);
        for (int k = 0; k < j; ++k) d -= m.at(j, k) * m.at(j, k);
        if (d <= 0 || !std::isfinite(d)) return false;
        d = std::sqrt(d);
        m.at(j, j) = d;
        for (int i = j + 1; i < n; ++i) {
            double s = m.at(i, j);
            for (int k = 0; k < j; ++k) s -= m.at(i, k) * m.at(j, k);
            m.at(i, j) = s / d;
        }
    }
    return true;
}

void chol_solve_real(const RealMat& l, std::vector<double>& b) {
    const int n = l.n;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) b[i] -= l.at(i, k) * b[k];
        b[i] /= l.at(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int k = i + 1; k < n; ++k) b[i] -= l.at(k, i) * b[k];
        b[i] /= l.at(i, i);
    }
}

// largest alpha with X + alpha dX >= 0, from eigenvalues of L^{-1} dX L^{-t}
double max_step(const CMatrix& chol_lower, const CMatrix& dx) {
    const int n = chol_lower.rows();
    CMatrix w(n, n);
    std::vector<cplx> col(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) col[i] = dx(i, j);
        auto y = qla::forward_solve(chol_lower, col);
        for (int i = 0; i < n; ++i) w(i, j) = y[i];
    }
    CMatrix wt = w.adjoint();
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) col[i] = wt(i, j);
        auto y = qla::forward_solve(chol_lower, col);
        for (int i = 0; i < n; ++i) wt(i, j) = y[i];
    }
    CMatrix sym = wt.adjoint();
    double lam_min = qla::eig_hermitian(Hermitian::symmetrized(sym)).values.front();
    if (lam_min >= -1e-14) return std::numeric_limits<double>::infinity();
    return -1.0 / lam_min;
}

struct Iterate {
    std::vector<double> x, nu;
    std::vector<CMatrix> s, z;
};

bool all_blocks_diagonal(const ConicProgram& p) {
    auto diag = [](const CMatrix& m) {
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j)
                if (i != j && m(i, j) != cplx(0.0)) return false;
        return true;
    };
    for (const auto& blk : p.lmis) {
        if (!diag(blk.constant)) return false;
        for (auto& [i, g] : blk.terms) {
            (void)i;
            if (!diag(g)) return false;
        }
    }
    return true;
}

// splits diagonal LMI blocks into 1x1 blocks; records origin for dual reassembly
ConicProgram split_diagonal(const ConicProgram& p, std::vector<std::pair<int, int>>& origin) {
    ConicProgram q;
    q.num_vars = p.num_vars;
    q.objective = p.objective;
    q.equalities = p.equalities;
    q.nonneg = p.nonneg;
    for (size_t b = 0; b < p.lmis.size(); ++b) {
        const auto& blk = p.lmis[b];
        for (int d = 0; d < blk.dim(); ++d) {
            LmiBlock one;
            one.constant = CMatrix(1, 1);
            one.constant(0, 0) = blk.constant(d, d).real();
            for (auto& [i, g] : blk.terms)
                if (g(d, d) != cplx(0.0)) {
                    CMatrix c(1, 1);
                    c(0, 0) = g(d, d).real();
                    one.terms.emplace_back(i, c);
                }
            q.lmis.push_back(std::move(one));
            origin.emplace_back(int(b), d);
        }
    }
    return q;
}

ConicSolution solve_interior_point(const ConicProgram& p, const SolverConfig& cfg) {
    const int n = p.num_vars;
    const int np = int(p.equalities.size());

    std::vector<Block> blocks;
    for (size_t b = 0; b < p.lmis.size(); ++b) {
        Block blk;
        blk.dim = p.lmis[b].dim();
        blk.g0 = p.lmis[b].constant;
        blk.source_lmi = int(b);
        for (auto& [i, g] : p.lmis[b].terms) {
            blk.vars.push_back(i);
            blk.trips.push_back(extract_triplets(g));
            blk.total_nnz += blk.trips.back().size();
        }
        blocks.push_back(std::move(blk));
    }
    for (int i = 0; i < n; ++i) {
        if (p.nonneg.empty() || !p.nonneg[i]) continue;
        Block blk;
        blk.dim = 1;
        blk.g0 = CMatrix(1, 1);
        blk.vars = {i};
        blk.trips = {{Triplet{0, 0, 1.0}}};
        blk.total_nnz = 1;
        blk.from_sign = true;
        blk.sign_var = i;
        blocks.push_back(std::move(blk));
    }
    const int nb = int(blocks.size());
    double total_dim = 0;
    for (auto& b : blocks) total_dim += b.dim;

    std::vector<std::vector<std::pair<int, double>>> eq_rows(np);
    std::vector<double> b_rhs(np);
    for (int r = 0; r < np; ++r) {
        eq_rows[r] = p.equalities[r].coeffs;
        b_rhs[r] = p.equalities[r].rhs;
    }
    // per-variable lists of (block, term index) and (eq row, coeff) for fast sweeps
    std::vector<std::vector<std::pair<int, int>>> var_blocks(n);
    for (int b = 0; b < nb; ++b)
        for (size_t k = 0; k < blocks[b].vars.size(); ++k)
            var_blocks[blocks[b].vars[k]].emplace_back(b, int(k));
    std::vector<std::vector<std::pair<int, double>>> var_eqs(n);
    for (int r = 0; r < np; ++r)
        for (auto& [i, v] : eq_rows[r]) var_eqs[i].emplace_back(r, v);

    double c_norm = 1.0, b_norm = 1.0;
    for (double v : p.objective) c_norm = std::max(c_norm, std::abs(v));
    for (double v : b_rhs) b_norm = std::max(b_norm, std::abs(v));

    Iterate it;
    it.x.assign(n, 0.0);
    it.nu.assign(np, 0.0);
    for (auto& blk : blocks) {
        double scale = std::max(10.0, blk.g0.frobenius_norm());
        for (auto& t : blk.trips)
            for (auto& e : t) scale = std::max(scale, std::abs(e.v));
        it.s.push_back(cplx(scale) * CMatrix::identity(blk.dim));
        it.z.push_back(cplx(std::max(10.0, c_norm)) * CMatrix::identity(blk.dim));
    }

    double best_score = std::numeric_limits<double>::infinity();
    Iterate best = it;
    int stall = 0;

    auto eval_blocks = [&](const std::vector<double>& x) {
        std::vector<CMatrix> f;
        f.reserve(nb);
        for (auto& blk : blocks) {
            CMatrix m = blk.g0;
            for (size_t k = 0; k < blk.vars.size(); ++k) {
                const double xv = x[blk.vars[k]];
                if (xv == 0.0) continue;
                for (const auto& t : blk.trips[k]) m(t.r, t.c) += xv * t.v;
            }
            f.push_back(std::move(m));
        }
        return f;
    };

    auto finalize = [&](const Iterate& w, SolveStatus st, int iters, const std::string& note) {
        ConicSolution sol;
        sol.status = st;
        sol.iterations = iters;
        sol.note = note;
        sol.x = w.x;
        sol.eq_duals = w.nu;
        sol.sign_duals.assign(n, 0.0);
        sol.lmi_duals.assign(p.lmis.size(), CMatrix());
        for (int b = 0; b < nb; ++b) {
            if (blocks[b].from_sign)
                sol.sign_duals[blocks[b].sign_var] = w.z[b](0, 0).real();
            else
                sol.lmi_duals[blocks[b].source_lmi] = w.z[b];
        }
        double pobj = 0;
        for (int i = 0; i < n; ++i) pobj += p.objective[i] * w.x[i];
        double dobj = 0;
        for (int r = 0; r < np; ++r) dobj += b_rhs[r] * w.nu[r];
        for (int b = 0; b < nb; ++b) dobj -= qla::inner(blocks[b].g0, w.z[b]).real();
        sol.primal_value = pobj;
        sol.dual_value = dobj;
        sol.gap = std::abs(pobj - dobj) / std::max(1.0, std::abs(pobj));
        auto f = eval_blocks(w.x);
        double pres = 0;
        for (int b = 0; b < nb; ++b) {
            double viol = -qla::eig_hermitian(Hermitian::symmetrized(f[b])).values.front();
            pres = std::max(pres, viol / std::max(1.0, blocks[b].g0.frobenius_norm()));
        }
        for (int r = 0; r < np; ++r) {
            double lhs = 0;
            for (auto& [i, v] : eq_rows[r]) lhs += v * w.x[i];
            pres = std::max(pres, std::abs(lhs - b_rhs[r]) / b_norm);
        }
        sol.primal_residual = pres;
        double dres = 0;
        for (int i = 0; i < n; ++i) {
            double lhs = p.objective[i];
            for (auto& [r, v] : var_eqs[i]) lhs -= v * w.nu[r];
            for (auto& [b, k] : var_blocks[i]) lhs -= trip_dot(blocks[b].trips[k], w.z[b]);
            dres = std::max(dres, std::abs(lhs) / c_norm);
        }
        sol.dual_residual = dres;
        return sol;
    };

    int iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        auto f = eval_blocks(it.x);
        std::vector<CMatrix> rg(nb);
        for (int b = 0; b < nb; ++b) rg[b] = f[b] - it.s[b];

        std::vector<double> r_a(np);
        for (int r = 0; r < np; ++r) {
            double lhs = 0;
            for (auto& [i, v] : eq_rows[r]) lhs += v * it.x[i];
            r_a[r] = b_rhs[r] - lhs;
        }
        std::vector<double> r_d(n);
        for (int i = 0; i < n; ++i) {
            double lhs = p.objective[i];
            for (auto& [r, v] : var_eqs[i]) lhs -= v * it.nu[r];
            for (auto& [b, k] : var_blocks[i]) lhs -= trip_dot(blocks[b].trips[k], it.z[b]);
            r_d[i] = lhs;
        }

        double mu = 0;
        for (int b = 0; b < nb; ++b) mu += qla::inner(it.s[b], it.z[b]).real();
        mu /= total_dim;

        double pobj = 0;
        for (int i = 0; i < n; ++i) pobj += p.objective[i] * it.x[i];
        double dobj = 0;
        for (int r = 0; r < np; ++r) dobj += b_rhs[r] * it.nu[r];
        for (int b = 0; b < nb; ++b) dobj -= qla::inner(blocks[b].g0, it.z[b]).real();

        double gap_rel = std::abs(pobj - dobj) / std::max(1.0, std::abs(pobj));
        double pres = 0;
        for (int b = 0; b < nb; ++b)
            pres = std::max(pres,
                            rg[b].frobenius_norm() / std::max(1.0, blocks[b].g0.frobenius_norm()));
        for (int r = 0; r < np; ++r) pres = std::max(pres, std::abs(r_a[r]) / b_norm);
        double dres = 0;
        for (int i = 0; i < n; ++i) dres = std::max(dres, std::abs(r_d[i]) / c_norm);

        double score = std::max({gap_rel, pres, dres});
        if (score < best_score) {
            best_score = score;
            best = it;
        }
        if (cfg.trace)
            std::fprintf(stderr, "iter %3d  mu %.3e  gap %.3e  pres %.3e  dres %.3e  pd %.3e %.3e\n",
                         iter, mu, gap_rel, pres, dres, pobj, dobj);

        if (gap_rel <= cfg.gap_tol && pres <= cfg.feas_tol && dres <= cfg.feas_tol)
            return finalize(it, SolveStatus::optimal, iter, "");
        // once the iterate quality degrades far past the best one seen, the
        // Newton systems have gone numerically singular; stop and fall through
        // to best-iterate acceptance
        if (iter > 8 && score > 1e3 * best_score) break;

        if (dobj > cfg.divergence_bound) {
            double zn = 0;
            for (int b = 0; b < nb; ++b) zn += it.z[b].frobenius_norm();
            for (double v : it.nu) zn += std::abs(v);
            Iterate ray = it;
            for (auto& z : ray.z) z *= cplx(1.0 / zn);
            for (auto& v : ray.nu) v /= zn;
            double hom = 0;
            for (int i = 0; i < n; ++i) {
                double lhs = 0;
                for (auto& [b, k] : var_blocks[i]) lhs += trip_dot(blocks[b].trips[k], ray.z[b]);
                for (auto& [r, v] : var_eqs[i]) lhs += v * ray.nu[r];
                hom = std::max(hom, std::abs(lhs));
            }
            double ray_obj = 0;
            for (int r = 0; r < np; ++r) ray_obj += b_rhs[r] * ray.nu[r];
            for (int b = 0; b < nb; ++b) ray_obj -= qla::inner(blocks[b].g0, ray.z[b]).real();
            if (hom < 1e-6 && ray_obj > 1e-8)
                return finalize(ray, SolveStatus::infeasible, iter,
                                "dual objective diverged; improving-ray certificate attached");
        }
        if (pobj < -cfg.divergence_bound)
            return finalize(it, SolveStatus::unbounded, iter,
                            "primal objective diverged below the configured bound");

        std::vector<CMatrix> chol_s(nb), sinv(nb);
        bool numerics_ok = true;
        for (int b = 0; b < nb && numerics_ok; ++b) {
            auto ch = qla::cholesky(it.s[b]);
            if (!ch.ok) {
                numerics_ok = false;
            } else {
                chol_s[b] = ch.lower;
                sinv[b] = qla::cholesky_inverse(ch.lower);
            }
        }
        if (!numerics_ok) break;

        // Schur complement (shared by predictor and corrector)
        RealMat m(n);
        for (int b = 0; b < nb; ++b) {
            const auto& blk = blocks[b];
            const int nv = int(blk.vars.size());
            const size_t dense_cost =
                size_t(nv) * (2 * size_t(blk.dim) * blk.dim * blk.dim + blk.total_nnz);
            const size_t sparse_cost = blk.total_nnz * blk.total_nnz;
            if (sparse_cost < dense_cost) {
                for (int kk = 0; kk < nv; ++kk)
                    for (int ii = 0; ii < nv; ++ii) {
                        cplx acc = 0;
                        for (const auto& ti : blk.trips[ii])
                            for (const auto& tu : blk.trips[kk])
                                acc += std::conj(ti.v) * tu.v * sinv[b](ti.r, tu.r) *
                                       it.z[b](tu.c, ti.c);
                        m.at(blk.vars[ii], blk.vars[kk]) += acc.real();
                    }
            } else {
                for (int kk = 0; kk < nv; ++kk) {
                    CMatrix gz(blk.dim, blk.dim);
                    for (const auto& t : blk.trips[kk])
                        for (int col = 0; col < blk.dim; ++col)
                            gz(t.r, col) += t.v * it.z[b](t.c, col);
                    CMatrix t = sinv[b] * gz;
                    for (int ii = 0; ii < nv; ++ii)
                        m.at(blk.vars[ii], blk.vars[kk]) += trip_dot(blk.trips[ii], t);
                }
            }
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double v = 0.5 * (m.at(i, j) + m.at(j, i));
                m.at(i, j) = v;
                m.at(j, i) = v;
            }

        // symmetric Jacobi scaling before factoring: the diagonal spans many
        // orders of magnitude once vertex multipliers split into active and
        // inactive sets, and unit-diagonal Cholesky stays accurate there
        std::vector<double> dscale(n);
        for (int i = 0; i < n; ++i) dscale[i] = 1.0 / std::sqrt(std::max(m.at(i, i), 1e-300));
        RealMat mhat(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) mhat.at(i, j) = m.at(i, j) * dscale[i] * dscale[j];
        RealMat mchol = mhat;
        double ridge = 0;
        bool factored = false;
        for (int attempt = 0; attempt < 6 && !factored; ++attempt) {
            factored = chol_real(mchol, ridge);
            if (!factored) {
                mchol = mhat;
                ridge = (ridge == 0 ? 1e-13 : ridge * 100);
            }
        }
        if (!factored) break;

        // monitored refinement against the exact matrix recovers the late
        // iterations, where plain solve error gets amplified by S^{-1} in the
        // dual direction; a pass that fails to shrink the residual is undone
        // (refining a numerically singular system amplifies its null space)
        auto m_solve = [&](std::vector<double>& b_io) {
            for (int i = 0; i < n; ++i) b_io[i] *= dscale[i];
            std::vector<double> rhs = b_io;
            chol_solve_real(mchol, b_io);
            if (ridge == 0) {
                std::vector<double> resid(n), cand(n);
                auto residual_norm = [&](const std::vector<double>& x) {
                    double norm = 0;
                    for (int i = 0; i < n; ++i) {
                        double acc = 0;
                        for (int j = 0; j < n; ++j) acc += mhat.at(i, j) * x[j];
                        resid[i] = rhs[i] - acc;
                        norm += resid[i] * resid[i];
                    }
                    return norm;
                };
                double rn = residual_norm(b_io);
                for (int pass = 0; pass < 2; ++pass) {
                    std::vector<double> delta = resid;
                    chol_solve_real(mchol, delta);
                    cand = b_io;
                    for (int i = 0; i < n; ++i) cand[i] += delta[i];
                    double rn2 = residual_norm(cand);
                    if (rn2 >= rn) {
                        residual_norm(b_io);  // restore resid for consistency
                        break;
                    }
                    b_io.swap(cand);
                    rn = rn2;
                }
            }
            for (int i = 0; i < n; ++i) b_io[i] *= dscale[i];
        };

        auto kkt_solve = [&](const std::vector<double>& h, std::vector<double>& dx,
                             std::vector<double>& dnu) {
            if (np == 0) {
                dx = h;
                m_solve(dx);
                dnu.clear();
                return;
            }
            std::vector<std::vector<double>> w(np, std::vector<double>(n, 0.0));
            for (int r = 0; r < np; ++r) {
                for (auto& [i, v] : eq_rows[r]) w[r][i] = v;
                m_solve(w[r]);
            }
            RealMat schur2(np);
            for (int r = 0; r < np; ++r)
                for (int s2 = 0; s2 < np; ++s2) {
                    double acc = 0;
                    for (auto& [i, v] : eq_rows[s2]) acc += v * w[r][i];
                    schur2.at(r, s2) = acc;
                }
            for (int i = 0; i < np; ++i)
                for (int j = i + 1; j < np; ++j) {
                    double v = 0.5 * (schur2.at(i, j) + schur2.at(j, i));
                    schur2.at(i, j) = v;
                    schur2.at(j, i) = v;
                }
            std::vector<double> mh = h;
            m_solve(mh);
            std::vector<double> rhs2(np);
            for (int r = 0; r < np; ++r) {
                double acc = 0;
                for (auto& [i, v] : eq_rows[r]) acc += v * mh[i];
                rhs2[r] = acc - r_a[r];
            }
            RealMat s2chol = schur2;
            double ridge2 = 0;
            bool ok2 = false;
            for (int attempt = 0; attempt < 6 && !ok2; ++attempt) {
                ok2 = chol_real(s2chol, ridge2);
                if (!ok2) {
                    s2chol = schur2;
                    double scale = 1.0;
                    for (int i = 0; i < np; ++i) scale = std::max(scale, schur2.at(i, i));
                    ridge2 = (ridge2 == 0 ? 1e-12 * scale : ridge2 * 100);
                }
            }
            chol_solve_real(s2chol, rhs2);
            dnu.assign(np, 0.0);
            for (int r = 0; r < np; ++r) dnu[r] = -rhs2[r];
            dx = h;
            for (int r = 0; r < np; ++r)
                for (auto& [i, v] : eq_rows[r]) dx[i] += v * dnu[r];
            m_solve(dx);
        };

        auto directions = [&](const std::vector<CMatrix>& rc, std::vector<double>& dx,
                              std::vector<double>& dnu, std::vector<CMatrix>& ds,
                              std::vector<CMatrix>& dz) {
            std::vector<double> h(n, 0.0);
            for (int b = 0; b < nb; ++b) {
                CMatrix d = sinv[b] * (rc[b] - rg[b] * it.z[b]);
                for (size_t k = 0; k < blocks[b].vars.size(); ++k)
                    h[blocks[b].vars[k]] += trip_dot(blocks[b].trips[k], d);
            }
            for (int i = 0; i < n; ++i) h[i] -= r_d[i];
            kkt_solve(h, dx, dnu);
            ds.assign(nb, CMatrix());
            dz.assign(nb, CMatrix());
            for (int b = 0; b < nb; ++b) {
                CMatrix dsb = rg[b];
                for (size_t k = 0; k < blocks[b].vars.size(); ++k) {
                    const double xv = dx[blocks[b].vars[k]];
                    if (xv == 0.0) continue;
                    for (const auto& t : blocks[b].trips[k]) dsb(t.r, t.c) += xv * t.v;
                }
                CMatrix dzb = sinv[b] * (rc[b] - dsb * it.z[b]);
                dzb = cplx(0.5) * (dzb + dzb.adjoint());
                ds[b] = std::move(dsb);
                dz[b] = std::move(dzb);
            }
        };

        std::vector<CMatrix> chol_z(nb);
        for (int b = 0; b < nb && numerics_ok; ++b) {
            auto ch = qla::cholesky(it.z[b]);
            if (!ch.ok)
                numerics_ok = false;
            else
                chol_z[b] = ch.lower;
        }
        if (!numerics_ok) break;

        // predictor
        std::vector<CMatrix> rc(nb);
        for (int b = 0; b < nb; ++b) rc[b] = cplx(-1.0) * (it.s[b] * it.z[b]);
        std::vector<double> dx_a, dnu_a;
        std::vector<CMatrix> ds_a, dz_a;
        directions(rc, dx_a, dnu_a, ds_a, dz_a);

        double ap = 1.0, ad = 1.0;
        for (int b = 0; b < nb; ++b) {
            ap = std::min(ap, max_step(chol_s[b], ds_a[b]));
            ad = std::min(ad, max_step(chol_z[b], dz_a[b]));
        }
        double mu_aff = 0;
        for (int b = 0; b < nb; ++b) {
            CMatrix sa = it.s[b] + cplx(ap) * ds_a[b];
            CMatrix za = it.z[b] + cplx(ad) * dz_a[b];
            mu_aff += qla::inner(sa, za).real();
        }
        mu_aff = std::max(0.0, mu_aff / total_dim);
        double sigma = std::clamp(std::pow(mu_aff / std::max(mu, 1e-300), 3.0), 0.0, 1.0);
        // keep the complementarity level from racing ahead of feasibility:
        // when the residuals exceed the barrier level, slow the mu reduction
        // so the (1 - alpha) contraction of the residuals can catch up
        const double mu_rel = mu / (1.0 + std::abs(pobj) + std::abs(dobj));
        const double imbalance = std::max(pres, dres) / std::max(mu_rel, 1e-300);
        if (imbalance > 1.0)
            sigma = std::clamp(1.0 - (1.0 - sigma) / imbalance, sigma, 0.99);

        // corrector
        for (int b = 0; b < nb; ++b) {
            CMatrix t = cplx(-1.0) * (it.s[b] * it.z[b]) - ds_a[b] * dz_a[b];
            for (int i = 0; i < blocks[b].dim; ++i) t(i, i) += sigma * mu;
            rc[b] = std::move(t);
        }
        std::vector<double> dx, dnu;
        std::vector<CMatrix> ds, dz;
        directions(rc, dx, dnu, ds, dz);

        double sp = std::numeric_limits<double>::infinity();
        double sd = std::numeric_limits<double>::infinity();
        for (int b = 0; b < nb; ++b) {
            sp = std::min(sp, max_step(chol_s[b], ds[b]));
            sd = std::min(sd, max_step(chol_z[b], dz[b]));
        }
        double alpha_p = std::min(1.0, cfg.step_fraction * sp);
        double alpha_d = std::min(1.0, cfg.step_fraction * sd);
        if (cfg.trace)
            std::fprintf(stderr, "          sigma %.3e  alpha %.3e %.3e\n", sigma, alpha_p,
                         alpha_d);

        for (int i = 0; i < n; ++i) it.x[i] += alpha_p * dx[i];
        for (int r = 0; r < np; ++r) it.nu[r] += alpha_d * dnu[r];
        for (int b = 0; b < nb; ++b) {
            it.s[b] += cplx(alpha_p) * ds[b];
            it.z[b] += cplx(alpha_d) * dz[b];
            it.s[b] = cplx(0.5) * (it.s[b] + it.s[b].adjoint());
            it.z[b] = cplx(0.5) * (it.z[b] + it.z[b].adjoint());
        }

        if (alpha_p < 1e-8 && alpha_d < 1e-8) {
            if (++stall >= 3) break;
        } else {
            stall = 0;
        }
    }

    ConicSolution sol = finalize(best, SolveStatus::numerical_failure, iter,
                                 "iteration cap or stalled step; best iterate attached");
    if (sol.gap <= cfg.accept_gap && sol.primal_residual <= cfg.accept_feas &&
        sol.dual_residual <= cfg.accept_dual_feas) {
        sol.status = SolveStatus::optimal;
        sol.note = "";
    }
    return sol;
}

}  // namespace

ConicSolution solve(const ConicProgram& p, const SolverConfig& cfg) {
    p.validate();
    if (!cfg.force_interior_point && all_blocks_diagonal(p)) {
        std::vector<std::pair<int, int>> origin;
        ConicProgram split = split_diagonal(p, origin);
        ConicSolution s = solve_simplex(split, cfg);
        std::vector<CMatrix> duals;
        duals.reserve(p.lmis.size());
        for (const auto& blk : p.lmis) duals.push_back(CMatrix(blk.dim(), blk.dim()));
        for (size_t k = 0; k < origin.size(); ++k) {
            auto [b, d] = origin[k];
            if (k < s.lmi_duals.size() && s.lmi_duals[k].rows() == 1)
                duals[b](d, d) = s.lmi_duals[k](0, 0);
        }
        s.lmi_duals = std::move(duals);
        return s;
    }
    return solve_interior_point(p, cfg);
}

// --- verification ------------------------------------------------------------

VerifyReport verify(const ConicProgram& p, const ConicSolution& s, double tolerance) {
    VerifyReport rep;
    std::ostringstream detail;
    if (s.status != SolveStatus::optimal) {
        rep.detail = "solution does not claim optimality";
        return rep;
    }
    const int n = p.num_vars;

    for (size_t b = 0; b < p.lmis.size(); ++b) {
        CMatrix f = p.lmis[b].constant;
        for (auto& [i, g] : p.lmis[b].terms) f += cplx(s.x[i]) * g;
        double scale = std::max(1.0, f.frobenius_norm());
        double viol = -qla::eig_hermitian(Hermitian::symmetrized(f)).values.front() / scale;
        rep.lmi_violation = std::max(rep.lmi_violation, viol);
        double cs = std::abs(qla::inner(f, s.lmi_duals[b]).real()) /
                    std::max(1.0, s.lmi_duals[b].frobenius_norm() * scale);
        rep.complementarity = std::max(rep.complementarity, cs);
        double zmin = qla::eig_hermitian(Hermitian::symmetrized(s.lmi_duals[b])).values.front();
        rep.dual_psd_violation = std::max(rep.dual_psd_violation, -zmin);
    }
    for (const auto& row : p.equalities) {
        double lhs = -row.rhs;
        for (auto& [i, v] : row.coeffs) lhs += v * s.x[i];
        rep.equality_violation =
            std::max(rep.equality_violation, std::abs(lhs) / std::max(1.0, std::abs(row.rhs)));
    }
    for (int i = 0; i < n; ++i) {
        if (!p.nonneg.empty() && p.nonneg[i]) {
            rep.sign_violation = std::max(rep.sign_violation, -s.x[i]);
            rep.dual_psd_violation = std::max(rep.dual_psd_violation, -s.sign_duals[i]);
            rep.complementarity = std::max(rep.complementarity, std::abs(s.x[i] * s.sign_duals[i]));
        }
        double lhs = p.objective[i];
        for (size_t r = 0; r < p.equalities.size(); ++r)
            for (auto& [j, v] : p.equalities[r].coeffs)
                if (j == i) lhs -= v * s.eq_duals[r];
        for (size_t b = 0; b < p.lmis.size(); ++b)
            for (auto& [j, g] : p.lmis[b].terms)
                if (j == i) lhs -= qla::inner(g, s.lmi_duals[b]).real();
        if (!p.nonneg.empty() && p.nonneg[i]) lhs -= s.sign_duals[i];
        double scale = std::max(1.0, std::abs(p.objective[i]));
        rep.stationarity_violation = std::max(rep.stationarity_violation, std::abs(lhs) / scale);
    }
    double pobj = 0;
    for (int i = 0; i < n; ++i) pobj += p.objective[i] * s.x[i];
    double dobj = 0;
    for (size_t r = 0; r < p.equalities.size(); ++r) dobj += p.equalities[r].rhs * s.eq_duals[r];
    for (size_t b = 0; b < p.lmis.size(); ++b)
        dobj -= qla::inner(p.lmis[b].constant, s.lmi_duals[b]).real();
    rep.gap = std::abs(pobj - dobj) / std::max(1.0, std::abs(pobj));

    rep.pass = rep.lmi_violation <= tolerance && rep.equality_violation <= tolerance &&
               rep.sign_violation <= tolerance && rep.dual_psd_violation <= tolerance &&
               rep.stationarity_violation <= tolerance && rep.complementarity <= tolerance &&
               rep.gap <= tolerance;
    detail << "lmi=" << rep.lmi_violation << " eq=" << rep.equality_violation
           << " sign=" << rep.sign_violation << " dualpsd=" << rep.dual_psd_violation
           << " stat=" << rep.stationarity_violation << " compl=" << rep.complementarity
           << " gap=" << rep.gap;
    rep.detail = detail.str();
    return rep;
}

// --- dump and embedding ------------------------------------------------------

void dump(const ConicProgram& p, std::ostream& os) {
    os << "conic-program v1\n";
    os << "vars " << p.num_vars << "\n";
    os << "objective";
    for (double v : p.objective) os << " " << v;
    os << "\nnonneg";
    for (int i = 0; i < p.num_vars; ++i)
        if (!p.nonneg.empty() && p.nonneg[i]) os << " " << i;
    os << "\n";
    for (const auto& row : p.equalities) {
        os << "eq " << row.rhs;
        for (auto& [i, v] : row.coeffs) os << " " << i << ":" << v;
        os << "\n";
    }
    auto put_matrix = [&os](const CMatrix& m) {
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c)
                os << " " << m(r, c).real() << "," << m(r, c).imag();
        os << "\n";
    };
    for (const auto& blk : p.lmis) {
        os << "lmi " << blk.dim() << " " << blk.terms.size() << "\n";
        os << "const";
        put_matrix(blk.constant);
        for (auto& [i, g] : blk.terms) {
            os << "term " << i;
            put_matrix(g);
        }
    }
}

ConicProgram real_embedding(const ConicProgram& p) {
    auto embed = [](const CMatrix& m) {
        const int d = m.rows();
        CMatrix r(2 * d, 2 * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                r(i, j) = m(i, j).real();
                r(i + d, j + d) = m(i, j).real();
                r(i, j + d) = -m(i, j).imag();
                r(i + d, j) = m(i, j).imag();
            }
        return r;
    };
    ConicProgram q;
    q.num_vars = p.num_vars;
    q.objective = p.objective;
    q.equalities = p.equalities;
    q.nonneg = p.nonneg;
    for (const auto& blk : p.lmis) {
        LmiBlock e;
        e.constant = embed(blk.constant);
        for (auto& [i, g] : blk.terms) e.terms.emplace_back(i, embed(g));
        q.lmis.push_back(std::move(e));
    }
    return q;
}

}  // namespace qrt::conic
