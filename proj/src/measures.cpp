#include "qrt/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "qrt/gates.hpp"
#include "qrt/stab.hpp"

namespace qrt::measures {

using conic::HermExpr;
using conic::HermVar;
using conic::LinExpr;
using conic::ProgramBuilder;
using qla::CMatrix;
using qla::cplx;
using qla::Hermitian;
using theories::FreeSet;
using theories::ObjectSpace;

namespace detail {
size_t dual_form_threshold = 4000;
}

namespace {

struct Target {
    Hermitian j;      // state (trace 1) or unnormalized Choi (trace d_in)
    int d_in = 1;
    int d_out = 1;
    bool is_channel = false;
    double scale() const { return is_channel ? double(d_in) : 1.0; }
    int dim() const { return j.dim(); }
};

Target make_target(const channels::Channel& e, const FreeSet& fs) {
    if (fs.space != ObjectSpace::channel)
        throw dimension_error("measure: channel object over a state free set");
    if (fs.d_in != e.d_in() || fs.d_out != e.d_out())
        throw dimension_error("measure: free-set dimensions do not match the channel");
    return Target{e.choi(), e.d_in(), e.d_out(), true};
}

Target make_target(const qla::DensityOperator& rho, const FreeSet& fs) {
    if (fs.space != ObjectSpace::state)
        throw dimension_error("measure: state object over a channel free set");
    if (fs.d_in != rho.dim()) throw dimension_error("measure: free-set dimension mismatch");
    return Target{rho.op(), rho.dim(), 1, false};
}

SolverDiagnostics diag_of(const conic::ConicSolution& s) {
    return SolverDiagnostics{s.status, s.gap, s.primal_residual, s.dual_residual, s.iterations};
}

// deterministic bank of free elements per (free set, seed), shared across calls
const std::vector<Hermitian>& sample_bank(const FreeSet& fs, int count) {
    static std::map<std::string, std::vector<Hermitian>> cache;
    static std::mutex mu;
    std::string key = fs.name + ":" + std::to_string(fs.d_in) + "x" + std::to_string(fs.d_out) +
                      ":" + std::to_string(count) + ":" + std::to_string(fs.vertices.size());
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    rng::Engine eng(0x9e3779b9 + fs.d_in * 131 + fs.d_out);
    std::vector<Hermitian> bank;
    bank.reserve(count);
    for (int k = 0; k < count; ++k) {
        auto s = theories::sample_free(fs, eng);
        if (!s) break;
        bank.push_back(std::move(*s));
    }
    return cache.emplace(std::move(key), std::move(bank)).first->second;
}

enum class Sense { robustness, weight };

void certify(MeasureResult& r, const Target& t, const FreeSet& fs, Sense sense) {
    if (!r.witness) return;
    const Hermitian& x = *r.witness;
    WitnessCheck c;
    c.checked = true;
    c.psd_violation = std::max(0.0, -qla::min_eigenvalue(x));
    c.value_mismatch = std::abs(qla::inner(x.mat(), t.j.mat()).real() - r.value);

    const double d = t.scale();
    double worst = 0;  // normalization violation over free elements
    auto probe = [&](const Hermitian& free_elem) {
        double v = qla::inner(x.mat(), free_elem.mat()).real();
        worst = std::max(worst, sense == Sense::robustness ? v - 1.0 : 1.0 - v);
    };
    if (fs.kind == FreeSet::Kind::vertex_polytope && !fs.tp_on_mixture) {
        for (const auto& v : fs.vertices) probe(Hermitian(cplx(d) * v.mat(), 1e-9));
    }
    if (fs.kind == FreeSet::Kind::sdp_cone && fs.cone == FreeSet::Cone::replacement) {
        // <X, I (x) sigma> = <Tr_in X, sigma>: extremes are eigenvalues
        Hermitian m = qla::partial_trace(x, {fs.d_in, fs.d_out}, {1});
        auto eig = qla::eig_hermitian(m);
        double v = sense == Sense::robustness ? eig.values.back() : eig.values.front();
        worst = std::max(worst, sense == Sense::robustness ? v - 1.0 : 1.0 - v);
    }
    for (const auto& s : sample_bank(fs, 1000)) probe(s);

    c.max_violation = worst;
    c.pass = c.psd_violation <= tol().dual_psd &&
             c.value_mismatch <= tol().witness * std::max(1.0, std::abs(r.value)) &&
             c.max_violation <= tol().witness;
    r.certification = c;
}

// trace over the output register of a Choi-valued expression
HermExpr trace_out_expr(const HermExpr& e, int d_in, int d_out) {
    return e.map(d_in, [&](const CMatrix& m) {
        return qla::partial_trace(m, {d_in, d_out}, {0});
    });
}

// ---- robustness and weight compilers ----------------------------------------

// primal vertex-weight program restricted to a subset of the polytope
conic::ConicProgram build_rw_polytope(const Target& t, const FreeSet& fs, Sense sense,
                                      const std::vector<size_t>& subset) {
    const double d = t.scale();
    ProgramBuilder b;
    HermExpr combo(t.dim());
    LinExpr total;
    for (size_t k : subset) {
        int w = b.add_var(sense == Sense::robustness ? 1.0 : -1.0, true);
        combo.add_term(w, cplx(d) * fs.vertices[k].mat());
        total.coeffs[w] = 1.0;
    }
    HermExpr lmi = sense == Sense::robustness ? combo : combo.scaled(-1.0);
    lmi.add_constant(cplx(sense == Sense::robustness ? -1.0 : 1.0) * t.j.mat());
    b.add_lmi(lmi);
    if (fs.tp_on_mixture) {
        // Tr_out(lambda J_M) = lambda I
        HermExpr tp = trace_out_expr(combo, t.d_in, t.d_out);
        for (auto& [i, w] : total.coeffs)
            tp.add_term(i, cplx(-w) * CMatrix::identity(t.d_in));
        b.add_hermitian_equality(tp);
    }
    return b.take();
}

MeasureResult finalize_polytope_primal(const Target& t, const FreeSet& fs, Sense sense,
                                       const std::vector<size_t>& subset,
                                       const conic::ConicSolution& sol) {
    MeasureResult r;
    r.diag = diag_of(sol);
    double lambda = 0;
    for (size_t k = 0; k < subset.size(); ++k) lambda += sol.x[k];
    r.value = sense == Sense::robustness ? sol.primal_value : -sol.primal_value;
    r.coefficient = lambda;
    r.witness = Hermitian(sol.lmi_duals[0], 1e-6);
    if (lambda > 1e-12) {
        CMatrix m(t.dim(), t.dim());
        for (size_t k = 0; k < subset.size(); ++k)
            m += cplx(sol.x[k] / lambda) * fs.vertices[subset[k]].mat();
        r.free_element = Hermitian(m, 1e-8);
    }
    certify(r, t, fs, sense);
    return r;
}

MeasureResult rw_polytope_primal(const Target& t, const FreeSet& fs, Sense sense) {
    const double d = t.scale();
    std::vector<size_t> all(fs.vertices.size());
    for (size_t k = 0; k < all.size(); ++k) all[k] = k;
    auto prog = build_rw_polytope(t, fs, sense, all);
    auto cfg = conic::config_from_tolerances();
    auto sol = conic::solve(prog, cfg);
    if (sol.status == conic::SolveStatus::infeasible) {
        MeasureResult r;
        r.diag = diag_of(sol);
        r.infinite = true;
        return r;
    }
    if (sol.status == conic::SolveStatus::optimal)
        return finalize_polytope_primal(t, fs, sense, all, sol);

    // Degenerate endgame fallback (delayed column generation): re-solve on
    // the active vertex set, price every vertex against the reduced dual
    // witness, and add violated columns until none remain. The pricing step
    // needs the plain per-vertex normalization, so mixture-level trace
    // preservation is out of scope here.
    if (fs.tp_on_mixture)
        throw numerical_error("measure: solver failed (" + sol.note + ")");
    double xmax = 1e-300;
    for (double v : sol.x) xmax = std::max(xmax, v);
    std::vector<char> in_subset(fs.vertices.size(), 0);
    std::vector<size_t> subset;
    for (size_t k = 0; k < all.size(); ++k)
        if (sol.x[k] > 1e-6 * xmax) {
            subset.push_back(k);
            in_subset[k] = 1;
        }
    if (subset.empty()) {
        subset.push_back(0);
        in_subset[0] = 1;
    }

    for (int round = 0; round < 8; ++round) {
        auto reduced_prog = build_rw_polytope(t, fs, sense, subset);
        auto reduced = conic::solve(reduced_prog, cfg);
        if (reduced.status == conic::SolveStatus::infeasible && sense == Sense::robustness) {
            MeasureResult r;
            r.diag = diag_of(reduced);
            r.infinite = true;
            return r;
        }
        if (reduced.status != conic::SolveStatus::optimal)
            throw numerical_error("measure: solver failed on the reduced program (" +
                                  reduced.note + ")");
        Hermitian x = Hermitian::symmetrized(reduced.lmi_duals[0]);
        std::vector<std::pair<double, size_t>> violated;
        for (size_t k = 0; k < fs.vertices.size(); ++k) {
            if (in_subset[k]) continue;
            double v = d * qla::inner(x.mat(), fs.vertices[k].mat()).real();
            double viol = sense == Sense::robustness ? v - 1.0 : 1.0 - v;
            if (viol > 1e-9) violated.push_back({viol, k});
        }
        if (violated.empty()) return finalize_polytope_primal(t, fs, sense, subset, reduced);
        std::sort(violated.rbegin(), violated.rend());
        const size_t add = std::min<size_t>(violated.size(), 256);
        for (size_t k = 0; k < add; ++k) {
            subset.push_back(violated[k].second);
            in_subset[violated[k].second] = 1;
        }
    }
    throw numerical_error("measure: column generation did not close the vertex pricing");
}

MeasureResult rw_polytope_dual(const Target& t, const FreeSet& fs, Sense sense) {
    const double d = t.scale();
    ProgramBuilder b;
    HermVar xv = b.add_hermitian_var(t.dim());
    HermExpr xe = xv.expr();
    b.add_lmi(xe);  // X >= 0
    std::optional<HermVar> ev;
    if (fs.tp_on_mixture) ev = b.add_hermitian_var(t.d_in);
    // per-vertex normalization rows
    for (const auto& v : fs.vertices) {
        LinExpr row = conic::inner_with(cplx(d) * v.mat(), xe);
        if (ev) {
            CMatrix tpcoef = cplx(d) * qla::partial_trace(v.mat(), {t.d_in, t.d_out}, {0}) -
                             CMatrix::identity(t.d_in);
            LinExpr erow = conic::inner_with(tpcoef, ev->expr());
            for (auto& [i, c] : erow.coeffs) row.coeffs[i] += c;
        }
        HermExpr ineq(1);
        CMatrix one(1, 1);
        one(0, 0) = sense == Sense::robustness ? 1.0 : -1.0;
        ineq.add_constant(one);
        for (auto& [i, c] : row.coeffs) {
            CMatrix cm(1, 1);
            cm(0, 0) = sense == Sense::robustness ? -c : c;
            ineq.add_term(i, cm);
        }
        b.add_lmi(ineq);
    }
    LinExpr obj = conic::inner_with(t.j.mat(), xe);
    for (auto& [i, v] : obj.coeffs)
        b.set_objective_coeff(i, sense == Sense::robustness ? -v : v);
    auto prog = b.take();
    auto sol = conic::solve(prog, conic::config_from_tolerances());

    MeasureResult r;
    r.diag = diag_of(sol);
    if (sol.status == conic::SolveStatus::unbounded && sense == Sense::robustness) {
        r.infinite = true;
        return r;
    }
    if (sol.status != conic::SolveStatus::optimal)
        throw numerical_error("measure: solver failed (" + sol.note + ")");
    r.value = sense == Sense::robustness ? -sol.primal_value : sol.primal_value;
    r.coefficient = r.value;
    r.witness = Hermitian(xv.value(sol.x), 1e-8);
    // primal weights are the multipliers of the per-vertex rows
    double lambda = 0;
    std::vector<double> w(fs.vertices.size(), 0.0);
    for (size_t k = 0; k < fs.vertices.size(); ++k) {
        w[k] = std::max(0.0, sol.lmi_duals[1 + k](0, 0).real());
        lambda += w[k];
    }
    if (lambda > 1e-12) {
        CMatrix m(t.dim(), t.dim());
        for (size_t k = 0; k < fs.vertices.size(); ++k)
            m += cplx(w[k] / lambda) * fs.vertices[k].mat();
        r.free_element = Hermitian(m, 1e-7);
    }
    certify(r, t, fs, sense);
    return r;
}

MeasureResult rw_replacement(const Target& t, const FreeSet& fs, Sense sense) {
    // lambda J_M = I (x) Y with Y >= 0, lambda = Tr Y
    ProgramBuilder b;
    HermVar yv = b.add_hermitian_var(t.d_out);
    HermExpr ye = yv.expr();
    b.add_lmi(ye);
    HermExpr lifted = ye.map(t.dim(), [&](const CMatrix& m) {
        return qla::kron(CMatrix::identity(t.d_in), m);
    });
    if (sense == Sense::robustness) {
        lifted.add_constant(cplx(-1.0) * t.j.mat());
    } else {
        lifted = lifted.scaled(-1.0);
        lifted.add_constant(t.j.mat());
    }
    b.add_lmi(lifted);
    LinExpr obj = conic::trace_of(ye);
    for (auto& [i, v] : obj.coeffs)
        b.set_objective_coeff(i, sense == Sense::robustness ? v : -v);
    auto prog = b.take();
    auto sol = conic::solve(prog, conic::config_from_tolerances());

    MeasureResult r;
    r.diag = diag_of(sol);
    if (sol.status == conic::SolveStatus::infeasible && sense == Sense::robustness) {
        r.infinite = true;
        return r;
    }
    if (sol.status != conic::SolveStatus::optimal)
        throw numerical_error("measure: solver failed (" + sol.note + ")");
    r.value = sense == Sense::robustness ? sol.primal_value : -sol.primal_value;
    r.coefficient = r.value;
    r.witness = Hermitian(sol.lmi_duals[1], 1e-6);
    CMatrix y = yv.value(sol.x);
    double lambda = y.trace().real();
    if (lambda > 1e-12)
        r.free_element = Hermitian(
            qla::kron(CMatrix::identity(t.d_in), cplx(1.0 / (lambda * t.d_in)) * y), 1e-8);
    certify(r, t, fs, sense);
    return r;
}

MeasureResult rw_ppt(const Target& t, const FreeSet& fs, Sense sense) {
    ProgramBuilder b;
    HermVar yv = b.add_hermitian_var(t.dim());
    HermExpr ye = yv.expr();
    auto pt = [&](const HermExpr& e) {
        return e.map(t.dim(), [&](const CMatrix& m) {
            return qla::partial_transpose(Hermitian(m, 1e-7), {t.d_in, t.d_out}, {1}).mat();
        });
    };
    MeasureResult r;
    conic::ConicProgram prog;
    if (sense == Sense::robustness) {
        // CP trace-non-increasing form: min ||Tr_out Y||_inf over Y >= J,
        // Y^PT >= 0; the TP completion is added back for the decomposition
        int tvar = b.add_var(1.0);
        HermExpr dom = ye;
        dom.add_constant(cplx(-1.0) * t.j.mat());
        b.add_lmi(dom);        // Y - J >= 0
        b.add_lmi(pt(ye));     // Y^PT >= 0
        HermExpr cap = trace_out_expr(ye, t.d_in, t.d_out).scaled(-1.0);
        cap.add_term(tvar, CMatrix::identity(t.d_in));
        b.add_lmi(cap);        // t I - Tr_out Y >= 0
        prog = b.take();
    } else {
        // Y = lambda J_M: Y >= 0, Y^PT >= 0, J - Y >= 0, Tr_out Y = (Tr Y / d) I
        b.add_lmi(ye);
        b.add_lmi(pt(ye));
        HermExpr dom = ye.scaled(-1.0);
        dom.add_constant(t.j.mat());
        b.add_lmi(dom);        // J - Y >= 0
        HermExpr tp = trace_out_expr(ye, t.d_in, t.d_out);
        LinExpr tr = conic::trace_of(ye);
        for (auto& [i, v] : tr.coeffs)
            tp.add_term(i, cplx(-v / t.d_in) * CMatrix::identity(t.d_in));
        b.add_hermitian_equality(tp);
        for (auto& [i, v] : tr.coeffs) b.set_objective_coeff(i, -v / t.d_in);
        prog = b.take();
    }
    auto sol = conic::solve(prog, conic::config_from_tolerances());
    r.diag = diag_of(sol);
    if (sol.status == conic::SolveStatus::infeasible && sense == Sense::robustness) {
        r.infinite = true;
        return r;
    }
    if (sol.status != conic::SolveStatus::optimal)
        throw numerical_error("measure: solver failed (" + sol.note + ")");
    if (sense == Sense::robustness) {
        r.value = sol.primal_value;
        r.coefficient = r.value;
        r.witness = Hermitian(sol.lmi_duals[0], 1e-6);
        // TP completion: lambda J_M = Y + (t I - Tr_out Y) (x) I/d_out
        CMatrix y = yv.value(sol.x);
        Hermitian marg = qla::partial_trace(Hermitian(y, 1e-7), {t.d_in, t.d_out}, {0});
        CMatrix slack = cplx(r.value) * CMatrix::identity(t.d_in) - marg.mat();
        CMatrix jm = y + qla::kron(slack, cplx(1.0 / t.d_out) * CMatrix::identity(t.d_out));
        if (r.value > 1e-12)
            r.free_element = Hermitian(cplx(1.0 / (r.value * t.d_in)) * jm, 1e-7);
    } else {
        r.value = -sol.primal_value;
        r.coefficient = r.value;
        r.witness = Hermitian(sol.lmi_duals[2], 1e-6);
        CMatrix y = yv.value(sol.x);
        if (r.value > 1e-12)
            r.free_element = Hermitian(cplx(1.0 / (r.value * t.d_in)) * y, 1e-7);
    }
    certify(r, t, fs, sense);
    return r;
}

MeasureResult rw_dispatch(const Target& t, const FreeSet& fs, Sense sense) {
    if (fs.kind == FreeSet::Kind::vertex_polytope)
        return fs.vertices.size() > detail::dual_form_threshold
                   ? rw_polytope_dual(t, fs, sense)
                   : rw_polytope_primal(t, fs, sense);
    return fs.cone == FreeSet::Cone::replacement ? rw_replacement(t, fs, sense)
                                                 : rw_ppt(t, fs, sense);
}

// ---- fidelity compilers ------------------------------------------------------

bool is_pure(const Hermitian& unit_trace_op) {
    auto eig = qla::eig_hermitian(unit_trace_op);
    return eig.values.back() >= 1.0 - 1e-9;
}

double fidelity_psd(const Hermitian& a, const Hermitian& b) {
    Hermitian root = qla::sqrt_psd(a, 1e-6);
    Hermitian inner_op(root.mat() * b.mat() * root.mat(), 1e-6);
    auto eig = qla::eig_hermitian(inner_op);
    double s = 0;
    for (double v : eig.values) s += std::sqrt(std::max(0.0, v));
    return s * s;
}

// free element as an expression plus the builder state shared by both paths
struct FreeElementExpr {
    HermExpr expr;           // normalized free state / Choi state
    std::vector<int> weights;  // polytope weights (empty for cones)
    std::optional<HermVar> jvar;
};

FreeElementExpr build_free_element(ProgramBuilder& b, const FreeSet& fs) {
    FreeElementExpr out{HermExpr(fs.dim()), {}, std::nullopt};
    if (fs.kind == FreeSet::Kind::vertex_polytope) {
        LinExpr total;
        for (const auto& v : fs.vertices) {
            int w = b.add_var(0.0, true);
            out.weights.push_back(w);
            out.expr.add_term(w, v.mat());
            total.coeffs[w] = 1.0;
        }
        b.add_equality(total, 1.0);
        if (fs.tp_on_mixture) {
            HermExpr tp = trace_out_expr(out.expr, fs.d_in, fs.d_out);
            tp.add_constant(cplx(-1.0 / fs.d_in) * CMatrix::identity(fs.d_in));
            // mixture is unit trace, so Tr_out must equal I/d_in exactly
            b.add_hermitian_equality(tp);
        }
        return out;
    }
    if (fs.cone == FreeSet::Cone::replacement) {
        HermVar sv = b.add_hermitian_var(fs.d_out);
        out.jvar = sv;
        HermExpr se = sv.expr();
        b.add_lmi(se);
        b.add_equality(conic::trace_of(se), 1.0);
        out.expr = se.map(fs.dim(), [&](const CMatrix& m) {
            return qla::kron(cplx(1.0 / fs.d_in) * CMatrix::identity(fs.d_in), m);
        });
        return out;
    }
    // ppt: normalized Choi state variable with TP and PT conditions
    HermVar jv = b.add_hermitian_var(fs.dim());
    out.jvar = jv;
    HermExpr je = jv.expr();
    b.add_lmi(je);
    b.add_lmi(je.map(fs.dim(), [&](const CMatrix& m) {
        return qla::partial_transpose(Hermitian(m, 1e-7), {fs.d_in, fs.d_out}, {1}).mat();
    }));
    HermExpr tp = trace_out_expr(je, fs.d_in, fs.d_out);
    tp.add_constant(cplx(-1.0 / fs.d_in) * CMatrix::identity(fs.d_in));
    b.add_hermitian_equality(tp);
    out.expr = je;
    return out;
}

Hermitian extract_free_element(const FreeElementExpr& fe, const FreeSet& fs,
                               const conic::ConicSolution& sol) {
    CMatrix m(fs.dim(), fs.dim());
    if (!fe.weights.empty()) {
        for (size_t k = 0; k < fe.weights.size(); ++k)
            m += cplx(sol.x[fe.weights[k]]) * fs.vertices[k].mat();
    } else if (fs.cone == FreeSet::Cone::replacement) {
        m = qla::kron(cplx(1.0 / fs.d_in) * CMatrix::identity(fs.d_in),
                      fe.jvar->value(sol.x));
    } else {
        m = fe.jvar->value(sol.x);
    }
    return Hermitian(m, 1e-7);
}

MeasureResult fidelity_measure(const Target& t, const FreeSet& fs) {
    Hermitian normalized(cplx(1.0 / t.scale()) * t.j.mat(), 1e-9);
    MeasureResult r;

    if (is_pure(normalized)) {
        // linear objective <phi, sigma>
        ProgramBuilder b;
        auto fe = build_free_element(b, fs);
        LinExpr obj = conic::inner_with(normalized.mat(), fe.expr);
        for (auto& [i, v] : obj.coeffs) b.set_objective_coeff(i, -v);
        auto prog = b.take();
        auto sol = conic::solve(prog, conic::config_from_tolerances());
        r.diag = diag_of(sol);
        if (sol.status != conic::SolveStatus::optimal)
            throw numerical_error("fidelity: solver failed (" + sol.note + ")");
        r.value = std::clamp(-sol.primal_value, 0.0, 1.0);
        r.coefficient = r.value;
        r.free_element = extract_free_element(fe, fs, sol);
    } else {
        // root-fidelity block program with the free element as a variable:
        // max (Tr L + Tr L')/2  s.t.  [[rho, L], [L', sigma]] >= 0
        const int d = t.dim();
        ProgramBuilder b;
        auto fe = build_free_element(b, fs);
        std::vector<int> lre(size_t(d) * d), lim(size_t(d) * d);
        for (auto& v : lre) v = b.add_var(0.0);
        for (auto& v : lim) v = b.add_var(0.0);
        HermExpr blk(2 * d);
        CMatrix top(2 * d, 2 * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) top(i, j) = normalized(i, j);
        blk.add_constant(top);
        for (auto& [i, k] : fe.expr.terms()) {
            CMatrix lift(2 * d, 2 * d);
            for (int a = 0; a < d; ++a)
                for (int c = 0; c < d; ++c) lift(d + a, d + c) = k(a, c);
            blk.add_term(i, lift);
        }
        {
            const CMatrix& k = fe.expr.constant_part();
            CMatrix lift(2 * d, 2 * d);
            for (int a = 0; a < d; ++a)
                for (int c = 0; c < d; ++c) lift(d + a, d + c) = k(a, c);
            blk.add_constant(lift);
        }
        for (int a = 0; a < d; ++a)
            for (int c = 0; c < d; ++c) {
                CMatrix re(2 * d, 2 * d), im(2 * d, 2 * d);
                re(a, d + c) = 1;
                re(d + c, a) = 1;
                im(a, d + c) = cplx(0, 1);
                im(d + c, a) = cplx(0, -1);
                blk.add_term(lre[size_t(a) * d + c], re);
                blk.add_term(lim[size_t(a) * d + c], im);
            }
        b.add_lmi(blk);
        for (int a = 0; a < d; ++a) b.set_objective_coeff(lre[size_t(a) * d + a], -1.0);
        auto prog = b.take();
        auto sol = conic::solve(prog, conic::config_from_tolerances());
        r.diag = diag_of(sol);
        if (sol.status != conic::SolveStatus::optimal)
            throw numerical_error("fidelity: solver failed (" + sol.note + ")");
        double root = std::max(0.0, -sol.primal_value);
        r.value = std::clamp(root * root, 0.0, 1.0);
        r.coefficient = r.value;
        r.free_element = extract_free_element(fe, fs, sol);
    }

    // self-check against the spectral fidelity formula
    WitnessCheck c;
    c.checked = true;
    double direct = fidelity_psd(normalized, *r.free_element);
    c.value_mismatch = std::abs(direct - r.value);
    c.pass = c.value_mismatch <= 1e-6;
    r.certification = c;
    return r;
}

}  // namespace

MeasureResult robustness(const channels::Channel& e, const FreeSet& fs) {
    return rw_dispatch(make_target(e, fs), fs, Sense::robustness);
}
MeasureResult robustness(const qla::DensityOperator& rho, const FreeSet& fs) {
    return rw_dispatch(make_target(rho, fs), fs, Sense::robustness);
}
MeasureResult weight(const channels::Channel& e, const FreeSet& fs) {
    return rw_dispatch(make_target(e, fs), fs, Sense::weight);
}
MeasureResult weight(const qla::DensityOperator& rho, const FreeSet& fs) {
    return rw_dispatch(make_target(rho, fs), fs, Sense::weight);
}
MeasureResult free_fidelity(const channels::Channel& e, const FreeSet& fs) {
    return fidelity_measure(make_target(e, fs), fs);
}
MeasureResult free_fidelity(const qla::DensityOperator& rho, const FreeSet& fs) {
    return fidelity_measure(make_target(rho, fs), fs);
}

double sep_robustness_analytic(const channels::Channel& e) {
    if (e.d_in() > 3 || e.d_out() != 2)
        throw unsupported_error(
            "sep_robustness_analytic: closed form requires d_in <= 3 and d_out = 2");
    return std::max(1.0, qla::operator_norm(e.choi()));
}

namespace {

bool is_phased_pauli(const CMatrix& m, int n) {
    const int d = 1 << n;
    int hits = 0;
    for (int code = 0; code < (1 << (2 * n)); ++code) {
        CMatrix p = CMatrix::identity(1);
        int c = code;
        for (int q = 0; q < n; ++q) {
            switch (c % 4) {
                case 1: p = qla::kron(p, gates::pauli_x()); break;
                case 2: p = qla::kron(p, gates::pauli_y()); break;
                case 3: p = qla::kron(p, gates::pauli_z()); break;
                default: p = qla::kron(p, CMatrix::identity(2));
            }
            c /= 4;
        }
        double coef = std::abs(qla::inner(p, m)) / d;
        if (coef > 1e-9) {
            if (std::abs(coef - 1.0) > 1e-9) return false;
            ++hits;
        }
    }
    return hits == 1;
}

bool is_clifford(const CMatrix& u, int n) {
    for (int q = 0; q < n; ++q) {
        for (const CMatrix& g : {gates::pauli_x(), gates::pauli_z()}) {
            CMatrix p = gates::embed(g, n, q);
            if (!is_phased_pauli(u * p * u.adjoint(), n)) return false;
        }
    }
    return true;
}

}  // namespace

InjectionResult injection_reduction(const CMatrix& u, const std::string& cache_dir) {
    const int d = u.rows();
    int n = 0;
    while ((1 << n) < d) ++n;
    if ((1 << n) != d || n < 1 || n > 3)
        throw unsupported_error("injection_reduction: need a 1-3 qubit gate");
    if (u.rows() != u.cols()) throw dimension_error("injection_reduction: not square");
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) {
                if (std::abs(std::abs(u(i, i)) - 1.0) > 1e-10)
                    throw unsupported_error("injection_reduction: not unitary diagonal");
            } else if (std::abs(u(i, j)) > 1e-12) {
                throw unsupported_error("injection_reduction: gate is not diagonal");
            }
        }
    // third-level check: conjugated Pauli X generators must be Clifford
    for (int q = 0; q < n; ++q) {
        CMatrix x = gates::embed(gates::pauli_x(), n, q);
        if (!is_clifford(u * x * u.adjoint(), n))
            throw unsupported_error(
                "injection_reduction: gate is outside the third Clifford level");
    }

    auto plus = gates::plus_state(n);
    auto state_vec = u * plus;
    qla::DensityOperator omega(gates::projector(state_vec), {d});
    auto fs = theories::stab_states(n, cache_dir);
    InjectionResult out{robustness(omega, fs), weight(omega, fs), free_fidelity(omega, fs)};
    return out;
}

}  // namespace qrt::measures
