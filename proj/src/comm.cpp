#include "qrt/comm.hpp"

#include <algorithm>
#include <cmath>

namespace qrt::comm {

using qla::CMatrix;
using qla::cplx;
using qla::Hermitian;

namespace {

// orthonormal Hermitian basis with the normalized identity at index 0 and
// traceless elements after it
std::vector<CMatrix> basis_with_identity(int d) {
    std::vector<CMatrix> out;
    out.reserve(size_t(d) * d);
    out.push_back(cplx(1.0 / std::sqrt(double(d))) * CMatrix::identity(d));
    for (int m = 1; m < d; ++m) {
        // diag(1,...,1,-m,0,...)/sqrt(m(m+1))
        CMatrix b(d, d);
        const double norm = 1.0 / std::sqrt(double(m) * (m + 1));
        for (int i = 0; i < m; ++i) b(i, i) = norm;
        b(m, m) = -double(m) * norm;
        out.push_back(std::move(b));
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            CMatrix re(d, d), im(d, d);
            re(i, j) = inv_sqrt2;
            re(j, i) = inv_sqrt2;
            im(i, j) = cplx(0, inv_sqrt2);
            im(j, i) = cplx(0, -inv_sqrt2);
            out.push_back(std::move(re));
            out.push_back(std::move(im));
        }
    return out;
}

}  // namespace

NsFidelityResult ns_achievable_fidelity_info(const channels::Channel& e, int d_target) {
    if (d_target < 2) throw dimension_error("ns_achievable_fidelity: target dimension < 2");
    const int k = d_target, din = e.d_in(), dout = e.d_out();
    const long total = long(k) * din * dout * k;
    if (total > 64)
        throw dimension_error("ns_achievable_fidelity: supermap register dimension exceeds 64");
    const std::vector<int> dims = {k, din, dout, k};  // (A, A', B, B')

    // objective: F = (1/k^2) <Phi_{AB'}, Tr_{A'B}[ P^{T_{A'B}} (1 (x) J (x) 1) ]>
    //              = < C, P >  with  C = (1/k^2) (X Phi)^{T_{A'B}}
    CMatrix x = qla::kron(CMatrix::identity(k), qla::kron(e.choi().mat(), CMatrix::identity(k)));
    CMatrix phi_ab(k * k, k * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) phi_ab(i * k + i, j * k + j) = 1.0;
    // embed Phi on (A, B'): build on (A, B', A', B) then reorder
    CMatrix phi_embedded = qla::permute_systems(
        qla::kron(phi_ab, CMatrix::identity(din * dout)), {k, k, din, dout}, {0, 2, 3, 1});
    Hermitian c_obj(cplx(1.0 / (k * k)) *
                        qla::partial_transpose(Hermitian(x * phi_embedded, 1e-9), dims, {1, 2})
                            .mat(),
                    1e-9);

    // independent equality components in the orthonormal product basis:
    //   (a, 0, b, 0)  trace preservation, rhs nonzero only at (0,0,0,0)
    //   (*, *, tb, 0) output marginal independent of the B input
    //   (ta, 0, *, *) output marginal independent of the A input
    auto ba = basis_with_identity(k);
    auto bap = basis_with_identity(din);
    auto bb = basis_with_identity(dout);
    auto bbp = basis_with_identity(k);

    struct Row {
        int a, ap, b, bp;
        double rhs;
    };
    std::vector<Row> rows;
    auto push_unique = [&](int a, int ap, int b, int bp, double rhs) {
        for (const auto& r : rows)
            if (r.a == a && r.ap == ap && r.b == b && r.bp == bp) return;
        rows.push_back({a, ap, b, bp, rhs});
    };
    const double rhs0 = double(k) * dout / std::sqrt(double(total));
    for (int a = 0; a < k * k; ++a)
        for (int b = 0; b < dout * dout; ++b)
            push_unique(a, 0, b, 0, (a == 0 && b == 0) ? rhs0 : 0.0);
    for (int a = 0; a < k * k; ++a)
        for (int ap = 0; ap < din * din; ++ap)
            for (int b = 1; b < dout * dout; ++b) push_unique(a, ap, b, 0, 0.0);
    for (int a = 1; a < k * k; ++a)
        for (int b = 0; b < dout * dout; ++b)
            for (int bp = 0; bp < k * k; ++bp) push_unique(a, 0, b, bp, 0.0);

    // dual orientation: min sum_r rhs_r y_r  s.t.  sum_r y_r A_r - C >= 0;
    // the LMI multiplier is the optimal supermap Choi P itself
    conic::ProgramBuilder builder;
    conic::HermExpr lmi(static_cast<int>(total));
    lmi.add_constant(cplx(-1.0) * c_obj.mat());
    for (const auto& r : rows) {
        int y = builder.add_var(r.rhs);
        lmi.add_term(y, qla::kron(ba[r.a], qla::kron(bap[r.ap], qla::kron(bb[r.b], bbp[r.bp]))));
    }
    builder.add_lmi(lmi);
    auto prog = builder.take(false);  // rows are orthonormal by construction

    auto sol = conic::solve(prog, conic::config_from_tolerances());
    NsFidelityResult out;
    out.status = sol.status;
    out.gap = sol.gap;
    out.iterations = sol.iterations;
    if (sol.status != conic::SolveStatus::optimal)
        throw numerical_error("ns_achievable_fidelity: solver failed (" + sol.note + ")");
    out.value = std::clamp(sol.primal_value, 0.0, 1.0);
    return out;
}

double ns_achievable_fidelity(const channels::Channel& e, int d_target) {
    return ns_achievable_fidelity_info(e, d_target).value;
}

namespace {

double entropy_nats(const Hermitian& rho) {
    auto eig = qla::eig_hermitian(rho);
    double s = 0;
    for (double v : eig.values)
        if (v > 1e-18) s -= v * std::log(v);
    return s;
}

Hermitian log_floor(const Hermitian& rho) {
    return qla::apply_spectral(rho, [](double v) { return std::log(std::max(v, 1e-18)); });
}

}  // namespace

MutualInfoResult channel_mutual_information(const channels::Channel& e, int max_iterations,
                                            std::optional<Hermitian> initial) {
    if (e.d_in() > 8 || e.d_out() > 8)
        throw dimension_error("channel_mutual_information: dimensions above 8");
    const int din = e.d_in();
    auto kraus = channels::kraus_operators(e);
    const int env = int(kraus.size());

    auto apply_channel = [&](const Hermitian& rho) {
        CMatrix out(e.d_out(), e.d_out());
        for (const auto& kop : kraus) out += kop * rho.mat() * kop.adjoint();
        return Hermitian::symmetrized(out);
    };
    auto apply_complementary = [&](const Hermitian& rho) {
        CMatrix out(env, env);
        for (int a = 0; a < env; ++a)
            for (int b = 0; b < env; ++b)
                out(a, b) = (kraus[a] * rho.mat() * kraus[b].adjoint()).trace();
        return Hermitian::symmetrized(out);
    };
    auto adjoint_channel = [&](const Hermitian& h) {
        CMatrix out(din, din);
        for (const auto& kop : kraus) out += kop.adjoint() * h.mat() * kop;
        return Hermitian::symmetrized(out);
    };
    auto adjoint_complementary = [&](const Hermitian& h) {
        CMatrix out(din, din);
        for (int a = 0; a < env; ++a)
            for (int b = 0; b < env; ++b) out += h(a, b) * (kraus[a].adjoint() * kraus[b]);
        return Hermitian::symmetrized(out);
    };

    auto objective = [&](const Hermitian& rho) {
        return entropy_nats(rho) + entropy_nats(apply_channel(rho)) -
               entropy_nats(apply_complementary(rho));
    };
    // fixed-point field G0 = -E'(ln E(rho)) + Ec'(ln Ec(rho)); the optimum is
    // the fixed point of rho -> exp(G0)/Z, and the full gradient -ln(rho) + G0
    // supplies the concavity gap certificate
    auto fp_field = [&](const Hermitian& rho) {
        Hermitian g2 = adjoint_channel(log_floor(apply_channel(rho)));
        Hermitian g3 = adjoint_complementary(log_floor(apply_complementary(rho)));
        return Hermitian::symmetrized(cplx(-1.0) * g2.mat() + g3.mat());
    };
    auto concavity_gap = [&](const Hermitian& rho) {
        Hermitian g =
            Hermitian::symmetrized(fp_field(rho).mat() - log_floor(rho).mat());
        return qla::eig_hermitian(g).values.back() - qla::inner(g.mat(), rho.mat()).real();
    };

    Hermitian rho = initial ? *initial
                            : Hermitian(cplx(1.0 / din) * CMatrix::identity(din), 1e-9);
    double f = objective(rho);
    double gap = 0;
    int iter = 0;
    const double gap_tol_nats = 1e-10;

    for (; iter < max_iterations; ++iter) {
        gap = concavity_gap(rho);
        if (gap <= gap_tol_nats) break;
        Hermitian g0 = fp_field(rho);
        Hermitian logr = log_floor(rho);
        double step = 1.0;  // full step is the fixed-point map; halve on decrease
        bool moved = false;
        for (int bt = 0; bt < 40; ++bt) {
            Hermitian cand = qla::apply_spectral(
                Hermitian::symmetrized(cplx(1.0 - step) * logr.mat() + cplx(step) * g0.mat()),
                [](double v) { return std::exp(v); });
            double tr = cand.real_trace();
            Hermitian cand_n(cplx(1.0 / tr) * cand.mat(), 1e-8);
            double f2 = objective(cand_n);
            if (f2 >= f) {
                double progress = f2 - f;
                rho = cand_n;
                f = f2;
                moved = progress > 1e-15 || step < 1.0;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;  // iterate stall
    }
    gap = concavity_gap(rho);
    const bool certified = gap <= 1e-8;

    MutualInfoResult out;
    out.value_bits = objective(rho) / std::log(2.0);
    out.optimizer = rho;
    out.certified = certified;
    out.gap_bits = std::max(0.0, gap) / std::log(2.0);
    out.iterations = iter;
    return out;
}

}  // namespace qrt::comm
