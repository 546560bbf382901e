#include "qrt/channels.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "qrt/conic.hpp"
#include "qrt/gates.hpp"
#include "qrt/random.hpp"

namespace qrt::gates {

CMatrix pauli_x() { return CMatrix(2, 2, {0, 1, 1, 0}); }
CMatrix pauli_y() { return CMatrix(2, 2, {0, cplx(0, -1), cplx(0, 1), 0}); }
CMatrix pauli_z() { return CMatrix(2, 2, {1, 0, 0, -1}); }

CMatrix hadamard() {
    const double s = 1.0 / std::sqrt(2.0);
    return CMatrix(2, 2, {s, s, s, -s});
}

CMatrix phase_s() { return CMatrix(2, 2, {1, 0, 0, cplx(0, 1)}); }

CMatrix phase_t() {
    return CMatrix(2, 2, {1, 0, 0, std::polar(1.0, M_PI / 4)});
}

CMatrix cnot() {
    CMatrix m(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
    return m;
}

CMatrix cz() {
    CMatrix m(4, 4);
    m(0, 0) = m(1, 1) = m(2, 2) = 1;
    m(3, 3) = -1;
    return m;
}

CMatrix ccz() {
    CMatrix m(8, 8);
    for (int i = 0; i < 8; ++i) m(i, i) = (i == 7 ? -1 : 1);
    return m;
}

std::vector<cplx> ket(int index, int dim) {
    std::vector<cplx> v(dim, 0.0);
    v[index] = 1.0;
    return v;
}

std::vector<cplx> plus_state(int qubits) {
    const int dim = 1 << qubits;
    return std::vector<cplx>(dim, 1.0 / std::sqrt(double(dim)));
}

qla::Hermitian projector(const std::vector<cplx>& v) {
    const int d = int(v.size());
    CMatrix p(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) p(i, j) = v[i] * std::conj(v[j]);
    return qla::Hermitian(p, 1e-9);
}

}  // namespace qrt::gates

namespace qrt::channels {

namespace {

// unnormalized maximally entangled operator sum_ij |ii><jj| on d x d
CMatrix phi_plus(int d) {
    CMatrix m(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i * d + i, j * d + j) = 1.0;
    return m;
}

void check_channel_invariants(int d_in, int d_out, const Hermitian& choi, bool subchannel) {
    if (choi.dim() != d_in * d_out) throw dimension_error("Channel: Choi dimension mismatch");
    const double scale = std::max(1.0, choi.mat().frobenius_norm());
    if (qla::min_eigenvalue(choi) < -tol().psd * scale)
        throw numerical_error("Channel: Choi matrix is not PSD");
    Hermitian marginal = qla::partial_trace(choi, {d_in, d_out}, {0});
    CMatrix diff = marginal.mat() - CMatrix::identity(d_in);
    if (subchannel) {
        // trace non-increasing: I - Tr_out(choi) >= 0
        if (qla::min_eigenvalue(Hermitian(cplx(-1.0) * diff, 1e-9)) < -1e-8)
            throw numerical_error("SubChannel: map increases trace");
    } else {
        if (diff.frobenius_norm() > tol().trace_preserving * d_in)
            throw numerical_error("Channel: map is not trace preserving");
    }
}

}  // namespace

Channel::Channel(int d_in, int d_out, Hermitian choi)
    : d_in_(d_in), d_out_(d_out), choi_(std::move(choi)) {
    check_channel_invariants(d_in_, d_out_, choi_, false);
}

DensityOperator Channel::normalized_choi() const {
    return DensityOperator((1.0 / d_in_) * choi_, {d_in_, d_out_});
}

SubChannel::SubChannel(int d_in, int d_out, Hermitian choi)
    : d_in_(d_in), d_out_(d_out), choi_(std::move(choi)) {
    check_channel_invariants(d_in_, d_out_, choi_, true);
}

Channel identity_channel(int d) { return Channel(d, d, Hermitian(phi_plus(d), 1e-9)); }

Channel make_unitary(const CMatrix& u) {
    if (u.rows() != u.cols()) throw dimension_error("make_unitary: not square");
    const int d = u.rows();
    if ((u * u.adjoint() - CMatrix::identity(d)).frobenius_norm() > tol().unitary * d)
        throw numerical_error("make_unitary: input is not unitary");
    CMatrix w = qla::kron(CMatrix::identity(d), u);
    return Channel(d, d, Hermitian(w * phi_plus(d) * w.adjoint(), 1e-9));
}

Channel from_kraus(int d_in, int d_out, const std::vector<CMatrix>& kraus) {
    CMatrix j(d_in * d_out, d_in * d_out);
    for (const auto& k : kraus) {
        if (k.rows() != d_out || k.cols() != d_in)
            throw dimension_error("from_kraus: operator shape mismatch");
        CMatrix w = qla::kron(CMatrix::identity(d_in), k);
        j += w * phi_plus(d_in) * w.adjoint();
    }
    return Channel(d_in, d_out, Hermitian(j, 1e-9));
}

Channel make_depolarizing(double p, int d) {
    if (p < 0 || p > 1) throw dimension_error("make_depolarizing: p outside [0,1]");
    CMatrix j = cplx(1.0 - p) * phi_plus(d) + cplx(p / d) * CMatrix::identity(d * d);
    return Channel(d, d, Hermitian(j, 1e-9));
}

Channel make_dephasing(double p) {
    if (p < 0 || p > 1) throw dimension_error("make_dephasing: p outside [0,1]");
    return from_kraus(2, 2,
                      {cplx(std::sqrt(1.0 - p)) * CMatrix::identity(2),
                       cplx(std::sqrt(p)) * gates::pauli_z()});
}

Channel make_amplitude_damping(double gamma) {
    if (gamma < 0 || gamma > 1) throw dimension_error("make_amplitude_damping: gamma outside [0,1]");
    CMatrix k0(2, 2), k1(2, 2);
    k0(0, 0) = 1;
    k0(1, 1) = std::sqrt(1.0 - gamma);
    k1(0, 1) = std::sqrt(gamma);
    return from_kraus(2, 2, {k0, k1});
}

Channel make_dephrasure(double p, double q) {
    if (p < 0 || p > 1 || q < 0 || q > 1)
        throw dimension_error("make_dephrasure: parameters outside [0,1]");
    // qubit -> qutrit: (1-q)[(1-p) rho + p Z rho Z] + q Tr(rho) |2><2|
    CMatrix embed_i(3, 2), embed_z(3, 2), e0(3, 2), e1(3, 2);
    embed_i(0, 0) = 1;
    embed_i(1, 1) = 1;
    embed_z(0, 0) = 1;
    embed_z(1, 1) = -1;
    e0(2, 0) = 1;
    e1(2, 1) = 1;
    return from_kraus(2, 3,
                      {cplx(std::sqrt((1 - q) * (1 - p))) * embed_i,
                       cplx(std::sqrt((1 - q) * p)) * embed_z, cplx(std::sqrt(q)) * e0,
                       cplx(std::sqrt(q)) * e1});
}

Channel make_replacement(const DensityOperator& sigma, int d_in) {
    CMatrix j = qla::kron(CMatrix::identity(d_in), sigma.op().mat());
    return Channel(d_in, sigma.dim(), Hermitian(j, 1e-9));
}

Channel tensor(const Channel& e, const Channel& f) {
    CMatrix j = qla::kron(e.choi().mat(), f.choi().mat());
    // (A1 B1 A2 B2) -> (A1 A2 B1 B2)
    std::vector<int> dims = {e.d_in(), e.d_out(), f.d_in(), f.d_out()};
    CMatrix perm = qla::permute_systems(j, dims, {0, 2, 1, 3});
    return Channel(e.d_in() * f.d_in(), e.d_out() * f.d_out(), Hermitian(perm, 1e-9));
}

Channel compose(const Channel& e, const Channel& f) {
    if (f.d_out() != e.d_in()) throw dimension_error("compose: intermediate dimension mismatch");
    const int da = f.d_in(), dm = f.d_out(), db = e.d_out();
    // link product: Tr_M[(J_f^{T_M} (x) I_B)(I_A (x) J_e)] on registers (A, M, B)
    Hermitian jf_t = qla::partial_transpose(f.choi(), {da, dm}, {1});
    CMatrix left = qla::kron(jf_t.mat(), CMatrix::identity(db));
    CMatrix right = qla::kron(CMatrix::identity(da), e.choi().mat());
    CMatrix j = qla::partial_trace(left * right, {da, dm, db}, {0, 2});
    return Channel(da, db, Hermitian(j, 1e-8));
}

Channel mix(const std::vector<std::pair<double, Channel>>& parts) {
    if (parts.empty()) throw dimension_error("mix: empty mixture");
    double total = 0;
    for (auto& [w, ch] : parts) {
        (void)ch;
        if (w < -1e-12) throw dimension_error("mix: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw dimension_error("mix: weights must sum to 1");
    CMatrix j(parts[0].second.choi().dim(), parts[0].second.choi().dim());
    for (auto& [w, ch] : parts) {
        if (ch.d_in() != parts[0].second.d_in() || ch.d_out() != parts[0].second.d_out())
            throw dimension_error("mix: dimension mismatch");
        j += cplx(w) * ch.choi().mat();
    }
    return Channel(parts[0].second.d_in(), parts[0].second.d_out(), Hermitian(j, 1e-9));
}

Hermitian apply(const Channel& e, const Hermitian& rho) {
    if (rho.dim() != e.d_in()) throw dimension_error("apply: state dimension mismatch");
    CMatrix w = qla::kron(rho.mat().transpose(), CMatrix::identity(e.d_out()));
    CMatrix out = qla::partial_trace(e.choi().mat() * w, {e.d_in(), e.d_out()}, {1});
    return Hermitian(out, 1e-8);
}

std::vector<CMatrix> kraus_operators(const Channel& e) {
    auto eig = qla::eig_hermitian(e.choi());
    std::vector<CMatrix> ks;
    const int din = e.d_in(), dout = e.d_out();
    for (int k = 0; k < e.choi().dim(); ++k) {
        if (eig.values[k] < 1e-12) continue;
        const double s = std::sqrt(eig.values[k]);
        CMatrix op(dout, din);
        for (int a = 0; a < din; ++a)
            for (int b = 0; b < dout; ++b) op(b, a) = s * eig.vectors(a * dout + b, k);
        ks.push_back(std::move(op));
    }
    return ks;
}

double choi_fidelity(const Channel& e, const Channel& f) {
    if (e.d_in() != f.d_in() || e.d_out() != f.d_out())
        throw dimension_error("choi_fidelity: dimension mismatch");
    return qla::state_fidelity(e.normalized_choi(), f.normalized_choi());
}

double diamond_distance_half(const Channel& e, const Channel& f) {
    if (e.d_in() != f.d_in() || e.d_out() != f.d_out())
        throw dimension_error("diamond_distance_half: dimension mismatch");
    const int din = e.d_in(), dout = e.d_out();
    CMatrix delta = e.choi().mat() - f.choi().mat();

    conic::ProgramBuilder b;
    auto wv = b.add_hermitian_var(din * dout);
    auto rv = b.add_hermitian_var(din);
    auto we = wv.expr();
    auto re = rv.expr();
    b.add_lmi(we);  // W >= 0
    // rho (x) I - W >= 0
    conic::HermExpr gap = re.map(din * dout, [&](const CMatrix& m) {
        return qla::kron(m, CMatrix::identity(dout));
    });
    gap += we.scaled(-1.0);
    b.add_lmi(gap);
    b.add_equality(conic::trace_of(re), 1.0);
    auto obj = conic::inner_with(delta, we);
    for (auto& [i, v] : obj.coeffs) b.set_objective_coeff(i, -v);  // maximize
    auto prog = b.take();
    auto sol = conic::solve(prog, conic::config_from_tolerances());
    if (sol.status != conic::SolveStatus::optimal)
        throw numerical_error(std::string("diamond_distance_half: solver status ") +
                              conic::to_string(sol.status));
    return std::max(0.0, -sol.primal_value);
}

double worst_case_fidelity_ub(const Channel& n, const Channel& u, int restarts,
                              std::uint64_t seed) {
    if (n.d_in() != u.d_in() || n.d_out() != u.d_out())
        throw dimension_error("worst_case_fidelity_ub: dimension mismatch");
    auto eig = qla::eig_hermitian(u.choi());
    const int cd = u.choi().dim();
    if (cd >= 2 && eig.values[cd - 2] > 1e-9 * eig.values[cd - 1])
        throw dimension_error("worst_case_fidelity_ub: target Choi is not rank one");
    // target vector v with J_U = |v><v|
    std::vector<cplx> v(cd);
    const double s = std::sqrt(std::max(0.0, eig.values[cd - 1]));
    for (int i = 0; i < cd; ++i) v[i] = s * eig.vectors(i, cd - 1);

    const int din = n.d_in(), dout = n.d_out();
    CMatrix vt(dout, din);  // vt(b,a) = v(a*dout+b)
    for (int a = 0; a < din; ++a)
        for (int b2 = 0; b2 < dout; ++b2) vt(b2, a) = v[size_t(a) * dout + b2];
    auto kraus = kraus_operators(n);
    std::vector<CMatrix> bmats;  // B_k = Vt' K_k acting on the channel input
    for (const auto& k : kraus) bmats.push_back(vt.adjoint() * k);

    const int dim = din * din;  // pure input on reference (x) input
    auto lift = [&](const CMatrix& bk, const std::vector<cplx>& psi) {
        // (1 (x) B_k) psi
        std::vector<cplx> out(dim, 0.0);
        for (int r = 0; r < din; ++r)
            for (int a = 0; a < din; ++a) {
                cplx acc = 0;
                for (int a2 = 0; a2 < din; ++a2) acc += bk(a, a2) * psi[size_t(r) * din + a2];
                out[size_t(r) * din + a] = acc;
            }
        return out;
    };
    auto value_and_grad = [&](const std::vector<cplx>& psi, std::vector<cplx>& grad) {
        double f = 0;
        grad.assign(dim, 0.0);
        for (const auto& bk : bmats) {
            auto bpsi = lift(bk, psi);
            cplx ck = 0;
            for (int i = 0; i < dim; ++i) ck += std::conj(psi[i]) * bpsi[i];
            f += std::norm(ck);
            CMatrix bkadj = bk.adjoint();
            auto badjpsi = lift(bkadj, psi);
            for (int i = 0; i < dim; ++i)
                grad[i] += std::conj(ck) * bpsi[i] + ck * badjpsi[i];
        }
        return f;
    };

    rng::Engine eng(seed);
    double best = 1.0;
    for (int r = 0; r < restarts; ++r) {
        auto psi = rng::random_pure_state(eng, dim);
        std::vector<cplx> grad;
        double f = value_and_grad(psi, grad);
        best = std::min(best, f);
        double step = 0.5;
        for (int iter = 0; iter < 400; ++iter) {
            // project the gradient onto the tangent space of the sphere
            cplx overlap = 0;
            for (int i = 0; i < dim; ++i) overlap += std::conj(psi[i]) * grad[i];
            std::vector<cplx> tangent(dim);
            double tnorm2 = 0;
            for (int i = 0; i < dim; ++i) {
                tangent[i] = grad[i] - overlap * psi[i];
                tnorm2 += std::norm(tangent[i]);
            }
            if (tnorm2 < 1e-18) break;
            bool moved = false;
            for (int bt = 0; bt < 30; ++bt) {
                std::vector<cplx> cand(dim);
                double nrm2 = 0;
                for (int i = 0; i < dim; ++i) {
                    cand[i] = psi[i] - step * tangent[i];
                    nrm2 += std::norm(cand[i]);
                }
                const double inv = 1.0 / std::sqrt(nrm2);
                for (auto& cpsi : cand) cpsi *= inv;
                std::vector<cplx> g2;
                double f2 = value_and_grad(cand, g2);
                best = std::min(best, f2);
                if (f2 < f - 1e-14) {
                    psi = std::move(cand);
                    grad = std::move(g2);
                    f = f2;
                    moved = true;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
    }
    return std::clamp(best, 0.0, 1.0);
}

void save_text(const Channel& e, std::ostream& os) {
    os << e.d_in() << " " << e.d_out() << "\n";
    os << std::setprecision(17);
    const CMatrix& j = e.choi().mat();
    for (int r = 0; r < j.rows(); ++r) {
        for (int c = 0; c < j.cols(); ++c) {
            if (c) os << " ";
            os << j(r, c).real() << " " << j(r, c).imag();
        }
        os << "\n";
    }
}

Channel load_text(std::istream& is) {
    int din = 0, dout = 0;
    if (!(is >> din >> dout) || din <= 0 || dout <= 0)
        throw dimension_error("channel load: bad header");
    const int d = din * dout;
    CMatrix j(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            double re, im;
            if (!(is >> re >> im)) throw dimension_error("channel load: truncated entries");
            j(r, c) = cplx(re, im);
        }
    return Channel(din, dout, Hermitian(j, 1e-8));
}

}  // namespace qrt::channels
