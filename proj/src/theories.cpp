#include "qrt/theories.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "qrt/channels.hpp"
#include "qrt/conic.hpp"
#include "qrt/gates.hpp"
#include "qrt/stab.hpp"

namespace qrt::gates {

// gate embedded on adjacent qubits starting at q0, identity elsewhere
CMatrix embed(const CMatrix& g, int n, int q0) {
    CMatrix m = CMatrix::identity(1);
    const int gate_qubits = g.rows() == 2 ? 1 : (g.rows() == 4 ? 2 : 3);
    for (int q = 0; q < n;) {
        if (q == q0) {
            m = qla::kron(m, g);
            q += gate_qubits;
        } else {
            m = qla::kron(m, CMatrix::identity(2));
            q += 1;
        }
    }
    return m;
}

}  // namespace qrt::gates

namespace qrt::theories {

using qla::CMatrix;
using qla::cplx;
using qla::Hermitian;

FreeSet replacement_channels(int d_in, int d_out) {
    if (d_in < 1 || d_out < 2) throw dimension_error("replacement_channels: bad dimensions");
    FreeSet fs;
    fs.kind = FreeSet::Kind::sdp_cone;
    fs.space = ObjectSpace::channel;
    fs.d_in = d_in;
    fs.d_out = d_out;
    fs.cone = FreeSet::Cone::replacement;
    fs.name = "replacement";
    return fs;
}

FreeSet ppt_channels(int d_in, int d_out) {
    if (d_in < 2 || d_out < 2) throw dimension_error("ppt_channels: bad dimensions");
    FreeSet fs;
    fs.kind = FreeSet::Kind::sdp_cone;
    fs.space = ObjectSpace::channel;
    fs.d_in = d_in;
    fs.d_out = d_out;
    fs.cone = FreeSet::Cone::ppt;
    fs.name = "ppt";
    return fs;
}

FreeSet csp_channels(int n_in, int n_out, const std::string& cache_dir) {
    if (n_in < 1 || n_out < 1 || n_in + n_out > 4)
        throw dimension_error("csp_channels: qubit budget exceeded (n_in + n_out <= 4)");
    auto poly = stab::enumerate(n_in + n_out, cache_dir);
    FreeSet fs;
    fs.kind = FreeSet::Kind::vertex_polytope;
    fs.space = ObjectSpace::channel;
    fs.d_in = 1 << n_in;
    fs.d_out = 1 << n_out;
    fs.tp_on_mixture = true;
    fs.name = "csp";
    fs.vertices.reserve(poly.vertices.size());
    for (const auto& v : poly.vertices) fs.vertices.push_back(v.projector());
    return fs;
}

FreeSet stab_states(int n, const std::string& cache_dir) {
    auto poly = stab::enumerate(n, cache_dir);
    FreeSet fs;
    fs.kind = FreeSet::Kind::vertex_polytope;
    fs.space = ObjectSpace::state;
    fs.d_in = 1 << n;
    fs.d_out = 1;
    fs.name = "stab";
    fs.vertices.reserve(poly.vertices.size());
    for (const auto& v : poly.vertices) fs.vertices.push_back(v.projector());
    return fs;
}

FreeSet diag_states(int levels) {
    if (levels < 1) throw dimension_error("diag_states: empty basis");
    std::vector<Hermitian> projectors;
    for (int i = 0; i < levels; ++i)
        projectors.push_back(gates::projector(gates::ket(i, levels)));
    auto fs = vertex_state_polytope(std::move(projectors), "coherence");
    return fs;
}

FreeSet vertex_state_polytope(std::vector<Hermitian> projectors, std::string name) {
    if (projectors.empty()) throw dimension_error("vertex_state_polytope: no vertices");
    FreeSet fs;
    fs.kind = FreeSet::Kind::vertex_polytope;
    fs.space = ObjectSpace::state;
    fs.d_in = projectors[0].dim();
    fs.d_out = 1;
    fs.name = std::move(name);
    for (const auto& v : projectors) {
        if (v.dim() != fs.d_in) throw dimension_error("vertex_state_polytope: mixed dimensions");
        if (std::abs(v.real_trace() - 1.0) > 1e-9)
            throw numerical_error("vertex_state_polytope: vertex is not unit trace");
        if (!qla::psd_check(v)) throw numerical_error("vertex_state_polytope: vertex not PSD");
    }
    fs.vertices = std::move(projectors);
    return fs;
}

namespace {

bool member_replacement(const FreeSet& fs, const Hermitian& j, double tolerance) {
    // J = I (x) sigma with sigma a state
    Hermitian sigma = qla::partial_trace(j, {fs.d_in, fs.d_out}, {1});
    CMatrix sigma_scaled = cplx(1.0 / fs.d_in) * sigma.mat();
    CMatrix rebuilt = qla::kron(CMatrix::identity(fs.d_in), sigma_scaled);
    if ((rebuilt - j.mat()).frobenius_norm() > tolerance * std::max(1.0, j.mat().frobenius_norm()))
        return false;
    Hermitian s(sigma_scaled, 1e-9);
    return qla::psd_check(s, tolerance) && std::abs(s.real_trace() - 1.0) <= tolerance * fs.d_in;
}

bool member_ppt(const FreeSet& fs, const Hermitian& j, double tolerance) {
    if (!qla::psd_check(j, tolerance)) return false;
    Hermitian marg = qla::partial_trace(j, {fs.d_in, fs.d_out}, {0});
    if ((marg.mat() - CMatrix::identity(fs.d_in)).frobenius_norm() > tolerance * fs.d_in)
        return false;
    Hermitian pt = qla::partial_transpose(j, {fs.d_in, fs.d_out}, {1});
    return qla::psd_check(pt, tolerance);
}

bool member_polytope(const FreeSet& fs, const Hermitian& obj, double /*tolerance*/) {
    // feasibility: weights w >= 0, sum w = 1, sum w V = normalized object
    const double scale = fs.space == ObjectSpace::channel ? fs.d_in : 1.0;
    CMatrix target = cplx(1.0 / scale) * obj.mat();
    conic::ProgramBuilder b;
    conic::HermExpr expr(fs.dim());
    conic::LinExpr total;
    for (const auto& v : fs.vertices) {
        int w = b.add_var(0.0, true);
        expr.add_term(w, v.mat());
        total.coeffs[w] = 1.0;
    }
    expr.add_constant(cplx(-1.0) * target);
    b.add_hermitian_equality(expr);
    b.add_equality(total, 1.0);
    conic::ConicProgram prog;
    try {
        prog = b.take();
    } catch (const numerical_error&) {
        // an inconsistent equality row proves the target lies outside the
        // span of the vertices
        return false;
    }
    auto sol = conic::solve(prog, conic::config_from_tolerances());
    return sol.status == conic::SolveStatus::optimal;
}

}  // namespace

bool member(const FreeSet& fs, const Hermitian& obj, double tolerance) {
    if (obj.dim() != fs.dim()) throw dimension_error("member: dimension mismatch");
    if (fs.space == ObjectSpace::channel) {
        // object must be a valid channel Choi in the first place
        Hermitian marg = qla::partial_trace(obj, {fs.d_in, fs.d_out}, {0});
        if ((marg.mat() - CMatrix::identity(fs.d_in)).frobenius_norm() > 1e-6 * fs.d_in)
            return false;
    }
    switch (fs.kind) {
        case FreeSet::Kind::sdp_cone:
            return fs.cone == FreeSet::Cone::replacement ? member_replacement(fs, obj, tolerance)
                                                         : member_ppt(fs, obj, tolerance);
        case FreeSet::Kind::vertex_polytope:
        default:
            return member_polytope(fs, obj, tolerance);
    }
}

namespace {

Hermitian sample_ppt_choi(int d_in, int d_out, rng::Engine& eng) {
    Hermitian j = rng::random_channel_choi(eng, d_in, d_out, d_in * d_out);
    CMatrix dep = cplx(1.0 / d_out) * CMatrix::identity(d_in * d_out);
    auto pt_mineig = [&](double t) {
        CMatrix mixed = cplx(1.0 - t) * j.mat() + cplx(t) * dep;
        Hermitian pt = qla::partial_transpose(Hermitian(mixed, 1e-9), {d_in, d_out}, {1});
        return qla::min_eigenvalue(pt);
    };
    double lo = 0.0, hi = 1.0;
    if (pt_mineig(0.0) >= 1e-10) {
        hi = 0.0;
    } else {
        for (int iter = 0; iter < 40 && hi - lo > 1e-6; ++iter) {
            double mid = 0.5 * (lo + hi);
            (pt_mineig(mid) >= 0 ? hi : lo) = mid;
        }
    }
    double t = hi + 0.05 * (1.0 - hi);  // step inside the PPT region
    CMatrix mixed = cplx(1.0 - t) * j.mat() + cplx(t) * dep;
    return Hermitian(mixed, 1e-9);
}

Hermitian sample_clifford_mixture_choi(int n, rng::Engine& eng) {
    const int d = 1 << n;
    std::uniform_int_distribution<int> pick_kind(0, 2);
    std::uniform_int_distribution<int> pick_q(0, n - 1);
    auto random_clifford = [&]() {
        CMatrix u = CMatrix::identity(d);
        for (int step = 0; step < 12; ++step) {
            int kind = pick_kind(eng);
            if (kind == 2 && n >= 2) {
                int q = std::uniform_int_distribution<int>(0, n - 2)(eng);
                u = gates::embed(gates::cnot(), n, q) * u;
            } else if (kind == 1) {
                u = gates::embed(gates::phase_s(), n, pick_q(eng)) * u;
            } else {
                u = gates::embed(gates::hadamard(), n, pick_q(eng)) * u;
            }
        }
        return u;
    };
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    CMatrix j(d * d, d * d);
    double total = 0;
    const int parts = 4;
    for (int k = 0; k < parts; ++k) {
        double w = unif(eng) + 1e-3;
        j += cplx(w) * channels::make_unitary(random_clifford()).choi().mat();
        total += w;
    }
    // completely dephasing component keeps samples interior
    double w = unif(eng) + 1e-3;
    // Choi of the completely dephasing channel: sum_i |ii><ii|
    CMatrix deph(d * d, d * d);
    for (int i = 0; i < d; ++i) deph(i * d + i, i * d + i) = 1.0;
    j += cplx(w) * deph;
    total += w;
    return Hermitian(cplx(1.0 / total) * j, 1e-9);
}

}  // namespace

std::optional<Hermitian> sample_free(const FreeSet& fs, rng::Engine& eng) {
    if (fs.kind == FreeSet::Kind::sdp_cone) {
        if (fs.cone == FreeSet::Cone::replacement) {
            auto sigma = rng::random_density(eng, fs.d_out);
            return Hermitian(qla::kron(CMatrix::identity(fs.d_in), sigma.op().mat()), 1e-9);
        }
        return sample_ppt_choi(fs.d_in, fs.d_out, eng);
    }
    if (fs.space == ObjectSpace::state) {
        // random mixture of vertices with exponential weights
        std::exponential_distribution<double> ex(1.0);
        CMatrix mixmat(fs.dim(), fs.dim());
        double total = 0;
        const int parts = std::min<size_t>(fs.vertices.size(), 8);
        std::uniform_int_distribution<size_t> pick(0, fs.vertices.size() - 1);
        for (int k = 0; k < parts; ++k) {
            double w = ex(eng) + 1e-6;
            mixmat += cplx(w) * fs.vertices[pick(eng)].mat();
            total += w;
        }
        return Hermitian(cplx(1.0 / total) * mixmat, 1e-9);
    }
    // stabilizer-preserving channels: random Clifford mixtures (square case)
    if (fs.d_in != fs.d_out) return std::nullopt;
    int n = 0;
    while ((1 << n) < fs.d_in) ++n;
    return sample_clifford_mixture_choi(n, eng);
}

}  // namespace qrt::theories
