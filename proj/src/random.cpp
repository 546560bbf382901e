#include "qrt/random.hpp"

#include <cmath>

namespace qrt::rng {

using qla::CMatrix;
using qla::cplx;
using qla::Hermitian;

CMatrix ginibre(Engine& eng, int rows, int cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = cplx(n(eng), n(eng)) / std::sqrt(2.0);
    return g;
}

std::vector<cplx> random_pure_state(Engine& eng, int dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<cplx> v(dim);
    double norm2 = 0;
    for (auto& a : v) {
        a = cplx(n(eng), n(eng));
        norm2 += std::norm(a);
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& a : v) a *= inv;
    return v;
}

CMatrix random_unitary(Engine& eng, int dim) {
    // Gram-Schmidt on a Ginibre matrix with the R-diagonal phase fix,
    // giving Haar measure.
    CMatrix g = ginibre(eng, dim, dim);
    CMatrix q(dim, dim);
    for (int j = 0; j < dim; ++j) {
        std::vector<cplx> col(dim);
        for (int i = 0; i < dim; ++i) col[i] = g(i, j);
        for (int k = 0; k < j; ++k) {
            cplx overlap = 0;
            for (int i = 0; i < dim; ++i) overlap += std::conj(q(i, k)) * col[i];
            for (int i = 0; i < dim; ++i) col[i] -= overlap * q(i, k);
        }
        // re-orthogonalize once for numerical safety
        for (int k = 0; k < j; ++k) {
            cplx overlap = 0;
            for (int i = 0; i < dim; ++i) overlap += std::conj(q(i, k)) * col[i];
            for (int i = 0; i < dim; ++i) col[i] -= overlap * q(i, k);
        }
        double norm2 = 0;
        for (const auto& a : col) norm2 += std::norm(a);
        const double inv = 1.0 / std::sqrt(norm2);
        for (int i = 0; i < dim; ++i) q(i, j) = col[i] * inv;
    }
    return q;
}

qla::DensityOperator random_density(Engine& eng, int dim) {
    CMatrix g = ginibre(eng, dim, dim);
    CMatrix rho = g * g.adjoint();
    rho *= cplx(1.0 / rho.trace().real());
    return qla::DensityOperator(Hermitian(rho, 1e-9), {dim});
}

Hermitian random_channel_choi(Engine& eng, int d_in, int d_out, int kraus_rank) {
    const int d = d_in * d_out;
    CMatrix g = ginibre(eng, d, kraus_rank);
    CMatrix j = g * g.adjoint();
    // a small full-rank component keeps the input marginal well conditioned
    double reg = 0.05 * j.trace().real() / d;
    for (int i = 0; i < d; ++i) j(i, i) += reg;
    Hermitian jh(j, 1e-9);
    // whiten the input marginal: (X^{-1/2} (x) I) J (X^{-1/2} (x) I), X = Tr_out J
    Hermitian x = qla::partial_trace(jh, {d_in, d_out}, {0});
    Hermitian xinvroot = qla::apply_spectral(x, [](double v) {
        return v > 1e-14 ? 1.0 / std::sqrt(v) : 0.0;
    });
    CMatrix w = qla::kron(xinvroot.mat(), CMatrix::identity(d_out));
    return Hermitian(w * j * w, 1e-7);
}

}  // namespace qrt::rng
