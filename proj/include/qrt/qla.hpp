// Dense complex linear algebra for small Hilbert spaces (dim <= 64):
// Hermitian eigensolving, Kronecker products, partial trace/transpose,
// norms and state fidelity.
#pragma once

#include <complex>
#include <functional>
#include <initializer_list>
#include <vector>

#include "qrt/config.hpp"

namespace qrt::qla {

using cplx = std::complex<double>;

class CMatrix {
public:
    CMatrix() = default;
    CMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols) {}
    CMatrix(int rows, int cols, std::initializer_list<cplx> entries);

    static CMatrix identity(int d);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    cplx& operator()(int i, int j) { return a_[size_t(i) * cols_ + j]; }
    const cplx& operator()(int i, int j) const { return a_[size_t(i) * cols_ + j]; }
    const std::vector<cplx>& data() const { return a_; }
    std::vector<cplx>& data() { return a_; }

    CMatrix adjoint() const;
    CMatrix transpose() const;
    CMatrix conj() const;
    cplx trace() const;
    double frobenius_norm() const;
    bool finite() const;

    CMatrix& operator+=(const CMatrix& o);
    CMatrix& operator-=(const CMatrix& o);
    CMatrix& operator*=(cplx s);

private:
    int rows_ = 0, cols_ = 0;
    std::vector<cplx> a_;  // row-major
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(const CMatrix& a, const CMatrix& b);
CMatrix operator*(cplx s, CMatrix a);
std::vector<cplx> operator*(const CMatrix& a, const std::vector<cplx>& v);

// Hilbert-Schmidt inner product <A,B> = Tr(A' B).
cplx inner(const CMatrix& a, const CMatrix& b);

// Square matrix equal to its conjugate transpose; symmetrized at construction,
// rejected when the asymmetry exceeds the configured tolerance.
class Hermitian {
public:
    Hermitian() = default;
    explicit Hermitian(const CMatrix& m, double tolerance = tol().hermitian_symmetry);

    // unconditional symmetrization (M + M')/2, for solver internals where
    // numerical noise is expected and harmless
    static Hermitian symmetrized(const CMatrix& m);

    int dim() const { return m_.rows(); }
    const CMatrix& mat() const { return m_; }
    cplx operator()(int i, int j) const { return m_(i, j); }
    double real_trace() const { return m_.trace().real(); }

private:
    CMatrix m_;
};

Hermitian operator+(const Hermitian& a, const Hermitian& b);
Hermitian operator-(const Hermitian& a, const Hermitian& b);
Hermitian operator*(double s, const Hermitian& a);

// Unit-trace positive semidefinite operator on a tensor product of subsystems.
class DensityOperator {
public:
    DensityOperator(Hermitian op, std::vector<int> subsystem_dims);
    explicit DensityOperator(Hermitian op);  // single subsystem

    int dim() const { return op_.dim(); }
    const Hermitian& op() const { return op_; }
    const std::vector<int>& subsystem_dims() const { return dims_; }

private:
    Hermitian op_;
    std::vector<int> dims_;
};

// --- structural operations -------------------------------------------------

CMatrix kron(const CMatrix& a, const CMatrix& b);
Hermitian kron(const Hermitian& a, const Hermitian& b);

// Reorders tensor factors: subsystem at new position j is old subsystem perm[j].
CMatrix permute_systems(const CMatrix& m, const std::vector<int>& dims,
                        const std::vector<int>& perm);

// Traces out every subsystem not listed in `keep` (indices ascending).
Hermitian partial_trace(const Hermitian& m, const std::vector<int>& dims,
                        const std::vector<int>& keep);
CMatrix partial_trace(const CMatrix& m, const std::vector<int>& dims,
                      const std::vector<int>& keep);

// Transposes the subsystems listed in `part`.
Hermitian partial_transpose(const Hermitian& m, const std::vector<int>& dims,
                            const std::vector<int>& part);

// --- spectral operations ---------------------------------------------------

struct Eig {
    std::vector<double> values;  // ascending
    CMatrix vectors;             // orthonormal eigenvectors in columns, matching order
};

// Cyclic Jacobi for Hermitian matrices. Unconditionally convergent for the
// dimensions in play; throws numerical_error if the sweep cap is exceeded.
Eig eig_hermitian(const Hermitian& m);

double operator_norm(const Hermitian& m);  // largest |eigenvalue|
double trace_norm(const Hermitian& m);     // sum of |eigenvalues|
double min_eigenvalue(const Hermitian& m);
bool psd_check(const Hermitian& m, double tolerance = tol().psd);

// V f(Lambda) V' for the eigendecomposition of m.
Hermitian apply_spectral(const Hermitian& m, const std::function<double(double)>& f);

// Principal square root with small negative eigenvalues clipped to zero;
// eigenvalues below -clip are a contract violation.
Hermitian sqrt_psd(const Hermitian& m, double clip = tol().psd);

// (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, the squared-fidelity convention.
// Equals <phi, sigma> when rho = phi is pure.
double state_fidelity(const DensityOperator& rho, const DensityOperator& sigma);

// --- factorizations --------------------------------------------------------

struct CholeskyResult {
    CMatrix lower;  // L with A = L L'
    bool ok = false;
};

CholeskyResult cholesky(const CMatrix& a);

// Solve L y = b (forward) or L' y = b (backward) for lower-triangular L.
std::vector<cplx> forward_solve(const CMatrix& lower, const std::vector<cplx>& b);
std::vector<cplx> backward_solve_adjoint(const CMatrix& lower, const std::vector<cplx>& b);
CMatrix cholesky_solve(const CMatrix& lower, const CMatrix& b);  // (L L')^{-1} B
CMatrix cholesky_inverse(const CMatrix& lower);

}  // namespace qrt::qla
