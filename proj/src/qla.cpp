#include "qrt/qla.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qrt {

Tolerances& tol() {
    static Tolerances t;
    return t;
}

}  // namespace qrt

namespace qrt::qla {

CMatrix::CMatrix(int rows, int cols, std::initializer_list<cplx> entries)
    : rows_(rows), cols_(cols), a_(entries) {
    if (a_.size() != size_t(rows) * cols)
        throw dimension_error("CMatrix: entry count does not match rows*cols");
}

CMatrix CMatrix::identity(int d) {
    CMatrix m(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::adjoint() const {
    CMatrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
}

CMatrix CMatrix::transpose() const {
    CMatrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
}

CMatrix CMatrix::conj() const {
    CMatrix r(rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = std::conj(a_[k]);
    return r;
}

cplx CMatrix::trace() const {
    cplx t = 0;
    for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
}

double CMatrix::frobenius_norm() const {
    double s = 0;
    for (const cplx& v : a_) s += std::norm(v);
    return std::sqrt(s);
}

bool CMatrix::finite() const {
    for (const cplx& v : a_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw dimension_error("matrix sum: shape mismatch");
    for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw dimension_error("matrix diff: shape mismatch");
    for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
    for (cplx& v : a_) v *= s;
    return *this;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols() != b.rows()) throw dimension_error("matrix product: shape mismatch");
    CMatrix r(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx(0.0)) continue;
            for (int j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
        }
    }
    return r;
}

CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

std::vector<cplx> operator*(const CMatrix& a, const std::vector<cplx>& v) {
    if (a.cols() != int(v.size())) throw dimension_error("matrix-vector product: shape mismatch");
    std::vector<cplx> r(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r[i] += a(i, j) * v[j];
    return r;
}

cplx inner(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw dimension_error("inner product: shape mismatch");
    cplx s = 0;
    for (size_t k = 0; k < a.data().size(); ++k) s += std::conj(a.data()[k]) * b.data()[k];
    return s;
}

Hermitian::Hermitian(const CMatrix& m, double tolerance) {
    if (m.rows() != m.cols()) throw dimension_error("Hermitian: matrix not square");
    if (!m.finite()) throw numerical_error("Hermitian: non-finite entries");
    double asym = 0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = i; j < m.cols(); ++j)
            asym = std::max(asym, std::abs(m(i, j) - std::conj(m(j, i))));
    double scale = std::max(1.0, m.frobenius_norm());
    if (asym > tolerance * scale)
        throw numerical_error("Hermitian: asymmetry " + std::to_string(asym) +
                              " exceeds tolerance");
    m_ = CMatrix(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m_(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
}

Hermitian Hermitian::symmetrized(const CMatrix& m) {
    if (m.rows() != m.cols()) throw dimension_error("Hermitian: matrix not square");
    Hermitian h;
    h.m_ = CMatrix(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) h.m_(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    return h;
}

Hermitian operator+(const Hermitian& a, const Hermitian& b) {
    return Hermitian(a.mat() + b.mat(), 1e-9);
}
Hermitian operator-(const Hermitian& a, const Hermitian& b) {
    return Hermitian(a.mat() - b.mat(), 1e-9);
}
Hermitian operator*(double s, const Hermitian& a) {
    return Hermitian(cplx(s) * a.mat(), 1e-9);
}

DensityOperator::DensityOperator(Hermitian op, std::vector<int> subsystem_dims)
    : op_(std::move(op)), dims_(std::move(subsystem_dims)) {
    if (dims_.empty()) dims_ = {op_.dim()};
    long prod = 1;
    for (int d : dims_) prod *= d;
    if (prod != op_.dim()) throw dimension_error("DensityOperator: subsystem dims mismatch");
    if (std::abs(op_.real_trace() - 1.0) > tol().trace_one)
        throw numerical_error("DensityOperator: trace differs from 1");
    if (!psd_check(op_, tol().psd)) throw numerical_error("DensityOperator: not PSD");
}

DensityOperator::DensityOperator(Hermitian op) : DensityOperator(std::move(op), {}) {}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx(0.0)) continue;
            for (int k = 0; k < b.rows(); ++k)
                for (int l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return r;
}

Hermitian kron(const Hermitian& a, const Hermitian& b) {
    return Hermitian(kron(a.mat(), b.mat()), 1e-9);
}

namespace {

// row index <-> multi-index helpers (big-endian: first subsystem is the slowest)
std::vector<long> strides_of(const std::vector<int>& dims) {
    std::vector<long> s(dims.size());
    long acc = 1;
    for (int k = int(dims.size()) - 1; k >= 0; --k) {
        s[k] = acc;
        acc *= dims[k];
    }
    return s;
}

long dims_product(const std::vector<int>& dims) {
    long p = 1;
    for (int d : dims) p *= d;
    return p;
}

}  // namespace

CMatrix permute_systems(const CMatrix& m, const std::vector<int>& dims,
                        const std::vector<int>& perm) {
    const long n = dims_product(dims);
    if (m.rows() != n || m.cols() != n) throw dimension_error("permute_systems: dims mismatch");
    if (perm.size() != dims.size()) throw dimension_error("permute_systems: bad permutation");
    std::vector<int> new_dims(dims.size());
    for (size_t j = 0; j < perm.size(); ++j) new_dims[j] = dims[perm[j]];
    const auto old_strides = strides_of(dims);
    const auto new_strides = strides_of(new_dims);

    // map: new flat index -> old flat index
    std::vector<long> to_old(n);
    for (long idx = 0; idx < n; ++idx) {
        long rem = idx, old_idx = 0;
        for (size_t j = 0; j < new_dims.size(); ++j) {
            long digit = rem / new_strides[j];
            rem %= new_strides[j];
            old_idx += digit * old_strides[perm[j]];
        }
        to_old[idx] = old_idx;
    }
    CMatrix r(static_cast<int>(n), static_cast<int>(n));
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) r(int(i), int(j)) = m(int(to_old[i]), int(to_old[j]));
    return r;
}

Hermitian partial_trace(const Hermitian& m, const std::vector<int>& dims,
                        const std::vector<int>& keep) {
    return Hermitian(partial_trace(m.mat(), dims, keep), 1e-9);
}

CMatrix partial_trace(const CMatrix& m, const std::vector<int>& dims,
                      const std::vector<int>& keep) {
    const long n = dims_product(dims);
    if (m.rows() != n || m.cols() != n)
        throw dimension_error("partial_trace: dims do not match operator");
    std::vector<bool> kept(dims.size(), false);
    for (int k : keep) {
        if (k < 0 || k >= int(dims.size())) throw dimension_error("partial_trace: bad keep index");
        kept[k] = true;
    }
    std::vector<int> keep_dims, trace_dims;
    for (size_t k = 0; k < dims.size(); ++k) (kept[k] ? keep_dims : trace_dims).push_back(dims[k]);
    const long nk = dims_product(keep_dims);
    const long nt = dims_product(trace_dims);
    const auto strides = strides_of(dims);
    const auto ks = strides_of(keep_dims);
    const auto ts = strides_of(trace_dims);

    // flat-index contribution of each partial multi-index, precomputed
    std::vector<long> keep_part(nk, 0), trace_part(nt, 0);
    for (long ik = 0; ik < nk; ++ik) {
        long rem = ik;
        int ck = 0;
        for (size_t s = 0; s < dims.size(); ++s) {
            if (!kept[s]) continue;
            keep_part[ik] += (rem / ks[ck]) * strides[s];
            rem %= ks[ck];
            ++ck;
        }
    }
    for (long it = 0; it < nt; ++it) {
        long rem = it;
        int ct = 0;
        for (size_t s = 0; s < dims.size(); ++s) {
            if (kept[s]) continue;
            trace_part[it] += (rem / ts[ct]) * strides[s];
            rem %= ts[ct];
            ++ct;
        }
    }

    CMatrix r(static_cast<int>(nk), static_cast<int>(nk));
    for (long i = 0; i < nk; ++i)
        for (long j = 0; j < nk; ++j) {
            cplx s = 0;
            for (long t = 0; t < nt; ++t)
                s += m(int(keep_part[i] + trace_part[t]), int(keep_part[j] + trace_part[t]));
            r(int(i), int(j)) = s;
        }
    return r;
}

Hermitian partial_transpose(const Hermitian& m, const std::vector<int>& dims,
                            const std::vector<int>& part) {
    const long n = dims_product(dims);
    if (m.dim() != n) throw dimension_error("partial_transpose: dims do not match operator");
    std::vector<bool> flip(dims.size(), false);
    for (int k : part) {
        if (k < 0 || k >= int(dims.size()))
            throw dimension_error("partial_transpose: bad subsystem index");
        flip[k] = true;
    }
    const auto strides = strides_of(dims);
    CMatrix r(static_cast<int>(n), static_cast<int>(n));
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) {
            long ri = i, rj = j, ii = 0, jj = 0;
            for (size_t s = 0; s < dims.size(); ++s) {
                long di = ri / strides[s], dj = rj / strides[s];
                ri %= strides[s];
                rj %= strides[s];
                ii += (flip[s] ? dj : di) * strides[s];
                jj += (flip[s] ? di : dj) * strides[s];
            }
            r(int(ii), int(jj)) = m.mat()(int(i), int(j));
        }
    }
    return Hermitian(r, 1e-9);
}

Eig eig_hermitian(const Hermitian& m) {
    const int n = m.dim();
    CMatrix a = m.mat();
    CMatrix v = CMatrix::identity(n);
    const double norm = std::max(a.frobenius_norm(), 1e-300);
    const int max_sweeps = 60;

    auto off_norm = [&]() {
        double s = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += std::norm(a(i, j));
        return std::sqrt(2.0 * s);
    };

    int sweep = 0;
    while (off_norm() > 1e-14 * norm) {
        if (++sweep > max_sweeps)
            throw numerical_error("eig_hermitian: Jacobi sweep cap exceeded");
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cplx apq = a(p, q);
                const double r = std::abs(apq);
                if (r <= 1e-300) continue;
                const cplx phase = apq / r;
                const double app = a(p, p).real(), aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * r);
                const double t =
                    (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const cplx s = t * c * phase;  // rotation J: J_pp=c, J_pq=s, J_qp=-conj(s), J_qq=c

                // A <- J' A J, applied as row then column updates
                for (int k = 0; k < n; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - std::conj(s) * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = std::conj(s) * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = cplx(a(p, p).real(), 0.0);
                a(q, q) = cplx(a(q, q).real(), 0.0);
                for (int k = 0; k < n; ++k) {
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - std::conj(s) * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
    Eig out;
    out.values.resize(n);
    out.vectors = CMatrix(n, n);
    for (int j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]).real();
        for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

double operator_norm(const Hermitian& m) {
    auto e = eig_hermitian(m);
    double mx = 0;
    for (double v : e.values) mx = std::max(mx, std::abs(v));
    return mx;
}

double trace_norm(const Hermitian& m) {
    auto e = eig_hermitian(m);
    double s = 0;
    for (double v : e.values) s += std::abs(v);
    return s;
}

double min_eigenvalue(const Hermitian& m) { return eig_hermitian(m).values.front(); }

bool psd_check(const Hermitian& m, double tolerance) {
    return min_eigenvalue(m) >= -tolerance * std::max(1.0, m.mat().frobenius_norm());
}

Hermitian apply_spectral(const Hermitian& m, const std::function<double(double)>& f) {
    auto e = eig_hermitian(m);
    const int n = m.dim();
    CMatrix r(n, n);
    for (int k = 0; k < n; ++k) {
        const double fk = f(e.values[k]);
        if (fk == 0.0) continue;
        for (int i = 0; i < n; ++i) {
            const cplx w = fk * e.vectors(i, k);
            for (int j = 0; j < n; ++j) r(i, j) += w * std::conj(e.vectors(j, k));
        }
    }
    return Hermitian(r, 1e-9);
}

Hermitian sqrt_psd(const Hermitian& m, double clip) {
    const double scale = std::max(1.0, m.mat().frobenius_norm());
    return apply_spectral(m, [&](double x) {
        if (x < -clip * scale) throw numerical_error("sqrt_psd: matrix has a negative eigenvalue");
        return x > 0 ? std::sqrt(x) : 0.0;
    });
}

double state_fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
    if (rho.dim() != sigma.dim()) throw dimension_error("state_fidelity: dimension mismatch");
    Hermitian root = sqrt_psd(rho.op());
    Hermitian inner_op(root.mat() * sigma.op().mat() * root.mat(), 1e-8);
    auto e = eig_hermitian(inner_op);
    double s = 0;
    for (double v : e.values) s += std::sqrt(std::max(0.0, v));
    double f = s * s;
    return std::clamp(f, 0.0, 1.0 + 1e-12);
}

CholeskyResult cholesky(const CMatrix& a) {
    const int n = a.rows();
    CholeskyResult res;
    res.lower = CMatrix(n, n);
    CMatrix& l = res.lower;
    for (int j = 0; j < n; ++j) {
        double d = a(j, j).real();
        for (int k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (d <= 0 || !std::isfinite(d)) {
            res.ok = false;
            return res;
        }
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            cplx s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / l(j, j).real();
        }
    }
    res.ok = true;
    return res;
}

std::vector<cplx> forward_solve(const CMatrix& lower, const std::vector<cplx>& b) {
    const int n = lower.rows();
    std::vector<cplx> y(b);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) y[i] -= lower(i, k) * y[k];
        y[i] /= lower(i, i).real();
    }
    return y;
}

std::vector<cplx> backward_solve_adjoint(const CMatrix& lower, const std::vector<cplx>& b) {
    const int n = lower.rows();
    std::vector<cplx> y(b);
    for (int i = n - 1; i >= 0; --i) {
        for (int k = i + 1; k < n; ++k) y[i] -= std::conj(lower(k, i)) * y[k];
        y[i] /= lower(i, i).real();
    }
    return y;
}

CMatrix cholesky_solve(const CMatrix& lower, const CMatrix& b) {
    const int n = lower.rows();
    CMatrix x(n, b.cols());
    std::vector<cplx> col(n);
    for (int j = 0; j < b.cols(); ++j) {
        for (int i = 0; i < n; ++i) col[i] = b(i, j);
        auto y = backward_solve_adjoint(lower, forward_solve(lower, col));
        for (int i = 0; i < n; ++i) x(i, j) = y[i];
    }
    return x;
}

CMatrix cholesky_inverse(const CMatrix& lower) {
    return cholesky_solve(lower, CMatrix::identity(lower.rows()));
}

}  // namespace qrt::qla
