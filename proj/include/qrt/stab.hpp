// Exhaustive enumeration of pure stabilizer states for 1-4 qubits via the
// affine-form parameterization: support on an affine subspace of F_2^n with
// amplitudes 2^{-k/2} i^{l(y)} (-1)^{q(y)} over the subspace coordinates,
// generated once per state from canonical (RREF basis, shift, phase) data.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrt/qla.hpp"

namespace qrt::stab {

struct StabilizerState {
    int n = 0;
    std::vector<qla::cplx> amplitudes;   // dim 2^n, unit norm
    // canonical affine-form descriptor
    int k = 0;                           // subspace dimension
    std::vector<std::uint32_t> basis;    // k RREF rows over F_2^n (bitmasks)
    std::uint32_t shift = 0;             // coset representative, zero on pivots
    std::vector<int> linear_phase;       // per-row exponent of i (mod 4)
    std::vector<std::uint8_t> quad_phase;  // packed q_ab bits, a < b

    qla::Hermitian projector() const;
};

struct StabilizerPolytope {
    int n = 0;
    std::vector<StabilizerState> vertices;
};

long expected_count(int n);  // 2^n * prod_{k=1..n} (2^k + 1)

// Enumerates all pure n-qubit stabilizer states (n <= 4), each exactly once.
// When cache_dir is nonempty the polytope is loaded from/saved to a versioned
// cache file there, regenerated when absent or stale.
StabilizerPolytope enumerate(int n, const std::string& cache_dir = "");

// max_s |<s|phi>|^2 over the polytope vertices (exact: the objective is
// linear over the polytope, so a vertex attains the maximum).
double stabilizer_fidelity(const std::vector<qla::cplx>& phi, const StabilizerPolytope& poly);

// Global-phase-canonical fingerprint of an amplitude vector, rounded to
// 12 decimals; equal projectors give equal fingerprints.
std::string fingerprint(const std::vector<qla::cplx>& amplitudes);

}  // namespace qrt::stab
