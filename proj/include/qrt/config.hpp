// Shared numeric tolerances and error types.
#pragma once

#include <stdexcept>
#include <string>

namespace qrt {

struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct unsupported_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every tolerance used across the library, with shipped defaults.
struct Tolerances {
    double hermitian_symmetry = 1e-12;  // ||M - M'|| allowed at Hermitian construction
    double psd = 1e-9;                  // min eigenvalue floor for density / Choi operators
    double trace_one = 1e-9;            // |Tr(rho) - 1|
    double trace_preserving = 1e-8;     // ||Tr_out(J) - I||
    double eig_residual = 1e-9;         // reconstruction residual per unit dimension
    double eig_orthonormal = 1e-10;
    double unitary = 1e-10;             // ||U U' - I||

    double solver_gap = 1e-7;           // relative duality gap accepted as optimal
    double solver_feasibility = 1e-8;   // primal/dual residuals accepted as optimal
    double dual_psd = 1e-8;             // min eigenvalue allowed on dual multipliers

    double witness = 1e-6;              // dual witness certification
    double membership = 1e-7;           // |robustness - 1| treated as "in the set"
    double weight_zero = 1e-7;          // weight below this is reported as 0 (bound inapplicable)
};

// Mutable global configuration record; library defaults unless a caller overrides.
Tolerances& tol();

}  // namespace qrt
