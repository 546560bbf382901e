// Resource monotones over an arbitrary free set - generalized robustness,
// resource weight and free-set fidelity - with dual witnesses extracted from
// the solver and independently certified.
#pragma once

#include <optional>
#include <string>

#include "qrt/channels.hpp"
#include "qrt/conic.hpp"
#include "qrt/theories.hpp"

namespace qrt::measures {

struct SolverDiagnostics {
    conic::SolveStatus status = conic::SolveStatus::numerical_failure;
    double gap = 0;
    double primal_residual = 0;
    double dual_residual = 0;
    int iterations = 0;
};

struct WitnessCheck {
    bool checked = false;
    bool pass = false;
    double max_violation = 0;   // worst normalization violation over free elements
    double psd_violation = 0;
    double value_mismatch = 0;  // |<X, J> - value|
};

struct MeasureResult {
    double value = 0;
    bool infinite = false;  // no free element dominates the support (robustness only)
    std::optional<qla::Hermitian> witness;       // dual operator X
    std::optional<qla::Hermitian> free_element;  // optimal free state / normalized Choi
    double coefficient = 0;                      // primal coefficient achieving the value
    SolverDiagnostics diag;
    WitnessCheck certification;
};

// min { lambda : J <= lambda J_M, M free };  value 1 exactly on the free set.
MeasureResult robustness(const channels::Channel& e, const theories::FreeSet& fs);
MeasureResult robustness(const qla::DensityOperator& rho, const theories::FreeSet& fs);

// max { lambda : J >= lambda J_M, M free };  0 when no free element lies in
// the support.
MeasureResult weight(const channels::Channel& e, const theories::FreeSet& fs);
MeasureResult weight(const qla::DensityOperator& rho, const theories::FreeSet& fs);

// Largest squared fidelity with the free set. Channels use the normalized
// Choi variant; pure states over a polytope reduce to the exact vertex
// maximum through the LP path, mixed states solve the fidelity SDP with the
// free element as a variable.
MeasureResult free_fidelity(const channels::Channel& e, const theories::FreeSet& fs);
MeasureResult free_fidelity(const qla::DensityOperator& rho, const theories::FreeSet& fs);

// Closed form max{1, ||J_E||_inf} for the separability-based robustness,
// valid for d_in <= 3, d_out = 2 only; anything else is unsupported.
double sep_robustness_analytic(const channels::Channel& e);

// Channel monotones of a diagonal third-level gate via state injection:
// all three measures reduce to the state monotones of U|+...+>.
struct InjectionResult {
    MeasureResult robustness;
    MeasureResult weight;
    MeasureResult fidelity;
};
InjectionResult injection_reduction(const qla::CMatrix& diagonal_unitary,
                                    const std::string& cache_dir = "");

namespace detail {
// Polytopes with more vertices than this compile in the dual orientation
// (Newton system sized by dim^2 instead of the vertex count).
extern size_t dual_form_threshold;
}  // namespace detail

}  // namespace qrt::measures
