// No-signalling code optimization and channel mutual information.
//
// The achievable-fidelity program optimizes over superchannel Choi operators
// on registers (A, A', B, B'): positivity, trace preservation of the overall
// map, and the two no-signalling marginal conditions, with the Choi fidelity
// against the target identity as a linear objective.
#pragma once

#include <optional>

#include "qrt/channels.hpp"
#include "qrt/conic.hpp"

namespace qrt::comm {

struct NsFidelityResult {
    double value = 0;  // max Choi fidelity with id_{d_target}
    conic::SolveStatus status = conic::SolveStatus::numerical_failure;
    double gap = 0;
    int iterations = 0;
};

// Best Choi fidelity achievable when the channel is wrapped in a
// no-signalling bipartite code targeting id_{d_target}. Total register
// dimension d_target^2 * d_in * d_out must stay <= 64.
NsFidelityResult ns_achievable_fidelity_info(const channels::Channel& e, int d_target);
double ns_achievable_fidelity(const channels::Channel& e, int d_target);

struct MutualInfoResult {
    double value_bits = 0;
    qla::Hermitian optimizer;  // maximizing input state
    bool certified = false;    // concavity gap certificate below tolerance
    double gap_bits = 0;       // remaining optimality gap bound
    int iterations = 0;
};

// max over inputs of S(rho) + S(E(rho)) - S(joint output of a purification),
// by entropic mirror ascent with a monotone line search. The objective is
// concave, and the reported gap bounds the distance to the global optimum.
MutualInfoResult channel_mutual_information(
    const channels::Channel& e, int max_iterations = 2000,
    std::optional<qla::Hermitian> initial = std::nullopt);

}  // namespace qrt::comm
