// Distillation limits as pure scalar functions of monotone values: one-shot
// error floors, copy-count floors, exact-transformation overheads, strong
// converse rate ceilings, and their probabilistic extensions. Logarithms are
// base 2 throughout; rates are qubits per channel use.
#pragma once

#include <map>
#include <string>
#include <vector>

namespace qrt::bounds {

enum class Flag {
    ok,            // bound holds as stated
    vacuous,       // formula value clamped to the trivial bound (0)
    inapplicable,  // premise not met (e.g. weight bound with W = 0)
    infeasible,    // target unreachable at any copy count (reported +inf)
    undefined      // 0/0-type corner excluded by the statement's proviso
};

const char* to_string(Flag f);

struct BoundValue {
    double value = 0;
    Flag flag = Flag::ok;
    std::string provenance;
    bool usable() const { return flag == Flag::ok; }
};

struct ErrorFloors {
    BoundValue robustness;  // eps >= 1 - F R
    BoundValue weight;      // eps >= (1 - F) W
};

// One-shot floors for distilling a resourceful unitary target with
// free-set fidelity f_target from an input with monotones (r, w).
ErrorFloors error_floor_unitary(double r, double w, double f_target);

// Same trade-off with a pure-state (replacement-channel) target; also covers
// plain state-to-state distillation.
ErrorFloors error_floor_state(double r, double w, double f_target);

// Earlier eigenvalue-based floor eps >= (1 - F) lambda_min, applicable to
// full-rank inputs only.
BoundValue previous_bound(double lambda_min, double f_target);

struct CopyFloors {
    BoundValue robustness;  // n >= log((1 - eps)/F^m) / log R
    BoundValue weight;      // n >= log((1 - F^m)/eps) / log(1/W)
};

// Floors on the number of channel/state uses for distilling m target copies
// to error eps under any parallel, sequential or adaptive protocol.
CopyFloors copy_floor(double r, double w, double f_single, int m, double eps);

struct TransformFloors {
    BoundValue robustness;  // n >= log R_out / log R_in
    BoundValue weight;      // n >= log W_out / log W_in, log 0 = -inf
};

// Floor on uses needed for an exact transformation between two objects.
TransformFloors transform_floor(double r_in, double r_out, double w_in, double w_out);

// Strong converse ceiling numerator / log2(1/F). The numerator is log2 R for
// adaptive protocols or a regularized divergence (in bits) for parallel ones.
BoundValue rate_ceiling(double numerator_bits, double f_single);
BoundValue rate_ceiling_adaptive(double r, double f_single);
BoundValue rate_ceiling_parallel(double divergence_bits, double f_single);

struct ProbabilisticFloors {
    BoundValue robustness;    // eps >= 1 - R F / p
    BoundValue weight_loose;  // channel: eps >= 1 - (1 - (1-F) W)/p
    BoundValue weight_tight;  // eps >= (1-F) W trM / p
};

// Conditional-error floors for protocols that succeed with probability p;
// trm is the success weight assigned to the dominated free part.
ProbabilisticFloors probabilistic_floor_channel(double r, double w, double f_psi, double p,
                                                double trm);
// state form: the loose bound becomes (1-F) (1 - (1-W)/p)
ProbabilisticFloors probabilistic_floor_state(double r, double w, double f, double p, double trm);

// Named-inputs record printed by the CLI.
struct BoundReport {
    std::map<std::string, double> inputs;
    std::vector<BoundValue> outputs;
};

}  // namespace qrt::bounds
