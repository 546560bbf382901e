// Declarative free-set descriptions that compile to solver constraints:
// replacement channels, PPT channels, completely stabilizer-preserving
// channels, stabilizer states and diagonal (incoherent) states.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qrt/qla.hpp"
#include "qrt/random.hpp"

namespace qrt::theories {

enum class ObjectSpace { state, channel };

struct FreeSet {
    enum class Kind { vertex_polytope, sdp_cone };
    enum class Cone { replacement, ppt };

    Kind kind = Kind::vertex_polytope;
    ObjectSpace space = ObjectSpace::state;
    int d_in = 0;   // state dimension when space == state (d_out = 1)
    int d_out = 1;

    // vertex polytope: unit-trace PSD operators; for channel spaces these are
    // normalized Choi states, and trace preservation is a constraint on the
    // mixture rather than on individual vertices.
    std::vector<qla::Hermitian> vertices;
    bool tp_on_mixture = false;

    Cone cone = Cone::replacement;
    std::string name;

    int dim() const { return d_in * d_out; }
};

// Free channels of the no-signalling communication theory: J = I (x) sigma.
FreeSet replacement_channels(int d_in, int d_out);

// Channels whose Choi stays PSD under partial transposition of the output.
FreeSet ppt_channels(int d_in, int d_out);

// Completely stabilizer-preserving channels on n_in -> n_out qubits
// (n_in + n_out <= 4): normalized Choi inside the stabilizer polytope.
FreeSet csp_channels(int n_in, int n_out, const std::string& cache_dir = "");

FreeSet stab_states(int n, const std::string& cache_dir = "");
FreeSet diag_states(int levels);
FreeSet vertex_state_polytope(std::vector<qla::Hermitian> projectors, std::string name = "custom");

// Membership of a state (unit trace) or channel Choi (trace d_in) in the set.
// Cones are checked structurally; polytopes by a feasibility LP.
bool member(const FreeSet& fs, const qla::Hermitian& obj, double tolerance = 1e-7);

// A random free element (same normalization as `member` expects), used for
// witness certification. Empty when the set has no sampler (non-square
// stabilizer-preserving spaces).
std::optional<qla::Hermitian> sample_free(const FreeSet& fs, rng::Engine& eng);

}  // namespace qrt::theories
