// Seeded random generators for states, unitaries and channels.
#pragma once

#include <random>
#include <vector>

#include "qrt/qla.hpp"

namespace qrt::rng {

using Engine = std::mt19937_64;

qla::CMatrix ginibre(Engine& eng, int rows, int cols);
std::vector<qla::cplx> random_pure_state(Engine& eng, int dim);
qla::CMatrix random_unitary(Engine& eng, int dim);

// Full-rank by construction (Ginibre G -> G G' / trace).
qla::DensityOperator random_density(Engine& eng, int dim);

// Unnormalized-Choi of a random channel with the given Kraus rank:
// random PSD Choi, then the input marginal is whitened to the identity.
qla::Hermitian random_channel_choi(Engine& eng, int d_in, int d_out, int kraus_rank);

}  // namespace qrt::rng
