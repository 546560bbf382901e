// Standard gate matrices and basis states used across the library.
#pragma once

#include "qrt/qla.hpp"

namespace qrt::gates {

using qla::CMatrix;
using qla::cplx;

CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();
CMatrix hadamard();
CMatrix phase_s();
CMatrix phase_t();  // diag(1, e^{i pi/4})
CMatrix cnot();
CMatrix cz();
CMatrix ccz();

std::vector<cplx> ket(int index, int dim);
std::vector<cplx> plus_state(int qubits);          // |+>^{(x) n}
qla::Hermitian projector(const std::vector<cplx>& v);

// gate embedded on adjacent qubits starting at q0, identity elsewhere
CMatrix embed(const CMatrix& g, int n, int q0);

}  // namespace qrt::gates
