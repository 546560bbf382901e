// Quantum channels stored as unnormalized Choi matrices (registers ordered
// input (x) output, trace = d_in), with channel-level fidelities and the
// diamond-distance SDP.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qrt/qla.hpp"

namespace qrt::channels {

using qla::CMatrix;
using qla::cplx;
using qla::DensityOperator;
using qla::Hermitian;

class Channel {
public:
    // Validates complete positivity (PSD Choi) and trace preservation.
    Channel(int d_in, int d_out, Hermitian choi);

    int d_in() const { return d_in_; }
    int d_out() const { return d_out_; }
    const Hermitian& choi() const { return choi_; }
    DensityOperator normalized_choi() const;  // choi / d_in on subsystems {d_in, d_out}

private:
    int d_in_, d_out_;
    Hermitian choi_;
};

// Completely positive trace-nonincreasing map: Tr_out(choi) <= I.
class SubChannel {
public:
    SubChannel(int d_in, int d_out, Hermitian choi);
    int d_in() const { return d_in_; }
    int d_out() const { return d_out_; }
    const Hermitian& choi() const { return choi_; }

private:
    int d_in_, d_out_;
    Hermitian choi_;
};

// --- constructors ------------------------------------------------------------

Channel identity_channel(int d);
Channel make_unitary(const CMatrix& u);
Channel from_kraus(int d_in, int d_out, const std::vector<CMatrix>& kraus);

Channel make_depolarizing(double p, int d);
Channel make_dephasing(double p);  // (1-p) rho + p Z rho Z
Channel make_amplitude_damping(double gamma);
Channel make_dephrasure(double p, double q);  // qubit -> qutrit
Channel make_replacement(const DensityOperator& sigma, int d_in);

// --- combinators -------------------------------------------------------------

// Register order of the result: inputs grouped before outputs,
// (A1 A2) : (B1 B2), enforced by one permutation utility.
Channel tensor(const Channel& e, const Channel& f);
Channel compose(const Channel& e, const Channel& f);  // e after f
Channel mix(const std::vector<std::pair<double, Channel>>& parts);

// --- actions and decompositions ----------------------------------------------

Hermitian apply(const Channel& e, const Hermitian& rho);
std::vector<CMatrix> kraus_operators(const Channel& e);  // d_out x d_in each

// --- fidelities and distances ------------------------------------------------

// F of the normalized Choi states (squared convention).
double choi_fidelity(const Channel& e, const Channel& f);

// (1/2) ||E - F||_diamond via the semidefinite program
//   max <J_E - J_F, W>  s.t.  0 <= W <= rho (x) I,  Tr rho = 1.
double diamond_distance_half(const Channel& e, const Channel& f);

// Certified upper bound on the worst-case channel fidelity F(N,U) for a
// target with rank-1 Choi: multi-start projected gradient descent over pure
// inputs; every evaluated input is feasible for the minimization, so the
// smallest value seen is a valid upper bound. Deterministic given the seed.
double worst_case_fidelity_ub(const Channel& n, const Channel& u, int restarts = 32,
                              std::uint64_t seed = 1);

// --- serialization -----------------------------------------------------------

// "d_in d_out" header then Choi entries row-major as "re im" pairs,
// 17 significant digits (decimal representation round trips bit-exactly).
void save_text(const Channel& e, std::ostream& os);
Channel load_text(std::istream& is);

}  // namespace qrt::channels
