// Self-contained solvers for linear programs and small dense semidefinite
// programs with Hermitian blocks. Programs are stated over scalar variables:
//
//   minimize   c . x
//   subject to A x = b
//              G0 + sum_i x_i G_i  >= 0   (one LMI per constraint, Hermitian blocks)
//              x_i >= 0                   (optional per-variable sign constraint)
//
// solve() runs a primal-dual path-following interior-point method with a
// Mehrotra predictor-corrector step; programs whose blocks are all 1x1 are
// dispatched to a dense revised simplex. Solutions carry dual multipliers and
// a certified duality gap; verify() recomputes every condition independently.
#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qrt/qla.hpp"

namespace qrt::conic {

struct LmiBlock {
    qla::CMatrix constant;                             // G0
    std::vector<std::pair<int, qla::CMatrix>> terms;   // (variable index, Hermitian coefficient)
    int dim() const { return constant.rows(); }
};

struct EqualityRow {
    std::vector<std::pair<int, double>> coeffs;
    double rhs = 0;
};

struct ConicProgram {
    int num_vars = 0;
    std::vector<double> objective;      // minimized
    std::vector<EqualityRow> equalities;
    std::vector<LmiBlock> lmis;
    std::vector<char> nonneg;           // size num_vars; 1 = variable constrained >= 0

    void validate() const;              // throws dimension_error on malformed programs
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

const char* to_string(SolveStatus s);

struct ConicSolution {
    SolveStatus status = SolveStatus::numerical_failure;
    double primal_value = 0;
    double dual_value = 0;
    double gap = 0;                     // |primal - dual| / max(1, |primal|)
    std::vector<double> x;
    std::vector<qla::CMatrix> lmi_duals;  // one PSD block per LMI
    std::vector<double> eq_duals;
    std::vector<double> sign_duals;       // multiplier per sign-constrained variable
    double primal_residual = 0;
    double dual_residual = 0;
    int iterations = 0;
    std::string note;                   // failure context / certificate description
    // For status infeasible/unbounded the certificate (improving ray) is stored
    // in (lmi_duals, eq_duals) respectively x.
};

struct SolverConfig {
    int max_iterations = 150;
    double gap_tol = 1e-9;            // targeted relative gap
    double accept_gap = 1e-7;         // gap still reported optimal at the iteration cap
    double feas_tol = 1e-10;
    double accept_feas = 1e-8;        // primal feasibility at the iteration cap
    double accept_dual_feas = 1e-7;   // dual stationarity at the iteration cap
    double divergence_bound = 1e12;   // dual objective beyond this triggers the infeasibility test
    double step_fraction = 0.98;
    bool force_interior_point = false;  // bypass the LP fast path
    bool trace = false;                 // per-iteration progress on stderr
};

// Solver settings derived from the global tolerance record (gap and
// feasibility acceptance thresholds), used by the measure compilers.
SolverConfig config_from_tolerances();

ConicSolution solve(const ConicProgram& p, const SolverConfig& cfg = {});

// Dense two-phase revised simplex; requires every block to be 1x1.
// Exposed so interior-point results on LPs can be cross-checked against it.
ConicSolution solve_simplex(const ConicProgram& p, const SolverConfig& cfg = {});

struct VerifyReport {
    bool pass = false;
    double lmi_violation = 0;       // most negative slack eigenvalue (scaled)
    double equality_violation = 0;
    double sign_violation = 0;
    double dual_psd_violation = 0;
    double stationarity_violation = 0;
    double complementarity = 0;
    double gap = 0;
    std::string detail;
};

// Independently recomputes feasibility residuals, dual feasibility,
// complementary slackness and the duality gap for a claimed-optimal solution.
VerifyReport verify(const ConicProgram& p, const ConicSolution& s, double tolerance);

// Plain-text self-describing dump for cross-checks against external solvers;
// one block per line, complex entries as "re,im" pairs.
void dump(const ConicProgram& p, std::ostream& os);

// Real symmetric embedding [[Re G, -Im G], [Im G, Re G]] of every block.
// The optimal value is unchanged; used to cross-check the Hermitian path.
ConicProgram real_embedding(const ConicProgram& p);

// Orthonormal Hermitian basis of a dim-dimensional operator space:
// diagonal units first, then (E_ij + E_ji)/sqrt(2) and i(E_ij - E_ji)/sqrt(2).
std::vector<qla::CMatrix> hermitian_basis(int dim);

// --- program construction --------------------------------------------------

// Affine Hermitian-valued expression C + sum_i x_i K_i.
class HermExpr {
public:
    explicit HermExpr(int dim) : constant_(dim, dim) {}

    int dim() const { return constant_.rows(); }
    const qla::CMatrix& constant_part() const { return constant_; }
    const std::map<int, qla::CMatrix>& terms() const { return terms_; }

    void add_constant(const qla::CMatrix& c);
    void add_term(int var, const qla::CMatrix& coeff);
    HermExpr& operator+=(const HermExpr& o);
    HermExpr scaled(double s) const;

    // applies a linear matrix map to the constant and every coefficient
    HermExpr map(int out_dim, const std::function<qla::CMatrix(const qla::CMatrix&)>& f) const;

private:
    qla::CMatrix constant_;
    std::map<int, qla::CMatrix> terms_;
};

struct LinExpr {
    double constant = 0;
    std::map<int, double> coeffs;
};

LinExpr trace_of(const HermExpr& e);
LinExpr inner_with(const qla::CMatrix& w, const HermExpr& e);  // Re<W, e>

// Handle to a Hermitian matrix variable expanded over scalar coordinates.
struct HermVar {
    int first_var = 0;
    int dim = 0;
    HermExpr expr() const;
    qla::CMatrix value(const std::vector<double>& x) const;
};

class ProgramBuilder {
public:
    int add_var(double objective_coeff = 0.0, bool nonneg = false);
    HermVar add_hermitian_var(int dim);

    void set_objective_coeff(int var, double coeff);
    void add_lmi(const HermExpr& e);
    void add_equality(const LinExpr& lhs, double rhs);
    // expands e == 0 over the Hermitian basis; dependent rows are pruned at take()
    void add_hermitian_equality(const HermExpr& e);

    // Finalizes the program. Prunes linearly dependent equality rows (throws
    // numerical_error if a dependent row is inconsistent).
    ConicProgram take(bool prune = true);

private:
    ConicProgram prog_;
};

}  // namespace qrt::conic
