#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "qrt/conic.hpp"
#include "qrt/random.hpp"

using namespace qrt;
using namespace qrt::conic;
using qla::CMatrix;
using qla::cplx;

namespace {

CMatrix scalar(double v) {
    CMatrix m(1, 1);
    m(0, 0) = v;
    return m;
}

// min t  s.t.  t I - A >= 0
ConicProgram eigmax_program(const qla::Hermitian& a) {
    ProgramBuilder b;
    int t = b.add_var(1.0);
    HermExpr e(a.dim());
    e.add_constant(cplx(-1.0) * a.mat());
    e.add_term(t, CMatrix::identity(a.dim()));
    b.add_lmi(e);
    return b.take();
}

}  // namespace

TEST_CASE("eigenvalue reformulation: min t with t I - A psd") {
    qla::Hermitian a(CMatrix(3, 3, {1, 0, 0, 0, 5, 0, 0, 0, 2}));
    auto p = eigmax_program(a);
    auto s = solve(p);
    REQUIRE(s.status == SolveStatus::optimal);
    CHECK(s.primal_value == Catch::Approx(5.0).margin(1e-7));
    CHECK(s.gap <= 1e-7);
    CHECK(verify(p, s, 1e-7).pass);
}

TEST_CASE("scalar bound: min x subject to x >= 3") {
    ProgramBuilder b;
    int x = b.add_var(1.0);
    HermExpr e(1);
    e.add_constant(scalar(-3.0));
    e.add_term(x, scalar(1.0));
    b.add_lmi(e);
    auto p = b.take();
    auto s = solve(p);
    REQUIRE(s.status == SolveStatus::optimal);
    CHECK(s.primal_value == Catch::Approx(3.0).margin(1e-8));
    CHECK(verify(p, s, 1e-7).pass);

    SECTION("same result through the interior-point path") {
        SolverConfig cfg;
        cfg.force_interior_point = true;
        auto s2 = solve(p, cfg);
        REQUIRE(s2.status == SolveStatus::optimal);
        CHECK(s2.primal_value == Catch::Approx(3.0).margin(1e-7));
    }
}

TEST_CASE("diagonal dominance: min sum c, sum c_i |i><i| >= I/2") {
    ProgramBuilder b;
    int c0 = b.add_var(1.0, true);
    int c1 = b.add_var(1.0, true);
    HermExpr e(2);
    e.add_constant(cplx(-0.5) * CMatrix::identity(2));
    CMatrix p0(2, 2), p1(2, 2);
    p0(0, 0) = 1;
    p1(1, 1) = 1;
    e.add_term(c0, p0);
    e.add_term(c1, p1);
    b.add_lmi(e);
    auto p = b.take();
    auto s = solve(p);
    REQUIRE(s.status == SolveStatus::optimal);
    CHECK(s.primal_value == Catch::Approx(1.0).margin(1e-7));
    CHECK(s.x[0] == Catch::Approx(0.5).margin(1e-6));
    CHECK(s.x[1] == Catch::Approx(0.5).margin(1e-6));
    CHECK(verify(p, s, 1e-7).pass);
}

TEST_CASE("verify flags deliberate corruption") {
    qla::Hermitian a(CMatrix(3, 3, {1, 0, 0, 0, 5, 0, 0, 0, 2}));
    auto p = eigmax_program(a);
    auto s = solve(p);
    REQUIRE(s.status == SolveStatus::optimal);

    SECTION("perturbed primal point fails feasibility") {
        auto bad = s;
        bad.x[0] -= 1e-3;
        auto rep = verify(p, bad, 1e-7);
        CHECK_FALSE(rep.pass);
        CHECK(rep.lmi_violation > 1e-4);
    }
    SECTION("dual multiplier with negative eigenvalue fails") {
        auto bad = s;
        bad.lmi_duals[0](0, 0) -= 1e-2;
        auto rep = verify(p, bad, 1e-7);
        CHECK_FALSE(rep.pass);
        CHECK(rep.dual_psd_violation + rep.stationarity_violation > 1e-3);
    }
}

TEST_CASE("weak duality and gap on random SDP instances") {
    rng::Engine eng(42);
    for (int trial = 0; trial < 8; ++trial) {
        auto g = rng::ginibre(eng, 4, 4);
        qla::Hermitian a(g + g.adjoint(), 1.0);
        auto p = eigmax_program(a);
        SolverConfig cfg;
        cfg.force_interior_point = true;
        auto s = solve(p, cfg);
        REQUIRE(s.status == SolveStatus::optimal);
        CHECK(s.dual_value <= s.primal_value + 1e-9 * std::max(1.0, std::abs(s.primal_value)));
        double expect = qla::eig_hermitian(a).values.back();
        CHECK(s.primal_value == Catch::Approx(expect).margin(1e-6));
        CHECK(verify(p, s, 1e-6).pass);
    }
}

TEST_CASE("hermitian-to-real embedding round trip") {
    rng::Engine eng(7);
    for (int trial = 0; trial < 6; ++trial) {
        auto g = rng::ginibre(eng, 3, 3);
        qla::Hermitian a(g + g.adjoint(), 1.0);
        auto p = eigmax_program(a);
        auto pe = real_embedding(p);
        auto s = solve(p);
        auto se = solve(pe);
        REQUIRE(s.status == SolveStatus::optimal);
        REQUIRE(se.status == SolveStatus::optimal);
        CHECK(s.primal_value == Catch::Approx(se.primal_value).margin(1e-8));
    }
}

TEST_CASE("scale invariance of status and value") {
    qla::Hermitian a(CMatrix(2, 2, {1, cplx(0, 0.3), cplx(0, -0.3), 2}));
    auto p = eigmax_program(a);
    auto s = solve(p);
    REQUIRE(s.status == SolveStatus::optimal);
    auto p2 = p;
    for (double& v : p2.objective) v *= 1e3;
    auto s2 = solve(p2);
    REQUIRE(s2.status == SolveStatus::optimal);
    CHECK(s2.primal_value == Catch::Approx(1e3 * s.primal_value).epsilon(1e-7));
}

TEST_CASE("interior point matches simplex on random LPs") {
    rng::Engine eng(11);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 6, meq = 2;
        ProgramBuilder b;
        std::vector<int> vars;
        for (int i = 0; i < n; ++i) vars.push_back(b.add_var(u(eng), true));
        // A x = A x0 for a random positive x0 keeps the program feasible
        std::vector<double> x0(n);
        for (double& v : x0) v = u(eng);
        for (int r = 0; r < meq; ++r) {
            LinExpr row;
            double rhs = 0;
            for (int i = 0; i < n; ++i) {
                double aij = u(eng);
                row.coeffs[vars[i]] = aij;
                rhs += aij * x0[i];
            }
            b.add_equality(row, rhs);
        }
        auto p = b.take();
        auto s_lp = solve_simplex(p);
        SolverConfig cfg;
        cfg.force_interior_point = true;
        auto s_ip = solve(p, cfg);
        REQUIRE(s_lp.status == SolveStatus::optimal);
        REQUIRE(s_ip.status == SolveStatus::optimal);
        CHECK(s_ip.primal_value == Catch::Approx(s_lp.primal_value).margin(1e-8));
        CHECK(verify(p, s_lp, 1e-7).pass);
    }
}

TEST_CASE("infeasible program yields an improving-ray certificate") {
    // I/2 <= c |0><0| has no solution; dual is unbounded
    ProgramBuilder b;
    int c = b.add_var(1.0, true);
    HermExpr e(2);
    e.add_constant(cplx(-0.5) * CMatrix::identity(2));
    CMatrix p0(2, 2);
    p0(0, 0) = 1;
    e.add_term(c, p0);
    b.add_lmi(e);
    auto p = b.take();
    SolverConfig cfg;
    cfg.force_interior_point = true;
    auto s = solve(p, cfg);
    REQUIRE(s.status == SolveStatus::infeasible);
    // certificate: Z >= 0 with -<G0, Z> > 0
    double obj = qla::inner(p.lmis[0].constant, s.lmi_duals[0]).real();
    CHECK(-obj > 1e-9);
}

TEST_CASE("unbounded LP is reported") {
    ProgramBuilder b;
    int x = b.add_var(-1.0, true);
    (void)x;
    auto p = b.take();
    auto s = solve_simplex(p);
    CHECK(s.status == SolveStatus::unbounded);
}

TEST_CASE("builder prunes dependent equalities") {
    ProgramBuilder b;
    int x = b.add_var(1.0, true);
    int y = b.add_var(1.0, true);
    LinExpr r1, r2, r3;
    r1.coeffs = {{x, 1.0}, {y, 1.0}};
    r2.coeffs = {{x, 2.0}, {y, 2.0}};
    r3.coeffs = {{x, 1.0}, {y, -1.0}};
    b.add_equality(r1, 1.0);
    b.add_equality(r2, 2.0);  // dependent, consistent
    b.add_equality(r3, 0.0);
    auto p = b.take();
    CHECK(p.equalities.size() == 2);
    auto s = solve(p);
    REQUIRE(s.status == SolveStatus::optimal);
    CHECK(s.x[0] == Catch::Approx(0.5).margin(1e-8));
}

TEST_CASE("matrix variable through the builder: max <C,X>, Tr X = 1, X psd") {
    rng::Engine eng(13);
    auto g = rng::ginibre(eng, 4, 4);
    qla::Hermitian cmat(g + g.adjoint(), 1.0);
    ProgramBuilder b;
    HermVar xv = b.add_hermitian_var(4);
    HermExpr xe = xv.expr();
    b.add_lmi(xe);
    b.add_equality(trace_of(xe), 1.0);
    LinExpr obj = inner_with(cmat.mat(), xe);
    for (auto& [i, v] : obj.coeffs) b.set_objective_coeff(i, -v);  // maximize
    auto p = b.take();
    auto s = solve(p);
    REQUIRE(s.status == SolveStatus::optimal);
    double expect = qla::eig_hermitian(cmat).values.back();
    CHECK(-s.primal_value == Catch::Approx(expect).margin(1e-6));
    CHECK(verify(p, s, 1e-6).pass);
    CMatrix xstar = xv.value(s.x);
    CHECK(std::abs(xstar.trace().real() - 1.0) < 1e-7);
}

TEST_CASE("program dump is self-describing text") {
    qla::Hermitian a(CMatrix(2, 2, {1, cplx(0, 1), cplx(0, -1), 2}));
    auto p = eigmax_program(a);
    std::ostringstream os;
    dump(p, os);
    auto text = os.str();
    CHECK(text.find("conic-program v1") != std::string::npos);
    CHECK(text.find("lmi 2 1") != std::string::npos);
    CHECK(text.find(",") != std::string::npos);
}
