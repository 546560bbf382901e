#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "qrt/channels.hpp"
#include "qrt/gates.hpp"
#include "qrt/random.hpp"

using namespace qrt;
using namespace qrt::channels;
using qla::CMatrix;
using qla::cplx;
using qla::Hermitian;

namespace {

DensityOperator maximally_mixed(int d) {
    return DensityOperator(Hermitian(cplx(1.0 / d) * CMatrix::identity(d)), {d});
}

}  // namespace

TEST_CASE("unitary channel construction") {
    auto id2 = make_unitary(CMatrix::identity(2));
    auto eig = qla::eig_hermitian(id2.choi());
    CHECK(eig.values.back() == Catch::Approx(2.0));
    CHECK(eig.values[eig.values.size() - 2] < 1e-12);  // rank 1
    CHECK(id2.choi().real_trace() == Catch::Approx(2.0));

    auto tgate = make_unitary(gates::phase_t());
    // Choi pure state proportional to |00> + e^{i pi/4} |11>
    auto et = qla::eig_hermitian(tgate.choi());
    CHECK(et.values.back() == Catch::Approx(2.0));
    cplx ratio = et.vectors(3, 3) / et.vectors(0, 3);
    CHECK(std::abs(ratio - std::polar(1.0, M_PI / 4)) < 1e-10);

    auto cczg = make_unitary(gates::ccz());
    auto ec = qla::eig_hermitian(cczg.choi());
    CHECK(ec.values.back() == Catch::Approx(8.0));
    CHECK(cczg.choi().real_trace() == Catch::Approx(8.0));

    CHECK_THROWS(make_unitary(CMatrix(2, 2, {1, 1, 0, 1})));
}

TEST_CASE("named noise channels") {
    auto d0 = make_depolarizing(0.0, 2);
    CHECK((d0.choi().mat() - identity_channel(2).choi().mat()).frobenius_norm() < 1e-12);

    auto d1 = make_depolarizing(1.0, 2);
    CHECK((d1.choi().mat() - cplx(0.5) * CMatrix::identity(4)).frobenius_norm() < 1e-12);

    auto ad1 = make_amplitude_damping(1.0);
    auto rep0 = make_replacement(DensityOperator(gates::projector(gates::ket(0, 2))), 2);
    CHECK((ad1.choi().mat() - rep0.choi().mat()).frobenius_norm() < 1e-12);

    // dephasing Kraus form
    auto z3 = make_dephasing(0.3);
    auto ks = kraus_operators(z3);
    REQUIRE(ks.size() == 2);

    auto dz = make_dephrasure(0.2, 0.4);
    CHECK(dz.d_out() == 3);
    // erasure flag gets weight q for any input
    auto out = apply(dz, gates::projector(gates::ket(0, 2)));
    CHECK(out(2, 2).real() == Catch::Approx(0.4).margin(1e-12));

    CHECK_THROWS(make_depolarizing(1.5, 2));
    CHECK_THROWS(make_dephrasure(-0.1, 0.2));
}

TEST_CASE("replacement channels") {
    auto rep = make_replacement(maximally_mixed(2), 2);
    CHECK((rep.choi().mat() - cplx(0.5) * CMatrix::identity(4)).frobenius_norm() < 1e-12);

    rng::Engine eng(3);
    auto sigma = rng::random_density(eng, 3);
    auto r2 = make_replacement(sigma, 2);
    CHECK(r2.d_out() == 3);
    auto marg = qla::partial_trace(r2.choi(), {2, 3}, {0});
    CHECK((marg.mat() - CMatrix::identity(2)).frobenius_norm() < 1e-10);

    auto psi = rng::random_pure_state(eng, 2);
    auto rp = make_replacement(DensityOperator(gates::projector(psi)), 2);
    auto eig = qla::eig_hermitian(rp.choi());
    int rank = 0;
    for (double v : eig.values)
        if (v > 1e-10) ++rank;
    CHECK(rank == 2);
}

TEST_CASE("tensor, compose, mix") {
    auto id2 = identity_channel(2);
    auto t = tensor(id2, id2);
    CHECK((t.choi().mat() - identity_channel(4).choi().mat()).frobenius_norm() < 1e-12);

    double p = 0.3, q = 0.45;
    auto comp = compose(make_depolarizing(p, 2), make_depolarizing(q, 2));
    auto expect = make_depolarizing(p + q - p * q, 2);
    CHECK((comp.choi().mat() - expect.choi().mat()).frobenius_norm() < 1e-10);

    auto mixed = mix({{1 - p, id2}, {p, make_replacement(maximally_mixed(2), 2)}});
    CHECK((mixed.choi().mat() - make_depolarizing(p, 2).choi().mat()).frobenius_norm() < 1e-12);

    CHECK_THROWS(compose(identity_channel(2), make_dephrasure(0.1, 0.1)));
    CHECK_THROWS(mix({{0.5, id2}, {0.4, id2}}));
}

TEST_CASE("apply matches kraus round trip") {
    rng::Engine eng(5);
    auto j = rng::random_channel_choi(eng, 2, 2, 3);
    Channel e(2, 2, j);
    auto ks = kraus_operators(e);
    auto rebuilt = from_kraus(2, 2, ks);
    CHECK((rebuilt.choi().mat() - e.choi().mat()).frobenius_norm() < 1e-9);

    auto rho = rng::random_density(eng, 2);
    auto direct = apply(e, rho.op());
    CMatrix via_kraus(2, 2);
    for (const auto& k : ks) via_kraus += k * rho.op().mat() * k.adjoint();
    CHECK((direct.mat() - via_kraus).frobenius_norm() < 1e-10);
}

TEST_CASE("choi fidelity") {
    auto id2 = identity_channel(2);
    CHECK(choi_fidelity(id2, id2) == Catch::Approx(1.0).margin(1e-10));
    auto rep = make_replacement(maximally_mixed(2), 2);
    CHECK(choi_fidelity(id2, rep) == Catch::Approx(0.25).margin(1e-10));
    auto id4 = tensor(id2, id2);
    auto rep4 = make_replacement(maximally_mixed(4), 4);
    CHECK(choi_fidelity(id4, rep4) == Catch::Approx(1.0 / 16).margin(1e-10));
}

TEST_CASE("diamond distance") {
    auto id2 = identity_channel(2);
    CHECK(diamond_distance_half(id2, id2) == Catch::Approx(0.0).margin(1e-7));

    auto zconj = make_unitary(gates::pauli_z());
    CHECK(diamond_distance_half(id2, zconj) == Catch::Approx(1.0).margin(1e-6));

    for (double p : {0.3, 0.7}) {
        auto dp = make_depolarizing(p, 2);
        CHECK(diamond_distance_half(dp, id2) == Catch::Approx(0.75 * p).margin(1e-6));
    }
}

TEST_CASE("worst-case fidelity upper bound") {
    auto tgate = make_unitary(gates::phase_t());
    CHECK(worst_case_fidelity_ub(tgate, tgate, 4, 7) == Catch::Approx(1.0).margin(1e-9));

    double p = 0.4;
    auto noisy = compose(make_depolarizing(p, 2), tgate);
    double ub = worst_case_fidelity_ub(noisy, tgate, 16, 7);
    // the maximally entangled input achieves 1 - 3p/4 and is optimal
    CHECK(ub == Catch::Approx(1.0 - 0.75 * p).margin(1e-6));

    // certified-direction relations
    double dd = diamond_distance_half(noisy, tgate);
    CHECK(ub >= 1.0 - dd - 1e-8);
    CHECK(ub <= choi_fidelity(noisy, tgate) + 1e-8);

    CHECK_THROWS(worst_case_fidelity_ub(noisy, make_depolarizing(0.2, 2), 2, 1));
}

TEST_CASE("subchannels accept trace-nonincreasing maps only") {
    // projection onto |0>: Kraus {|0><0|} is trace non-increasing
    CMatrix k0(2, 2);
    k0(0, 0) = 1;
    CMatrix w = qla::kron(CMatrix::identity(2), k0);
    CMatrix phi(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) phi(i * 2 + i, j * 2 + j) = 1.0;
    Hermitian j(w * phi * w.adjoint(), 1e-9);
    CHECK_NOTHROW(SubChannel(2, 2, j));
    CHECK_THROWS(Channel(2, 2, j));
    // doubling map increases trace
    Hermitian jd(cplx(2.0) * identity_channel(2).choi().mat(), 1e-9);
    CHECK_THROWS(SubChannel(2, 2, jd));
}

TEST_CASE("text serialization round trip is bit exact") {
    rng::Engine eng(11);
    auto j = rng::random_channel_choi(eng, 2, 3, 2);
    Channel e(2, 3, j);
    std::stringstream ss;
    save_text(e, ss);
    auto e2 = load_text(ss);
    CHECK(e2.d_in() == 2);
    CHECK(e2.d_out() == 3);
    bool exact = true;
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c)
            exact = exact && e.choi()(r, c) == e2.choi()(r, c);
    CHECK(exact);
}
