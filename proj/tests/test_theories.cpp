#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qrt/channels.hpp"
#include "qrt/gates.hpp"
#include "qrt/theories.hpp"

using namespace qrt;
using namespace qrt::theories;
using qla::CMatrix;
using qla::cplx;
using qla::Hermitian;

namespace {

Hermitian maximally_mixed_choi(int d_in, int d_out) {
    return Hermitian(cplx(1.0 / d_out) * CMatrix::identity(d_in * d_out), 1e-9);
}

}  // namespace

TEST_CASE("replacement free set membership") {
    auto fs = replacement_channels(2, 2);
    CHECK(member(fs, maximally_mixed_choi(2, 2)));              // constant channel
    CHECK(member(fs, channels::make_depolarizing(1.0, 2).choi()));
    CHECK_FALSE(member(fs, channels::identity_channel(2).choi()));
    CHECK_FALSE(member(fs, channels::make_depolarizing(0.5, 2).choi()));

    rng::Engine eng(3);
    auto sigma = rng::random_density(eng, 3);
    auto fs23 = replacement_channels(2, 3);
    CHECK(member(fs23, channels::make_replacement(sigma, 2).choi()));
}

TEST_CASE("ppt free set membership") {
    auto fs = ppt_channels(2, 2);
    CHECK(member(fs, maximally_mixed_choi(2, 2)));  // replacement channels are PPT
    CHECK_FALSE(member(fs, channels::identity_channel(2).choi()));

    // isotropic Choi: partial-transpose eigenvalues (1-p)(+-1) + p/2,
    // nonnegative exactly when p >= 2/3
    CHECK_FALSE(member(fs, channels::make_depolarizing(0.5, 2).choi()));
    CHECK(member(fs, channels::make_depolarizing(2.0 / 3.0 + 1e-6, 2).choi()));
    CHECK(member(fs, channels::make_depolarizing(0.9, 2).choi()));
    for (double p : {0.1, 0.4, 0.65, 0.7, 0.95}) {
        auto pt = qla::partial_transpose(channels::make_depolarizing(p, 2).choi(), {2, 2}, {1});
        bool expect = qla::min_eigenvalue(pt) >= -1e-12;
        CHECK(member(fs, channels::make_depolarizing(p, 2).choi()) == expect);
        CHECK(expect == (p >= 2.0 / 3.0 - 1e-9));
    }
}

TEST_CASE("completely stabilizer-preserving channel membership") {
    auto fs = csp_channels(1, 1);
    REQUIRE(fs.vertices.size() == 60);
    CHECK(fs.tp_on_mixture);

    CHECK(member(fs, channels::make_unitary(gates::hadamard()).choi()));
    CHECK(member(fs, channels::make_unitary(gates::phase_s()).choi()));
    CHECK_FALSE(member(fs, channels::make_unitary(gates::phase_t()).choi()));
    // completely dephasing channel is a mixture of two stabilizer projectors
    CHECK(member(fs, channels::make_dephasing(0.5).choi()));

    CHECK_THROWS_AS(csp_channels(2, 3), dimension_error);
}

TEST_CASE("state polytopes") {
    auto stab1 = stab_states(1);
    CHECK(stab1.vertices.size() == 6);
    CHECK(member(stab1, Hermitian(cplx(0.5) * CMatrix::identity(2), 1e-9)));

    auto tproj = gates::projector(gates::phase_t() * gates::plus_state(1));
    CHECK_FALSE(member(stab1, tproj));

    auto coh = diag_states(3);
    CHECK(coh.vertices.size() == 3);
    CHECK(member(coh, Hermitian(cplx(1.0 / 3) * CMatrix::identity(3), 1e-9)));
    const double s3 = 1.0 / std::sqrt(3.0);
    CHECK_FALSE(member(coh, gates::projector({s3, s3, s3})));
    CHECK_THROWS_AS(diag_states(0), dimension_error);
}

TEST_CASE("convexity under mixing of accepted elements") {
    rng::Engine eng(11);
    for (auto fs : {replacement_channels(2, 2), ppt_channels(2, 2)}) {
        for (int t = 0; t < 5; ++t) {
            auto a = sample_free(fs, eng);
            auto b = sample_free(fs, eng);
            REQUIRE(a);
            REQUIRE(b);
            CHECK(member(fs, *a));
            CHECK(member(fs, *b));
            Hermitian mid(cplx(0.5) * (a->mat() + b->mat()), 1e-9);
            CHECK(member(fs, mid));
        }
    }
    auto stab1 = stab_states(1);
    for (int t = 0; t < 5; ++t) {
        auto a = sample_free(stab1, eng);
        auto b = sample_free(stab1, eng);
        Hermitian mid(cplx(0.5) * (a->mat() + b->mat()), 1e-9);
        CHECK(member(stab1, mid));
    }
}

TEST_CASE("csp samples are members with trace preservation in aggregate") {
    rng::Engine eng(5);
    auto fs = csp_channels(1, 1);
    for (int t = 0; t < 3; ++t) {
        auto s = sample_free(fs, eng);
        REQUIRE(s);
        auto marg = qla::partial_trace(*s, {2, 2}, {0});
        CHECK((marg.mat() - CMatrix::identity(2)).frobenius_norm() < 1e-8);
        CHECK(member(fs, *s));
    }
}
