#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qrt/bounds.hpp"
#include "qrt/comm.hpp"
#include "qrt/measures.hpp"
#include "qrt/random.hpp"

using namespace qrt;
using namespace qrt::comm;
using qla::CMatrix;
using qla::cplx;
using qla::Hermitian;

TEST_CASE("no-signalling fidelity: identity is achievable exactly") {
    auto info = ns_achievable_fidelity_info(channels::identity_channel(2), 2);
    CHECK(info.status == conic::SolveStatus::optimal);
    CHECK(info.value == Catch::Approx(1.0).margin(1e-7));
    CHECK(info.gap <= 1e-7);
}

TEST_CASE("no-signalling fidelity closed forms") {
    for (double p : {0.15, 0.5, 0.85}) {
        double f = ns_achievable_fidelity(channels::make_depolarizing(p, 2), 2);
        CHECK(f == Catch::Approx(1.0 - 0.75 * p).margin(1e-6));
    }
    for (double p : {0.2, 0.5, 0.8}) {
        double f = ns_achievable_fidelity(channels::make_dephasing(p), 2);
        CHECK(f == Catch::Approx(1.0 - (0.5 - std::abs(p - 0.5))).margin(1e-6));
    }
    for (double g : {0.3, 0.7}) {
        double f = ns_achievable_fidelity(channels::make_amplitude_damping(g), 2);
        CHECK(f ==
              Catch::Approx(1.0 - (2.0 + g - 2.0 * std::sqrt(1.0 - g)) / 4.0).margin(1e-6));
    }
    // a fully useless channel reaches the floor 1/d^2
    double f0 = ns_achievable_fidelity(channels::make_depolarizing(1.0, 2), 2);
    CHECK(f0 == Catch::Approx(0.25).margin(1e-6));

    CHECK_THROWS_AS(ns_achievable_fidelity(channels::identity_channel(3), 3), dimension_error);
}

TEST_CASE("dephrasure channel fits inside the register budget") {
    double f = ns_achievable_fidelity(channels::make_dephrasure(0.3, 0.09), 2);
    CHECK(f > 0.25);
    CHECK(f <= 1.0);
}

TEST_CASE("error floors never exceed the no-signalling error") {
    rng::Engine eng(33);
    auto fs = theories::replacement_channels(2, 2);
    for (int trial = 0; trial < 50; ++trial) {
        channels::Channel e(2, 2, rng::random_channel_choi(eng, 2, 2, 4));
        double r = measures::robustness(e, fs).value;
        double w = measures::weight(e, fs).value;
        auto ef = bounds::error_floor_unitary(r, std::clamp(w, 0.0, 1.0), 0.25);
        double ns_err = 1.0 - ns_achievable_fidelity(e, 2);
        double floor = ef.robustness.value;
        if (ef.weight.usable()) floor = std::max(floor, ef.weight.value);
        CHECK(ns_err >= floor - 1e-6);
    }
}

TEST_CASE("channel mutual information") {
    auto id2 = channel_mutual_information(channels::identity_channel(2));
    CHECK(id2.value_bits == Catch::Approx(2.0).margin(1e-7));
    CHECK(id2.certified);

    auto dfull = channel_mutual_information(channels::make_depolarizing(1.0, 2));
    CHECK(dfull.value_bits == Catch::Approx(0.0).margin(1e-7));

    SECTION("depolarizing matches the isotropic-entropy closed form") {
        for (double p : {0.2, 0.5, 0.8}) {
            double a = 1.0 - 0.75 * p;
            double expect = 2.0 + a * std::log2(a) + (0.75 * p) * std::log2(p / 4.0);
            auto mi = channel_mutual_information(channels::make_depolarizing(p, 2));
            CHECK(mi.value_bits == Catch::Approx(expect).margin(1e-6));
            CHECK(mi.certified);
        }
    }

    SECTION("restarts land on the same optimum (concavity)") {
        auto e = channels::make_amplitude_damping(0.35);
        auto base = channel_mutual_information(e);
        rng::Engine eng(7);
        for (int t = 0; t < 10; ++t) {
            auto start = rng::random_density(eng, 2);
            auto mi = channel_mutual_information(e, 2000, start.op());
            CHECK(std::abs(mi.value_bits - base.value_bits) <= 1e-6);
        }
    }

    SECTION("identity input dimension cap") {
        CHECK_THROWS_AS(
            channel_mutual_information(channels::identity_channel(16)), dimension_error);
    }
}
