#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qrt/bounds.hpp"
#include "qrt/config.hpp"

using namespace qrt::bounds;

TEST_CASE("one-shot error floors") {
    // qubit depolarizing against replacement channels: R = 4 - 3p, W = p,
    // target fidelity 1/4; both floors coincide at 3p/4
    for (double p : {0.1, 0.4, 0.9}) {
        auto ef = error_floor_unitary(4.0 - 3.0 * p, p, 0.25);
        CHECK(ef.robustness.value == Catch::Approx(0.75 * p).margin(1e-12));
        CHECK(ef.weight.value == Catch::Approx(0.75 * p).margin(1e-12));
        CHECK(ef.robustness.usable());
        CHECK(ef.weight.usable());
    }

    // dephasing: W = 0 makes the weight bound inapplicable, never zero-valued ok
    auto ez = error_floor_unitary(2.0 + 4.0 * std::abs(0.3 - 0.5), 0.0, 0.25);
    CHECK(ez.robustness.value == Catch::Approx(0.5 - std::abs(0.3 - 0.5)).margin(1e-12));
    CHECK(ez.weight.flag == Flag::inapplicable);

    // amplitude damping closed form
    double gamma = 0.4;
    double r_ad = 2.0 - gamma + 2.0 * std::sqrt(1.0 - gamma);
    auto ea = error_floor_unitary(r_ad, 0.0, 0.25);
    CHECK(ea.robustness.value ==
          Catch::Approx((2.0 + gamma - 2.0 * std::sqrt(1.0 - gamma)) / 4.0).margin(1e-12));

    // free input at perfect target fidelity: floor clamps to zero
    auto ef0 = error_floor_state(1.0, 0.3, 1.0);
    CHECK(ef0.robustness.value == 0.0);
    CHECK(ef0.weight.value == Catch::Approx(0.0).margin(1e-12));

    CHECK_THROWS(error_floor_unitary(0.5, 0.1, 0.5));
    CHECK_THROWS(error_floor_unitary(2.0, 0.1, 1.5));
}

TEST_CASE("previous eigenvalue bound") {
    auto b = previous_bound(0.25, 0.5625);
    CHECK(b.value == Catch::Approx((1 - 0.5625) * 0.25).margin(1e-15));
    CHECK(previous_bound(0.0, 0.5).flag == Flag::inapplicable);
}

TEST_CASE("copy floors") {
    // noiseless T input, CCZ target: more than three uses below eps ~ 0.095
    double rt = 4.0 - 2.0 * std::sqrt(2.0);
    auto cf = copy_floor(rt, 0.0, 9.0 / 16.0, 1, 0.09);
    CHECK(cf.robustness.value > 3.0);
    CHECK(cf.robustness.value < 3.1);
    CHECK(cf.weight.flag == Flag::inapplicable);
    auto cf2 = copy_floor(rt, 0.0, 9.0 / 16.0, 1, 0.10);
    CHECK(cf2.robustness.value < 3.0);

    SECTION("limit cases") {
        double fm = std::pow(0.8, 2);
        auto near = copy_floor(2.0, 0.5, 0.8, 2, (1 - fm) - 1e-9);
        CHECK(near.weight.value == Catch::Approx(0.0).margin(1e-6));
        auto past = copy_floor(2.0, 0.5, 0.8, 2, (1 - fm) + 1e-9);
        CHECK(past.weight.flag == Flag::vacuous);
    }

    SECTION("halving eps adds exactly 1/log2(1/W) copies") {
        double w = 0.3, f = 0.6;
        auto a = copy_floor(2.0, w, f, 1, 0.01);
        auto b = copy_floor(2.0, w, f, 1, 0.005);
        CHECK(b.weight.value - a.weight.value ==
              Catch::Approx(1.0 / std::log2(1.0 / w)).margin(1e-12));
    }

    SECTION("consistency with the one-shot floor at n = m = 1") {
        // inverting each copy formula at n = 1 reproduces the one-shot floor
        double r = 1.7, w = 0.2, f = 0.5;
        auto ef = error_floor_unitary(r, w, f);
        auto cf_rob = copy_floor(r, w, f, 1, ef.robustness.value + 1e-13);
        CHECK(cf_rob.robustness.value == Catch::Approx(1.0).margin(1e-10));
        auto cf_w = copy_floor(r, w, f, 1, ef.weight.value - 1e-13);
        CHECK(cf_w.weight.value == Catch::Approx(1.0).margin(1e-10));
    }

    SECTION("infeasible corners") {
        auto inf1 = copy_floor(1.0, 0.2, 0.5, 1, 0.1);
        CHECK(inf1.robustness.flag == Flag::infeasible);
        auto inf2 = copy_floor(2.0, 1.0, 0.5, 1, 0.1);
        CHECK(inf2.weight.flag == Flag::infeasible);
    }
}

TEST_CASE("exact transformation floors") {
    double rt = 4.0 - 2.0 * std::sqrt(2.0);
    double rccz = 16.0 / 9.0;
    auto tf = transform_floor(rt, rccz, 0.0, 0.0);
    CHECK(tf.robustness.value == Catch::Approx(std::log2(rccz) / std::log2(rt)).margin(1e-12));
    CHECK(tf.robustness.value == Catch::Approx(3.6335).margin(5e-3));
    CHECK(tf.weight.flag == Flag::undefined);  // both weights zero

    auto same = transform_floor(2.0, 2.0, 0.4, 0.4);
    CHECK(same.robustness.value == Catch::Approx(1.0));
    CHECK(same.weight.value == Catch::Approx(1.0));

    auto nogo = transform_floor(2.0, 2.0, 0.4, 0.0);
    CHECK(nogo.weight.flag == Flag::infeasible);
    CHECK(std::isinf(nogo.weight.value));

    auto fromfree = transform_floor(1.0, 2.0, 1.0, 0.5);
    CHECK(fromfree.robustness.flag == Flag::infeasible);
    CHECK(fromfree.weight.flag == Flag::infeasible);
}

TEST_CASE("rate ceilings") {
    // replacement-channel theory for qubit depolarizing: ceiling log2(4-3p)/2
    for (double p : {0.2, 0.6}) {
        auto rc = rate_ceiling_adaptive(4.0 - 3.0 * p, 0.25);
        CHECK(rc.value == Catch::Approx(std::log2(4.0 - 3.0 * p) / 2.0).margin(1e-12));
    }
    // identity consistency: log(d^2) / log(d^2) = 1
    auto id = rate_ceiling_adaptive(4.0, 0.25);
    CHECK(id.value == Catch::Approx(1.0).margin(1e-12));

    auto par = rate_ceiling_parallel(1.2, 0.25);
    CHECK(par.value == Catch::Approx(0.6).margin(1e-12));

    CHECK(rate_ceiling(1.0, 1.0).flag == Flag::undefined);
    CHECK_THROWS(rate_ceiling(-0.5, 0.5));
}

TEST_CASE("probabilistic floors") {
    SECTION("deterministic limit reproduces the one-shot floors exactly") {
        double r = 1.4, w = 0.35, f = 0.6;
        auto det = error_floor_unitary(r, w, f);
        auto pr = probabilistic_floor_channel(r, w, f, 1.0, 1.0);
        CHECK(pr.robustness.value == det.robustness.value);
        CHECK(pr.weight_loose.value == det.weight.value);
        CHECK(pr.weight_tight.value == det.weight.value);
        auto ps = probabilistic_floor_state(r, w, f, 1.0, 1.0);
        CHECK(ps.weight_loose.value == det.weight.value);
    }

    SECTION("coherence filtering example") {
        // W = 1/2, success probability 1/2, free part fully cut off
        auto ps = probabilistic_floor_state(1.5, 0.5, 0.5, 0.5, 0.0);
        CHECK(ps.weight_tight.value == 0.0);
        CHECK(ps.weight_tight.usable());
        CHECK(ps.weight_loose.value == Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("clamping below the probability threshold") {
        double w = 0.3, f = 0.6;
        double pstar = 1.0 - (1.0 - f) * w;
        auto below = probabilistic_floor_channel(1.5, w, f, pstar - 1e-6, 1.0);
        CHECK(below.weight_loose.flag == Flag::vacuous);
        auto above = probabilistic_floor_channel(1.5, w, f, std::min(1.0, pstar + 1e-6), 1.0);
        CHECK(above.weight_loose.value > 0.0);
    }
}

TEST_CASE("monotonicity sweeps") {
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> ur(1.0, 5.0), uw(0.01, 0.99), uf(0.05, 0.95);
    const double h = 1e-6;
    for (int trial = 0; trial < 50; ++trial) {
        double r = ur(eng), w = uw(eng), f = uf(eng);
        auto base = error_floor_unitary(r, w, f);
        // nonincreasing in F
        CHECK(error_floor_unitary(r, w, f + h).robustness.value <=
              base.robustness.value + 1e-12);
        CHECK(error_floor_unitary(r, w, f + h).weight.value <= base.weight.value + 1e-12);
        // robustness floor nondecreasing as R shrinks toward 1 (floor grows with
        // decreasing R? it grows when R decreases)
        CHECK(error_floor_unitary(r + h, w, f).robustness.value <=
              base.robustness.value + 1e-12);
        // weight floor nondecreasing in W
        CHECK(error_floor_unitary(r, w + h, f).weight.value >= base.weight.value - 1e-12);

        // ranges
        CHECK(base.robustness.value >= 0.0);
        CHECK(base.robustness.value <= 1.0);
        CHECK(base.weight.value >= 0.0);
        CHECK(base.weight.value <= 1.0);

        auto cf = copy_floor(r, w, f, 2, 0.05);
        if (cf.robustness.usable()) CHECK(cf.robustness.value >= 0.0);
        if (cf.weight.usable()) CHECK(cf.weight.value >= 0.0);
        auto rc = rate_ceiling_adaptive(r, f);
        CHECK(rc.value >= 0.0);
    }
}
