#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "qrt/cli.hpp"
#include "qrt/gates.hpp"

using namespace qrt;
using namespace qrt::cli;

namespace {

double printed_value(const std::string& text) {
    auto pos = text.find("value = ");
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + 8));
}

}  // namespace

TEST_CASE("channel spec parsing") {
    auto d = parse_channel_spec("depolarizing:p=0.3");
    CHECK(d.d_in() == 2);
    CHECK((d.choi().mat() - channels::make_depolarizing(0.3, 2).choi().mat()).frobenius_norm() <
          1e-12);

    auto dd = parse_channel_spec("depolarizing:p=0.2,d=3");
    CHECK(dd.d_in() == 3);

    auto dz = parse_channel_spec("dephrasure:p=0.1,q=0.2");
    CHECK(dz.d_out() == 3);

    CHECK(parse_channel_spec("identity:d=4").d_in() == 4);
    CHECK(parse_channel_spec("tgate").d_in() == 2);
    CHECK(parse_channel_spec("ccz").d_in() == 8);

    CHECK_THROWS(parse_channel_spec("unknown:x=1"));
    CHECK_THROWS(parse_channel_spec("depolarizing"));       // missing p
    CHECK_THROWS(parse_channel_spec("depolarizing:p=2.0"));  // out of range
}

TEST_CASE("state spec parsing") {
    auto t = parse_state_spec("T");
    CHECK(t.dim() == 2);
    auto ccz = parse_state_spec("CCZ");
    CHECK(ccz.dim() == 8);
    CHECK(parse_state_spec("mixed:d=3").dim() == 3);
    CHECK(parse_state_spec("ket:i=1,d=4").dim() == 4);
    CHECK_THROWS(parse_state_spec("no-such-state"));
}

TEST_CASE("measure command matches the documented examples") {
    std::ostringstream out, err;
    MeasureArgs args;
    args.theory = "ns";
    args.channel = "depolarizing:p=0.3";
    args.monotone = "weight";
    REQUIRE(cmd_measure(args, out, err) == kExitOk);
    CHECK(printed_value(out.str()) == Catch::Approx(0.3).margin(1e-6));
    CHECK(out.str().find("certificate: pass") != std::string::npos);

    out.str("");
    args = MeasureArgs{};
    args.theory = "stab";
    args.state = "T";
    args.monotone = "fidelity";
    REQUIRE(cmd_measure(args, out, err) == kExitOk);
    CHECK(printed_value(out.str()) == Catch::Approx(0.853553).margin(1e-6));

    out.str("");
    args = MeasureArgs{};
    args.theory = "ppt";
    args.channel = "identity:d=2";
    args.monotone = "fidelity";
    REQUIRE(cmd_measure(args, out, err) == kExitOk);
    CHECK(printed_value(out.str()) == Catch::Approx(0.5).margin(1e-6));

    out.str("");
    args = MeasureArgs{};
    args.theory = "sep";
    args.channel = "identity:d=2";
    args.monotone = "robustness";
    REQUIRE(cmd_measure(args, out, err) == kExitOk);
    CHECK(printed_value(out.str()) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("measure command usage errors exit with code 2") {
    std::ostringstream out, err;
    MeasureArgs args;
    args.theory = "ns";
    args.monotone = "weight";  // neither channel nor state
    CHECK(cmd_measure(args, out, err) == kExitUsage);

    args.channel = "depolarizing:p=0.3";
    args.monotone = "entropy";
    CHECK(cmd_measure(args, out, err) == kExitUsage);

    args.monotone = "weight";
    args.channel = "nonsense";
    CHECK(cmd_measure(args, out, err) == kExitUsage);

    // state theory applied to a channel
    args = MeasureArgs{};
    args.theory = "coherence";
    args.channel = "identity:d=2";
    args.monotone = "weight";
    CHECK(cmd_measure(args, out, err) == kExitUsage);
}

TEST_CASE("bound command") {
    std::ostringstream out, err;
    BoundArgs args;
    args.id = "error-floor";
    args.inputs = {{"R", 2.5}, {"W", 0.4}, {"F", 0.25}};
    REQUIRE(cmd_bound(args, out, err) == kExitOk);
    auto text = out.str();
    CHECK(text.find("robustness form: 0.375") != std::string::npos);
    CHECK(text.find("weight form: 0.3") != std::string::npos);

    out.str("");
    args.id = "copy-floor";
    args.inputs = {{"R", 4.0 - 2.0 * std::sqrt(2.0)}, {"W", 0.0}, {"F", 9.0 / 16.0},
                   {"m", 1}, {"eps", 0.09}};
    REQUIRE(cmd_bound(args, out, err) == kExitOk);
    CHECK(out.str().find("[inapplicable]") != std::string::npos);

    out.str("");
    args.id = "no-such-bound";
    CHECK(cmd_bound(args, out, err) == kExitUsage);

    out.str("");
    args.id = "copy-floor";
    args.inputs = {{"R", 2.0}};
    CHECK(cmd_bound(args, out, err) == kExitUsage);  // missing inputs
}

TEST_CASE("figure generation") {
    SECTION("tightness row at p = 0.4") {
        FigureSpec spec;
        spec.id = "2a";
        spec.grid = {0.4};
        auto data = compute_figure(spec);
        REQUIRE(data.rows.size() == 1);
        REQUIRE(data.columns.size() == 4);
        CHECK(data.rows[0][1] == Catch::Approx(0.3).margin(1e-6));  // robustness bound
        CHECK(data.rows[0][2] == Catch::Approx(0.3).margin(1e-6));  // weight bound
        CHECK(data.rows[0][3] == Catch::Approx(0.3).margin(1e-5));  // ns error
    }

    SECTION("csv output is deterministic and well formed") {
        FigureSpec spec;
        spec.id = "2a";
        spec.grid = {0.2, 0.6};
        auto a = to_csv(compute_figure(spec));
        auto b = to_csv(compute_figure(spec));
        CHECK(a == b);
        CHECK(a.rfind("p,robustness_bound,weight_bound,ns_achievable_error\n", 0) == 0);
        CHECK(std::count(a.begin(), a.end(), '\n') == 3);
    }

    SECTION("unknown figure id exits with usage code") {
        std::ostringstream out, err;
        FigureSpec spec;
        spec.id = "9z";
        CHECK(cmd_fig(spec, out, err) == kExitUsage);
    }

    SECTION("dephrasure figure stays within range") {
        FigureSpec spec;
        spec.id = "2c";
        spec.grid = {0.3};
        auto data = compute_figure(spec);
        REQUIRE(data.rows.size() == 1);
        CHECK(data.rows[0][1] >= 0.0);
        CHECK(data.rows[0][1] <= 1.0);
        CHECK(data.rows[0][3] >= data.rows[0][1] - 1e-6);  // achievable error above the floor
    }
}
