#include "qrt/selftest.hpp"

#include <chrono>
#include <functional>
#include <cmath>
#include <ostream>
#include <sstream>

#include "qrt/bounds.hpp"
#include "qrt/channels.hpp"
#include "qrt/comm.hpp"
#include "qrt/gates.hpp"
#include "qrt/measures.hpp"
#include "qrt/random.hpp"
#include "qrt/stab.hpp"
#include "qrt/theories.hpp"

namespace qrt::selftest {

using qla::CMatrix;
using qla::cplx;
using qla::DensityOperator;
using qla::Hermitian;

namespace {

// every program solved by criteria 1-6 lands here for the certification sweep
struct SolveLedger {
    struct Entry {
        std::string what;
        double gap;
        bool witness_checked;
        bool witness_pass;
    };
    std::vector<Entry> entries;

    double note(const std::string& what, const measures::MeasureResult& r) {
        entries.push_back({what, r.diag.gap, r.certification.checked, r.certification.pass});
        return r.value;
    }
    void note_plain(const std::string& what, double gap) {
        entries.push_back({what, gap, false, true});
    }
};

struct Check {
    bool pass = true;
    std::ostringstream detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            pass = false;
            detail << (detail.str().empty() ? "" : "; ") << what;
        }
    }
    void expect_near(double got, double want, double tolerance, const std::string& what) {
        if (!(std::abs(got - want) <= tolerance)) {
            pass = false;
            detail << (detail.str().empty() ? "" : "; ") << what << " got " << got << " want "
                   << want << " tol " << tolerance;
        }
    }
};

DensityOperator t_state() {
    return DensityOperator(gates::projector(gates::phase_t() * gates::plus_state(1)), {2});
}

DensityOperator ccz_state() {
    return DensityOperator(gates::projector(gates::ccz() * gates::plus_state(3)), {8});
}

Hermitian depolarized_t_op(double p) {
    auto proj = gates::projector(gates::phase_t() * gates::plus_state(1));
    return Hermitian(cplx(1.0 - p) * proj.mat() + cplx(p / 2.0) * CMatrix::identity(2), 1e-12);
}

// --- criteria ------------------------------------------------------------------

Check criterion_ns_tightness(SolveLedger& ledger) {
    Check c;
    auto fs = theories::replacement_channels(2, 2);
    auto fid = measures::free_fidelity(channels::identity_channel(2), fs);
    ledger.note("choi fidelity of id_2 over replacement", fid);
    for (int i = 1; i <= 9; ++i) {
        double p = 0.1 * i;
        auto e = channels::make_depolarizing(p, 2);
        double r = ledger.note("robustness depolarizing p=" + std::to_string(p),
                               measures::robustness(e, fs));
        double w = ledger.note("weight depolarizing p=" + std::to_string(p),
                               measures::weight(e, fs));
        auto ef = bounds::error_floor_unitary(std::max(1.0, r), std::clamp(w, 0.0, 1.0),
                                              fid.value);
        c.expect_near(ef.robustness.value, 0.75 * p, 1e-6, "robustness floor");
        c.expect_near(ef.weight.value, 0.75 * p, 1e-6, "weight floor");
        auto ns = comm::ns_achievable_fidelity_info(e, 2);
        ledger.note_plain("ns fidelity depolarizing p=" + std::to_string(p), ns.gap);
        c.expect_near(ns.value, 1.0 - 0.75 * p, 1e-5, "ns fidelity");
    }
    return c;
}

Check criterion_closed_forms(SolveLedger& ledger) {
    Check c;
    auto fs = theories::replacement_channels(2, 2);
    auto fid = measures::free_fidelity(channels::identity_channel(2), fs);
    for (int i = 1; i <= 9; ++i) {
        double p = 0.1 * i;
        auto z = channels::make_dephasing(p);
        double r = ledger.note("robustness dephasing p=" + std::to_string(p),
                               measures::robustness(z, fs));
        double w = ledger.note("weight dephasing p=" + std::to_string(p),
                               measures::weight(z, fs));
        auto ef = bounds::error_floor_unitary(std::max(1.0, r), std::clamp(w, 0.0, 1.0),
                                              fid.value);
        c.expect_near(ef.robustness.value, 0.5 - std::abs(p - 0.5), 1e-6,
                      "dephasing robustness floor");
        c.expect(ef.weight.flag == bounds::Flag::inapplicable, "dephasing weight applicable");

        double gamma = p;
        auto ad = channels::make_amplitude_damping(gamma);
        double ra = ledger.note("robustness damping g=" + std::to_string(gamma),
                                measures::robustness(ad, fs));
        double wa = ledger.note("weight damping g=" + std::to_string(gamma),
                                measures::weight(ad, fs));
        auto efa = bounds::error_floor_unitary(std::max(1.0, ra), std::clamp(wa, 0.0, 1.0),
                                               fid.value);
        c.expect_near(efa.robustness.value,
                      (2.0 + gamma - 2.0 * std::sqrt(1.0 - gamma)) / 4.0, 1e-6,
                      "damping robustness floor");
        c.expect(efa.weight.flag == bounds::Flag::inapplicable, "damping weight applicable");
    }
    return c;
}

Check criterion_choi_fidelity_constants(SolveLedger& ledger) {
    Check c;
    for (int d : {2, 3, 4}) {
        auto fs = theories::replacement_channels(d, d);
        auto fid = measures::free_fidelity(channels::identity_channel(d), fs);
        ledger.note("choi fidelity id over replacement d=" + std::to_string(d), fid);
        c.expect_near(fid.value, 1.0 / (d * d), 1e-7, "replacement fidelity");
    }
    for (int d : {2, 3}) {
        auto fs = theories::ppt_channels(d, d);
        auto fid = measures::free_fidelity(channels::identity_channel(d), fs);
        ledger.note("choi fidelity id over ppt d=" + std::to_string(d), fid);
        c.expect_near(fid.value, 1.0 / d, 1e-7, "ppt fidelity");
    }
    return c;
}

Check criterion_stabilizer_fidelities(SolveLedger& ledger, const std::string& cache_dir) {
    Check c;
    auto stab1 = theories::stab_states(1, cache_dir);
    auto stab2 = theories::stab_states(2, cache_dir);
    auto stab3 = theories::stab_states(3, cache_dir);

    auto ft = measures::free_fidelity(t_state(), stab1);
    ledger.note("stabilizer fidelity of the T state", ft);
    c.expect_near(ft.value, (2.0 + std::sqrt(2.0)) / 4.0, 1e-9, "T fidelity");

    auto fccz = measures::free_fidelity(ccz_state(), stab3);
    ledger.note("stabilizer fidelity of the CCZ state", fccz);
    c.expect_near(fccz.value, 9.0 / 16.0, 1e-9, "CCZ fidelity");

    auto tvec = gates::phase_t() * gates::plus_state(1);
    std::vector<cplx> tt(4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) tt[i * 2 + j] = tvec[i] * tvec[j];
    auto ftt = measures::free_fidelity(DensityOperator(gates::projector(tt), {4}), stab2);
    ledger.note("stabilizer fidelity of two T copies", ftt);
    c.expect_near(ftt.value, ft.value * ft.value, 1e-9, "multiplicativity over 60 vertices");
    return c;
}

Check criterion_gate_synthesis(SolveLedger& ledger, const std::string& cache_dir) {
    Check c;
    auto stab1 = theories::stab_states(1, cache_dir);
    auto stab3 = theories::stab_states(3, cache_dir);

    auto rt = measures::robustness(t_state(), stab1);
    ledger.note("robustness of the T state", rt);
    auto rccz = measures::robustness(ccz_state(), stab3);
    ledger.note("robustness of the CCZ state (1080-vertex program)", rccz);

    auto tf = bounds::transform_floor(rt.value, rccz.value, 0.0, 0.0);
    c.expect_near(tf.robustness.value, 3.6335, 5e-3, "exact synthesis floor");
    c.expect(std::ceil(tf.robustness.value - 1e-12) == 4.0, "ceiling is 4 gates");

    auto cf = bounds::copy_floor(rt.value, 0.0, 9.0 / 16.0, 1, 0.09);
    c.expect(cf.robustness.value > 3.0, "copy floor above 3 at eps 0.09");
    return c;
}

Check criterion_weight_dominance(SolveLedger& ledger, const std::string& cache_dir) {
    Check c;
    auto stab3 = theories::stab_states(3, cache_dir);
    const double f_ccz = 9.0 / 16.0;
    for (int i = 1; i <= 5; ++i) {
        double p = 0.1 * i;
        Hermitian rho1 = depolarized_t_op(p);
        Hermitian rho3 = qla::kron(qla::kron(rho1, rho1), rho1);
        double w = ledger.note("weight of three depolarized T copies p=" + std::to_string(p),
                               measures::weight(DensityOperator(rho3, {8}), stab3));
        double weight_bound = (1.0 - f_ccz) * w;
        double lmin = std::pow(qla::min_eigenvalue(rho1), 3);
        double previous = (1.0 - f_ccz) * lmin;
        c.expect(weight_bound >= 1.1 * previous,
                 "weight bound short of a 10% margin at p=" + std::to_string(p));
    }
    return c;
}

Check criterion_enumeration(const std::string& cache_dir) {
    Check c;
    const long expected[] = {6, 60, 1080, 36720};
    for (int n = 1; n <= 4; ++n) {
        auto t0 = std::chrono::steady_clock::now();
        auto poly = stab::enumerate(n, n == 4 ? cache_dir : "");
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        c.expect(long(poly.vertices.size()) == expected[n - 1],
                 "count mismatch at n=" + std::to_string(n));
        c.expect(stab::expected_count(n) == expected[n - 1], "closed form mismatch");
        if (n == 4) c.expect(secs <= 60.0, "n=4 enumeration exceeded 60 s");
    }
    return c;
}

Check criterion_certification(const SolveLedger& ledger) {
    Check c;
    for (const auto& e : ledger.entries) {
        c.expect(e.gap <= 1e-7, "gap above 1e-7 in: " + e.what);
        if (e.witness_checked) c.expect(e.witness_pass, "witness failed in: " + e.what);
    }
    c.expect(!ledger.entries.empty(), "empty solve ledger");
    return c;
}

Check criterion_multiplicativity() {
    Check c;
    rng::Engine eng(2024);
    auto ns2 = theories::replacement_channels(2, 2);
    auto ns4 = theories::replacement_channels(4, 4);
    auto ppt2 = theories::ppt_channels(2, 2);
    auto ppt4 = theories::ppt_channels(4, 4);
    for (int trial = 0; trial < 50; ++trial) {
        channels::Channel e(2, 2, rng::random_channel_choi(eng, 2, 2, 4));
        channels::Channel f(2, 2, rng::random_channel_choi(eng, 2, 2, 2));
        auto ef = channels::tensor(e, f);
        for (int theory = 0; theory < 2; ++theory) {
            const auto& fs2 = theory == 0 ? ns2 : ppt2;
            const auto& fs4 = theory == 0 ? ns4 : ppt4;
            double re = measures::robustness(e, fs2).value;
            double rf = measures::robustness(f, fs2).value;
            double ref = measures::robustness(ef, fs4).value;
            c.expect(ref <= re * rf * (1 + 1e-6),
                     std::string(theory == 0 ? "ns" : "ppt") + " robustness submultiplicative");
            double we = measures::weight(e, fs2).value;
            double wf = measures::weight(f, fs2).value;
            double wef = measures::weight(ef, fs4).value;
            c.expect(wef >= we * wf * (1 - 1e-6) - 1e-9,
                     std::string(theory == 0 ? "ns" : "ppt") + " weight supermultiplicative");
        }
        if (!c.pass) break;
    }
    return c;
}

Check criterion_probabilistic(SolveLedger& ledger) {
    Check c;
    // deterministic limit is exact
    auto det = bounds::error_floor_unitary(1.8, 0.4, 0.6);
    auto prob = bounds::probabilistic_floor_channel(1.8, 0.4, 0.6, 1.0, 1.0);
    c.expect(prob.robustness.value == det.robustness.value, "robustness limit not exact");
    c.expect(prob.weight_loose.value == det.weight.value, "loose weight limit not exact");
    c.expect(prob.weight_tight.value == det.weight.value, "tight weight limit not exact");
    auto probs = bounds::probabilistic_floor_state(1.8, 0.4, 0.6, 1.0, 1.0);
    c.expect(probs.weight_loose.value == det.weight.value, "state loose limit not exact");

    // three-level filtering example
    const double s = 1.0 / std::sqrt(2.0);
    CMatrix m(3, 3);
    auto plus12 = gates::projector({0, s, s});
    m = cplx(0.5) * gates::projector(gates::ket(0, 3)).mat() + cplx(0.5) * plus12.mat();
    DensityOperator rho(Hermitian(m, 1e-12), {3});
    auto coh = theories::diag_states(3);
    auto w = measures::weight(rho, coh);
    ledger.note("weight of the filtering example state", w);
    c.expect_near(w.value, 0.5, 1e-8, "filtering-state weight");
    auto pf = bounds::probabilistic_floor_state(2.0, w.value, 0.5, 0.5, 0.0);
    c.expect(pf.weight_tight.value == 0.0, "tight floor at trM = 0");
    return c;
}

Check criterion_mutual_information(SolveLedger& ledger) {
    Check c;
    auto id2 = comm::channel_mutual_information(channels::identity_channel(2));
    c.expect_near(id2.value_bits, 2.0, 1e-7, "identity mutual information");
    auto fs = theories::replacement_channels(2, 2);
    for (int i = 1; i <= 9; ++i) {
        double p = 0.1 * i;
        auto mi = comm::channel_mutual_information(channels::make_depolarizing(p, 2));
        double a = 1.0 - 0.75 * p;
        double expect = 2.0 + a * std::log2(a) + (0.75 * p) * std::log2(p / 4.0);
        c.expect_near(mi.value_bits, expect, 1e-6, "isotropic closed form at p=" +
                                                        std::to_string(p));
        double r = measures::robustness(channels::make_depolarizing(p, 2), fs).value;
        auto parallel = bounds::rate_ceiling_parallel(mi.value_bits, 0.25);
        auto adaptive = bounds::rate_ceiling_adaptive(std::max(1.0, r), 0.25);
        c.expect(parallel.value <= adaptive.value + 1e-9,
                 "parallel ceiling above adaptive at p=" + std::to_string(p));
        (void)ledger;
    }
    return c;
}

}  // namespace

std::vector<CriterionResult> run_all(std::ostream& progress, const std::string& cache_dir) {
    std::vector<CriterionResult> results;
    SolveLedger ledger;

    struct Item {
        int id;
        const char* name;
        double budget_seconds;  // 0 = no stated budget
        std::function<Check()> run;
    };
    const std::vector<Item> items = {
        {1, "no-signalling tightness for depolarizing channels", 30,
         [&] { return criterion_ns_tightness(ledger); }},
        {2, "dephasing and amplitude-damping closed forms", 0,
         [&] { return criterion_closed_forms(ledger); }},
        {3, "Choi-fidelity constants", 0, [&] { return criterion_choi_fidelity_constants(ledger); }},
        {4, "stabilizer fidelities and multiplicativity", 0,
         [&] { return criterion_stabilizer_fidelities(ledger, cache_dir); }},
        {5, "gate synthesis floors", 300, [&] { return criterion_gate_synthesis(ledger, cache_dir); }},
        {6, "weight bound dominates the eigenvalue bound", 0,
         [&] { return criterion_weight_dominance(ledger, cache_dir); }},
        {7, "stabilizer enumeration counts", 0, [&] { return criterion_enumeration(cache_dir); }},
        {8, "solver certification across criteria 1-6", 0,
         [&] { return criterion_certification(ledger); }},
        {9, "tensor sub/supermultiplicativity", 0, [&] { return criterion_multiplicativity(); }},
        {10, "probabilistic limits and the filtering example", 0,
         [&] { return criterion_probabilistic(ledger); }},
        {11, "channel mutual information", 0, [&] { return criterion_mutual_information(ledger); }},
    };

    for (const auto& item : items) {
        auto t0 = std::chrono::steady_clock::now();
        Check c;
        try {
            c = item.run();
        } catch (const std::exception& e) {
            c.pass = false;
            c.detail << "exception: " << e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (item.budget_seconds > 0 && secs > item.budget_seconds) {
            c.pass = false;
            c.detail << (c.detail.str().empty() ? "" : "; ") << "runtime " << secs
                     << " s exceeded the " << item.budget_seconds << " s budget";
        }
        CriterionResult r{item.id, item.name, c.pass, c.detail.str(), secs};
        progress << "criterion " << r.id << " [" << r.name << "]: "
                 << (r.pass ? "PASS" : "FAIL");
        if (!r.pass) progress << " (" << r.detail << ")";
        char buf[32];
        std::snprintf(buf, sizeof buf, "  (%.2f s)", secs);
        progress << buf << "\n";
        progress.flush();
        results.push_back(std::move(r));
    }
    return results;
}

bool all_pass(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return !results.empty();
}

}  // namespace qrt::selftest
