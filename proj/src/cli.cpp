#include "qrt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "qrt/comm.hpp"
#include "qrt/gates.hpp"
#include "qrt/selftest.hpp"
#include "qrt/stab.hpp"
#include "qrt/theories.hpp"

namespace qrt::cli {

using qla::CMatrix;
using qla::cplx;
using qla::DensityOperator;
using qla::Hermitian;

namespace {

std::map<std::string, std::string> parse_kv(const std::string& s) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw dimension_error("expected key=value in '" + item + "'");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return kv;
}

double kv_num(const std::map<std::string, std::string>& kv, const std::string& key,
              double fallback, bool required = false) {
    auto it = kv.find(key);
    if (it == kv.end()) {
        if (required) throw dimension_error("missing parameter '" + key + "'");
        return fallback;
    }
    return std::stod(it->second);
}

DensityOperator maximally_mixed(int d) {
    return DensityOperator(Hermitian(cplx(1.0 / d) * CMatrix::identity(d), 1e-12), {d});
}

int qubit_count(int dim) {
    int n = 0;
    while ((1 << n) < dim) ++n;
    if ((1 << n) != dim) throw dimension_error("dimension is not a power of two");
    return n;
}

}  // namespace

channels::Channel parse_channel_spec(const std::string& spec) {
    std::string name = spec;
    std::map<std::string, std::string> kv;
    auto colon = spec.find(':');
    if (colon != std::string::npos) {
        name = spec.substr(0, colon);
        kv = parse_kv(spec.substr(colon + 1));
    }
    if (name == "file") {
        auto it = kv.find("path");
        if (it == kv.end()) throw dimension_error("channel spec: file needs path=...");
        std::ifstream in(it->second);
        if (!in) throw dimension_error("channel spec: cannot open " + it->second);
        return channels::load_text(in);
    }
    if (name.rfind("file=", 0) == 0) {
        std::ifstream in(name.substr(5));
        if (!in) throw dimension_error("channel spec: cannot open " + name.substr(5));
        return channels::load_text(in);
    }
    if (name == "identity") return channels::identity_channel(int(kv_num(kv, "d", 2)));
    if (name == "depolarizing")
        return channels::make_depolarizing(kv_num(kv, "p", 0, true), int(kv_num(kv, "d", 2)));
    if (name == "dephasing") return channels::make_dephasing(kv_num(kv, "p", 0, true));
    if (name == "amplitude_damping")
        return channels::make_amplitude_damping(kv_num(kv, "gamma", 0, true));
    if (name == "dephrasure")
        return channels::make_dephrasure(kv_num(kv, "p", 0, true), kv_num(kv, "q", 0, true));
    if (name == "replacement") {
        int dout = int(kv_num(kv, "d_out", kv_num(kv, "d", 2)));
        return channels::make_replacement(maximally_mixed(dout), int(kv_num(kv, "d_in", 2)));
    }
    if (name == "noisy_t")
        return channels::compose(channels::make_depolarizing(kv_num(kv, "p", 0, true), 2),
                                 channels::make_unitary(gates::phase_t()));
    if (name == "tgate") return channels::make_unitary(gates::phase_t());
    if (name == "hadamard") return channels::make_unitary(gates::hadamard());
    if (name == "sgate") return channels::make_unitary(gates::phase_s());
    if (name == "cnot") return channels::make_unitary(gates::cnot());
    if (name == "cz") return channels::make_unitary(gates::cz());
    if (name == "ccz") return channels::make_unitary(gates::ccz());
    throw dimension_error("unknown channel spec '" + name + "'");
}

DensityOperator parse_state_spec(const std::string& spec) {
    std::string name = spec;
    std::map<std::string, std::string> kv;
    auto colon = spec.find(':');
    if (colon != std::string::npos) {
        name = spec.substr(0, colon);
        kv = parse_kv(spec.substr(colon + 1));
    }
    if (name == "T")
        return DensityOperator(gates::projector(gates::phase_t() * gates::plus_state(1)), {2});
    if (name == "CCZ")
        return DensityOperator(gates::projector(gates::ccz() * gates::plus_state(3)), {8});
    if (name == "CS") {
        CMatrix cs(4, 4);
        cs(0, 0) = cs(1, 1) = cs(2, 2) = 1;
        cs(3, 3) = cplx(0, 1);
        return DensityOperator(gates::projector(cs * gates::plus_state(2)), {4});
    }
    if (name == "mixed") return maximally_mixed(int(kv_num(kv, "d", 2)));
    if (name == "ket") {
        int d = int(kv_num(kv, "d", 2));
        return DensityOperator(gates::projector(gates::ket(int(kv_num(kv, "i", 0)), d)), {d});
    }
    // otherwise treat as a file: "d" then d*d entries as "re im"
    std::ifstream in(spec);
    if (!in) throw dimension_error("unknown state spec or unreadable file '" + spec + "'");
    int d = 0;
    if (!(in >> d) || d < 1) throw dimension_error("state file: bad dimension header");
    CMatrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double re, im;
            if (!(in >> re >> im)) throw dimension_error("state file: truncated entries");
            m(i, j) = cplx(re, im);
        }
    return DensityOperator(Hermitian(m, 1e-8), {d});
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(12) << v;
    return os.str();
}

void print_measure(std::ostream& out, const measures::MeasureResult& r) {
    if (r.infinite) {
        out << "value = infinity (no free element dominates the support)\n";
        out << "certificate: improving ray attached by the solver\n";
        return;
    }
    out << "value = " << fmt(r.value) << "\n";
    if (r.certification.checked) {
        out << "certificate: " << (r.certification.pass ? "pass" : "FAIL")
            << " (normalization violation " << fmt(r.certification.max_violation)
            << ", value mismatch " << fmt(r.certification.value_mismatch) << ")\n";
    } else {
        out << "certificate: not applicable\n";
    }
    out << "solver: " << conic::to_string(r.diag.status) << ", gap " << fmt(r.diag.gap) << ", "
        << r.diag.iterations << " iterations\n";
    if (r.free_element) out << "decomposition: optimal free element available\n";
}

}  // namespace

int cmd_measure(const MeasureArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const bool has_channel = !args.channel.empty();
        const bool has_state = !args.state.empty();
        if (has_channel == has_state) {
            err << "measure: provide exactly one of --channel/--state\n";
            return kExitUsage;
        }
        if (args.theory == "sep") {
            if (!has_channel || args.monotone != "robustness") {
                err << "measure: the sep theory provides the analytic channel robustness only\n";
                return kExitUsage;
            }
            auto e = parse_channel_spec(args.channel);
            double v = measures::sep_robustness_analytic(e);
            out << "value = " << fmt(v) << "\n";
            out << "certificate: closed form (largest Choi eigenvalue)\n";
            out << "solver: not used\n";
            return kExitOk;
        }

        theories::FreeSet fs;
        measures::MeasureResult r;
        if (has_channel) {
            auto e = parse_channel_spec(args.channel);
            if (args.theory == "ns")
                fs = theories::replacement_channels(e.d_in(), e.d_out());
            else if (args.theory == "ppt")
                fs = theories::ppt_channels(e.d_in(), e.d_out());
            else if (args.theory == "stab")
                fs = theories::csp_channels(qubit_count(e.d_in()), qubit_count(e.d_out()),
                                            args.cache_dir);
            else {
                err << "measure: theory '" << args.theory << "' does not apply to channels\n";
                return kExitUsage;
            }
            if (args.monotone == "robustness")
                r = measures::robustness(e, fs);
            else if (args.monotone == "weight")
                r = measures::weight(e, fs);
            else if (args.monotone == "fidelity")
                r = measures::free_fidelity(e, fs);
            else {
                err << "measure: unknown monotone '" << args.monotone << "'\n";
                return kExitUsage;
            }
        } else {
            auto rho = parse_state_spec(args.state);
            if (args.theory == "stab")
                fs = theories::stab_states(qubit_count(rho.dim()), args.cache_dir);
            else if (args.theory == "coherence")
                fs = theories::diag_states(rho.dim());
            else {
                err << "measure: theory '" << args.theory << "' does not apply to states\n";
                return kExitUsage;
            }
            if (args.monotone == "robustness")
                r = measures::robustness(rho, fs);
            else if (args.monotone == "weight")
                r = measures::weight(rho, fs);
            else if (args.monotone == "fidelity")
                r = measures::free_fidelity(rho, fs);
            else {
                err << "measure: unknown monotone '" << args.monotone << "'\n";
                return kExitUsage;
            }
        }
        print_measure(out, r);
        return (r.infinite || r.diag.status == conic::SolveStatus::optimal) ? kExitOk
                                                                            : kExitNumerical;
    } catch (const numerical_error& e) {
        err << "measure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "measure: " << e.what() << "\n";
        return kExitUsage;
    }
}

namespace {

double need(const BoundArgs& a, const std::string& key) {
    auto it = a.inputs.find(key);
    if (it == a.inputs.end()) throw dimension_error("bound: missing input --" + key);
    return it->second;
}

double maybe(const BoundArgs& a, const std::string& key, double fallback) {
    auto it = a.inputs.find(key);
    return it == a.inputs.end() ? fallback : it->second;
}

void print_bound(std::ostream& out, const bounds::BoundValue& b) {
    out << b.provenance << ": ";
    if (std::isinf(b.value))
        out << "inf";
    else
        out << fmt(b.value);
    out << " [" << bounds::to_string(b.flag) << "]\n";
}

}  // namespace

int cmd_bound(const BoundArgs& args, std::ostream& out, std::ostream& err) {
    try {
        for (auto& [k, v] : args.inputs) out << "input " << k << " = " << fmt(v) << "\n";
        if (args.id == "error-floor" || args.id == "state-error-floor") {
            auto ef = args.id == "error-floor"
                          ? bounds::error_floor_unitary(need(args, "R"), need(args, "W"),
                                                        need(args, "F"))
                          : bounds::error_floor_state(need(args, "R"), need(args, "W"),
                                                      need(args, "F"));
            print_bound(out, ef.robustness);
            print_bound(out, ef.weight);
        } else if (args.id == "previous-bound") {
            print_bound(out, bounds::previous_bound(need(args, "lambda_min"), need(args, "F")));
        } else if (args.id == "copy-floor") {
            auto cf = bounds::copy_floor(need(args, "R"), need(args, "W"), need(args, "F"),
                                         int(maybe(args, "m", 1)), need(args, "eps"));
            print_bound(out, cf.robustness);
            print_bound(out, cf.weight);
        } else if (args.id == "transform-floor") {
            auto tf = bounds::transform_floor(need(args, "R"), need(args, "R_out"),
                                              need(args, "W"), need(args, "W_out"));
            print_bound(out, tf.robustness);
            print_bound(out, tf.weight);
        } else if (args.id == "rate-ceiling") {
            if (args.inputs.count("Dinf"))
                print_bound(out, bounds::rate_ceiling_parallel(need(args, "Dinf"),
                                                               need(args, "F")));
            if (args.inputs.count("R"))
                print_bound(out,
                            bounds::rate_ceiling_adaptive(need(args, "R"), need(args, "F")));
            if (!args.inputs.count("Dinf") && !args.inputs.count("R"))
                throw dimension_error("bound: rate-ceiling needs --R or --Dinf");
        } else if (args.id == "prob-floor" || args.id == "prob-state-floor") {
            auto pf = args.id == "prob-floor"
                          ? bounds::probabilistic_floor_channel(
                                need(args, "R"), need(args, "W"), need(args, "F"),
                                need(args, "p"), maybe(args, "trM", 1.0))
                          : bounds::probabilistic_floor_state(
                                need(args, "R"), need(args, "W"), need(args, "F"),
                                need(args, "p"), maybe(args, "trM", 1.0));
            print_bound(out, pf.robustness);
            print_bound(out, pf.weight_loose);
            print_bound(out, pf.weight_tight);
        } else {
            err << "bound: unknown id '" << args.id << "'\n";
            return kExitUsage;
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "bound: " << e.what() << "\n";
        return kExitUsage;
    }
}

// --- figures -------------------------------------------------------------------

namespace {

std::vector<double> linear_grid(double lo, double hi, int count) {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
    return g;
}

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> g(count);
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < count; ++i) g[i] = std::pow(10.0, llo + (lhi - llo) * i / (count - 1));
    return g;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// error floors of a channel against the identity target under the
// replacement-channel theory, plus the no-signalling achievable error
struct NsFigureRow {
    double rob, weight, ns_err;
};

NsFigureRow ns_figure_point(const channels::Channel& e, double f_target, bool with_ns) {
    auto fs = theories::replacement_channels(e.d_in(), e.d_out());
    double r = measures::robustness(e, fs).value;
    double w = clamp01(measures::weight(e, fs).value);
    auto ef = bounds::error_floor_unitary(std::max(1.0, r), w, f_target);
    NsFigureRow row{};
    row.rob = ef.robustness.value;
    row.weight = ef.weight.usable() ? ef.weight.value : 0.0;
    row.ns_err = with_ns ? 1.0 - comm::ns_achievable_fidelity(e, 2) : 0.0;
    return row;
}

}  // namespace

FigureData compute_figure(const FigureSpec& spec) {
    FigureData data;
    const std::string& id = spec.id;
    std::vector<double> grid = spec.grid;

    if (id == "2a" || id == "2b" || id == "2c" || id == "2d") {
        const bool with_ns = id != "2d";
        if (grid.empty())
            grid = (id == "2b") ? linear_grid(0.1, 0.9, 9) : linear_grid(0.05, 0.95, 19);
        data.columns = {"p", "robustness_bound", "weight_bound"};
        if (with_ns) data.columns.push_back("ns_achievable_error");
        auto fs_target = theories::replacement_channels(2, 2);
        const double f_target =
            measures::free_fidelity(channels::identity_channel(2), fs_target).value;
        for (double p : grid) {
            channels::Channel e = [&]() {
                if (id == "2a") return channels::make_depolarizing(p, 2);
                if (id == "2b")
                    return channels::tensor(channels::make_depolarizing(p, 2),
                                            channels::make_depolarizing(p, 2));
                auto deph = channels::make_dephrasure(p, p * p);
                if (id == "2c") return deph;
                return channels::tensor(deph, deph);
            }();
            auto row = ns_figure_point(e, f_target, with_ns);
            if (with_ns)
                data.rows.push_back({p, row.rob, row.weight, row.ns_err});
            else
                data.rows.push_back({p, row.rob, row.weight});
        }
        return data;
    }

    if (id == "3a" || id == "4a") {
        auto fs = theories::csp_channels(1, 1, spec.cache_dir);
        auto stab3 = theories::stab_states(3, spec.cache_dir);
        DensityOperator ccz_state(gates::projector(gates::ccz() * gates::plus_state(3)), {8});
        const double f_ccz = measures::free_fidelity(ccz_state, stab3).value;
        if (id == "3a") {
            if (grid.empty()) grid = linear_grid(0.0, 1.0, 21);
            data.columns = {"p", "robustness_bound", "weight_bound"};
            for (double p : grid) {
                auto e = channels::compose(channels::make_depolarizing(p, 2),
                                           channels::make_unitary(gates::phase_t()));
                double r = measures::robustness(e, fs).value;
                double w = clamp01(measures::weight(e, fs).value);
                auto ef = bounds::error_floor_unitary(std::max(1.0, r), w, f_ccz);
                data.rows.push_back(
                    {p, ef.robustness.value, ef.weight.usable() ? ef.weight.value : 0.0});
            }
        } else {
            if (grid.empty()) grid = log_grid(1e-4, 0.4, 40);
            data.columns = {"eps", "copies_robustness", "copies_weight"};
            auto e = channels::compose(channels::make_depolarizing(0.25, 2),
                                       channels::make_unitary(gates::phase_t()));
            double r = std::max(1.0, measures::robustness(e, fs).value);
            double w = clamp01(measures::weight(e, fs).value);
            for (double eps : grid) {
                auto cf = bounds::copy_floor(r, w, f_ccz, 1, eps);
                data.rows.push_back({eps, cf.robustness.usable() ? cf.robustness.value : 0.0,
                                     cf.weight.usable() ? cf.weight.value : 0.0});
            }
        }
        return data;
    }

    if (id == "3b" || id == "4b") {
        auto stab3 = theories::stab_states(3, spec.cache_dir);
        auto stab1 = theories::stab_states(1, spec.cache_dir);
        DensityOperator ccz_state(gates::projector(gates::ccz() * gates::plus_state(3)), {8});
        const double f_ccz = measures::free_fidelity(ccz_state, stab3).value;
        auto t_proj = gates::projector(gates::phase_t() * gates::plus_state(1));
        auto noisy_t = [&](double p) {
            return Hermitian(cplx(1.0 - p) * t_proj.mat() +
                                 cplx(p / 2.0) * CMatrix::identity(2),
                             1e-12);
        };
        if (id == "3b") {
            if (grid.empty()) grid = linear_grid(0.0, 0.5, 11);
            data.columns = {"p", "robustness_bound", "weight_bound", "previous_bound"};
            for (double p : grid) {
                Hermitian rho1 = noisy_t(p);
                Hermitian rho3 = qla::kron(qla::kron(rho1, rho1), rho1);
                DensityOperator rho(rho3, {8});
                double r = std::max(1.0, measures::robustness(rho, stab3).value);
                double w = clamp01(measures::weight(rho, stab3).value);
                auto ef = bounds::error_floor_state(r, w, f_ccz);
                double lmin = std::pow(qla::min_eigenvalue(rho1), 3);
                auto prev = bounds::previous_bound(std::max(0.0, lmin), f_ccz);
                data.rows.push_back({p, ef.robustness.value,
                                     ef.weight.usable() ? ef.weight.value : 0.0,
                                     prev.usable() ? prev.value : 0.0});
            }
        } else {
            if (grid.empty()) grid = log_grid(1e-4, 0.4, 40);
            data.columns = {"eps", "copies_robustness", "copies_weight", "copies_previous"};
            DensityOperator rho(noisy_t(0.25), {2});
            double r = std::max(1.0, measures::robustness(rho, stab1).value);
            double w = clamp01(measures::weight(rho, stab1).value);
            double lmin = std::max(0.0, qla::min_eigenvalue(rho.op()));
            for (double eps : grid) {
                auto cf = bounds::copy_floor(r, w, f_ccz, 1, eps);
                auto prev = bounds::copy_floor(r, lmin, f_ccz, 1, eps);
                data.rows.push_back({eps, cf.robustness.usable() ? cf.robustness.value : 0.0,
                                     cf.weight.usable() ? cf.weight.value : 0.0,
                                     prev.weight.usable() ? prev.weight.value : 0.0});
            }
        }
        return data;
    }

    throw dimension_error("unknown figure id '" + id + "'");
}

std::string to_csv(const FigureData& data) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(12);
    for (size_t c = 0; c < data.columns.size(); ++c)
        os << (c ? "," : "") << data.columns[c];
    os << "\n";
    for (const auto& row : data.rows) {
        for (size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
        os << "\n";
    }
    return os.str();
}

int cmd_fig(const FigureSpec& spec, std::ostream& out, std::ostream& err) {
    try {
        auto data = compute_figure(spec);
        std::string csv = to_csv(data);
        if (spec.out_path.empty() || spec.out_path == "-") {
            out << csv;
        } else {
            std::ofstream f(spec.out_path, std::ios::binary);
            if (!f) {
                err << "fig: cannot open output path " << spec.out_path << "\n";
                return kExitUsage;
            }
            f << csv;
            out << "wrote " << data.rows.size() << " rows to " << spec.out_path << "\n";
        }
        return kExitOk;
    } catch (const numerical_error& e) {
        err << "fig: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "fig: " << e.what() << "\n";
        return kExitUsage;
    }
}

int cmd_selftest(std::ostream& out, const std::string& cache_dir) {
    auto results = selftest::run_all(out, cache_dir);
    int passed = 0;
    for (const auto& r : results) passed += r.pass;
    out << passed << "/" << results.size() << " criteria passed\n";
    return selftest::all_pass(results) ? kExitOk : kExitNumerical;
}

}  // namespace qrt::cli
