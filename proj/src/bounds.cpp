#include "qrt/bounds.hpp"

#include <cmath>
#include <limits>

#include "qrt/config.hpp"

namespace qrt::bounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_unit(double v, const char* name) {
    if (v < -1e-9 || v > 1 + 1e-9)
        throw dimension_error(std::string("bounds: ") + name + " outside [0,1]");
}

BoundValue make(double v, Flag f, std::string prov) { return BoundValue{v, f, std::move(prov)}; }

BoundValue clamped_floor(double v, std::string prov) {
    if (v < 0) return make(0.0, Flag::vacuous, std::move(prov));
    return make(v, Flag::ok, std::move(prov));
}

ErrorFloors error_floor_impl(double r, double w, double f, const char* rob_name,
                             const char* weight_name) {
    if (r < 1 - 1e-9) throw dimension_error("bounds: robustness below 1");
    check_unit(w, "weight");
    if (f <= 0 || f > 1 + 1e-9) throw dimension_error("bounds: fidelity outside (0,1]");
    ErrorFloors out;
    out.robustness = clamped_floor(1.0 - f * r, rob_name);
    if (w <= tol().weight_zero)
        out.weight = make(0.0, Flag::inapplicable, weight_name);
    else
        out.weight = make((1.0 - f) * w, Flag::ok, weight_name);
    return out;
}

ProbabilisticFloors prob_impl(double r, double w, double f, double p, double trm,
                              bool channel_form) {
    if (p <= 0 || p > 1 + 1e-12) throw dimension_error("bounds: probability outside (0,1]");
    check_unit(trm, "trM");
    if (r < 1 - 1e-9) throw dimension_error("bounds: robustness below 1");
    check_unit(w, "weight");
    if (f <= 0 || f > 1 + 1e-9) throw dimension_error("bounds: fidelity outside (0,1]");
    ProbabilisticFloors out;
    out.robustness = clamped_floor(1.0 - r * f / p, "probabilistic error floor, robustness form");

    const char* loose_name = "probabilistic error floor, weight form (decomposition-free)";
    const char* tight_name = "probabilistic error floor, weight form (free-part weighted)";
    if (w <= tol().weight_zero) {
        out.weight_loose = make(0.0, Flag::inapplicable, loose_name);
        out.weight_tight = make(0.0, Flag::inapplicable, tight_name);
        return out;
    }
    if (p == 1.0) {
        // deterministic limit: reproduce the one-shot weight floor bit-exactly
        out.weight_loose = clamped_floor((1.0 - f) * w, loose_name);
    } else if (channel_form) {
        out.weight_loose = clamped_floor(1.0 - (1.0 - (1.0 - f) * w) / p, loose_name);
    } else {
        out.weight_loose = clamped_floor((1.0 - f) * (1.0 - (1.0 - w) / p), loose_name);
    }
    out.weight_tight = make((1.0 - f) * w * trm / p, Flag::ok, tight_name);
    return out;
}

}  // namespace

const char* to_string(Flag f) {
    switch (f) {
        case Flag::ok: return "ok";
        case Flag::vacuous: return "vacuous";
        case Flag::inapplicable: return "inapplicable";
        case Flag::infeasible: return "infeasible";
        default: return "undefined";
    }
}

ErrorFloors error_floor_unitary(double r, double w, double f_target) {
    return error_floor_impl(r, w, f_target, "one-shot error floor, robustness form",
                            "one-shot error floor, weight form");
}

ErrorFloors error_floor_state(double r, double w, double f_target) {
    return error_floor_impl(r, w, f_target, "one-shot state error floor, robustness form",
                            "one-shot state error floor, weight form");
}

BoundValue previous_bound(double lambda_min, double f_target) {
    check_unit(lambda_min, "lambda_min");
    const char* name = "eigenvalue comparison floor";
    if (lambda_min <= 0) return make(0.0, Flag::inapplicable, name);
    return make((1.0 - f_target) * lambda_min, Flag::ok, name);
}

CopyFloors copy_floor(double r, double w, double f_single, int m, double eps) {
    if (eps <= 0 || eps >= 1) throw dimension_error("bounds: eps outside (0,1)");
    if (m < 1) throw dimension_error("bounds: target copies must be >= 1");
    if (r < 1 - 1e-9) throw dimension_error("bounds: robustness below 1");
    check_unit(w, "weight");
    if (f_single <= 0 || f_single > 1 + 1e-9)
        throw dimension_error("bounds: fidelity outside (0,1]");
    const double fm = std::pow(f_single, m);
    CopyFloors out;

    const char* rob_name = "copy overhead, robustness form";
    const double rob_arg = (1.0 - eps) / fm;
    if (rob_arg <= 1.0) {
        out.robustness = make(0.0, Flag::vacuous, rob_name);
    } else if (r <= 1.0 + 1e-12) {
        out.robustness = make(kInf, Flag::infeasible, rob_name);
    } else {
        out.robustness = make(std::log2(rob_arg) / std::log2(r), Flag::ok, rob_name);
    }

    const char* w_name = "copy overhead, weight form";
    const double w_arg = (1.0 - fm) / eps;
    if (w <= tol().weight_zero) {
        out.weight = make(0.0, Flag::inapplicable, w_name);
    } else if (w_arg <= 1.0) {
        out.weight = make(0.0, Flag::vacuous, w_name);
    } else if (w >= 1.0 - 1e-12) {
        out.weight = make(kInf, Flag::infeasible, w_name);
    } else {
        out.weight = make(std::log2(w_arg) / std::log2(1.0 / w), Flag::ok, w_name);
    }
    return out;
}

TransformFloors transform_floor(double r_in, double r_out, double w_in, double w_out) {
    if (r_in < 1 - 1e-9 || r_out < 1 - 1e-9) throw dimension_error("bounds: robustness below 1");
    check_unit(w_in, "weight (input)");
    check_unit(w_out, "weight (output)");
    TransformFloors out;

    const char* rob_name = "exact-transformation overhead, robustness form";
    const bool rin_triv = r_in <= 1.0 + 1e-12;
    const bool rout_triv = r_out <= 1.0 + 1e-12;
    if (rin_triv && rout_triv)
        out.robustness = make(0.0, Flag::undefined, rob_name);
    else if (rin_triv)
        out.robustness = make(kInf, Flag::infeasible, rob_name);
    else
        out.robustness = make(std::log2(r_out) / std::log2(r_in),
                              rout_triv ? Flag::vacuous : Flag::ok, rob_name);

    const char* w_name = "exact-transformation overhead, weight form";
    const bool win_zero = w_in <= tol().weight_zero;
    const bool wout_zero = w_out <= tol().weight_zero;
    const bool win_one = w_in >= 1.0 - 1e-12;
    const bool wout_one = w_out >= 1.0 - 1e-12;
    if (win_zero && wout_zero) {
        out.weight = make(0.0, Flag::undefined, w_name);
    } else if (wout_zero) {
        // log 0 = -inf over a negative denominator: no copy count suffices
        out.weight = make(kInf, win_one ? Flag::undefined : Flag::infeasible, w_name);
    } else if (win_zero) {
        out.weight = make(0.0, Flag::vacuous, w_name);
    } else if (win_one) {
        out.weight = wout_one ? make(0.0, Flag::undefined, w_name)
                              : make(kInf, Flag::infeasible, w_name);
    } else {
        out.weight = make(std::log2(w_out) / std::log2(w_in), Flag::ok, w_name);
    }
    return out;
}

BoundValue rate_ceiling(double numerator_bits, double f_single) {
    const char* name = "strong-converse rate ceiling";
    if (numerator_bits < -1e-12) throw dimension_error("bounds: negative rate numerator");
    if (f_single <= 0) throw dimension_error("bounds: fidelity must be positive");
    if (f_single >= 1) return make(0.0, Flag::undefined, name);
    return make(numerator_bits / std::log2(1.0 / f_single), Flag::ok, name);
}

BoundValue rate_ceiling_adaptive(double r, double f_single) {
    if (r < 1 - 1e-9) throw dimension_error("bounds: robustness below 1");
    auto b = rate_ceiling(std::log2(std::max(1.0, r)), f_single);
    b.provenance = "adaptive strong-converse rate ceiling";
    return b;
}

BoundValue rate_ceiling_parallel(double divergence_bits, double f_single) {
    auto b = rate_ceiling(divergence_bits, f_single);
    b.provenance = "parallel strong-converse rate ceiling";
    return b;
}

ProbabilisticFloors probabilistic_floor_channel(double r, double w, double f_psi, double p,
                                                double trm) {
    return prob_impl(r, w, f_psi, p, trm, true);
}

ProbabilisticFloors probabilistic_floor_state(double r, double w, double f, double p,
                                              double trm) {
    return prob_impl(r, w, f, p, trm, false);
}

}  // namespace qrt::bounds
