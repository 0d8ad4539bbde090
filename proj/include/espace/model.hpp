#pragma once

// Two-field Credits-Loans / Payment-on-Credits model: parameters, sign
// conventions, linear acceleration potentials and steady-state fields.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "espace/error.hpp"

namespace espace {

struct ModelParams {
    double A0 = 1.0;  // credits rate at the (X, X) corner
    double B0 = 1.0;  // payment rate at the (X, X) corner
    double a1 = 1.0;  // continuity coupling A <- div u, must be > 0
    double a2 = -1.0; // continuity coupling B <- div v, must be < 0
    double b = 1.0;   // motion coupling v <- grad B, must be > 0
    double d = -1.0;  // motion coupling u <- grad A, must be < 0
    double h_x = 0.0;
    double h_y = 0.0;
    double g_x = 0.0;
    double g_y = 0.0;
    double X = 1.0;         // maximum risk coordinate
    double T_window = 1.0;  // accumulation window; metadata only

    bool operator==(const ModelParams&) const = default;
};

/// Affine potential c_x*x + c_y*y (H or G). Its gradient is the macro
/// acceleration vector.
struct LinearPotential {
    double c_x = 0.0;
    double c_y = 0.0;

    double operator()(double x, double y) const noexcept { return c_x * x + c_y * y; }
};

inline double potential_eval(const LinearPotential& p, double x, double y) noexcept {
    return p(x, y);
}

inline LinearPotential credits_potential(const ModelParams& p) noexcept { return {p.h_x, p.h_y}; }
inline LinearPotential payments_potential(const ModelParams& p) noexcept { return {p.g_x, p.g_y}; }

enum class ViolationKind { sign_violation, coupling_mismatch, non_positive_scale, non_finite };

struct ParamViolation {
    ViolationKind kind;
    std::string name;

    bool operator==(const ParamViolation&) const = default;
};

enum class CouplingCheck { enforce, skip };

inline constexpr double kCouplingRelTol = 1e-12;

/// Individual invariant predicates. Each returns true when the invariant holds.
namespace invariant {
inline bool a1_positive(const ModelParams& p) { return p.a1 > 0.0; }
inline bool a2_negative(const ModelParams& p) { return p.a2 < 0.0; }
inline bool b_positive(const ModelParams& p) { return p.b > 0.0; }
inline bool d_negative(const ModelParams& p) { return p.d < 0.0; }
inline bool A0_positive(const ModelParams& p) { return p.A0 > 0.0; }
inline bool B0_positive(const ModelParams& p) { return p.B0 > 0.0; }
inline bool X_positive(const ModelParams& p) { return p.X > 0.0; }
inline bool accelerations_finite(const ModelParams& p) {
    return std::isfinite(p.h_x) && std::isfinite(p.h_y) && std::isfinite(p.g_x) &&
           std::isfinite(p.g_y) && std::isfinite(p.T_window);
}
/// A0^2 h_y == B0^2 g_y up to relative slack kCouplingRelTol.
inline bool coupling_holds(const ModelParams& p) {
    const double lhs = p.A0 * p.A0 * p.h_y;
    const double rhs = p.B0 * p.B0 * p.g_y;
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return std::abs(lhs - rhs) <= kCouplingRelTol * scale;
}
}  // namespace invariant

inline std::vector<ParamViolation> param_violations(const ModelParams& p,
                                                    CouplingCheck coupling = CouplingCheck::enforce) {
    std::vector<ParamViolation> out;
    auto sign = [&](bool ok, const char* name) {
        if (!ok) out.push_back({ViolationKind::sign_violation, name});
    };
    auto scale = [&](bool ok, const char* name) {
        if (!ok) out.push_back({ViolationKind::non_positive_scale, name});
    };
    sign(invariant::a1_positive(p), "a1");
    sign(invariant::a2_negative(p), "a2");
    sign(invariant::b_positive(p), "b");
    sign(invariant::d_negative(p), "d");
    scale(invariant::A0_positive(p), "A0");
    scale(invariant::B0_positive(p), "B0");
    scale(invariant::X_positive(p), "X");
    if (!invariant::accelerations_finite(p)) out.push_back({ViolationKind::non_finite, "accelerations"});
    if (coupling == CouplingCheck::enforce && !invariant::coupling_holds(p))
        out.push_back({ViolationKind::coupling_mismatch, "A0^2*h_y != B0^2*g_y"});
    return out;
}

inline std::string describe(const std::vector<ParamViolation>& violations) {
    std::string msg;
    for (const auto& v : violations) {
        if (!msg.empty()) msg += "; ";
        switch (v.kind) {
            case ViolationKind::sign_violation: msg += "SignViolation(" + v.name + ")"; break;
            case ViolationKind::coupling_mismatch: msg += "CouplingMismatch(" + v.name + ")"; break;
            case ViolationKind::non_positive_scale: msg += "NonPositiveScale(" + v.name + ")"; break;
            case ViolationKind::non_finite: msg += "NonFinite(" + v.name + ")"; break;
        }
    }
    return msg;
}

/// Thrown by validate_params; carries every violated invariant.
class InvalidParams : public Error {
public:
    explicit InvalidParams(std::vector<ParamViolation> v)
        : Error(Errc::invalid_params, describe(v)), violations_(std::move(v)) {}

    const std::vector<ParamViolation>& violations() const noexcept { return violations_; }

private:
    std::vector<ParamViolation> violations_;
};

/// Returns `p` unchanged when every invariant holds, otherwise throws
/// InvalidParams listing all violations.
inline const ModelParams& validate_params(const ModelParams& p,
                                          CouplingCheck coupling = CouplingCheck::enforce) {
    auto v = param_violations(p, coupling);
    if (!v.empty()) throw InvalidParams(std::move(v));
    return p;
}

/// Closed square [0, X]^2.
inline bool in_domain(const ModelParams& p, double x, double y) noexcept {
    return x >= 0.0 && x <= p.X && y >= 0.0 && y <= p.X;
}

inline void require_in_domain(const ModelParams& p, double x, double y) {
    if (!in_domain(p, x, y))
        throw Error(Errc::out_of_domain,
                    "(" + std::to_string(x) + ", " + std::to_string(y) + ") outside [0, X]^2");
}

// Affine extensions without the domain check. The solver uses these on a
// periodic x-extent that may be longer than X.
inline double steady_A_affine(const ModelParams& p, double x, double y) noexcept {
    return p.A0 * (1.0 + (p.h_x * (x - p.X) + p.h_y * (y - p.X)) / p.d);
}

inline double steady_B_affine(const ModelParams& p, double x, double y) noexcept {
    return p.B0 * (1.0 + (p.g_x * (x - p.X) + p.g_y * (y - p.X)) / p.b);
}

/// A0 (1 + [h_x (x - X) + h_y (y - X)] / d)
inline double steady_A(const ModelParams& p, double x, double y) {
    require_in_domain(p, x, y);
    return steady_A_affine(p, x, y);
}

/// B0 (1 + [g_x (x - X) + g_y (y - X)] / b)
inline double steady_B(const ModelParams& p, double x, double y) {
    require_in_domain(p, x, y);
    return steady_B_affine(p, x, y);
}

/// Constant gradient of steady_A: (h_x, h_y) * A0 / d.
inline std::pair<double, double> steady_A_gradient(const ModelParams& p) noexcept {
    return {p.h_x * p.A0 / p.d, p.h_y * p.A0 / p.d};
}

inline std::pair<double, double> steady_B_gradient(const ModelParams& p) noexcept {
    return {p.g_x * p.B0 / p.b, p.g_y * p.B0 / p.b};
}

/// Exact integral of steady_A over the square.
inline double steady_A_total(const ModelParams& p) noexcept {
    const double X = p.X;
    return p.A0 * (X * X - (p.h_x + p.h_y) * X * X * X / (2.0 * p.d));
}

}  // namespace espace
