#pragma once

// Closed-form surface-like wave layer: quartic coefficients of the profile
// ODE, characteristic roots, the dispersion relation, mode construction and
// analytic evaluation of fields, surface elevation and border integrals.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "espace/error.hpp"
#include "espace/model.hpp"

namespace espace {

/// q4 s^4 + q2 s^2 + q0; the odd coefficients vanish identically.
struct QuarticCoeffs {
    double q4 = 0.0;
    double q2 = 0.0;
    double q0 = 0.0;

    double operator()(double s) const noexcept {
        const double s2 = s * s;
        return (q4 * s2 + q2) * s2 + q0;
    }
};

inline QuarticCoeffs quartic_coefficients(const ModelParams& p, double k, double omega) {
    validate_params(p, CouplingCheck::skip);
    const double k2 = k * k;
    const double w2 = omega * omega;
    const double bd = p.b * p.d;
    QuarticCoeffs c;
    c.q4 = p.a1 * p.a2 * bd - bd * p.B0 * p.A0;
    c.q2 = (p.A0 * w2 - p.a2 * p.b * k2) * p.a1 * p.d + (p.B0 * w2 - p.a1 * p.d * k2) * p.a2 * p.b +
           2.0 * bd * p.A0 * p.B0 * k2;
    c.q0 = (p.a2 * p.b * k2 - p.A0 * w2) * (p.a1 * p.d * k2 - p.B0 * w2) - bd * p.A0 * p.B0 * k2 * k2;
    return c;
}

/// |q4 s^4 + q2 s^2 + q0| scaled by the sum of the term magnitudes.
inline double quartic_relative_residual(const QuarticCoeffs& c, double s) noexcept {
    const double s2 = s * s;
    const double t4 = c.q4 * s2 * s2;
    const double t2 = c.q2 * s2;
    const double scale = std::abs(t4) + std::abs(t2) + std::abs(c.q0);
    if (scale == 0.0) return 0.0;
    return std::abs(t4 + t2 + c.q0) / scale;
}

enum class RootClass {
    real_pairs,   // four real roots +-s1, +-s2 with s1 >= s2 > 0
    complex_pair, // negative discriminant; s^2 values are complex conjugates
    imaginary,    // real s^2 values but at least one is <= 0
};

struct RootSet {
    RootClass kind = RootClass::real_pairs;
    double discriminant = 0.0;             // q2^2 - 4 q4 q0
    std::complex<double> s_sq_hi, s_sq_lo; // the two s^2 values
    double s1 = 0.0;                       // valid for real_pairs only
    double s2 = 0.0;

    bool real() const noexcept { return kind == RootClass::real_pairs; }

    /// {s1, s2, -s1, -s2}
    std::array<double, 4> all() const noexcept { return {s1, s2, -s1, -s2}; }
};

inline RootSet characteristic_roots(const QuarticCoeffs& c) {
    if (c.q4 == 0.0) throw Error(Errc::degenerate_quartic, "q4 == 0");
    RootSet r;
    r.discriminant = c.q2 * c.q2 - 4.0 * c.q4 * c.q0;
    if (r.discriminant < 0.0) {
        const double re = -c.q2 / (2.0 * c.q4);
        const double im = std::sqrt(-r.discriminant) / (2.0 * std::abs(c.q4));
        r.kind = RootClass::complex_pair;
        r.s_sq_hi = {re, im};
        r.s_sq_lo = {re, -im};
        return r;
    }
    // Larger-magnitude root first, the other from the product q0/q4.
    const double sq = std::sqrt(r.discriminant);
    const double t = -0.5 * (c.q2 + std::copysign(sq, c.q2));
    double z1 = 0.0;
    double z2 = 0.0;
    if (t != 0.0) {
        z1 = t / c.q4;
        z2 = c.q0 / t;
    }
    if (z2 > z1) std::swap(z1, z2);
    r.s_sq_hi = z1;
    r.s_sq_lo = z2;
    if (z2 <= 0.0) {
        r.kind = RootClass::imaginary;
        return r;
    }
    r.s1 = std::sqrt(z1);
    r.s2 = std::sqrt(z2);
    return r;
}

/// Parameter-only factor of the biquadratic discriminant. The discriminant at
/// frequency omega equals omega^4 times this value, independent of k, so its
/// sign splits parameter space into the real-root and complex-root regions.
/// The same sign decides whether the coupled potential system is hyperbolic.
inline double discriminant_factor(const ModelParams& p) noexcept {
    const double u = p.A0 * p.a1 * p.d - p.B0 * p.a2 * p.b;
    return u * u + 4.0 * p.A0 * p.A0 * p.B0 * p.B0 * p.b * p.d;
}

/// A0 omega^2 / (B0 g_y), the profile slope demanded at the border.
inline double boundary_slope(const ModelParams& p, double omega) noexcept {
    return p.A0 * omega * omega / (p.B0 * p.g_y);
}

/// Ratio psi/phi carried by one exponential component exp(s y) cos(kx - wt) of
/// an exact solution of the coupled potential pair.
inline double psi_ratio(const ModelParams& p, double k, double omega, double s) noexcept {
    const double mu = s * s - k * k;
    return (p.A0 * omega * omega + p.a2 * p.b * mu) / (p.b * p.B0 * mu);
}

// ---------------------------------------------------------------------------
// Dispersion

enum class RootBranch { any, s1, s2 };

struct DispersionOptions {
    double omega_max = 0.0;  // <= 0 selects 1e3 * sqrt(B0 |g_y| / A0)
    int scan_points = 64;
    RootBranch branch = RootBranch::any;
};

struct DispersionPoint {
    double omega = 0.0;
    double s = 0.0;
    RootBranch branch = RootBranch::s1;
    double relative_residual = 0.0;
};

inline double default_omega_max(const ModelParams& p) {
    return 1e3 * std::sqrt(p.B0 * std::abs(p.g_y) / p.A0);
}

namespace detail {

inline void require_dispersion_inputs(const ModelParams& p, double k) {
    validate_params(p, CouplingCheck::enforce);
    if (!(p.g_y > 0.0))
        throw Error(Errc::invalid_params, "g_y must be > 0 for A0 w^2 / (B0 g_y) > 0");
    if (!(k > 0.0)) throw Error(Errc::invalid_params, "wave number k must be > 0");
}

// s(omega)^2 - s_branch(omega)^2, or nullopt where the roots are not real.
inline std::optional<double> branch_gap(const ModelParams& p, double k, double omega, RootBranch b) {
    const RootSet r = characteristic_roots(quartic_coefficients(p, k, omega));
    if (!r.real()) return std::nullopt;
    const double s = boundary_slope(p, omega);
    const double sb = (b == RootBranch::s1) ? r.s1 : r.s2;
    return s * s - sb * sb;
}

inline std::vector<DispersionPoint> scan_branch(const ModelParams& p, double k, double omega_max,
                                                int n, RootBranch b) {
    std::vector<DispersionPoint> out;
    const double lo_exp = std::log(omega_max * 1e-6);
    const double hi_exp = std::log(omega_max);
    double w_prev = 0.0;
    std::optional<double> g_prev;
    for (int i = 0; i < n; ++i) {
        const double w = std::exp(lo_exp + (hi_exp - lo_exp) * i / (n - 1));
        const auto g = branch_gap(p, k, w, b);
        if (g && g_prev && ((*g_prev < 0.0) != (*g < 0.0))) {
            double lo = w_prev;
            double hi = w;
            double glo = *g_prev;
            while (hi - lo > 1e-12 * hi) {
                const double mid = 0.5 * (lo + hi);
                const auto gm = branch_gap(p, k, mid, b);
                if (!gm) break;
                if ((*gm < 0.0) == (glo < 0.0)) {
                    lo = mid;
                    glo = *gm;
                } else {
                    hi = mid;
                }
            }
            const double omega = 0.5 * (lo + hi);
            const double s = boundary_slope(p, omega);
            const double res = quartic_relative_residual(quartic_coefficients(p, k, omega), s);
            out.push_back({omega, s, b, res});
        }
        w_prev = w;
        g_prev = g;
    }
    return out;
}

}  // namespace detail

/// Every bracketed solution of the dispersion relation on (0, omega_max],
/// sorted by increasing omega.
inline std::vector<DispersionPoint> dispersion_branches(const ModelParams& p, double k,
                                                        const DispersionOptions& opt = {}) {
    detail::require_dispersion_inputs(p, k);
    const double wmax = opt.omega_max > 0.0 ? opt.omega_max : default_omega_max(p);
    std::vector<DispersionPoint> out;
    for (RootBranch b : {RootBranch::s1, RootBranch::s2}) {
        if (opt.branch != RootBranch::any && opt.branch != b) continue;
        auto found = detail::scan_branch(p, k, wmax, opt.scan_points, b);
        out.insert(out.end(), found.begin(), found.end());
    }
    std::sort(out.begin(), out.end(),
              [](const DispersionPoint& a, const DispersionPoint& b) { return a.omega < b.omega; });
    return out;
}

/// Smallest positive omega for which A0 w^2 / (B0 g_y) is a real root of the
/// characteristic quartic at (k, w). Restrict to one root branch via `opt`.
inline DispersionPoint dispersion_solve(const ModelParams& p, double k, const DispersionOptions& opt = {}) {
    const auto all = dispersion_branches(p, k, opt);
    for (const auto& pt : all)
        if (pt.relative_residual < 1e-10) return pt;
    const double wmax = opt.omega_max > 0.0 ? opt.omega_max : default_omega_max(p);
    throw Error(Errc::no_solution, "no dispersion root bracketed on (0, " + std::to_string(wmax) + "]");
}

// ---------------------------------------------------------------------------
// Modes

enum class ModeKind { single_decay, growth_pair, general };

inline std::string_view to_string(ModeKind k) noexcept {
    switch (k) {
        case ModeKind::single_decay: return "single_decay";
        case ModeKind::growth_pair: return "growth_pair";
        case ModeKind::general: return "general";
    }
    return "?";
}

/// phi = cos(kx - wt) f(y - X), f(z) = sum_i lambda_i exp(s_i z), roots ordered
/// {s1, s2, -s1, -s2}. psi_ratio[i] scales component i of psi so that the pair
/// solves the coupled potential equations exactly; the printed ansatz phi = psi
/// corresponds to every ratio being 1.
struct WaveMode {
    double k = 0.0;
    double omega = 0.0;
    ModeKind kind = ModeKind::single_decay;
    std::array<double, 4> s{};
    std::array<double, 4> lambda{};
    std::array<double, 4> psi_ratio{};
    double slope = 0.0;  // A0 w^2 / (B0 g_y)

    /// d^n f / dz^n at z = y - X.
    double profile(double z, int n = 0) const noexcept {
        double f = 0.0;
        for (int i = 0; i < 4; ++i) {
            if (lambda[i] == 0.0) continue;
            f += lambda[i] * std::pow(s[i], n) * std::exp(s[i] * z);
        }
        return f;
    }

    /// Profile of psi in the exactly coupled form.
    double psi_profile(double z, int n = 0) const noexcept {
        double f = 0.0;
        for (int i = 0; i < 4; ++i) {
            if (lambda[i] == 0.0) continue;
            f += lambda[i] * psi_ratio[i] * std::pow(s[i], n) * std::exp(s[i] * z);
        }
        return f;
    }

    /// True when phi = psi is itself an exact coupled solution.
    bool identical_potentials(double tol = 1e-9) const noexcept {
        for (int i = 0; i < 4; ++i)
            if (lambda[i] != 0.0 && std::abs(psi_ratio[i] - 1.0) > tol) return false;
        return true;
    }
};

inline WaveMode build_mode(const ModelParams& p, double k, double omega, ModeKind kind,
                           std::array<double, 2> free_lambdas = {0.0, 0.0}) {
    validate_params(p, CouplingCheck::enforce);
    if (!(p.g_y > 0.0)) throw Error(Errc::invalid_params, "g_y must be > 0");
    if (omega == 0.0) throw Error(Errc::invalid_params, "omega must be nonzero");
    const RootSet roots = characteristic_roots(quartic_coefficients(p, k, omega));
    if (!roots.real())
        throw Error(Errc::complex_roots, "characteristic roots are not real at k=" + std::to_string(k) +
                                             ", omega=" + std::to_string(omega));

    WaveMode m;
    m.k = k;
    m.omega = omega;
    m.kind = kind;
    m.s = roots.all();
    m.slope = boundary_slope(p, omega);
    const double tau = m.slope;
    const double s1 = roots.s1;
    const double s2 = roots.s2;

    switch (kind) {
        case ModeKind::single_decay: {
            auto close = [&](double s) { return std::abs(s - tau) <= 1e-9 * std::max(s, tau); };
            if (close(s1)) {
                m.lambda = {1.0, 0.0, 0.0, 0.0};
            } else if (close(s2)) {
                m.lambda = {0.0, 1.0, 0.0, 0.0};
            } else {
                throw Error(Errc::constraint_infeasible,
                            "no positive root equals A0 w^2/(B0 g_y) = " + std::to_string(tau));
            }
            break;
        }
        case ModeKind::growth_pair: {
            // l1 + l3 = 1, s1 (l1 - l3) = tau
            const double diff = tau / s1;
            m.lambda = {0.5 * (1.0 + diff), 0.0, 0.5 * (1.0 - diff), 0.0};
            break;
        }
        case ModeKind::general: {
            const double l2 = free_lambdas[0];
            const double l4 = free_lambdas[1];
            const double sum13 = 1.0 - l2 - l4;
            const double diff13 = (tau - s2 * (l2 - l4)) / s1;
            m.lambda = {0.5 * (sum13 + diff13), l2, 0.5 * (sum13 - diff13), l4};
            break;
        }
    }
    for (int i = 0; i < 4; ++i) m.psi_ratio[i] = psi_ratio(p, k, omega, m.s[i]);
    return m;
}

/// Single-decay mode on the dispersion branch found for wave number k.
inline WaveMode single_decay_mode(const ModelParams& p, double k, const DispersionOptions& opt = {}) {
    const DispersionPoint pt = dispersion_solve(p, k, opt);
    return build_mode(p, k, pt.omega, ModeKind::single_decay);
}

// ---------------------------------------------------------------------------
// Analytic evaluation

enum class PsiForm {
    identical,  // psi = phi, as in the printed ansatz
    coupled,    // psi carries the per-root coupling ratios
};

struct Potentials {
    double phi = 0.0;
    double psi = 0.0;
    double phi_t = 0.0;
    double psi_t = 0.0;
};

inline Potentials mode_potentials(const WaveMode& m, const ModelParams& p, double t, double x, double y,
                                  PsiForm form = PsiForm::identical) noexcept {
    const double theta = m.k * x - m.omega * t;
    const double z = y - p.X;
    const double f = m.profile(z);
    const double fpsi = (form == PsiForm::identical) ? f : m.psi_profile(z);
    return {std::cos(theta) * f, std::cos(theta) * fpsi, m.omega * std::sin(theta) * f,
            m.omega * std::sin(theta) * fpsi};
}

struct FieldValues {
    double A = 0.0;
    double B = 0.0;
};

/// A = steady_A + (B0/d) psi_t, B = steady_B + (A0/b) phi_t with phi = psi.
inline FieldValues evaluate_fields(const WaveMode& m, const ModelParams& p, double t, double x, double y) {
    require_in_domain(p, x, y);
    const double osc = std::sin(m.k * x - m.omega * t) * m.profile(y - p.X);
    return {steady_A_affine(p, x, y) + p.B0 * m.omega / p.d * osc,
            steady_B_affine(p, x, y) + p.A0 * m.omega / p.b * osc};
}

inline void require_kind(const WaveMode& m, ModeKind kind, const char* what) {
    if (m.kind != kind)
        throw Error(Errc::unsupported_mode,
                    std::string(what) + " requires a " + std::string(to_string(kind)) + " mode");
}

/// A0 w / (B0 g_y); equals sqrt(A0 s / (B0 g_y)) on the single-root branch.
inline double surface_amplitude(const WaveMode& m, const ModelParams& p) noexcept {
    return p.A0 * m.omega / (p.B0 * p.g_y);
}

inline double surface_elevation(const WaveMode& m, const ModelParams& p, double t, double x) {
    require_kind(m, ModeKind::single_decay, "surface_elevation");
    return p.X - surface_amplitude(m, p) * std::sin(m.k * x - m.omega * t);
}

/// d(phi)/dy on the border y = X.
inline double border_phi_y(const WaveMode& m, double t, double x) noexcept {
    return std::cos(m.k * x - m.omega * t) * m.profile(0.0, 1);
}

struct BorderIntegral {
    double steady = 0.0;       // A0 [X - h_x X^2 / (2d)]
    double oscillatory = 0.0;  // -(2 B0 w / (d k)) sin(kX/2) sin(wt - kX/2)
    double closed_form = 0.0;
    double quadrature = 0.0;   // adaptive Gauss-Kronrod of A(t, x, X) over (0, X)
};

inline BorderIntegral border_credit_total(const WaveMode& m, const ModelParams& p, double t) {
    require_kind(m, ModeKind::single_decay, "border_credit_total");
    const double X = p.X;
    BorderIntegral r;
    r.steady = p.A0 * (X - p.h_x * X * X / (2.0 * p.d));
    r.oscillatory = -(2.0 * p.B0 * m.omega / (p.d * m.k)) * std::sin(0.5 * m.k * X) *
                    std::sin(m.omega * t - 0.5 * m.k * X);
    r.closed_form = r.steady + r.oscillatory;
    auto border = [&](double x) {
        return p.A0 * (1.0 + p.h_x / p.d * (x - X)) + p.B0 * m.omega / p.d * std::sin(m.k * x - m.omega * t);
    };
    using boost::math::quadrature::gauss_kronrod;
    r.quadrature = gauss_kronrod<double, 61>::integrate(border, 0.0, X, 20, 1e-15);
    return r;
}

/// |f(-depth)| / |f(0)| for each depth = X - y >= 0.
inline std::vector<double> growth_profile(const WaveMode& m, const std::vector<double>& depths) {
    require_kind(m, ModeKind::growth_pair, "growth_profile");
    std::vector<double> out;
    out.reserve(depths.size());
    const double f0 = std::abs(m.profile(0.0));
    for (double depth : depths) out.push_back(std::abs(m.profile(-depth)) / f0);
    return out;
}

// ---------------------------------------------------------------------------
// Identity checks

/// Relative residual of q4 f'''' + q2 f'' + q0 f at z.
inline double ode_relative_residual(const WaveMode& m, const QuarticCoeffs& c, double z) noexcept {
    const double t4 = c.q4 * m.profile(z, 4);
    const double t2 = c.q2 * m.profile(z, 2);
    const double t0 = c.q0 * m.profile(z, 0);
    const double scale = std::abs(t4) + std::abs(t2) + std::abs(t0);
    return scale == 0.0 ? 0.0 : std::abs(t4 + t2 + t0) / scale;
}

struct CoupledResidual {
    double phi_eq = 0.0;  // (A0 d_tt - a2 b Lap) phi + b B0 Lap psi
    double psi_eq = 0.0;  // (B0 d_tt - a1 d Lap) psi + d A0 Lap phi
};

/// Relative residuals of both coupled potential equations at (t, x, y),
/// evaluated analytically from the mode's profile derivatives.
inline CoupledResidual coupled_relative_residual(const WaveMode& m, const ModelParams& p, double t, double x,
                                                 double y, PsiForm form) noexcept {
    const double c = std::cos(m.k * x - m.omega * t);
    const double z = y - p.X;
    const double k2 = m.k * m.k;
    const double w2 = m.omega * m.omega;
    const double F = m.profile(z);
    const double Fyy = m.profile(z, 2);
    const double G = (form == PsiForm::identical) ? F : m.psi_profile(z);
    const double Gyy = (form == PsiForm::identical) ? Fyy : m.psi_profile(z, 2);
    const double lap_phi = c * (Fyy - k2 * F);
    const double lap_psi = c * (Gyy - k2 * G);
    const double phi_tt = -w2 * c * F;
    const double psi_tt = -w2 * c * G;

    auto rel = [](double a, double b, double d) {
        const double scale = std::abs(a) + std::abs(b) + std::abs(d);
        return scale == 0.0 ? 0.0 : std::abs(a + b + d) / scale;
    };
    return {rel(p.A0 * phi_tt, -p.a2 * p.b * lap_phi, p.b * p.B0 * lap_psi),
            rel(p.B0 * psi_tt, -p.a1 * p.d * lap_psi, p.d * p.A0 * lap_phi)};
}

}  // namespace espace
