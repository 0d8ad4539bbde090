#pragma once

// Explicit time integration of the linearized coupled potential system
//
//   A0 phi_tt - a2 b Lap phi = -b B0 Lap psi
//   B0 psi_tt - a1 d Lap psi = -d A0 Lap phi
//
// on [0, L_x] x [0, X]. Boundaries: periodic in x; at y = X the surface
// conditions phi_tt = -(B0 g_y / A0) phi_y and psi_tt = -(A0 h_y / B0) psi_y
// through one ghost row; at y = 0 homogeneous Dirichlet with an optional
// damping sponge. Classical RK4 on (phi, psi, phi_t, psi_t), 5-point Laplacian.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "espace/error.hpp"
#include "espace/model.hpp"
#include "espace/parallel.hpp"
#include "espace/summation.hpp"
#include "espace/wave.hpp"

namespace espace {

inline constexpr std::size_t kMinResolution = 8;
inline constexpr std::size_t kSpongeCells = 8;
inline constexpr double kCflSafety = 0.5;

/// Eigenvalues of the speed-squared symbol
/// [[-a2 b/A0, -b B0/A0], [-d A0/B0, -a1 d/B0]].
inline std::pair<std::complex<double>, std::complex<double>> speed_squared_eigenvalues(const ModelParams& p) {
    const double m00 = -p.a2 * p.b / p.A0;
    const double m01 = -p.b * p.B0 / p.A0;
    const double m10 = -p.d * p.A0 / p.B0;
    const double m11 = -p.a1 * p.d / p.B0;
    const double tr = m00 + m11;
    const double det = m00 * m11 - m01 * m10;
    const std::complex<double> root = std::sqrt(std::complex<double>(tr * tr - 4.0 * det));
    return {0.5 * (tr + root), 0.5 * (tr - root)};
}

/// sqrt of the symbol's spectral radius. For hyperbolic parameter sets this is
/// the fastest characteristic speed.
inline double max_characteristic_speed(const ModelParams& p) {
    const auto [l1, l2] = speed_squared_eigenvalues(p);
    return std::sqrt(std::max(std::abs(l1), std::abs(l2)));
}

/// Largest exponential growth rate of the semi-discrete operator. A plane
/// wave exp(i K.r) has w^2 = -K^2 lambda for each symbol eigenvalue lambda;
/// under the sign conventions a2 b < 0 and a1 d < 0 both eigenvalues have
/// positive real part, so every resolved wave number grows like
/// exp(K Re sqrt(lambda) t). K is bounded by the 5-point stencil.
inline double growth_rate_bound(const ModelParams& p, double h_x, double h_y) {
    const auto [l1, l2] = speed_squared_eigenvalues(p);
    const double re = std::max(std::sqrt(l1).real(), std::sqrt(l2).real());
    const double k_max = 2.0 * std::sqrt(1.0 / (h_x * h_x) + 1.0 / (h_y * h_y));
    return std::max(0.0, re) * k_max;
}

struct SolverOptions {
    bool sponge = false;
    unsigned workers = 0;  // 0 = worker_count()
};

struct SolverState {
    ModelParams params;
    std::size_t n_x = 0;  // cells along x; node n_x duplicates node 0
    std::size_t n_y = 0;
    double L_x = 0.0;
    double h_x = 0.0;
    double h_y = 0.0;
    std::vector<double> phi, psi, phi_t, psi_t;  // (n_x+1) x (n_y+1), row-major in y
    double t = 0.0;
    std::size_t steps = 0;
    SolverOptions options;

    struct Snapshot {
        std::vector<double> phi, psi, phi_t, psi_t;
        double t = 0.0;
    };
    std::vector<Snapshot> history;  // at most two, oldest first

    // Top-row operator: (phi_tt, psi_tt) = surface * (R_phi, R_psi).
    Eigen::Matrix2d surface;

    std::size_t stride() const noexcept { return n_x + 1; }
    std::size_t node(std::size_t i, std::size_t j) const noexcept { return j * stride() + i; }
    std::size_t size() const noexcept { return (n_x + 1) * (n_y + 1); }
    double x(std::size_t i) const noexcept { return static_cast<double>(i) * h_x; }
    double y(std::size_t j) const noexcept { return static_cast<double>(j) * h_y; }
};

namespace detail {

inline Eigen::Matrix2d surface_operator(const ModelParams& p, double h_y) {
    const double gamma_phi = p.B0 * p.g_y / p.A0;
    const double gamma_psi = p.A0 * p.h_y / p.B0;
    const double iy2 = 1.0 / (h_y * h_y);
    // unknowns: phi_tt, psi_tt, ghost offsets G_phi, G_psi (ghost - row N-1)
    Eigen::Matrix4d M;
    M << p.A0, 0.0, -p.a2 * p.b * iy2, p.b * p.B0 * iy2,
         0.0, p.B0, p.d * p.A0 * iy2, -p.a1 * p.d * iy2,
         1.0, 0.0, gamma_phi / (2.0 * h_y), 0.0,
         0.0, 1.0, 0.0, gamma_psi / (2.0 * h_y);
    Eigen::FullPivLU<Eigen::Matrix4d> lu(M);
    if (!lu.isInvertible())
        throw Error(Errc::bad_resolution, "surface boundary system is singular at this resolution");
    const Eigen::Matrix4d inv = lu.inverse();
    return inv.topLeftCorner<2, 2>();
}

inline double sponge_rate(const SolverState& s, std::size_t j, double c_max) noexcept {
    if (!s.options.sponge || j >= kSpongeCells) return 0.0;
    const double ramp = static_cast<double>(kSpongeCells - j) / static_cast<double>(kSpongeCells);
    return 0.5 * c_max / s.h_y * ramp * ramp;
}

// Accelerations of (phi, psi) for the given fields; rows 0 .. n_y.
inline void accelerations(const SolverState& s, const std::vector<double>& phi, const std::vector<double>& psi,
                          const std::vector<double>& phi_t, const std::vector<double>& psi_t,
                          std::vector<double>& phi_tt, std::vector<double>& psi_tt) {
    const ModelParams& p = s.params;
    const std::size_t nx = s.n_x;
    const std::size_t ny = s.n_y;
    const double ix2 = 1.0 / (s.h_x * s.h_x);
    const double iy2 = 1.0 / (s.h_y * s.h_y);
    const double c_max = max_characteristic_speed(p);
    const unsigned workers = s.options.workers ? s.options.workers : worker_count();

    parallel_for(0, ny + 1, workers, [&](std::size_t j_lo, std::size_t j_hi) {
        for (std::size_t j = j_lo; j < j_hi; ++j) {
            if (j == 0) {
                for (std::size_t i = 0; i <= nx; ++i) {
                    phi_tt[s.node(i, 0)] = 0.0;
                    psi_tt[s.node(i, 0)] = 0.0;
                }
                continue;
            }
            const double sigma = sponge_rate(s, j, c_max);
            for (std::size_t i = 0; i < nx; ++i) {
                const std::size_t c = s.node(i, j);
                const std::size_t w = s.node(i == 0 ? nx - 1 : i - 1, j);
                const std::size_t e = s.node(i + 1 == nx ? 0 : i + 1, j);
                const std::size_t sth = s.node(i, j - 1);
                const double dxx_phi = (phi[e] - 2.0 * phi[c] + phi[w]) * ix2;
                const double dxx_psi = (psi[e] - 2.0 * psi[c] + psi[w]) * ix2;
                double a_phi = 0.0;
                double a_psi = 0.0;
                if (j < ny) {
                    const std::size_t nth = s.node(i, j + 1);
                    const double lap_phi = dxx_phi + (phi[nth] - 2.0 * phi[c] + phi[sth]) * iy2;
                    const double lap_psi = dxx_psi + (psi[nth] - 2.0 * psi[c] + psi[sth]) * iy2;
                    a_phi = (p.a2 * p.b * lap_phi - p.b * p.B0 * lap_psi) / p.A0;
                    a_psi = (p.a1 * p.d * lap_psi - p.d * p.A0 * lap_phi) / p.B0;
                } else {
                    const double lt_phi = dxx_phi + 2.0 * (phi[sth] - phi[c]) * iy2;
                    const double lt_psi = dxx_psi + 2.0 * (psi[sth] - psi[c]) * iy2;
                    const double r_phi = p.a2 * p.b * lt_phi - p.b * p.B0 * lt_psi;
                    const double r_psi = p.a1 * p.d * lt_psi - p.d * p.A0 * lt_phi;
                    a_phi = s.surface(0, 0) * r_phi + s.surface(0, 1) * r_psi;
                    a_psi = s.surface(1, 0) * r_phi + s.surface(1, 1) * r_psi;
                }
                phi_tt[c] = a_phi - sigma * phi_t[c];
                psi_tt[c] = a_psi - sigma * psi_t[c];
            }
            phi_tt[s.node(nx, j)] = phi_tt[s.node(0, j)];
            psi_tt[s.node(nx, j)] = psi_tt[s.node(0, j)];
        }
    });
}

inline void require_finite(const std::vector<double>& v, const char* name) {
    for (double x : v)
        if (!std::isfinite(x)) throw Error(Errc::non_finite, std::string(name) + " left the finite range");
}

}  // namespace detail

inline SolverState init_grid(const ModelParams& params, std::size_t n_x, std::size_t n_y, double L_x,
                             SolverOptions options = {}) {
    validate_params(params, CouplingCheck::skip);
    if (n_x < kMinResolution || n_y < kMinResolution)
        throw Error(Errc::bad_resolution, "n_x and n_y must be >= " + std::to_string(kMinResolution));
    if (!(L_x > 0.0)) throw Error(Errc::bad_resolution, "L_x must be > 0");
    SolverState s;
    s.params = params;
    s.n_x = n_x;
    s.n_y = n_y;
    s.L_x = L_x;
    s.h_x = L_x / static_cast<double>(n_x);
    s.h_y = params.X / static_cast<double>(n_y);
    s.options = options;
    s.phi.assign(s.size(), 0.0);
    s.psi.assign(s.size(), 0.0);
    s.phi_t.assign(s.size(), 0.0);
    s.psi_t.assign(s.size(), 0.0);
    s.surface = detail::surface_operator(params, s.h_y);
    return s;
}

/// C h / c_max with h the smaller spacing.
inline double cfl_max_dt(const SolverState& s) {
    return kCflSafety * std::min(s.h_x, s.h_y) / max_characteristic_speed(s.params);
}

/// phi = A cos(kx) f(y - X), phi_t = A w sin(kx) f(y - X) and likewise for psi
/// (with the coupling ratios for PsiForm::coupled). The bottom row is left at
/// zero.
inline void seed_analytic_mode(SolverState& s, const WaveMode& mode, double amplitude,
                               PsiForm form = PsiForm::coupled) {
    const double periods = mode.k * s.L_x / (2.0 * std::numbers::pi);
    if (std::abs(periods - std::round(periods)) > 1e-9 || std::round(periods) < 1.0)
        throw Error(Errc::period_mismatch,
                    "k L_x / 2pi = " + std::to_string(periods) + " is not a positive integer");
    std::fill(s.phi.begin(), s.phi.end(), 0.0);
    std::fill(s.psi.begin(), s.psi.end(), 0.0);
    std::fill(s.phi_t.begin(), s.phi_t.end(), 0.0);
    std::fill(s.psi_t.begin(), s.psi_t.end(), 0.0);
    for (std::size_t j = 1; j <= s.n_y; ++j) {
        for (std::size_t i = 0; i <= s.n_x; ++i) {
            const Potentials v = mode_potentials(mode, s.params, 0.0, s.x(i), s.y(j), form);
            const std::size_t n = s.node(i, j);
            s.phi[n] = amplitude * v.phi;
            s.psi[n] = amplitude * v.psi;
            s.phi_t[n] = amplitude * v.phi_t;
            s.psi_t[n] = amplitude * v.psi_t;
        }
    }
    s.t = 0.0;
    s.steps = 0;
    s.history.clear();
}

/// Gaussian bump in phi and psi, periodic in x, at rest.
inline void seed_pulse(SolverState& s, double cx, double cy, double width, double amplitude) {
    if (!(width > 0.0)) throw Error(Errc::invalid_params, "pulse width must be > 0");
    for (std::size_t j = 0; j <= s.n_y; ++j) {
        for (std::size_t i = 0; i <= s.n_x; ++i) {
            double dx = std::abs(s.x(i) - cx);
            dx = std::min(dx, s.L_x - dx);
            const double dy = s.y(j) - cy;
            const double v = j == 0 ? 0.0 : amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
            const std::size_t n = s.node(i, j);
            s.phi[n] = v;
            s.psi[n] = v;
            s.phi_t[n] = 0.0;
            s.psi_t[n] = 0.0;
        }
    }
    s.t = 0.0;
    s.steps = 0;
    s.history.clear();
}

/// One RK4 step. A negative dt integrates backwards.
inline void step(SolverState& s, double dt) {
    const double limit = cfl_max_dt(s);
    if (!(std::abs(dt) <= limit * (1.0 + 1e-12)))
        throw Error(Errc::stability_violation,
                    "|dt| = " + std::to_string(std::abs(dt)) + " exceeds CFL bound " + std::to_string(limit));

    if (s.history.size() == 2) s.history.erase(s.history.begin());
    s.history.push_back({s.phi, s.psi, s.phi_t, s.psi_t, s.t});

    const std::size_t n = s.size();
    std::vector<double> k_phi[4], k_psi[4], k_phit[4], k_psit[4];
    std::vector<double> phi(n), psi(n), phit(n), psit(n);
    for (int q = 0; q < 4; ++q) {
        k_phi[q].resize(n);
        k_psi[q].resize(n);
        k_phit[q].resize(n);
        k_psit[q].resize(n);
    }
    static constexpr double stage_c[4] = {0.0, 0.5, 0.5, 1.0};
    for (int q = 0; q < 4; ++q) {
        if (q == 0) {
            phi = s.phi;
            psi = s.psi;
            phit = s.phi_t;
            psit = s.psi_t;
        } else {
            const double c = stage_c[q] * dt;
            for (std::size_t m = 0; m < n; ++m) {
                phi[m] = s.phi[m] + c * k_phi[q - 1][m];
                psi[m] = s.psi[m] + c * k_psi[q - 1][m];
                phit[m] = s.phi_t[m] + c * k_phit[q - 1][m];
                psit[m] = s.psi_t[m] + c * k_psit[q - 1][m];
            }
        }
        k_phi[q] = phit;
        k_psi[q] = psit;
        detail::accelerations(s, phi, psi, phit, psit, k_phit[q], k_psit[q]);
    }
    const double w = dt / 6.0;
    for (std::size_t m = 0; m < n; ++m) {
        s.phi[m] += w * (k_phi[0][m] + 2.0 * k_phi[1][m] + 2.0 * k_phi[2][m] + k_phi[3][m]);
        s.psi[m] += w * (k_psi[0][m] + 2.0 * k_psi[1][m] + 2.0 * k_psi[2][m] + k_psi[3][m]);
        s.phi_t[m] += w * (k_phit[0][m] + 2.0 * k_phit[1][m] + 2.0 * k_phit[2][m] + k_phit[3][m]);
        s.psi_t[m] += w * (k_psit[0][m] + 2.0 * k_psit[1][m] + 2.0 * k_psit[2][m] + k_psit[3][m]);
    }
    s.t += dt;
    ++s.steps;
    detail::require_finite(s.phi, "phi");
    detail::require_finite(s.psi, "psi");
    detail::require_finite(s.phi_t, "phi_t");
    detail::require_finite(s.psi_t, "psi_t");
}

struct FieldArrays {
    std::vector<double> A;
    std::vector<double> B;
};

/// A = steady_A + (B0/d) psi_t, B = steady_B + (A0/b) phi_t at every node.
inline FieldArrays reconstruct_fields(const SolverState& s) {
    const ModelParams& p = s.params;
    FieldArrays f{std::vector<double>(s.size()), std::vector<double>(s.size())};
    for (std::size_t j = 0; j <= s.n_y; ++j) {
        for (std::size_t i = 0; i <= s.n_x; ++i) {
            const std::size_t n = s.node(i, j);
            f.A[n] = steady_A_affine(p, s.x(i), s.y(j)) + p.B0 / p.d * s.psi_t[n];
            f.B[n] = steady_B_affine(p, s.x(i), s.y(j)) + p.A0 / p.b * s.phi_t[n];
        }
    }
    return f;
}

/// xi(x) = X - (B0 / (A0 h_y)) psi_t(x, X) on the top row.
inline std::vector<double> surface_trace(const SolverState& s) {
    const ModelParams& p = s.params;
    if (p.h_y == 0.0) throw Error(Errc::zero_acceleration, "h_y = 0 leaves the surface relation undefined");
    std::vector<double> xi(s.n_x + 1);
    const double c = p.B0 / (p.A0 * p.h_y);
    for (std::size_t i = 0; i <= s.n_x; ++i) xi[i] = p.X - c * s.psi_t[s.node(i, s.n_y)];
    return xi;
}

struct Diagnostics {
    double t = 0.0;           // time the residuals refer to (one step back)
    double residual_A = 0.0;  // RMS of A0 phi_tt - a2 b Lap phi + b B0 Lap psi
    double residual_B = 0.0;  // RMS of B0 psi_tt - a1 d Lap psi + d A0 Lap phi
    double quad_energy = 0.0;
    double max_amplitude = 0.0;
};

/// Quadratic monitoring functional of the current state.
inline double quadratic_energy(const SolverState& s) {
    const ModelParams& p = s.params;
    const double wphi = p.A0 / (-p.a2 * p.b);
    const double wpsi = p.B0 / (-p.a1 * p.d);
    const double kappa = 0.5 * (p.b * p.B0 / (-p.a2 * p.b) + p.d * p.A0 / (-p.a1 * p.d));
    const double cell = s.h_x * s.h_y;
    CompensatedSum e;
    for (std::size_t j = 0; j <= s.n_y; ++j) {
        const double wy = (j == 0 || j == s.n_y) ? 0.5 : 1.0;
        for (std::size_t i = 0; i < s.n_x; ++i) {
            const std::size_t n = s.node(i, j);
            e += wy * cell * (wphi * s.phi_t[n] * s.phi_t[n] + wpsi * s.psi_t[n] * s.psi_t[n]);
        }
    }
    for (std::size_t j = 0; j < s.n_y; ++j) {
        for (std::size_t i = 0; i < s.n_x; ++i) {
            const std::size_t n = s.node(i, j);
            const std::size_t ne = s.node(i + 1, j);
            const std::size_t nn = s.node(i, j + 1);
            const double fx = (s.phi[ne] - s.phi[n]) / s.h_x;
            const double fy = (s.phi[nn] - s.phi[n]) / s.h_y;
            const double gx = (s.psi[ne] - s.psi[n]) / s.h_x;
            const double gy = (s.psi[nn] - s.psi[n]) / s.h_y;
            e += cell * (fx * fx + fy * fy + gx * gx + gy * gy + 2.0 * kappa * (fx * gx + fy * gy));
        }
    }
    return 0.5 * e.value();
}

/// Residuals of both potential equations on interior nodes at the previous
/// step, with second time derivatives from the stored phi_t history.
inline Diagnostics diagnostics(const SolverState& s) {
    if (s.history.size() < 2)
        throw Error(Errc::insufficient_history, "diagnostics need two completed steps");
    const ModelParams& p = s.params;
    const auto& older = s.history[0];
    const auto& mid = s.history[1];
    const double span = s.t - older.t;
    const double ix2 = 1.0 / (s.h_x * s.h_x);
    const double iy2 = 1.0 / (s.h_y * s.h_y);
    CompensatedSum ra, rb;
    std::size_t count = 0;
    for (std::size_t j = 1; j < s.n_y; ++j) {
        for (std::size_t i = 0; i < s.n_x; ++i) {
            const std::size_t c = s.node(i, j);
            const std::size_t w = s.node(i == 0 ? s.n_x - 1 : i - 1, j);
            const std::size_t e = s.node(i + 1, j);
            const std::size_t no = s.node(i, j + 1);
            const std::size_t so = s.node(i, j - 1);
            const double lap_phi = (mid.phi[e] - 2.0 * mid.phi[c] + mid.phi[w]) * ix2 +
                                   (mid.phi[no] - 2.0 * mid.phi[c] + mid.phi[so]) * iy2;
            const double lap_psi = (mid.psi[e] - 2.0 * mid.psi[c] + mid.psi[w]) * ix2 +
                                   (mid.psi[no] - 2.0 * mid.psi[c] + mid.psi[so]) * iy2;
            const double phi_tt = (s.phi_t[c] - older.phi_t[c]) / span;
            const double psi_tt = (s.psi_t[c] - older.psi_t[c]) / span;
            const double r1 = p.A0 * phi_tt - p.a2 * p.b * lap_phi + p.b * p.B0 * lap_psi;
            const double r2 = p.B0 * psi_tt - p.a1 * p.d * lap_psi + p.d * p.A0 * lap_phi;
            ra += r1 * r1;
            rb += r2 * r2;
            ++count;
        }
    }
    Diagnostics d;
    d.t = mid.t;
    d.residual_A = std::sqrt(ra.value() / static_cast<double>(count));
    d.residual_B = std::sqrt(rb.value() / static_cast<double>(count));
    d.quad_energy = quadratic_energy(s);
    for (std::size_t n = 0; n < s.size(); ++n)
        d.max_amplitude = std::max({d.max_amplitude, std::abs(s.phi[n]), std::abs(s.psi[n])});
    return d;
}

}  // namespace espace
