#pragma once

// Scenario orchestration: runs one configured command, writes its CSV
// outputs and a manifest. Outputs are a pure function of (config, seed).

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "espace/aggregation.hpp"
#include "espace/config.hpp"
#include "espace/io.hpp"
#include "espace/model.hpp"
#include "espace/parallel.hpp"
#include "espace/solver.hpp"
#include "espace/wave.hpp"

namespace espace {

/// M events with (x, y) drawn proportional to steady_A on [0, X]^2 by
/// rejection against its maximum; each carries total_mass / M.
inline std::vector<TransactionEvent> synth_events(const ModelParams& p, std::size_t M, std::uint64_t seed) {
    validate_params(p, CouplingCheck::skip);
    if (M < 1) throw Error(Errc::invalid_params, "M must be >= 1");
    // steady_A is affine, so its extremes sit on the corners.
    const double X = p.X;
    double lo = steady_A_affine(p, 0.0, 0.0);
    double hi = lo;
    for (auto [x, y] : {std::pair{X, 0.0}, {0.0, X}, {X, X}}) {
        lo = std::min(lo, steady_A_affine(p, x, y));
        hi = std::max(hi, steady_A_affine(p, x, y));
    }
    if (!(lo > 0.0)) throw Error(Errc::degenerate_density, "steady_A <= 0 somewhere on the square");

    boost::random::mt19937_64 rng(seed);
    boost::random::uniform_01<double> unit;
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    const double amount = steady_A_total(p) / static_cast<double>(M);

    std::vector<TransactionEvent> out;
    out.reserve(M);
    while (out.size() < M) {
        const double x = X * unit(rng);
        const double y = X * unit(rng);
        if (unit(rng) * hi >= steady_A_affine(p, x, y)) continue;
        TransactionEvent e{x, y, amount, 0.0, 0.0};
        e.v_creditor = 0.1 * normal(rng);
        e.v_borrower = 0.1 * normal(rng);
        out.push_back(e);
    }
    return out;
}

struct RunOptions {
    std::filesystem::path base_dir;  // relative input paths resolve against this
    bool record_timing = false;      // wall time breaks byte-identical manifests
};

struct RunManifest {
    json document;
    std::vector<std::string> files;  // relative to the output directory
};

namespace detail {

class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        write_atomic(dir_ / name, content);
        files_.push_back(name);
    }
    const std::vector<std::string>& files() const noexcept { return files_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> files_;
};

inline WaveMode configured_mode(const ModelParams& p, const ModeSection& m) {
    double omega = 0.0;
    if (m.omega) {
        omega = *m.omega;
    } else {
        DispersionOptions opt;
        opt.branch = m.branch;
        omega = dispersion_solve(p, m.k, opt).omega;
    }
    return build_mode(p, m.k, omega, m.kind, m.lambdas);
}

inline json mode_summary(const WaveMode& m) {
    return {{"k", m.k},         {"omega", m.omega},   {"kind", std::string(to_string(m.kind))},
            {"slope", m.slope}, {"roots", m.s},       {"lambdas", m.lambda},
            {"psi_ratios", m.psi_ratio}};
}

inline json run_steady(const ScenarioConfig& c, OutputSet& out) {
    const ModelParams& p = validate_params(c.params, CouplingCheck::skip);
    const std::size_t n = c.steady.n;
    if (n < 2) throw Error(Errc::bad_resolution, "steady.n must be >= 2");
    CsvWriter w({"xi", "yi", "x", "y", "steady_A", "steady_B"});
    const double h = p.X / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = i + 1 == n ? p.X : h * static_cast<double>(i);
            const double y = j + 1 == n ? p.X : h * static_cast<double>(j);
            w.field(i).field(j).field(x).field(y).field(steady_A(p, x, y)).field(steady_B(p, x, y));
            w.end_row();
        }
    }
    out.write("steady.csv", w.str());
    return {{"nodes_per_axis", n}, {"corner_A", steady_A(p, p.X, p.X)}, {"corner_B", steady_B(p, p.X, p.X)},
            {"total_A", steady_A_total(p)}};
}

inline json run_dispersion(const ScenarioConfig& c, OutputSet& out) {
    const ModelParams& p = c.params;
    const auto& d = c.dispersion;
    if (d.n_k < 1) throw Error(Errc::bad_resolution, "dispersion.n_k must be >= 1");
    if (!(d.k_min > 0.0) || !(d.k_max >= d.k_min))
        throw Error(Errc::invalid_params, "need 0 < k_min <= k_max");
    if (d.scan_points < 2) throw Error(Errc::bad_resolution, "dispersion.scan_points must be >= 2");
    DispersionOptions opt;
    opt.branch = d.branch;
    opt.omega_max = d.omega_max;
    opt.scan_points = d.scan_points;
    detail::require_dispersion_inputs(p, d.k_min);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    CsvWriter w({"k", "omega", "s1", "s2", "discriminant", "region"});
    std::size_t solved = 0;
    double w_lo = nan, w_hi = nan;
    for (std::size_t i = 0; i < d.n_k; ++i) {
        const double k = d.n_k == 1 ? d.k_min
                                    : d.k_min + (d.k_max - d.k_min) * static_cast<double>(i) /
                                                    static_cast<double>(d.n_k - 1);
        try {
            const DispersionPoint pt = dispersion_solve(p, k, opt);
            const RootSet r = characteristic_roots(quartic_coefficients(p, k, pt.omega));
            w.field(k).field(pt.omega).field(r.s1).field(r.s2).field(r.discriminant).field("real");
            ++solved;
            w_lo = solved == 1 ? pt.omega : std::min(w_lo, pt.omega);
            w_hi = solved == 1 ? pt.omega : std::max(w_hi, pt.omega);
        } catch (const Error& e) {
            if (e.code() != Errc::no_solution) throw;
            w.field(k).field(nan).field(nan).field(nan).field(nan);
            w.field(discriminant_factor(p) < 0.0 ? "complex" : "none");
        }
        w.end_row();
    }
    out.write("dispersion.csv", w.str());
    return {{"rows", d.n_k}, {"solved", solved}, {"omega_min", w_lo}, {"omega_max", w_hi},
            {"discriminant_factor", discriminant_factor(p)}};
}

inline json run_mode(const ScenarioConfig& c, OutputSet& out) {
    const ModelParams& p = c.params;
    const ModeSection& ms = c.mode;
    if (ms.n_profile < 2) throw Error(Errc::bad_resolution, "mode.n_profile must be >= 2");
    const WaveMode m = configured_mode(p, ms);

    CsvWriter params({"k", "omega", "kind", "slope", "s1", "s2", "s3", "s4", "lambda1", "lambda2", "lambda3",
                      "lambda4", "psi_ratio1", "psi_ratio2", "psi_ratio3", "psi_ratio4"});
    params.field(m.k).field(m.omega).field(to_string(m.kind)).field(m.slope);
    for (double v : m.s) params.field(v);
    for (double v : m.lambda) params.field(v);
    for (double v : m.psi_ratio) params.field(v);
    params.end_row();
    out.write("mode.csv", params.str());

    const double depth = ms.depth > 0.0 ? ms.depth : p.X;
    CsvWriter prof({"y", "z", "f", "f_psi"});
    for (std::size_t i = 0; i < ms.n_profile; ++i) {
        const double z = i + 1 == ms.n_profile
                             ? 0.0
                             : -depth + depth * static_cast<double>(i) / static_cast<double>(ms.n_profile - 1);
        prof.field(p.X + z).field(z).field(m.profile(z)).field(m.psi_profile(z));
        prof.end_row();
    }
    out.write("profile.csv", prof.str());
    return {{"mode", mode_summary(m)}, {"depth", depth}};
}

inline json run_simulate(const ScenarioConfig& c, OutputSet& out) {
    const ModelParams& p = c.params;
    const SimulateSection& ss = c.simulate;
    json derived;

    std::optional<WaveMode> mode;
    double L_x = ss.L_x;
    if (ss.seed_mode) {
        mode = configured_mode(p, ss.seed_mode->mode);
        if (L_x == 0.0) L_x = 2.0 * std::numbers::pi / mode->k;
        derived["mode"] = mode_summary(*mode);
    } else if (L_x == 0.0) {
        L_x = p.X;
    }
    if (!(ss.dt_factor > 0.0 && ss.dt_factor <= 1.0))
        throw Error(Errc::invalid_params, "dt_factor must lie in (0, 1]");

    SolverOptions opt;
    opt.sponge = ss.sponge;
    SolverState s = init_grid(p, ss.n_x, ss.n_y, L_x, opt);
    if (mode)
        seed_analytic_mode(s, *mode, ss.seed_mode->amplitude);
    else
        seed_pulse(s, ss.seed_pulse->center[0], ss.seed_pulse->center[1], ss.seed_pulse->width,
                   ss.seed_pulse->amplitude);

    const double dt = ss.dt_factor * cfl_max_dt(s);
    derived["L_x"] = L_x;
    derived["dt"] = dt;
    derived["cfl_max_dt"] = cfl_max_dt(s);
    derived["max_characteristic_speed"] = max_characteristic_speed(p);
    derived["growth_rate_bound"] = growth_rate_bound(p, s.h_x, s.h_y);

    const bool trace = p.h_y != 0.0;
    CsvWriter snap({"t", "xi", "yi", "phi", "psi", "A", "B"});
    CsvWriter surf({"t", "xi", "xi_elev"});
    CsvWriter diag({"t", "res_A", "res_B", "energy", "max_amp"});
    auto record = [&] {
        const FieldArrays f = reconstruct_fields(s);
        for (std::size_t j = 0; j <= s.n_y; ++j) {
            for (std::size_t i = 0; i <= s.n_x; ++i) {
                const std::size_t n = s.node(i, j);
                snap.field(s.t).field(i).field(j).field(s.phi[n]).field(s.psi[n]).field(f.A[n]).field(f.B[n]);
                snap.end_row();
            }
        }
        if (trace) {
            const auto xi = surface_trace(s);
            for (std::size_t i = 0; i <= s.n_x; ++i) {
                surf.field(s.t).field(i).field(xi[i]);
                surf.end_row();
            }
        }
        if (s.history.size() >= 2) {
            const Diagnostics d = diagnostics(s);
            diag.field(d.t).field(d.residual_A).field(d.residual_B).field(d.quad_energy).field(d.max_amplitude);
            diag.end_row();
        }
    };

    record();
    for (std::size_t n = 1; n <= ss.n_steps; ++n) {
        try {
            step(s, dt);
        } catch (const Error& e) {
            throw Error(e.code(), "step " + std::to_string(n) + " (t = " + format_double(s.t) + "): " + e.what());
        }
        const bool last = n == ss.n_steps;
        if (last || (ss.snapshot_every > 0 && n % ss.snapshot_every == 0)) record();
    }

    out.write("snapshot.csv", snap.str());
    if (trace) out.write("surface.csv", surf.str());
    out.write("diagnostics.csv", diag.str());
    derived["steps"] = s.steps;
    derived["t_final"] = s.t;
    derived["energy_final"] = quadratic_energy(s);
    if (!trace) derived["surface_trace"] = "skipped: h_y = 0";
    return derived;
}

inline json run_aggregate(const ScenarioConfig& c, const RunOptions& ro, OutputSet& out) {
    const auto& a = c.aggregate;
    std::vector<TransactionEvent> events;
    json derived;
    if (a.synth_m) {
        events = synth_events(c.params, *a.synth_m, c.rng_seed);
        out.write("events.csv", events_csv(events));
        derived["events_source"] = "synth_events";
    } else {
        std::filesystem::path path = a.events_path;
        if (path.is_relative()) path = ro.base_dir / path;
        events = parse_events_csv(read_file(path));
        derived["events_source"] = a.events_path;
    }
    const FieldGrid g = aggregate_transactions(events, a.n_cells, c.params.X, worker_count());
    out.write("grid.csv", grid_csv(g));
    CompensatedSum in;
    for (const auto& e : events) in += e.amount;
    derived["events"] = events.size();
    derived["input_total"] = in.value();
    derived["grid_total"] = g.grand_total();
    derived["cell_area"] = g.cell_area();
    return derived;
}

}  // namespace detail

/// Runs the configured command; writes outputs and manifest.json into
/// c.output_dir. Module errors propagate with the command name prefixed.
inline RunManifest run_scenario(const ScenarioConfig& c, const RunOptions& ro = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    detail::OutputSet out(c.output_dir);
    json derived;
    try {
        switch (c.command) {
            case Command::steady: derived = detail::run_steady(c, out); break;
            case Command::dispersion: derived = detail::run_dispersion(c, out); break;
            case Command::mode: derived = detail::run_mode(c, out); break;
            case Command::simulate: derived = detail::run_simulate(c, out); break;
            case Command::aggregate: derived = detail::run_aggregate(c, ro, out); break;
        }
    } catch (const Error& e) {
        throw Error(e.code(), std::string(to_string(c.command)) + ": " + e.what());
    }

    RunManifest m;
    m.files = out.files();
    json& doc = m.document;
    doc["tool"] = "espace";
#ifdef ESPACE_VERSION
    doc["version"] = ESPACE_VERSION;
#else
    doc["version"] = "unknown";
#endif
    doc["command"] = std::string(to_string(c.command));
    doc["config"] = to_json(c);
    doc["derived"] = derived;
    doc["outputs"] = m.files;
    if (ro.record_timing)
        doc["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_atomic(std::filesystem::path(c.output_dir) / "manifest.json", doc.dump(2) + "\n");
    return m;
}

}  // namespace espace
