#pragma once

// Scenario configuration: one JSON document holding the model parameters and
// exactly one command section. Unknown keys are rejected everywhere.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>

#include "json.hpp"

#include "espace/error.hpp"
#include "espace/model.hpp"
#include "espace/wave.hpp"

namespace espace {

using json = nlohmann::ordered_json;

struct SteadySection {
    std::size_t n = 21;  // nodes per axis
    bool operator==(const SteadySection&) const = default;
};

struct DispersionSection {
    double k_min = 0.1;
    double k_max = 5.0;
    std::size_t n_k = 100;
    RootBranch branch = RootBranch::any;
    double omega_max = 0.0;  // 0 = automatic
    int scan_points = 64;
    bool operator==(const DispersionSection&) const = default;
};

struct ModeSection {
    double k = 1.0;
    ModeKind kind = ModeKind::single_decay;
    std::array<double, 2> lambdas{0.0, 0.0};  // free (lambda2, lambda4) for kind = general
    std::optional<double> omega;               // default: dispersion_solve(k)
    RootBranch branch = RootBranch::any;
    double depth = 0.0;  // profile over z in [-depth, 0]; 0 = X
    std::size_t n_profile = 201;
    bool operator==(const ModeSection&) const = default;
};

struct ModeSeed {
    ModeSection mode;
    double amplitude = 1e-3;
    bool operator==(const ModeSeed&) const = default;
};

struct PulseSeed {
    std::array<double, 2> center{0.0, 0.0};
    double width = 1.0;
    double amplitude = 1e-3;
    bool operator==(const PulseSeed&) const = default;
};

struct SimulateSection {
    std::size_t n_x = 64;
    std::size_t n_y = 64;
    double L_x = 0.0;  // 0 = one wavelength of the seeded mode, or X for a pulse
    double dt_factor = 0.9;
    std::size_t n_steps = 100;
    std::optional<ModeSeed> seed_mode;
    std::optional<PulseSeed> seed_pulse;
    std::size_t snapshot_every = 0;  // 0 = initial and final state only
    bool sponge = false;
    bool operator==(const SimulateSection&) const = default;
};

struct AggregateSection {
    std::string events_path;             // CSV x,y,amount,v_creditor,v_borrower
    std::optional<std::size_t> synth_m;  // alternative: sample this many events
    std::size_t n_cells = 10;
    bool operator==(const AggregateSection&) const = default;
};

enum class Command { steady, dispersion, mode, simulate, aggregate };

inline std::string_view to_string(Command c) noexcept {
    switch (c) {
        case Command::steady: return "steady";
        case Command::dispersion: return "dispersion";
        case Command::mode: return "mode";
        case Command::simulate: return "simulate";
        case Command::aggregate: return "aggregate";
    }
    return "?";
}

struct ScenarioConfig {
    ModelParams params;
    Command command = Command::steady;
    SteadySection steady;
    DispersionSection dispersion;
    ModeSection mode;
    SimulateSection simulate;
    AggregateSection aggregate;
    std::uint64_t rng_seed = 0;
    std::string output_dir = "out";

    bool operator==(const ScenarioConfig&) const = default;
};

namespace detail {

inline void only_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw Error(Errc::parse_error, std::string(where) + " must be an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw Error(Errc::unknown_key, std::string(where) + "." + key);
    }
}

template <class T>
void read(const json& j, const char* key, T& out, std::string_view where) {
    if (!j.contains(key)) return;
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!j.at(key).is_number_unsigned())
            throw Error(Errc::parse_error, std::string(where) + "." + key + " must be a non-negative integer");
    }
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(Errc::parse_error, std::string(where) + "." + key + " has the wrong type");
    }
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& out, std::string_view where) {
    if (!j.contains(key)) return;
    T v{};
    read(j, key, v, where);
    out = v;
}

inline RootBranch parse_branch(const std::string& s) {
    if (s == "any") return RootBranch::any;
    if (s == "s1") return RootBranch::s1;
    if (s == "s2") return RootBranch::s2;
    throw Error(Errc::parse_error, "branch must be any, s1 or s2, got '" + s + "'");
}

inline std::string branch_name(RootBranch b) {
    switch (b) {
        case RootBranch::s1: return "s1";
        case RootBranch::s2: return "s2";
        default: return "any";
    }
}

inline ModeKind parse_kind(const std::string& s) {
    if (s == "single_decay") return ModeKind::single_decay;
    if (s == "growth_pair") return ModeKind::growth_pair;
    if (s == "general") return ModeKind::general;
    throw Error(Errc::parse_error, "mode kind must be single_decay, growth_pair or general, got '" + s + "'");
}

inline ModelParams parse_params(const json& j) {
    only_keys(j, "params", {"A0", "B0", "a1", "a2", "b", "d", "h_x", "h_y", "g_x", "g_y", "X", "T_window"});
    ModelParams p;
    for (auto [key, ptr] : {std::pair{"A0", &p.A0}, {"B0", &p.B0}, {"a1", &p.a1}, {"a2", &p.a2}, {"b", &p.b},
                            {"d", &p.d}, {"h_x", &p.h_x}, {"h_y", &p.h_y}, {"g_x", &p.g_x}, {"g_y", &p.g_y},
                            {"X", &p.X}, {"T_window", &p.T_window}})
        read(j, key, *ptr, "params");
    return p;
}

inline ModeSection parse_mode(const json& j, std::string_view where, bool allow_amplitude = false) {
    if (allow_amplitude)
        only_keys(j, where, {"k", "kind", "lambdas", "omega", "branch", "depth", "n_profile", "amplitude"});
    else
        only_keys(j, where, {"k", "kind", "lambdas", "omega", "branch", "depth", "n_profile"});
    ModeSection m;
    read(j, "k", m.k, where);
    std::string s = "single_decay";
    read(j, "kind", s, where);
    m.kind = parse_kind(s);
    read(j, "lambdas", m.lambdas, where);
    read(j, "omega", m.omega, where);
    s = "any";
    read(j, "branch", s, where);
    m.branch = parse_branch(s);
    read(j, "depth", m.depth, where);
    read(j, "n_profile", m.n_profile, where);
    return m;
}

// nlohmann reports a byte offset; turn it into a 1-based line number.
inline std::size_t line_of(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

}  // namespace detail

/// Parses a scenario. When `expected` is given, the single command section
/// must be that one.
inline ScenarioConfig parse_config(std::string_view text, std::optional<Command> expected = std::nullopt) {
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw Error(Errc::parse_error, "line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
    }
    detail::only_keys(j, "config",
                      {"params", "steady", "dispersion", "mode", "simulate", "aggregate", "rng_seed", "output_dir"});

    ScenarioConfig c;
    if (!j.contains("params")) throw Error(Errc::missing_section, "params");
    c.params = detail::parse_params(j.at("params"));
    detail::read(j, "rng_seed", c.rng_seed, "config");
    detail::read(j, "output_dir", c.output_dir, "config");

    int sections = 0;
    for (Command cmd : {Command::steady, Command::dispersion, Command::mode, Command::simulate, Command::aggregate}) {
        if (j.contains(std::string(to_string(cmd)))) {
            ++sections;
            c.command = cmd;
        }
    }
    if (sections != 1)
        throw Error(Errc::missing_section, "expected exactly one command section, found " + std::to_string(sections));
    if (expected && *expected != c.command)
        throw Error(Errc::missing_section, "command '" + std::string(to_string(*expected)) +
                                               "' but config holds a '" + std::string(to_string(c.command)) +
                                               "' section");

    const json& s = j.at(std::string(to_string(c.command)));
    switch (c.command) {
        case Command::steady:
            detail::only_keys(s, "steady", {"n"});
            detail::read(s, "n", c.steady.n, "steady");
            break;
        case Command::dispersion: {
            detail::only_keys(s, "dispersion", {"k_min", "k_max", "n_k", "branch", "omega_max", "scan_points"});
            auto& d = c.dispersion;
            detail::read(s, "k_min", d.k_min, "dispersion");
            detail::read(s, "k_max", d.k_max, "dispersion");
            detail::read(s, "n_k", d.n_k, "dispersion");
            std::string b = "any";
            detail::read(s, "branch", b, "dispersion");
            d.branch = detail::parse_branch(b);
            detail::read(s, "omega_max", d.omega_max, "dispersion");
            detail::read(s, "scan_points", d.scan_points, "dispersion");
            break;
        }
        case Command::mode:
            c.mode = detail::parse_mode(s, "mode");
            break;
        case Command::simulate: {
            detail::only_keys(s, "simulate", {"n_x", "n_y", "L_x", "dt_factor", "n_steps", "seed_mode", "seed_pulse",
                                              "snapshot_every", "sponge"});
            auto& m = c.simulate;
            detail::read(s, "n_x", m.n_x, "simulate");
            detail::read(s, "n_y", m.n_y, "simulate");
            detail::read(s, "L_x", m.L_x, "simulate");
            detail::read(s, "dt_factor", m.dt_factor, "simulate");
            detail::read(s, "n_steps", m.n_steps, "simulate");
            detail::read(s, "snapshot_every", m.snapshot_every, "simulate");
            detail::read(s, "sponge", m.sponge, "simulate");
            if (s.contains("seed_mode")) {
                ModeSeed seed;
                seed.mode = detail::parse_mode(s.at("seed_mode"), "simulate.seed_mode", true);
                detail::read(s.at("seed_mode"), "amplitude", seed.amplitude, "simulate.seed_mode");
                m.seed_mode = seed;
            }
            if (s.contains("seed_pulse")) {
                const json& ps = s.at("seed_pulse");
                detail::only_keys(ps, "simulate.seed_pulse", {"center", "width", "amplitude"});
                PulseSeed pulse;
                detail::read(ps, "center", pulse.center, "simulate.seed_pulse");
                detail::read(ps, "width", pulse.width, "simulate.seed_pulse");
                detail::read(ps, "amplitude", pulse.amplitude, "simulate.seed_pulse");
                m.seed_pulse = pulse;
            }
            if (m.seed_mode.has_value() == m.seed_pulse.has_value())
                throw Error(Errc::missing_section, "simulate needs exactly one of seed_mode, seed_pulse");
            break;
        }
        case Command::aggregate: {
            detail::only_keys(s, "aggregate", {"events_path", "synth_events", "n_cells"});
            auto& a = c.aggregate;
            detail::read(s, "events_path", a.events_path, "aggregate");
            detail::read(s, "synth_events", a.synth_m, "aggregate");
            detail::read(s, "n_cells", a.n_cells, "aggregate");
            if (a.events_path.empty() == !a.synth_m.has_value())
                throw Error(Errc::missing_section, "aggregate needs exactly one of events_path, synth_events");
            break;
        }
    }
    return c;
}

namespace detail {

inline json mode_json(const ModeSection& m) {
    json j;
    j["k"] = m.k;
    j["kind"] = std::string(to_string(m.kind));
    j["lambdas"] = m.lambdas;
    if (m.omega) j["omega"] = *m.omega;
    j["branch"] = branch_name(m.branch);
    j["depth"] = m.depth;
    j["n_profile"] = m.n_profile;
    return j;
}

}  // namespace detail

/// Full config with every default made explicit; parse_config(to_json(c).dump())
/// reproduces `c`.
inline json to_json(const ScenarioConfig& c) {
    const ModelParams& p = c.params;
    json j;
    j["params"] = {{"A0", p.A0}, {"B0", p.B0}, {"a1", p.a1},   {"a2", p.a2},   {"b", p.b},
                   {"d", p.d},   {"h_x", p.h_x}, {"h_y", p.h_y}, {"g_x", p.g_x}, {"g_y", p.g_y},
                   {"X", p.X},   {"T_window", p.T_window}};
    json s;
    switch (c.command) {
        case Command::steady:
            s["n"] = c.steady.n;
            break;
        case Command::dispersion: {
            const auto& d = c.dispersion;
            s = {{"k_min", d.k_min},
                 {"k_max", d.k_max},
                 {"n_k", d.n_k},
                 {"branch", detail::branch_name(d.branch)},
                 {"omega_max", d.omega_max},
                 {"scan_points", d.scan_points}};
            break;
        }
        case Command::mode:
            s = detail::mode_json(c.mode);
            break;
        case Command::simulate: {
            const auto& m = c.simulate;
            s = {{"n_x", m.n_x},         {"n_y", m.n_y},         {"L_x", m.L_x},
                 {"dt_factor", m.dt_factor}, {"n_steps", m.n_steps}, {"snapshot_every", m.snapshot_every},
                 {"sponge", m.sponge}};
            if (m.seed_mode) {
                json sm = detail::mode_json(m.seed_mode->mode);
                sm["amplitude"] = m.seed_mode->amplitude;
                s["seed_mode"] = sm;
            }
            if (m.seed_pulse)
                s["seed_pulse"] = {{"center", m.seed_pulse->center},
                                   {"width", m.seed_pulse->width},
                                   {"amplitude", m.seed_pulse->amplitude}};
            break;
        }
        case Command::aggregate: {
            const auto& a = c.aggregate;
            if (!a.events_path.empty()) s["events_path"] = a.events_path;
            if (a.synth_m) s["synth_events"] = *a.synth_m;
            s["n_cells"] = a.n_cells;
            break;
        }
    }
    j[std::string(to_string(c.command))] = s;
    j["rng_seed"] = c.rng_seed;
    j["output_dir"] = c.output_dir;
    return j;
}

}  // namespace espace
