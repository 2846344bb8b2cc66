// Copyright 2026 The chiralmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Run configuration: a small INI/TOML-style format in laboratory units
// (MHz for frequencies, ns or us for times, degrees for phases).
//
//   experiment = storage
//   [system]
//   gamma_phi_mhz = 0
//   [protocol]
//   omega_phi_mhz = 6
//
// Unknown keys and malformed values are rejected with the line number.

#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "chiralmem/experiments.hpp"
#include "chiralmem/model.hpp"

namespace chiralmem {

enum class Experiment { Spectrum, SlowLight, Storage, Bandwidth, Heatmap, Optimize };

inline const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::Spectrum: return "spectrum";
        case Experiment::SlowLight: return "slowlight";
        case Experiment::Storage: return "storage";
        case Experiment::Bandwidth: return "bandwidth";
        case Experiment::Heatmap: return "heatmap";
        case Experiment::Optimize: return "optimize";
    }
    return "?";
}

inline std::optional<Experiment> experiment_from_string(std::string_view s) {
    for (auto e : {Experiment::Spectrum, Experiment::SlowLight, Experiment::Storage, Experiment::Bandwidth,
                   Experiment::Heatmap, Experiment::Optimize})
        if (s == to_string(e)) return e;
    return std::nullopt;
}

class ConfigError : public Error {
public:
    ConfigError(const std::string& key, int line, const std::string& what)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + key + ": " + what : key + ": " + what),
          key_(key),
          line_(line) {}
    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

/// [system] section, in file units.
struct SystemSettings {
    double emitter_freq_ghz = 5.0;
    double memory_freq_ghz = 4.0;
    double gamma_mhz = 10.0;
    double gamma_phi_mhz = 0.1;
    double gamma_m_mhz = 0.004;
    double kd_deg = 90.0;
    double phi_deg = -90.0;
    /// Probe Rabi frequency as a fraction of Gamma.
    double probe_rabi_over_gamma = 0.01;
    double delta_p_mhz = 0.0;
    double coupling_detuning_mhz = 0.0;
    double exchange_mhz = 0.0;
    Incidence incidence = Incidence::Left;

    bool operator==(const SystemSettings&) const = default;

    SystemParams to_params() const {
        SystemParams sp;
        sp.emitter_freq = 2.0 * kPi * emitter_freq_ghz * 1e9;
        sp.memory_freq = 2.0 * kPi * memory_freq_ghz * 1e9;
        sp.emitter_decay = mhz(gamma_mhz);
        sp.emitter_dephasing = mhz(gamma_phi_mhz);
        sp.memory_loss = mhz(gamma_m_mhz);
        sp.propagation_phase = kd_deg * kPi / 180.0;
        sp.modulation_phase = phi_deg * kPi / 180.0;
        sp.probe_rabi = probe_rabi_over_gamma * sp.emitter_decay;
        sp.probe_detuning = mhz(delta_p_mhz);
        sp.coupling_detuning = mhz(coupling_detuning_mhz);
        sp.exchange_coupling = mhz(exchange_mhz);
        sp.incidence = incidence;
        return sp;
    }
};

/// [protocol] section. The switch-on time is given through the storage time.
struct ProtocolSettings {
    double omega_phi_mhz = 6.0;
    double beta_per_ns = 0.0085;
    double t_off_ns = 80.0;
    double tau_d_ns = 1000.0;
    double phi_on_deg = -90.0;
    double tau_s_ns = 100.0;
    double probe_center_ns = 0.0;
    bool continuous = false;

    bool operator==(const ProtocolSettings&) const = default;

    double t_on_ns() const { return t_off_ns + 5.0 / beta_per_ns + tau_d_ns; }

    ProtocolParams to_params() const {
        ProtocolParams p;
        p.coupling_rabi = mhz(omega_phi_mhz);
        p.switch_slope = beta_per_ns * 1e9;
        p.t_off = ns(t_off_ns);
        p.t_on = ns(t_on_ns());
        p.phase_on = phi_on_deg * kPi / 180.0;
        p.probe_duration = ns(tau_s_ns);
        p.probe_center = ns(probe_center_ns);
        p.continuous = continuous;
        return p;
    }
};

/// [grid] section. Which fields matter depends on the experiment.
struct GridSettings {
    double delta_min_mhz = -15.0;
    double delta_max_mhz = 15.0;
    std::size_t delta_points = 61;
    /// Coupling values for spectrum and slow-light runs.
    std::vector<double> omega_values_mhz{2.0, 4.0, 6.0, 8.0, 10.0};
    /// Box for heatmap and optimize.
    double omega_min_mhz = 2.0;
    double omega_max_mhz = 12.0;
    std::size_t omega_points = 41;
    double beta_min_per_ns = 0.005;
    double beta_max_per_ns = 0.2;
    std::size_t beta_points = 41;
    bool log_beta = true;
    std::size_t refinements = 2;
    double zoom = 4.0;
    std::vector<double> tau_s_values_ns{};

    bool operator==(const GridSettings&) const = default;
};

/// [storage] section: extra runs attached to a storage experiment.
struct StorageSettings {
    /// Repeat the run with the opposite turn-on phase.
    bool mirror_direction = false;
    /// Storage times (us) for an eta(tau_d) decay scan; empty disables it.
    std::vector<double> decay_tau_d_us{};
    /// Also run a bandwidth scan with the [grid] detuning range.
    bool bandwidth = false;

    bool operator==(const StorageSettings&) const = default;
};

/// [solver] section.
struct SolverSettings {
    double rtol = 1e-9;
    double atol = 1e-12;
    /// 0 selects min(tau_s/50, 1/(20 Gamma)).
    double sample_dt_ns = 0.0;
    bool monitor_invariants = true;
    /// "peak" (power-maximum alignment) or "xcorr" (best cross-correlation lag).
    Alignment alignment = Alignment::PeakPower;

    bool operator==(const SolverSettings&) const = default;
};

struct RunConfig {
    Experiment experiment = Experiment::Storage;
    std::string output_dir = "out";
    SystemSettings system{};
    ProtocolSettings protocol{};
    GridSettings grid{};
    StorageSettings storage{};
    SolverSettings solver{};

    bool operator==(const RunConfig&) const = default;

    StorageOptions storage_options() const {
        StorageOptions o;
        o.sim.evolve.rtol = solver.rtol;
        o.sim.evolve.atol = solver.atol;
        o.sim.evolve.monitor_invariants = solver.monitor_invariants;
        o.sim.sample_dt = ns(solver.sample_dt_ns);
        o.alignment = solver.alignment;
        return o;
    }
};

/// Documented defaults for an experiment (absent keys take these values).
inline RunConfig default_config(Experiment e) {
    RunConfig c;
    c.experiment = e;
    switch (e) {
        case Experiment::Spectrum:
            break;
        case Experiment::SlowLight:
            c.protocol.continuous = true;
            c.protocol.tau_s_ns = 300.0;
            c.grid.omega_values_mhz = {3.2, 4.0, 4.8, 5.6, 6.4, 7.2, 8.0};
            break;
        case Experiment::Storage:
            break;
        case Experiment::Bandwidth:
            c.grid.delta_min_mhz = -4.0;
            c.grid.delta_max_mhz = 4.0;
            c.grid.delta_points = 81;
            break;
        case Experiment::Heatmap:
            c.system.gamma_phi_mhz = 0.0;
            c.system.gamma_m_mhz = 0.0;
            break;
        case Experiment::Optimize:
            c.system.gamma_phi_mhz = 0.0;
            c.system.gamma_m_mhz = 0.0;
            c.grid.omega_points = 15;
            c.grid.beta_points = 15;
            c.grid.tau_s_values_ns = {100.0};
            break;
    }
    return c;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string unquote(std::string_view v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
        return std::string(v.substr(1, v.size() - 2));
    return std::string(v);
}

inline double parse_double(const std::string& key, int line, std::string_view v) {
    v = trim(v);
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError(key, line, "expected a number, got '" + std::string(v) + "'");
    return out;
}

inline std::size_t parse_count(const std::string& key, int line, std::string_view v) {
    v = trim(v);
    std::size_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw ConfigError(key, line, "expected a non-negative integer, got '" + std::string(v) + "'");
    return out;
}

inline bool parse_bool(const std::string& key, int line, std::string_view v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(key, line, "expected true or false, got '" + std::string(v) + "'");
}

inline std::vector<double> parse_list(const std::string& key, int line, std::string_view v) {
    if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = trim(v.substr(1, v.size() - 2));
    std::vector<double> out;
    if (v.empty()) return out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = v.find(',', pos);
        out.push_back(parse_double(key, line, v.substr(pos, comma == std::string_view::npos ? v.npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

/// Shortest text that parses back to the same double.
inline std::string format_exact(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string format_list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_exact(v[i]);
    return s + "]";
}

struct Entry {
    std::string value;
    int line;
};

}  // namespace detail

inline void apply_key(RunConfig& c, const std::string& section, const std::string& key, const detail::Entry& e) {
    using namespace detail;
    const std::string full = section.empty() ? key : section + "." + key;
    const int ln = e.line;
    const std::string_view v = e.value;
    auto num = [&] { return parse_double(full, ln, v); };
    auto nonneg = [&] {
        const double x = num();
        if (x < 0.0) throw ConfigError(full, ln, "must be >= 0");
        return x;
    };
    auto positive = [&] {
        const double x = num();
        if (!(x > 0.0)) throw ConfigError(full, ln, "must be > 0");
        return x;
    };
    auto count = [&](std::size_t min) {
        const std::size_t n = parse_count(full, ln, v);
        if (n < min) throw ConfigError(full, ln, "must be >= " + std::to_string(min));
        return n;
    };
    auto flag = [&] { return parse_bool(full, ln, v); };
    auto list = [&] { return parse_list(full, ln, v); };

    auto& s = c.system;
    auto& p = c.protocol;
    auto& g = c.grid;
    if (section.empty()) {
        if (key == "experiment") {
            const auto ex = experiment_from_string(unquote(v));
            if (!ex) throw ConfigError(full, ln, "unknown experiment '" + unquote(v) + "'");
            c.experiment = *ex;
        } else if (key == "output_dir") {
            c.output_dir = unquote(v);
        } else {
            throw ConfigError(full, ln, "unknown key");
        }
    } else if (section == "system") {
        if (key == "emitter_freq_ghz") s.emitter_freq_ghz = positive();
        else if (key == "memory_freq_ghz") s.memory_freq_ghz = positive();
        else if (key == "gamma_mhz") s.gamma_mhz = positive();
        else if (key == "gamma_phi_mhz") s.gamma_phi_mhz = nonneg();
        else if (key == "gamma_m_mhz") s.gamma_m_mhz = nonneg();
        else if (key == "kd_deg") s.kd_deg = num();
        else if (key == "phi_deg") s.phi_deg = num();
        else if (key == "probe_rabi_over_gamma") {
            s.probe_rabi_over_gamma = positive();
            if (s.probe_rabi_over_gamma > 0.2) throw ConfigError(full, ln, "exceeds 0.2 (weak-probe regime)");
        } else if (key == "delta_p_mhz") s.delta_p_mhz = num();
        else if (key == "coupling_detuning_mhz") s.coupling_detuning_mhz = num();
        else if (key == "exchange_mhz") {
            s.exchange_mhz = num();
            if (s.exchange_mhz != 0.0) throw ConfigError(full, ln, "must be 0 (fully cancelled exchange)");
        } else if (key == "incidence") {
            const std::string val = unquote(v);
            if (val == "left") s.incidence = Incidence::Left;
            else if (val == "right") s.incidence = Incidence::Right;
            else throw ConfigError(full, ln, "expected left or right");
        } else throw ConfigError(full, ln, "unknown key");
    } else if (section == "protocol") {
        if (key == "omega_phi_mhz") p.omega_phi_mhz = nonneg();
        else if (key == "beta_per_ns") p.beta_per_ns = positive();
        else if (key == "t_off_ns") p.t_off_ns = num();
        else if (key == "tau_d_ns") p.tau_d_ns = nonneg();
        else if (key == "phi_on_deg") p.phi_on_deg = num();
        else if (key == "tau_s_ns") p.tau_s_ns = positive();
        else if (key == "probe_center_ns") p.probe_center_ns = num();
        else if (key == "continuous") p.continuous = flag();
        else throw ConfigError(full, ln, "unknown key");
    } else if (section == "grid") {
        if (key == "delta_min_mhz") g.delta_min_mhz = num();
        else if (key == "delta_max_mhz") g.delta_max_mhz = num();
        else if (key == "delta_points") g.delta_points = count(1);
        else if (key == "omega_values_mhz") g.omega_values_mhz = list();
        else if (key == "omega_min_mhz") g.omega_min_mhz = positive();
        else if (key == "omega_max_mhz") g.omega_max_mhz = positive();
        else if (key == "omega_points") g.omega_points = count(1);
        else if (key == "beta_min_per_ns") g.beta_min_per_ns = positive();
        else if (key == "beta_max_per_ns") g.beta_max_per_ns = positive();
        else if (key == "beta_points") g.beta_points = count(1);
        else if (key == "log_beta") g.log_beta = flag();
        else if (key == "refinements") g.refinements = count(0);
        else if (key == "zoom") {
            g.zoom = num();
            if (!(g.zoom > 1.0)) throw ConfigError(full, ln, "must be > 1");
        } else if (key == "tau_s_values_ns") g.tau_s_values_ns = list();
        else throw ConfigError(full, ln, "unknown key");
    } else if (section == "storage") {
        if (key == "mirror_direction") c.storage.mirror_direction = flag();
        else if (key == "decay_tau_d_us") c.storage.decay_tau_d_us = list();
        else if (key == "bandwidth") c.storage.bandwidth = flag();
        else throw ConfigError(full, ln, "unknown key");
    } else if (section == "solver") {
        if (key == "rtol") c.solver.rtol = positive();
        else if (key == "atol") c.solver.atol = positive();
        else if (key == "sample_dt_ns") c.solver.sample_dt_ns = nonneg();
        else if (key == "monitor_invariants") c.solver.monitor_invariants = flag();
        else if (key == "alignment") {
            const std::string val = unquote(v);
            if (val == "peak") c.solver.alignment = Alignment::PeakPower;
            else if (val == "xcorr") c.solver.alignment = Alignment::CrossCorrelation;
            else throw ConfigError(full, ln, "expected peak or xcorr");
        } else throw ConfigError(full, ln, "unknown key");
    } else {
        throw ConfigError("[" + section + "]", ln, "unknown section");
    }
}

/// Cross-field checks; errors name the first key involved.
inline void validate_config(const RunConfig& c) {
    const auto& g = c.grid;
    if (g.delta_max_mhz < g.delta_min_mhz) throw ConfigError("grid.delta_max_mhz", 0, "must be >= delta_min_mhz");
    if (g.omega_max_mhz <= g.omega_min_mhz) throw ConfigError("grid.omega_max_mhz", 0, "must be > omega_min_mhz");
    if (g.beta_max_per_ns <= g.beta_min_per_ns)
        throw ConfigError("grid.beta_max_per_ns", 0, "must be > beta_min_per_ns");
    for (double v : g.tau_s_values_ns)
        if (!(v > 0.0)) throw ConfigError("grid.tau_s_values_ns", 0, "values must be > 0");
    for (double v : c.storage.decay_tau_d_us)
        if (v < 0.0) throw ConfigError("storage.decay_tau_d_us", 0, "values must be >= 0");
    if ((c.experiment == Experiment::Spectrum || c.experiment == Experiment::SlowLight) &&
        g.omega_values_mhz.empty())
        throw ConfigError("grid.omega_values_mhz", 0, "must not be empty");
    if (c.experiment == Experiment::SlowLight) {
        for (double v : g.omega_values_mhz)
            if (!(v > 0.0)) throw ConfigError("grid.omega_values_mhz", 0, "values must be > 0");
    }
    if (c.experiment == Experiment::Optimize && g.tau_s_values_ns.empty())
        throw ConfigError("grid.tau_s_values_ns", 0, "must not be empty");
    if (c.experiment == Experiment::Optimize && g.omega_points < 2)
        throw ConfigError("grid.omega_points", 0, "must be >= 2 for optimize");
    if (c.experiment == Experiment::Optimize && g.beta_points != g.omega_points)
        throw ConfigError("grid.beta_points", 0, "must equal omega_points for optimize");
    try {
        c.system.to_params().validate();
    } catch (const Error& e) {
        throw ConfigError("system", 0, e.what());
    }
    try {
        c.protocol.to_params().validate();
    } catch (const Error& e) {
        throw ConfigError("protocol", 0, e.what());
    }
}

/// Parses configuration text on top of `base` (or the experiment defaults when
/// no base is given).
inline RunConfig parse_config(std::string_view text, const std::optional<RunConfig>& base = std::nullopt) {
    using detail::Entry;
    // Collect entries first: defaults depend on the experiment key.
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, Entry> entries;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = raw.find_first_of("#;"); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const auto line = detail::trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(std::string(line), line_no, "malformed section header");
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            static const char* known[] = {"system", "protocol", "grid", "storage", "solver"};
            if (std::find(std::begin(known), std::end(known), section) == std::end(known))
                throw ConfigError("[" + section + "]", line_no, "unknown section");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(std::string(line), line_no, "expected key = value");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError("(empty)", line_no, "missing key");
        const auto id = std::make_pair(section, key);
        if (entries.count(id))
            throw ConfigError(section.empty() ? key : section + "." + key, line_no, "duplicate key");
        entries.emplace(id, Entry{value, line_no});
        order.push_back(id);
    }

    RunConfig c;
    if (base) {
        c = *base;
    } else {
        Experiment ex = Experiment::Storage;
        if (auto it = entries.find({"", "experiment"}); it != entries.end()) {
            RunConfig probe;
            apply_key(probe, "", "experiment", it->second);
            ex = probe.experiment;
        }
        c = default_config(ex);
    }
    for (const auto& id : order) apply_key(c, id.first, id.second, entries.at(id));
    validate_config(c);
    return c;
}

/// Canonical text of a configuration; parse_config(echo_config(c)) == c.
inline std::string echo_config(const RunConfig& c) {
    using detail::format_exact;
    using detail::format_list;
    auto b = [](bool x) { return x ? "true" : "false"; };
    std::ostringstream os;
    os << "experiment = " << to_string(c.experiment) << "\n";
    os << "output_dir = \"" << c.output_dir << "\"\n";
    const auto& s = c.system;
    os << "\n[system]\n"
       << "emitter_freq_ghz = " << format_exact(s.emitter_freq_ghz) << "\n"
       << "memory_freq_ghz = " << format_exact(s.memory_freq_ghz) << "\n"
       << "gamma_mhz = " << format_exact(s.gamma_mhz) << "\n"
       << "gamma_phi_mhz = " << format_exact(s.gamma_phi_mhz) << "\n"
       << "gamma_m_mhz = " << format_exact(s.gamma_m_mhz) << "\n"
       << "kd_deg = " << format_exact(s.kd_deg) << "\n"
       << "phi_deg = " << format_exact(s.phi_deg) << "\n"
       << "probe_rabi_over_gamma = " << format_exact(s.probe_rabi_over_gamma) << "\n"
       << "delta_p_mhz = " << format_exact(s.delta_p_mhz) << "\n"
       << "coupling_detuning_mhz = " << format_exact(s.coupling_detuning_mhz) << "\n"
       << "exchange_mhz = " << format_exact(s.exchange_mhz) << "\n"
       << "incidence = " << (s.incidence == Incidence::Left ? "left" : "right") << "\n";
    const auto& p = c.protocol;
    os << "\n[protocol]\n"
       << "omega_phi_mhz = " << format_exact(p.omega_phi_mhz) << "\n"
       << "beta_per_ns = " << format_exact(p.beta_per_ns) << "\n"
       << "t_off_ns = " << format_exact(p.t_off_ns) << "\n"
       << "tau_d_ns = " << format_exact(p.tau_d_ns) << "\n"
       << "phi_on_deg = " << format_exact(p.phi_on_deg) << "\n"
       << "tau_s_ns = " << format_exact(p.tau_s_ns) << "\n"
       << "probe_center_ns = " << format_exact(p.probe_center_ns) << "\n"
       << "continuous = " << b(p.continuous) << "\n";
    const auto& g = c.grid;
    os << "\n[grid]\n"
       << "delta_min_mhz = " << format_exact(g.delta_min_mhz) << "\n"
       << "delta_max_mhz = " << format_exact(g.delta_max_mhz) << "\n"
       << "delta_points = " << g.delta_points << "\n"
       << "omega_values_mhz = " << format_list(g.omega_values_mhz) << "\n"
       << "omega_min_mhz = " << format_exact(g.omega_min_mhz) << "\n"
       << "omega_max_mhz = " << format_exact(g.omega_max_mhz) << "\n"
       << "omega_points = " << g.omega_points << "\n"
       << "beta_min_per_ns = " << format_exact(g.beta_min_per_ns) << "\n"
       << "beta_max_per_ns = " << format_exact(g.beta_max_per_ns) << "\n"
       << "beta_points = " << g.beta_points << "\n"
       << "log_beta = " << b(g.log_beta) << "\n"
       << "refinements = " << g.refinements << "\n"
       << "zoom = " << format_exact(g.zoom) << "\n"
       << "tau_s_values_ns = " << format_list(g.tau_s_values_ns) << "\n";
    os << "\n[storage]\n"
       << "mirror_direction = " << b(c.storage.mirror_direction) << "\n"
       << "decay_tau_d_us = " << format_list(c.storage.decay_tau_d_us) << "\n"
       << "bandwidth = " << b(c.storage.bandwidth) << "\n";
    os << "\n[solver]\n"
       << "rtol = " << format_exact(c.solver.rtol) << "\n"
       << "atol = " << format_exact(c.solver.atol) << "\n"
       << "sample_dt_ns = " << format_exact(c.solver.sample_dt_ns) << "\n"
       << "monitor_invariants = " << b(c.solver.monitor_invariants) << "\n"
       << "alignment = " << (c.solver.alignment == Alignment::PeakPower ? "peak" : "xcorr") << "\n";
    return os.str();
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig2a", "fig2bc", "fig2d", "fig3", "fig4", "fig5"};
    return names;
}

/// Frozen configurations reproducing each figure with one command.
inline RunConfig preset_config(std::string_view name) {
    if (name == "fig2a") {
        // Transmission map over detuning and coupling strength.
        RunConfig c = default_config(Experiment::Spectrum);
        c.grid.delta_min_mhz = -15.0;
        c.grid.delta_max_mhz = 15.0;
        c.grid.delta_points = 121;
        c.grid.omega_values_mhz.clear();
        for (int i = 0; i <= 20; ++i) c.grid.omega_values_mhz.push_back(0.5 * i);
        c.output_dir = "fig2a";
        return c;
    }
    if (name == "fig2bc") {
        // Transmission cuts at fixed coupling strengths.
        RunConfig c = default_config(Experiment::Spectrum);
        c.output_dir = "fig2bc";
        return c;
    }
    if (name == "fig2d") {
        RunConfig c = default_config(Experiment::SlowLight);
        c.output_dir = "fig2d";
        return c;
    }
    if (name == "fig3") {
        RunConfig c = default_config(Experiment::Heatmap);
        c.solver.monitor_invariants = false;
        c.output_dir = "fig3";
        return c;
    }
    if (name == "fig4") {
        RunConfig c = default_config(Experiment::Storage);
        c.storage.mirror_direction = true;
        c.storage.decay_tau_d_us = {0.5, 1.0, 2.0, 3.0, 5.0};
        c.storage.bandwidth = true;
        c.grid.delta_min_mhz = -4.0;
        c.grid.delta_max_mhz = 4.0;
        c.grid.delta_points = 81;
        c.output_dir = "fig4";
        return c;
    }
    if (name == "fig5") {
        RunConfig c = default_config(Experiment::Optimize);
        c.system = SystemSettings{};
        c.protocol.t_off_ns = 0.0;
        c.grid.omega_min_mhz = 1.0;
        c.grid.omega_max_mhz = 16.0;
        c.grid.beta_min_per_ns = 5e-4;
        c.grid.beta_max_per_ns = 0.2;
        c.grid.tau_s_values_ns = {50.0, 100.0, 200.0, 300.0, 400.0, 500.0, 600.0};
        c.solver.monitor_invariants = false;
        c.output_dir = "fig5";
        return c;
    }
    throw Error("unknown preset '" + std::string(name) + "'");
}

}  // namespace chiralmem
