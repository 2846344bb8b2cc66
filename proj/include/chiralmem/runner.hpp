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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chiralmem/config.hpp"
#include "chiralmem/experiments.hpp"
#include "json.hpp"

namespace chiralmem {

/// Fixed scientific notation with 12 significant digits.
inline std::string format_sci(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.11e", x);
    return buf;
}

/// x rounded to 12 significant digits, so JSON output is as stable as the CSVs.
inline double round_sig(double x) {
    if (!std::isfinite(x)) return x;
    return std::strtod(format_sci(x).c_str(), nullptr);
}

class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add(const std::vector<double>& row) {
        if (row.size() != columns_.size()) throw Error("Table: row width does not match header");
        rows_.push_back(row);
    }

    std::size_t size() const noexcept { return rows_.size(); }

    std::string csv() const {
        std::string s;
        for (std::size_t i = 0; i < columns_.size(); ++i) s += (i ? "," : "") + columns_[i];
        s += '\n';
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + format_sci(r[i]);
            s += '\n';
        }
        return s;
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

/// Everything a run produces, kept in memory until written.
struct RunOutput {
    std::map<std::string, Table> tables;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    std::vector<std::string> log;
    InvariantReport invariants;
};

namespace detail {

inline void put(nlohmann::ordered_json& j, const std::string& key, double v) { j[key] = round_sig(v); }

inline nlohmann::ordered_json invariants_json(const InvariantReport& r) {
    nlohmann::ordered_json j;
    put(j, "max_trace_error", r.max_trace_error);
    put(j, "max_hermiticity_error", r.max_hermiticity_error);
    if (r.samples > 0) put(j, "min_eigenvalue", r.min_eigenvalue);
    j["samples"] = r.samples;
    return j;
}

inline std::vector<double> delta_grid(const GridSettings& g) {
    auto v = linear_grid(mhz(g.delta_min_mhz), mhz(g.delta_max_mhz), g.delta_points);
    return v;
}

inline const char* direction_name(Direction d) { return d == Direction::Right ? "right" : "left"; }

inline Table field_table(const FieldRecord& rec) {
    Table t({"t_ns", "re_a_in", "im_a_in", "re_a_out_right", "im_a_out_right", "re_a_out_left",
             "im_a_out_left"});
    for (std::size_t i = 0; i < rec.size(); ++i)
        t.add({to_ns(rec.times[i]), rec.a_in_right[i].real(), rec.a_in_right[i].imag(),
               rec.a_out_right[i].real(), rec.a_out_right[i].imag(), rec.a_out_left[i].real(),
               rec.a_out_left[i].imag()});
    return t;
}

inline void run_spectrum(const RunConfig& c, unsigned threads, RunOutput& out) {
    const SystemParams sp = c.system.to_params();
    std::vector<double> omegas;
    for (double o : c.grid.omega_values_mhz) omegas.push_back(mhz(o));
    const auto rows = spectrum_scan(delta_grid(c.grid), omegas, sp, threads);
    Table t({"delta_p_mhz", "omega_phi_mhz", "re_tc_num", "im_tc_num", "re_tc_ana", "im_tc_ana"});
    double worst = 0.0;
    for (const auto& r : rows) {
        t.add({to_mhz(r.delta_p), to_mhz(r.coupling_rabi), r.numeric.real(), r.numeric.imag(),
               r.analytic.real(), r.analytic.imag()});
        worst = std::max(worst, std::abs(r.numeric - r.analytic));
    }
    out.tables.emplace("spectrum", std::move(t));
    out.summary["points"] = rows.size();
    put(out.summary, "max_abs_diff", worst);
    out.log.push_back("spectrum: " + std::to_string(rows.size()) + " points, max |num - ana| = " +
                      format_sci(worst));
}

inline void run_slowlight(const RunConfig& c, unsigned threads, RunOutput& out) {
    const SystemParams sp = c.system.to_params();
    const double tau_s = ns(c.protocol.tau_s_ns);
    SimulationOptions so = c.storage_options().sim;
    const auto& oms = c.grid.omega_values_mhz;
    auto results = parallel_map(oms.size(), threads,
                                [&](std::size_t i) { return slow_light_run(mhz(oms[i]), tau_s, sp, so); });

    Table delays({"omega_phi_mhz", "t_d_ns", "law_ns", "rel_error", "depth"});
    Table fields({"omega_phi_mhz", "t_ns", "in_power", "out_power"});
    std::vector<DelayResult> points;
    double worst = 0.0;
    for (const auto& r : results) {
        const double law = delay_law(r.delay.coupling_rabi, 4.0, sp.emitter_decay);
        const double rel = (r.delay.t_d - law) / law;
        worst = std::max(worst, std::abs(rel));
        delays.add({to_mhz(r.delay.coupling_rabi), to_ns(r.delay.t_d), to_ns(law), rel, r.delay.depth});
        for (std::size_t i = 0; i < r.fields.size(); ++i)
            fields.add({to_mhz(r.delay.coupling_rabi), to_ns(r.fields.times[i]), std::norm(r.fields.a_in_right[i]),
                        std::norm(r.fields.a_out_right[i])});
        points.push_back(r.delay);
        out.invariants.merge(r.invariants);
        out.log.push_back("slowlight: Omega = " + format_sci(to_mhz(r.delay.coupling_rabi)) +
                          " MHz, t_d = " + format_sci(to_ns(r.delay.t_d)) + " ns");
    }
    const double d_fit = fit_optical_depth(points, sp.emitter_decay);
    out.tables.emplace("slowlight_delays", std::move(delays));
    out.tables.emplace("slowlight_fields", std::move(fields));
    put(out.summary, "D_fit", d_fit);
    put(out.summary, "max_rel_delay_error", worst);
    out.log.push_back("slowlight: fitted optical depth D = " + format_sci(d_fit));
}

inline void storage_summary(nlohmann::ordered_json& j, const StorageResult& r) {
    put(j, "eta", r.eta);
    put(j, "eta_reported", std::clamp(r.eta, 0.0, 1.0));
    put(j, "fidelity", r.fidelity);
    put(j, "tau_d_ns", to_ns(r.tau_d));
    put(j, "t_prime_ns", to_ns(r.t_prime));
    put(j, "energy_in", r.energy_in);
    put(j, "energy_right", r.energy_right);
    put(j, "energy_left", r.energy_left);
    put(j, "retrieved_right", r.retrieved_right);
    put(j, "retrieved_left", r.retrieved_left);
    put(j, "retrieval_start_ns", to_ns(r.retrieval_start));
    j["direction"] = direction_name(r.direction);
}

inline void add_bandwidth(const RunConfig& c, unsigned threads, RunOutput& out) {
    const SystemParams sp = c.system.to_params();
    const ProtocolParams p = c.protocol.to_params();
    const BandwidthResult bw = bandwidth_scan(delta_grid(c.grid), sp, p, threads, c.storage_options());
    Table t({"delta_p_mhz", "eta", "fidelity"});
    double min_f_in_band = 1.0;
    for (const auto& r : bw.rows) {
        t.add({to_mhz(r.delta_p), r.eta, r.fidelity});
        out.invariants.merge(r.invariants);
        if (r.eta >= 0.5) min_f_in_band = std::min(min_f_in_band, r.fidelity);
    }
    out.tables.emplace("bandwidth", std::move(t));
    put(out.summary, "bandwidth_mhz", to_mhz(bw.bandwidth));
    put(out.summary, "band_lower_mhz", to_mhz(bw.lower_edge));
    put(out.summary, "band_upper_mhz", to_mhz(bw.upper_edge));
    put(out.summary, "min_fidelity_in_band", min_f_in_band);
    out.log.push_back("bandwidth: " + format_sci(to_mhz(bw.bandwidth)) + " MHz");
}

inline void run_storage(const RunConfig& c, unsigned threads, RunOutput& out) {
    const SystemParams sp = c.system.to_params();
    const ProtocolParams p = c.protocol.to_params();
    const StorageOptions opts = c.storage_options();
    const StorageResult r = storage_run(sp, p, opts);
    storage_summary(out.summary, r);
    out.invariants.merge(r.invariants);
    out.tables.emplace("storage_fields", field_table(r.field_record));
    out.log.push_back("storage: eta = " + format_sci(r.eta) + ", F = " + format_sci(r.fidelity) +
                      ", direction " + direction_name(r.direction));

    if (c.storage.mirror_direction) {
        ProtocolParams q = p;
        q.phase_on = -p.phase_on;
        StorageOptions o = opts;
        o.keep_fields = false;
        const StorageResult m = storage_run(sp, q, o);
        out.invariants.merge(m.invariants);
        nlohmann::ordered_json mj;
        storage_summary(mj, m);
        out.summary["mirror"] = mj;
        const double a = r.direction == Direction::Right ? r.retrieved_right : r.retrieved_left;
        const double b = m.direction == Direction::Right ? m.retrieved_right : m.retrieved_left;
        put(out.summary, "mirror_energy_ratio", b / a);
        out.log.push_back("storage: mirrored run eta = " + format_sci(m.eta) + ", direction " +
                          direction_name(m.direction));
    }

    if (!c.storage.decay_tau_d_us.empty()) {
        std::vector<double> taus;
        for (double t : c.storage.decay_tau_d_us) taus.push_back(us(t));
        const auto rows = storage_time_scan(taus, sp, p, threads, opts);
        Table t({"tau_d_us", "eta", "fidelity"});
        std::vector<double> xs, ys;
        double min_f = 1.0;
        for (const auto& row : rows) {
            t.add({row.tau_d * 1e6, row.eta, row.fidelity});
            xs.push_back(row.tau_d);
            ys.push_back(row.eta);
            min_f = std::min(min_f, row.fidelity);
            out.invariants.merge(row.invariants);
        }
        out.tables.emplace("decay", std::move(t));
        if (rows.size() >= 2) {
            const ExponentialFit fit = fit_exponential(xs, ys);
            put(out.summary, "decay_rate_khz", fit.rate / (2.0 * kPi * 1e3));
            if (sp.memory_loss > 0.0) put(out.summary, "decay_rate_over_gamma_m", fit.rate / sp.memory_loss);
            out.log.push_back("storage: decay rate = " + format_sci(fit.rate / (2.0 * kPi * 1e3)) + " kHz");
        }
        put(out.summary, "decay_min_fidelity", min_f);
    }

    if (c.storage.bandwidth) add_bandwidth(c, threads, out);
}

inline OptimizeConstraints constraints_of(const RunConfig& c) {
    OptimizeConstraints k;
    k.t_off = ns(c.protocol.t_off_ns);
    k.tau_d = ns(c.protocol.tau_d_ns);
    k.omega_min = mhz(c.grid.omega_min_mhz);
    k.omega_max = mhz(c.grid.omega_max_mhz);
    k.beta_min = c.grid.beta_min_per_ns * 1e9;
    k.beta_max = c.grid.beta_max_per_ns * 1e9;
    k.grid_points = c.grid.omega_points;
    k.refinements = c.grid.refinements;
    k.zoom = c.grid.zoom;
    k.log_beta = c.grid.log_beta;
    return k;
}

inline void run_heatmap(const RunConfig& c, unsigned threads, RunOutput& out) {
    const SystemParams sp = c.system.to_params();
    const OptimizeConstraints k = constraints_of(c);
    const auto oms = linear_grid(k.omega_min, k.omega_max, c.grid.omega_points);
    const auto betas = c.grid.log_beta ? log_grid(k.beta_min, k.beta_max, c.grid.beta_points)
                                       : linear_grid(k.beta_min, k.beta_max, c.grid.beta_points);
    const auto rows = heatmap_scan(oms, betas, ns(c.protocol.tau_s_ns), sp, k, threads, c.storage_options());
    Table t({"omega_phi_mhz", "beta_per_ns", "eta", "fidelity"});
    const HeatmapRow* best = nullptr;
    for (const auto& r : rows) {
        t.add({to_mhz(r.coupling_rabi), r.switch_slope * 1e-9, r.eta, r.fidelity});
        if (!best || r.eta > best->eta) best = &r;
    }
    out.tables.emplace("heatmap", std::move(t));
    put(out.summary, "best_omega_phi_mhz", to_mhz(best->coupling_rabi));
    put(out.summary, "best_beta_per_ns", best->switch_slope * 1e-9);
    put(out.summary, "best_eta", best->eta);
    put(out.summary, "best_fidelity", best->fidelity);
    out.log.push_back("heatmap: " + std::to_string(rows.size()) + " points, best eta = " + format_sci(best->eta));
}

inline void run_optimize(const RunConfig& c, unsigned threads, RunOutput& out) {
    const SystemParams sp = c.system.to_params();
    const OptimizeConstraints k = constraints_of(c);
    Table t({"tau_s_ns", "omega_phi_mhz", "beta_per_ns", "eta", "fidelity", "evaluations"});
    nlohmann::ordered_json incumbents = nlohmann::ordered_json::array();
    for (double tau_s : c.grid.tau_s_values_ns) {
        const OptimizeResult r = optimize_protocol(ns(tau_s), sp, k, threads, c.storage_options());
        t.add({tau_s, to_mhz(r.coupling_rabi), r.switch_slope * 1e-9, r.eta, r.fidelity,
               static_cast<double>(r.evaluations)});
        nlohmann::ordered_json j;
        put(j, "tau_s_ns", tau_s);
        put(j, "omega_phi_mhz", to_mhz(r.coupling_rabi));
        put(j, "beta_per_ns", r.switch_slope * 1e-9);
        put(j, "eta", r.eta);
        put(j, "fidelity", r.fidelity);
        incumbents.push_back(j);
        out.log.push_back("optimize: tau_s = " + format_sci(tau_s) + " ns -> Omega = " +
                          format_sci(to_mhz(r.coupling_rabi)) + " MHz, beta = " +
                          format_sci(r.switch_slope * 1e-9) + " /ns, eta = " + format_sci(r.eta));
    }
    out.tables.emplace("optimize", std::move(t));
    out.summary["incumbents"] = incumbents;
}

}  // namespace detail

/// Runs the configured experiment in memory.
inline RunOutput execute(const RunConfig& c, unsigned threads = 1) {
    validate_config(c);
    RunOutput out;
    out.summary["experiment"] = to_string(c.experiment);
    switch (c.experiment) {
        case Experiment::Spectrum: detail::run_spectrum(c, threads, out); break;
        case Experiment::SlowLight: detail::run_slowlight(c, threads, out); break;
        case Experiment::Storage: detail::run_storage(c, threads, out); break;
        case Experiment::Bandwidth: detail::add_bandwidth(c, threads, out); break;
        case Experiment::Heatmap: detail::run_heatmap(c, threads, out); break;
        case Experiment::Optimize: detail::run_optimize(c, threads, out); break;
    }
    if (out.invariants.samples > 0) {
        out.summary["invariants"] = detail::invariants_json(out.invariants);
        if (!out.invariants.ok()) out.log.push_back("warning: density-matrix invariants exceeded tolerance");
    }
    return out;
}

/// The effective configuration as a nested object, one member per section.
namespace detail {

inline std::optional<double> parse_number(const std::string& s) {
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return x;
}

inline nlohmann::ordered_json number_json(double x) {
    if (std::nearbyint(x) == x && std::abs(x) < 1e15) return static_cast<long long>(x);
    return x;
}

}  // namespace detail

inline nlohmann::ordered_json config_json(const RunConfig& c) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    nlohmann::ordered_json* sec = &j;
    std::istringstream in(echo_config(c));
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        if (line.front() == '[') {
            const std::string name = line.substr(1, line.size() - 2);
            j[name] = nlohmann::ordered_json::object();
            sec = &j[name];
            continue;
        }
        const auto eq = line.find(" = ");
        const std::string key = line.substr(0, eq);
        const std::string value = detail::unquote(line.substr(eq + 3));
        if (key == "output_dir") continue;  // where results went, not what was run
        if (auto x = detail::parse_number(value))
            (*sec)[key] = detail::number_json(*x);
        else if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
            auto arr = nlohmann::ordered_json::array();
            std::istringstream items(value.substr(1, value.size() - 2));
            for (std::string item; std::getline(items, item, ',');) {
                item.erase(0, item.find_first_not_of(' '));
                if (auto y = detail::parse_number(item)) arr.push_back(detail::number_json(*y));
            }
            (*sec)[key] = arr;
        } else if (value == "true" || value == "false")
            (*sec)[key] = value == "true";
        else
            (*sec)[key] = value;
    }
    return j;
}

/// JSON summary text: scalar metrics plus the effective configuration.
inline std::string summary_json(const RunOutput& out, const RunConfig& c) {
    nlohmann::ordered_json j = out.summary;
    j["config"] = config_json(c);
    return j.dump(2) + "\n";
}

/// Writes <table>.csv, summary.json, config.ini and run.log into `dir`.
inline void write_outputs(const RunOutput& out, const RunConfig& c, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw Error("cannot write " + (dir / name).string());
        f << text;
        if (!f) throw Error("write failed: " + (dir / name).string());
    };
    for (const auto& [name, table] : out.tables) write(name + ".csv", table.csv());
    write("summary.json", summary_json(out, c));
    write("config.ini", echo_config(c));
    std::string log;
    for (const auto& line : out.log) log += line + "\n";
    write("run.log", log);
}

}  // namespace chiralmem
