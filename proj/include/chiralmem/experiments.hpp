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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "chiralmem/dynamics.hpp"
#include "chiralmem/io_fields.hpp"
#include "chiralmem/model.hpp"
#include "chiralmem/parallel.hpp"

namespace chiralmem {

// ---------------------------------------------------------------------------
// Signal helpers
// ---------------------------------------------------------------------------

/// Trapezoidal integral of |field|^2 over samples with t >= from.
inline double pulse_energy(const std::vector<double>& t, const std::vector<cplx>& field,
                           double from = -std::numeric_limits<double>::infinity()) {
    double e = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i - 1] < from) continue;
        e += 0.5 * (t[i] - t[i - 1]) * (std::norm(field[i]) + std::norm(field[i - 1]));
    }
    return e;
}

/// Time of the maximum of `power`, refined by a parabola through the three
/// samples around the discrete maximum.
inline double peak_time(const std::vector<double>& t, const std::vector<double>& power) {
    if (t.empty() || t.size() != power.size()) throw Error("peak_time: empty or mismatched series");
    const auto it = std::max_element(power.begin(), power.end());
    const std::size_t i = static_cast<std::size_t>(it - power.begin());
    if (i == 0 || i + 1 == power.size()) return t[i];
    const double y0 = power[i - 1], y1 = power[i], y2 = power[i + 1];
    const double curv = y0 - 2.0 * y1 + y2;
    if (curv >= 0.0) return t[i];
    const double shift = 0.5 * (y0 - y2) / curv;
    return t[i] + shift * 0.5 * (t[i + 1] - t[i - 1]);
}

inline std::vector<double> power_of(const std::vector<cplx>& field) {
    std::vector<double> p(field.size());
    std::transform(field.begin(), field.end(), p.begin(), [](cplx a) { return std::norm(a); });
    return p;
}

/// Direction the retrieved pulse is routed to for a given turn-on phase.
inline Direction retrieval_direction(double phase_on) {
    return std::sin(phase_on) > 0.0 ? Direction::Left : Direction::Right;
}

inline double default_sample_dt(const SystemParams& sp, const ProtocolParams& p) {
    return std::min(p.probe_duration / 50.0, 1.0 / (20.0 * sp.emitter_decay));
}

struct SimulationOptions {
    EvolveOptions evolve{};
    /// Overrides default_sample_dt when > 0.
    double sample_dt = 0.0;
};

/// Mean fields on [t0, t1], plus the invariant report of the underlying run.
struct FieldSimulation {
    FieldRecord record;
    std::vector<cplx> memory_coherence;
    InvariantReport invariants;
};

inline FieldSimulation simulate_fields(const SystemParams& sp, const ProtocolParams& p, double t0,
                                       double t1, const SimulationOptions& opts = {}) {
    const double dt = opts.sample_dt > 0.0 ? opts.sample_dt : default_sample_dt(sp, p);
    EvolveOptions eo = opts.evolve;
    eo.store_states = false;
    const Trajectory traj = evolve(DensityMatrix::ground(), t0, t1, sp, p, dt, eo);
    FieldSimulation sim;
    sim.record = fields_from_trajectory(traj, sp, p);
    sim.memory_coherence.reserve(traj.expectations.size());
    for (const auto& e : traj.expectations) sim.memory_coherence.push_back(e.sigma_m);
    sim.invariants = traj.invariants;
    return sim;
}

// ---------------------------------------------------------------------------
// Spectrum (steady-state transmission)
// ---------------------------------------------------------------------------

struct SpectrumRow {
    double delta_p;
    double coupling_rabi;
    cplx numeric;
    cplx analytic;
};

inline std::vector<SpectrumRow> spectrum_scan(const std::vector<double>& delta_grid,
                                              const std::vector<double>& omega_grid,
                                              const SystemParams& sp, unsigned threads = 1) {
    if (delta_grid.empty() || omega_grid.empty()) throw Error("spectrum_scan: empty grid");
    const std::size_t nd = delta_grid.size();
    return parallel_map(nd * omega_grid.size(), threads, [&](std::size_t k) {
        const double om = omega_grid[k / nd];
        const double dp = delta_grid[k % nd];
        return SpectrumRow{dp, om, transmission_numeric(dp, om, sp), transmission_analytic(dp, om, sp)};
    });
}

// ---------------------------------------------------------------------------
// Slow light
// ---------------------------------------------------------------------------

/// t_d = D * Gamma / Omega^2.
inline double delay_law(double coupling_rabi, double depth, double decay) {
    if (coupling_rabi == 0.0) throw Error("delay_law: coupling Rabi frequency must be nonzero");
    return depth * decay / (coupling_rabi * coupling_rabi);
}

struct DelayResult {
    double t_d = 0.0;
    double coupling_rabi = 0.0;
    /// t_d * Omega^2 / Gamma for this single point.
    double depth = 0.0;
};

struct SlowLightResult {
    FieldRecord fields;
    DelayResult delay;
    InvariantReport invariants;
};

inline SlowLightResult slow_light_run(double coupling_rabi, double probe_duration, const SystemParams& sp,
                                      const SimulationOptions& opts = {}) {
    ProtocolParams p;
    p.continuous = true;
    p.coupling_rabi = coupling_rabi;
    p.probe_duration = probe_duration;
    p.probe_center = 0.0;
    p.validate();
    sp.validate();

    const double expected = coupling_rabi > 0.0 ? delay_law(coupling_rabi, 4.0, sp.emitter_decay) : 0.0;
    const double t0 = p.probe_center - 5.0 * probe_duration;
    double t1 = p.probe_center + 5.0 * probe_duration + 3.0 * expected;

    // Slow retrievals (weak coupling) outlast the default window; double the
    // post-switch span until the pulse has died out.
    constexpr int kMaxAttempts = 5;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        FieldSimulation sim = simulate_fields(sp, p, t0, t1, opts);
        const auto out_power = power_of(sim.record.a_out_right);
        const auto imax = std::max_element(out_power.begin(), out_power.end()) - out_power.begin();
        if (static_cast<std::size_t>(imax) + 1 == out_power.size()) {
            t1 += 10.0 * probe_duration;
            continue;
        }
        SlowLightResult r;
        r.delay.coupling_rabi = coupling_rabi;
        r.delay.t_d = peak_time(sim.record.times, out_power) -
                      peak_time(sim.record.times, power_of(sim.record.a_in_right));
        r.delay.depth = r.delay.t_d * coupling_rabi * coupling_rabi / sp.emitter_decay;
        r.fields = std::move(sim.record);
        r.invariants = sim.invariants;
        return r;
    }
    throw Error("slow_light_run: output peak not inside the simulation window");
}

/// Least-squares fit of ln t_d = ln D + ln(Gamma / Omega^2); returns D.
inline double fit_optical_depth(const std::vector<DelayResult>& points, double decay) {
    if (points.empty()) throw Error("fit_optical_depth: no points");
    double acc = 0.0;
    for (const auto& p : points) {
        if (!(p.t_d > 0.0) || p.coupling_rabi == 0.0)
            throw Error("fit_optical_depth: delays must be positive");
        acc += std::log(p.t_d * p.coupling_rabi * p.coupling_rabi / decay);
    }
    return std::exp(acc / static_cast<double>(points.size()));
}

// ---------------------------------------------------------------------------
// Storage metrics
// ---------------------------------------------------------------------------

/// Retrieved energy in `direction` after retrieval_start over the total input energy.
inline double efficiency(const FieldRecord& rec, double retrieval_start, Direction direction) {
    const double e_in = pulse_energy(rec.times, rec.a_in_right);
    if (!(e_in > 0.0)) throw Error("efficiency: input pulse carries no energy");
    return pulse_energy(rec.times, output_field(rec, direction), retrieval_start) / e_in;
}

enum class Alignment { PeakPower, CrossCorrelation };

struct FidelityResult {
    double fidelity = 0.0;
    double t_prime = 0.0;
};

namespace detail {

inline cplx interpolate(const std::vector<double>& t, const std::vector<cplx>& f, double x) {
    if (x < t.front() || x > t.back()) return {};
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    if (it == t.end()) return f.back();
    const std::size_t j = static_cast<std::size_t>(it - t.begin());
    if (j == 0) return f.front();
    const double w = (x - t[j - 1]) / (t[j] - t[j - 1]);
    return (1.0 - w) * f[j - 1] + w * f[j];
}

inline std::vector<cplx> gated(const FieldRecord& rec, Direction d, double from) {
    std::vector<cplx> out = output_field(rec, d);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (rec.times[i] < from) out[i] = {};
    return out;
}

}  // namespace detail

/// Normalized overlap |int a_in^*(t) a_out(t + t') dt|^2 / (E_in E_out) for a given shift.
inline double overlap_fidelity(const FieldRecord& rec, Direction direction, double retrieval_start,
                               double t_prime) {
    const std::vector<cplx> out = detail::gated(rec, direction, retrieval_start);
    const double e_in = pulse_energy(rec.times, rec.a_in_right);
    const double e_out = pulse_energy(rec.times, out);
    if (!(e_in > 0.0) || !(e_out > 0.0)) throw Error("fidelity: zero input or output energy");
    cplx acc{};
    cplx prev = std::conj(rec.a_in_right[0]) * detail::interpolate(rec.times, out, rec.times[0] + t_prime);
    for (std::size_t i = 1; i < rec.size(); ++i) {
        const cplx cur =
            std::conj(rec.a_in_right[i]) * detail::interpolate(rec.times, out, rec.times[i] + t_prime);
        acc += 0.5 * (rec.times[i] - rec.times[i - 1]) * (cur + prev);
        prev = cur;
    }
    return std::norm(acc) / (e_in * e_out);
}

/// Fidelity of the retrieved pulse (t >= retrieval_start) against the input.
/// PeakPower aligns the power maxima; CrossCorrelation scans sample lags for the best overlap.
inline FidelityResult fidelity(const FieldRecord& rec, Direction direction,
                               double retrieval_start = -std::numeric_limits<double>::infinity(),
                               Alignment alignment = Alignment::PeakPower) {
    if (rec.size() < 3) throw Error("fidelity: record too short");
    const std::vector<cplx> out = detail::gated(rec, direction, retrieval_start);
    if (!(pulse_energy(rec.times, out) > 0.0) || !(pulse_energy(rec.times, rec.a_in_right) > 0.0))
        throw Error("fidelity: zero input or output energy");
    FidelityResult r;
    r.t_prime = peak_time(rec.times, power_of(out)) - peak_time(rec.times, power_of(rec.a_in_right));
    r.fidelity = overlap_fidelity(rec, direction, retrieval_start, r.t_prime);
    if (alignment == Alignment::CrossCorrelation) {
        const double dt = rec.times[1] - rec.times[0];
        const double centre = r.t_prime;
        // Scan +-25% of the record span around the peak alignment.
        const long span = static_cast<long>(0.25 * (rec.times.back() - rec.times.front()) / dt);
        for (long lag = -span; lag <= span; lag += 1) {
            const double tp = centre + static_cast<double>(lag) * dt;
            const double f = overlap_fidelity(rec, direction, retrieval_start, tp);
            if (f > r.fidelity) r = {f, tp};
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Storage and retrieval
// ---------------------------------------------------------------------------

struct StorageOptions {
    SimulationOptions sim{};
    Alignment alignment = Alignment::PeakPower;
    /// Keep the field record in the result (large for long windows).
    bool keep_fields = true;
    /// Relative power at the window end that triggers the truncation guard.
    double truncation_tolerance = 1e-4;
};

struct StorageResult {
    /// Raw efficiency; never clamped.
    double eta = 0.0;
    double fidelity = 0.0;
    double tau_d = 0.0;
    double t_prime = 0.0;
    double energy_in = 0.0;
    /// Whole-window output energies (photons).
    double energy_right = 0.0;
    double energy_left = 0.0;
    /// Output energies after the retrieval start.
    double retrieved_right = 0.0;
    double retrieved_left = 0.0;
    double retrieval_start = 0.0;
    double window_start = 0.0;
    double window_end = 0.0;
    Direction direction = Direction::Right;
    FieldRecord field_record;
    std::vector<cplx> memory_coherence;
    InvariantReport invariants;
};

inline double storage_window_end(const ProtocolParams& p) {
    return p.t_on + std::max({10.0 * p.probe_duration, 20.0 / p.switch_slope, 3e-6});
}

inline StorageResult storage_run(const SystemParams& sp, const ProtocolParams& p,
                                 const StorageOptions& opts = {}) {
    sp.validate();
    p.validate();
    if (p.continuous) throw Error("storage_run: protocol must switch the coupling");
    const double tau_d = storage_time(p);
    if (tau_d < 0.0) {
        std::ostringstream os;
        os << "storage_run: storage time t_on - t_off - 5/beta is negative (" << tau_d << " s)";
        throw Error(os.str());
    }

    const double t0 = p.probe_center - 5.0 * p.probe_duration;
    const double base_end = storage_window_end(p);
    double t1 = base_end;
    const Direction dir = retrieval_direction(p.phase_on);
    const double start = p.switch_midpoint();

    // Slow retrievals (weak coupling) outlast the default window; double the
    // post-switch span until the pulse has died out.
    constexpr int kMaxAttempts = 5;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        FieldSimulation sim = simulate_fields(sp, p, t0, t1, opts.sim);
        const FieldRecord& rec = sim.record;
        const auto out_power = power_of(detail::gated(rec, dir, start));
        const double peak = *std::max_element(out_power.begin(), out_power.end());
        if (peak > 0.0 && out_power.back() > opts.truncation_tolerance * peak) {
            if (attempt + 1 < kMaxAttempts) {
                t1 += t1 - p.t_on;
                continue;
            }
            throw Error("storage_run: retrieved pulse truncated at the window end");
        }

        StorageResult r;
        r.tau_d = tau_d;
        r.direction = dir;
        r.retrieval_start = start;
        r.window_start = t0;
        r.window_end = t1;
        r.energy_in = pulse_energy(rec.times, rec.a_in_right);
        r.energy_right = pulse_energy(rec.times, rec.a_out_right);
        r.energy_left = pulse_energy(rec.times, rec.a_out_left);
        r.retrieved_right = pulse_energy(rec.times, rec.a_out_right, start);
        r.retrieved_left = pulse_energy(rec.times, rec.a_out_left, start);
        r.eta = efficiency(rec, start, dir);
        const double retrieved = dir == Direction::Right ? r.retrieved_right : r.retrieved_left;
        if (retrieved > 0.0) {
            const FidelityResult f = fidelity(rec, dir, start, opts.alignment);
            r.fidelity = f.fidelity;
            r.t_prime = f.t_prime;
        }
        r.invariants = sim.invariants;
        if (opts.keep_fields) {
            r.field_record = std::move(sim.record);
            r.memory_coherence = std::move(sim.memory_coherence);
        }
        return r;
    }
    throw Error("storage_run: unreachable");
}

/// Protocol with t_on placed so that the storage time equals tau_d.
inline ProtocolParams storage_protocol(double coupling_rabi, double switch_slope, double t_off, double tau_d,
                                       double probe_duration, double phase_on = -kPi / 2.0) {
    ProtocolParams p;
    p.coupling_rabi = coupling_rabi;
    p.switch_slope = switch_slope;
    p.t_off = t_off;
    p.t_on = t_off + 5.0 / switch_slope + tau_d;
    p.probe_duration = probe_duration;
    p.phase_on = phase_on;
    return p;
}

// ---------------------------------------------------------------------------
// Scans
// ---------------------------------------------------------------------------

struct BandwidthRow {
    double delta_p;
    double eta;
    double fidelity;
    InvariantReport invariants{};
};

struct BandwidthResult {
    std::vector<BandwidthRow> rows;
    /// Width of the eta >= 0.5 band in angular units (divide by 2 pi for Hz).
    double bandwidth = 0.0;
    double lower_edge = 0.0;
    double upper_edge = 0.0;
};

/// Width of the contiguous eta >= threshold interval around the best grid point,
/// with linear interpolation at the crossings.
inline BandwidthResult band_edges(std::vector<BandwidthRow> rows, double threshold = 0.5) {
    if (rows.size() < 3) throw Error("bandwidth: grid needs at least three points");
    BandwidthResult r;
    r.rows = std::move(rows);
    const auto& v = r.rows;
    const std::size_t best = static_cast<std::size_t>(
        std::max_element(v.begin(), v.end(), [](auto& a, auto& b) { return a.eta < b.eta; }) - v.begin());
    if (v[best].eta < threshold) throw Error("bandwidth: efficiency never reaches the threshold");
    std::size_t lo = best, hi = best;
    while (lo > 0 && v[lo - 1].eta >= threshold) --lo;
    while (hi + 1 < v.size() && v[hi + 1].eta >= threshold) ++hi;
    if (lo == 0 || hi + 1 == v.size()) throw Error("bandwidth: band not bracketed by the detuning grid");
    auto cross = [&](const BandwidthRow& a, const BandwidthRow& b) {
        return a.delta_p + (threshold - a.eta) * (b.delta_p - a.delta_p) / (b.eta - a.eta);
    };
    r.lower_edge = cross(v[lo - 1], v[lo]);
    r.upper_edge = cross(v[hi], v[hi + 1]);
    r.bandwidth = r.upper_edge - r.lower_edge;
    return r;
}

inline BandwidthResult bandwidth_scan(const std::vector<double>& delta_grid, const SystemParams& sp,
                                      const ProtocolParams& p, unsigned threads = 1,
                                      const StorageOptions& opts = {}) {
    StorageOptions o = opts;
    o.keep_fields = false;
    auto rows = parallel_map(delta_grid.size(), threads, [&](std::size_t i) {
        SystemParams s = sp;
        s.probe_detuning = delta_grid[i];
        const StorageResult res = storage_run(s, p, o);
        return BandwidthRow{delta_grid[i], res.eta, res.fidelity, res.invariants};
    });
    return band_edges(std::move(rows));
}

struct DecayRow {
    double tau_d;
    double eta;
    double fidelity;
    InvariantReport invariants{};
};

struct ExponentialFit {
    double amplitude = 0.0;
    double rate = 0.0;
};

/// Least-squares line through (x, ln y).
inline ExponentialFit fit_exponential(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("fit_exponential: need at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > 0.0)) throw Error("fit_exponential: values must be positive");
        const double ly = std::log(y[i]);
        sx += x[i];
        sy += ly;
        sxx += x[i] * x[i];
        sxy += x[i] * ly;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {std::exp((sy - slope * sx) / n), -slope};
}

inline std::vector<DecayRow> storage_time_scan(const std::vector<double>& tau_grid, const SystemParams& sp,
                                               const ProtocolParams& base, unsigned threads = 1,
                                               const StorageOptions& opts = {}) {
    StorageOptions o = opts;
    o.keep_fields = false;
    return parallel_map(tau_grid.size(), threads, [&](std::size_t i) {
        ProtocolParams p = base;
        p.t_on = p.t_off + 5.0 / p.switch_slope + tau_grid[i];
        const StorageResult r = storage_run(sp, p, o);
        return DecayRow{tau_grid[i], r.eta, r.fidelity, r.invariants};
    });
}

// ---------------------------------------------------------------------------
// Control optimization
// ---------------------------------------------------------------------------

struct OptimizeConstraints {
    double t_off = ns(80.0);
    double tau_d = us(1.0);
    double omega_min = mhz(2.0);
    double omega_max = mhz(12.0);
    double beta_min = 0.005e9;
    double beta_max = 0.2e9;
    std::size_t grid_points = 15;
    std::size_t refinements = 2;
    double zoom = 4.0;
    /// Sample beta on a logarithmic axis.
    bool log_beta = true;
};

struct HeatmapRow {
    double coupling_rabi;
    double switch_slope;
    double eta;
    double fidelity;
};

inline std::vector<HeatmapRow> heatmap_scan(const std::vector<double>& omega_grid,
                                            const std::vector<double>& beta_grid, double probe_duration,
                                            const SystemParams& sp, const OptimizeConstraints& c,
                                            unsigned threads = 1, const StorageOptions& opts = {}) {
    StorageOptions o = opts;
    o.keep_fields = false;
    const std::size_t nb = beta_grid.size();
    return parallel_map(omega_grid.size() * nb, threads, [&](std::size_t k) {
        const double om = omega_grid[k / nb], b = beta_grid[k % nb];
        const StorageResult r =
            storage_run(sp, storage_protocol(om, b, c.t_off, c.tau_d, probe_duration), o);
        return HeatmapRow{om, b, r.eta, r.fidelity};
    });
}

struct OptimizeResult {
    double coupling_rabi = 0.0;
    double switch_slope = 0.0;
    double eta = -std::numeric_limits<double>::infinity();
    double fidelity = 0.0;
    std::size_t evaluations = 0;
};

inline std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    auto g = linear_grid(std::log(lo), std::log(hi), n);
    for (auto& v : g) v = std::exp(v);
    return g;
}

/// Coarse-to-fine grid search maximizing eta over (coupling_rabi, switch_slope).
inline OptimizeResult optimize_protocol(double probe_duration, const SystemParams& sp,
                                        const OptimizeConstraints& c, unsigned threads = 1,
                                        const StorageOptions& opts = {}) {
    if (!(probe_duration > 0.0)) throw Error("optimize_protocol: probe duration must be > 0");
    if (!(c.omega_max > c.omega_min) || !(c.beta_max > c.beta_min) || c.omega_min <= 0.0 ||
        c.beta_min <= 0.0 || c.grid_points < 2)
        throw Error("optimize_protocol: empty constraint box");

    auto to_axis = [&](double b) { return c.log_beta ? std::log(b) : b; };
    auto from_axis = [&](double a) { return c.log_beta ? std::exp(a) : a; };

    double om_lo = c.omega_min, om_hi = c.omega_max;
    double b_lo = to_axis(c.beta_min), b_hi = to_axis(c.beta_max);
    const double b_floor = b_lo, b_ceil = b_hi;

    OptimizeResult best;
    for (std::size_t pass = 0; pass <= c.refinements; ++pass) {
        const auto oms = linear_grid(om_lo, om_hi, c.grid_points);
        const auto bas = linear_grid(b_lo, b_hi, c.grid_points);
        std::vector<double> betas(bas.size());
        std::transform(bas.begin(), bas.end(), betas.begin(), from_axis);
        const auto rows = heatmap_scan(oms, betas, probe_duration, sp, c, threads, opts);
        best.evaluations += rows.size();
        for (const auto& r : rows)
            if (r.eta > best.eta) best = {r.coupling_rabi, r.switch_slope, r.eta, r.fidelity, best.evaluations};

        const double om_half = 0.5 * (om_hi - om_lo) / c.zoom;
        const double b_half = 0.5 * (b_hi - b_lo) / c.zoom;
        const double b_c = to_axis(best.switch_slope);
        om_lo = std::max(c.omega_min, best.coupling_rabi - om_half);
        om_hi = std::min(c.omega_max, best.coupling_rabi + om_half);
        b_lo = std::max(b_floor, b_c - b_half);
        b_hi = std::min(b_ceil, b_c + b_half);
    }
    return best;
}

}  // namespace chiralmem
