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

#include <cmath>
#include <vector>

#include "chiralmem/dynamics.hpp"
#include "chiralmem/model.hpp"

namespace chiralmem {

/// Mean input and output fields, in units of sqrt(photons/s).
struct FieldRecord {
    std::vector<double> times;
    std::vector<cplx> a_in_right;
    std::vector<cplx> a_out_right;
    std::vector<cplx> a_out_left;

    std::size_t size() const noexcept { return times.size(); }
};

enum class Direction { Right, Left };

inline const std::vector<cplx>& output_field(const FieldRecord& rec, Direction d) {
    return d == Direction::Right ? rec.a_out_right : rec.a_out_left;
}

/// Right-moving input amplitude Omega_p(t) / sqrt(2 Gamma).
inline double input_amplitude(double t, const SystemParams& sp, const ProtocolParams& p) {
    return probe_envelope(t, p, sp) / std::sqrt(2.0 * sp.emitter_decay);
}

/// Scattered contributions for given emitter coherences:
///   right: -i sqrt(Gamma/2) (<s1> + e^{-i pi/2} <s2>)
///   left:  -i sqrt(Gamma/2) (<s1> + e^{+i pi/2} <s2>)
inline cplx scattered_right(cplx s1, cplx s2, double decay) {
    return -kI * std::sqrt(decay / 2.0) * (s1 - kI * s2);
}
inline cplx scattered_left(cplx s1, cplx s2, double decay) {
    return -kI * std::sqrt(decay / 2.0) * (s1 + kI * s2);
}

inline FieldRecord fields_from_expectations(const std::vector<double>& times,
                                            const std::vector<Expectations>& exps,
                                            const SystemParams& sp, const ProtocolParams& p) {
    if (times.size() != exps.size()) throw Error("fields: times and expectations differ in length");
    FieldRecord rec;
    rec.times = times;
    rec.a_in_right.reserve(times.size());
    rec.a_out_right.reserve(times.size());
    rec.a_out_left.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const cplx in = input_amplitude(times[i], sp, p);
        rec.a_in_right.push_back(in);
        rec.a_out_right.push_back(in + scattered_right(exps[i].sigma1, exps[i].sigma2, sp.emitter_decay));
        rec.a_out_left.push_back(scattered_left(exps[i].sigma1, exps[i].sigma2, sp.emitter_decay));
    }
    return rec;
}

inline FieldRecord fields_from_trajectory(const Trajectory& traj, const SystemParams& sp,
                                          const ProtocolParams& p) {
    if (traj.expectations.size() == traj.times.size())
        return fields_from_expectations(traj.times, traj.expectations, sp, p);
    if (traj.states.size() != traj.times.size())
        throw Error("fields_from_trajectory: trajectory has neither expectations nor states");
    const auto& ops = AtomOperators::get();
    std::vector<Expectations> exps;
    exps.reserve(traj.states.size());
    for (const auto& rho : traj.states)
        exps.push_back({expect(ops.sigma1, rho), expect(ops.sigma2, rho), expect(ops.sigma_m, rho)});
    return fields_from_expectations(traj.times, exps, sp, p);
}

/// Steady-state a_out^R / a_in^R for a constant weak probe at detuning delta_p.
inline cplx transmission_numeric(double delta_p, double coupling_rabi, SystemParams sp) {
    sp.probe_detuning = delta_p;
    sp.validate();
    const DensityMatrix rho = steady_state(sp, coupling_rabi);
    const auto& ops = AtomOperators::get();
    const cplx s1 = expect(ops.sigma1, rho);
    const cplx s2 = expect(ops.sigma2, rho);
    // a_in = Omega_p / sqrt(2 Gamma), so sqrt(Gamma/2) / a_in = Gamma / Omega_p.
    return 1.0 - kI * (sp.emitter_decay / sp.probe_rabi) * (s1 - kI * s2);
}

/// Closed-form weak-probe transmission of the driven Lambda system.
inline cplx transmission_analytic(double delta_p, double coupling_rabi, double decay,
                                  double dephasing, double memory_loss) {
    const double gamma = dephasing + decay / 2.0;
    const cplx a = delta_p - kI * (memory_loss / 2.0);
    const cplx denom = a * (delta_p - kI * gamma) - coupling_rabi * coupling_rabi / 4.0;
    if (std::abs(denom) <= 1e-30) throw Error("transmission_analytic: degenerate denominator");
    return 1.0 + 2.0 * kI * (decay / 2.0) * a / denom;
}

inline cplx transmission_analytic(double delta_p, double coupling_rabi, const SystemParams& sp) {
    return transmission_analytic(delta_p, coupling_rabi, sp.emitter_decay, sp.emitter_dephasing,
                                 sp.memory_loss);
}

}  // namespace chiralmem
