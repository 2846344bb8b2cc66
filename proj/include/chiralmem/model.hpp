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
#include <string>
#include <vector>

#include "chiralmem/core.hpp"

namespace chiralmem {

// Unit conversions. Internally everything is rad/s and seconds.
inline constexpr double mhz(double f) { return 2.0 * kPi * f * 1e6; }
inline constexpr double to_mhz(double w) { return w / (2.0 * kPi * 1e6); }
inline constexpr double ns(double t) { return t * 1e-9; }
inline constexpr double to_ns(double t) { return t * 1e9; }
inline constexpr double us(double t) { return t * 1e-6; }

/// Side of the transmission line the probe enters from.
enum class Incidence { Left, Right };

/// Physical parameters of the two-emitter + memory-qubit atom.
struct SystemParams {
    double emitter_freq = 2.0 * kPi * 5e9;
    double memory_freq = 2.0 * kPi * 4e9;
    double emitter_decay = mhz(10.0);
    double emitter_dephasing = mhz(0.1);
    double memory_loss = mhz(0.004);
    /// Propagation phase k*d between the emitters (quarter-wavelength spacing).
    double propagation_phase = kPi / 2.0;
    /// Phase difference of the two parametric modulations before switching.
    double modulation_phase = -kPi / 2.0;
    double probe_rabi = 0.01 * mhz(10.0);
    /// emitter_freq - probe_freq.
    double probe_detuning = 0.0;
    /// Offset of the modulation frequency from emitter_freq - memory_freq.
    double coupling_detuning = 0.0;
    /// Residual emitter-emitter exchange; the model requires it to vanish.
    double exchange_coupling = 0.0;
    Incidence incidence = Incidence::Left;

    double modulation_freq() const { return emitter_freq - memory_freq + coupling_detuning; }

    /// omega_m - omega_p + omega_Phi, evaluated without cancelling large numbers.
    double memory_detuning() const { return probe_detuning + coupling_detuning; }

    /// Throws on invalid values; returns human-readable warnings otherwise.
    std::vector<std::string> validate() const {
        if (!(emitter_decay > 0.0)) throw Error("emitter_decay must be > 0");
        if (!(emitter_dephasing >= 0.0)) throw Error("gamma_phi (emitter_dephasing) must be >= 0");
        if (!(memory_loss >= 0.0)) throw Error("memory_loss must be >= 0");
        if (!(probe_rabi > 0.0)) throw Error("probe_rabi must be > 0");
        if (exchange_coupling != 0.0)
            throw Error("exchange_coupling must be 0: the model assumes a fully cancelled exchange");
        std::vector<std::string> warnings;
        if (probe_rabi > 0.2 * emitter_decay)
            throw Error("probe_rabi exceeds 0.2*Gamma: outside the weak-probe regime");
        if (probe_rabi > 0.05 * emitter_decay)
            warnings.emplace_back("probe_rabi above 0.05*Gamma; linear-response metrics degrade");
        return warnings;
    }
};

/// Probe pulse and coupling-envelope controls.
struct ProtocolParams {
    double coupling_rabi = mhz(6.0);
    double switch_slope = 0.01e9;
    double t_off = ns(80.0);
    double t_on = ns(1580.0);
    /// Modulation phase difference after retrieval starts.
    double phase_on = -kPi / 2.0;
    double probe_duration = ns(100.0);
    double probe_center = 0.0;
    /// Coupling held at coupling_rabi for all t (slow-light mode).
    bool continuous = false;
    /// Constant-amplitude probe (spectrum mode).
    bool cw_probe = false;

    double switch_midpoint() const { return 0.5 * (t_off + t_on); }

    void validate() const {
        if (!(switch_slope > 0.0)) throw Error("switch_slope (beta) must be > 0");
        if (!(probe_duration > 0.0)) throw Error("probe_duration (tau_s) must be > 0");
        if (!(coupling_rabi >= 0.0)) throw Error("coupling_rabi must be >= 0");
        if (!continuous && !(t_on > t_off)) throw Error("t_on must be later than t_off");
    }
};

/// t_on - t_off - 5/beta; negative values mean the pulse is not fully stored.
inline double storage_time(const ProtocolParams& p) {
    return p.t_on - p.t_off - 5.0 / p.switch_slope;
}

inline double probe_envelope(double t, const ProtocolParams& p, const SystemParams& sp) {
    if (p.cw_probe) return sp.probe_rabi;
    const double x = (t - p.probe_center) / p.probe_duration;
    return sp.probe_rabi * std::exp(-0.5 * x * x);
}

/// Coupling Rabi frequency: constant, then tanh switch-off at t_off and switch-on at t_on.
inline double coupling_envelope(double t, const ProtocolParams& p) {
    if (p.continuous) return p.coupling_rabi;
    // 1 - tanh(x) = 2 / (1 + e^{2x}) keeps the storage plateau accurate.
    const double off = 2.0 / (1.0 + std::exp(2.0 * p.switch_slope * (t - p.t_off)));
    const double on = 2.0 / (1.0 + std::exp(-2.0 * p.switch_slope * (t - p.t_on)));
    return 0.5 * p.coupling_rabi * (off + on);
}

/// Emitter-memory coupling g(t); the effective Rabi frequency is 2*sqrt(2)*g.
inline double coupling_strength(double t, const ProtocolParams& p) {
    return coupling_envelope(t, p) / (2.0 * std::sqrt(2.0));
}

/// Phase flips from `initial` to phase_on halfway between t_off and t_on.
inline double modulation_phase(double t, const ProtocolParams& p, double initial = -kPi / 2.0) {
    if (p.continuous) return initial;
    return t < p.switch_midpoint() ? initial : p.phase_on;
}

/// Time-independent pieces of the Hamiltonian:
///   H(t) = detuning + probe(t) * probe_unit + g(t) * coupling_unit(phase).
struct HamiltonianParts {
    ComplexMatrix detuning;
    ComplexMatrix probe_unit;

    /// Hermitian coupling term per unit g for a given modulation phase.
    static ComplexMatrix coupling_unit(double phase) {
        const auto& ops = AtomOperators::get();
        const ComplexMatrix a1 = ops.sigma1.adjoint() * ops.sigma_m;
        const ComplexMatrix a2 = ops.sigma2.adjoint() * ops.sigma_m;
        ComplexMatrix v = std::polar(1.0, phase) * a1 + a2;
        return v + v.adjoint();
    }

    static HamiltonianParts build(const SystemParams& sp) {
        const auto& ops = AtomOperators::get();
        HamiltonianParts h;
        h.detuning = sp.probe_detuning * (ops.n1 + ops.n2) + sp.memory_detuning() * ops.n_m;
        const double kd = sp.incidence == Incidence::Left ? sp.propagation_phase
                                                          : -sp.propagation_phase;
        ComplexMatrix drive = 0.5 * (ops.sigma1.adjoint() + std::polar(1.0, kd) * ops.sigma2.adjoint());
        h.probe_unit = drive + drive.adjoint();
        return h;
    }
};

/// Rotating-frame Hamiltonian of the driven chiral atom at time t.
inline ComplexMatrix build_hamiltonian(double t, const SystemParams& sp, const ProtocolParams& p) {
    const HamiltonianParts parts = HamiltonianParts::build(sp);
    ComplexMatrix h = parts.detuning;
    h += probe_envelope(t, p, sp) * parts.probe_unit;
    h += coupling_strength(t, p) *
         HamiltonianParts::coupling_unit(modulation_phase(t, p, sp.modulation_phase));
    return h;
}

/// Jump operator with the prefactor used in D[O] rho = 2 O rho O^+ - rho O^+ O - O^+ O rho.
struct Collapse {
    ComplexMatrix op;
    double rate;
};

inline std::vector<Collapse> collapse_operators(const SystemParams& sp) {
    const auto& ops = AtomOperators::get();
    return {
        {ops.sigma1, sp.emitter_decay / 2.0},
        {ops.sigma2, sp.emitter_decay / 2.0},
        {ops.n1, sp.emitter_dephasing},
        {ops.n2, sp.emitter_dephasing},
        {ops.sigma_m, sp.memory_loss / 2.0},
    };
}

}  // namespace chiralmem
