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

#include "chiralmem/model.hpp"

#include <Eigen/Dense>

#include "gtest/gtest.h"

using namespace chiralmem;

namespace {

constexpr double kTol = 1e-12;

std::size_t idx(int e1, int e2, int m) { return basis_index(e1, e2, m); }

}  // namespace

TEST(units, conversions) {
    EXPECT_DOUBLE_EQ(mhz(1.0), 2.0 * kPi * 1e6);
    EXPECT_DOUBLE_EQ(to_mhz(mhz(3.2)), 3.2);
    EXPECT_DOUBLE_EQ(ns(80.0), 8e-8);
    EXPECT_DOUBLE_EQ(us(1.0), 1e-6);
}

TEST(system_params, defaults) {
    SystemParams sp;
    EXPECT_DOUBLE_EQ(sp.emitter_decay, mhz(10.0));
    EXPECT_DOUBLE_EQ(sp.emitter_dephasing, mhz(0.1));
    EXPECT_DOUBLE_EQ(sp.memory_loss, mhz(0.004));
    EXPECT_DOUBLE_EQ(sp.probe_rabi, 0.01 * sp.emitter_decay);
    EXPECT_DOUBLE_EQ(sp.propagation_phase, kPi / 2.0);
    EXPECT_DOUBLE_EQ(sp.modulation_phase, -kPi / 2.0);
    EXPECT_DOUBLE_EQ(sp.modulation_freq(), sp.emitter_freq - sp.memory_freq);
    EXPECT_TRUE(sp.validate().empty());
}

TEST(system_params, validation) {
    SystemParams sp;
    sp.emitter_dephasing = -1.0;
    EXPECT_THROW(sp.validate(), Error);
    sp = {};
    sp.emitter_decay = 0.0;
    EXPECT_THROW(sp.validate(), Error);
    sp = {};
    sp.probe_rabi = 0.0;
    EXPECT_THROW(sp.validate(), Error);
    sp = {};
    sp.exchange_coupling = 1.0;
    EXPECT_THROW(sp.validate(), Error);
    sp = {};
    sp.probe_rabi = 0.1 * sp.emitter_decay;
    EXPECT_EQ(sp.validate().size(), 1u);
    sp.probe_rabi = 0.25 * sp.emitter_decay;
    EXPECT_THROW(sp.validate(), Error);
}

TEST(protocol_params, validation) {
    ProtocolParams p;
    EXPECT_NO_THROW(p.validate());
    p.switch_slope = 0.0;
    EXPECT_THROW(p.validate(), Error);
    p = {};
    p.probe_duration = -1.0;
    EXPECT_THROW(p.validate(), Error);
    p = {};
    p.t_on = p.t_off;
    EXPECT_THROW(p.validate(), Error);
    p.continuous = true;
    EXPECT_NO_THROW(p.validate());
}

TEST(storage_time, arithmetic) {
    ProtocolParams p;
    p.t_on = us(1.5);
    p.t_off = ns(80.0);
    p.switch_slope = 0.05e9;
    EXPECT_NEAR(storage_time(p), ns(1320.0), 1e-15);
    p.switch_slope = 1e30;
    EXPECT_NEAR(storage_time(p), p.t_on - p.t_off, 1e-18);
    p.switch_slope = 0.05e9;
    p.t_on = ns(100.0);
    EXPECT_LT(storage_time(p), 0.0);
}

TEST(probe_envelope, gaussian) {
    SystemParams sp;
    ProtocolParams p;
    p.probe_center = ns(40.0);
    EXPECT_DOUBLE_EQ(probe_envelope(p.probe_center, p, sp), sp.probe_rabi);
    EXPECT_NEAR(probe_envelope(p.probe_center + p.probe_duration, p, sp) / sp.probe_rabi, std::exp(-0.5), 1e-15);
    EXPECT_NEAR(probe_envelope(p.probe_center - p.probe_duration, p, sp) / sp.probe_rabi, 0.6065306597, 1e-10);
    EXPECT_EQ(probe_envelope(1.0, p, sp), 0.0);
    EXPECT_EQ(probe_envelope(-1.0, p, sp), 0.0);
    p.cw_probe = true;
    EXPECT_DOUBLE_EQ(probe_envelope(1.0, p, sp), sp.probe_rabi);
}

TEST(coupling_envelope, limits) {
    ProtocolParams p;
    p.t_off = ns(80.0);
    p.t_on = ns(3080.0);
    p.switch_slope = 0.01e9;  // beta (t_on - t_off) = 30
    const double om = p.coupling_rabi;
    EXPECT_NEAR(coupling_envelope(-1.0, p), om, 1e-9 * om);
    EXPECT_NEAR(coupling_envelope(1.0, p), om, 1e-9 * om);
    // Tail bound 2 exp(-beta (t_on - t_off)) relative to Omega.
    EXPECT_LT(coupling_envelope(p.switch_midpoint(), p), 1e-4 * om);
    EXPECT_LE(coupling_envelope(p.switch_midpoint(), p), 2.0 * std::exp(-30.0) * om * 1.0001);
    EXPECT_NEAR(coupling_envelope(p.t_off, p), 0.5 * om, 1e-4 * om);
    EXPECT_NEAR(coupling_envelope(p.t_on, p), 0.5 * om, 1e-4 * om);
    p.continuous = true;
    EXPECT_DOUBLE_EQ(coupling_envelope(p.switch_midpoint(), p), om);
}

TEST(coupling_envelope, matches_tanh_form_and_is_bounded) {
    ProtocolParams p;
    p.t_off = ns(80.0);
    p.t_on = ns(600.0);
    p.switch_slope = 0.02e9;
    double prev = coupling_envelope(-ns(200.0), p);
    for (int i = 0; i <= 2000; ++i) {
        const double t = -ns(200.0) + ns(0.5) * i;
        const double direct = 0.5 * p.coupling_rabi *
                              ((1.0 - std::tanh(p.switch_slope * (t - p.t_off))) +
                               (1.0 + std::tanh(p.switch_slope * (t - p.t_on))));
        const double v = coupling_envelope(t, p);
        EXPECT_NEAR(v, direct, 1e-12 * p.coupling_rabi);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, p.coupling_rabi * (1.0 + 1e-9));
        EXPECT_LT(std::abs(v - prev), 0.01 * p.coupling_rabi);  // continuity at 0.5 ns spacing
        prev = v;
    }
}

TEST(coupling_strength, two_sqrt_two_relation) {
    ProtocolParams p;
    p.continuous = true;
    p.coupling_rabi = mhz(8.0);
    EXPECT_NEAR(to_mhz(coupling_strength(0.0, p)), 2.8284271247, 1e-9);
}

TEST(modulation_phase, switching) {
    ProtocolParams p;
    p.phase_on = kPi / 2.0;
    EXPECT_DOUBLE_EQ(modulation_phase(p.t_off - ns(10.0), p), -kPi / 2.0);
    EXPECT_DOUBLE_EQ(modulation_phase(p.t_on + ns(10.0), p), kPi / 2.0);
    EXPECT_DOUBLE_EQ(modulation_phase(p.switch_midpoint(), p), kPi / 2.0);
    p.continuous = true;
    EXPECT_DOUBLE_EQ(modulation_phase(p.t_on + ns(10.0), p), -kPi / 2.0);
}

TEST(hamiltonian, zero_without_drives) {
    SystemParams sp;
    sp.probe_rabi = 0.0;
    ProtocolParams p;
    p.continuous = true;
    p.coupling_rabi = 0.0;
    EXPECT_EQ(max_abs(build_hamiltonian(0.0, sp, p)), 0.0);
}

TEST(hamiltonian, matrix_elements) {
    SystemParams sp;
    sp.probe_detuning = mhz(1.5);
    sp.coupling_detuning = mhz(0.25);
    ProtocolParams p;
    p.continuous = true;
    p.probe_center = 0.0;
    p.coupling_rabi = mhz(8.0);
    const ComplexMatrix h = build_hamiltonian(0.0, sp, p);
    const double op = sp.probe_rabi;
    const double g = p.coupling_rabi / (2.0 * std::sqrt(2.0));
    // Probe: (Omega_p/2)(sigma1^+ + e^{i pi/2} sigma2^+).
    EXPECT_NEAR(std::abs(h(idx(1, 0, 0), idx(0, 0, 0)) - 0.5 * op), 0.0, kTol * op);
    EXPECT_NEAR(std::abs(h(idx(0, 1, 0), idx(0, 0, 0)) - cplx(0.0, 0.5 * op)), 0.0, kTol * op);
    // Coupling: g (e^{i phi} sigma1^+ sigma_m + sigma2^+ sigma_m), phi = -pi/2.
    EXPECT_NEAR(std::abs(h(idx(1, 0, 0), idx(0, 0, 1)) - cplx(0.0, -g)), 0.0, kTol * g);
    EXPECT_NEAR(std::abs(h(idx(0, 1, 0), idx(0, 0, 1)) - g), 0.0, kTol * g);
    // Diagonal detunings.
    EXPECT_NEAR(h(idx(1, 0, 0), idx(1, 0, 0)).real(), sp.probe_detuning, 1e-6);
    EXPECT_NEAR(h(idx(1, 1, 0), idx(1, 1, 0)).real(), 2.0 * sp.probe_detuning, 1e-6);
    EXPECT_NEAR(h(idx(0, 0, 1), idx(0, 0, 1)).real(), sp.probe_detuning + sp.coupling_detuning, 1e-6);
    EXPECT_EQ(h(idx(0, 0, 0), idx(0, 0, 0)), cplx{});
}

TEST(hamiltonian, right_incidence_conjugates_phase) {
    SystemParams sp;
    sp.incidence = Incidence::Right;
    ProtocolParams p;
    p.continuous = true;
    const ComplexMatrix h = build_hamiltonian(0.0, sp, p);
    EXPECT_NEAR(std::abs(h(idx(0, 1, 0), idx(0, 0, 0)) - cplx(0.0, -0.5 * sp.probe_rabi)), 0.0,
                kTol * sp.probe_rabi);
}

TEST(hamiltonian, hermitian_over_protocol) {
    SystemParams sp;
    sp.probe_detuning = mhz(-2.0);
    ProtocolParams p;
    p.phase_on = kPi / 2.0;
    for (int i = 0; i <= 400; ++i) {
        const double t = -ns(500.0) + ns(7.5) * i;
        const ComplexMatrix h = build_hamiltonian(t, sp, p);
        EXPECT_LE(hermiticity_error(h), 1e-12 * sp.emitter_decay) << "t=" << t;
    }
}

TEST(hamiltonian, continuous_mode_varies_only_through_probe) {
    SystemParams sp;
    ProtocolParams p;
    p.continuous = true;
    const auto parts = HamiltonianParts::build(sp);
    for (double t : {-ns(300.0), 0.0, ns(2000.0)}) {
        ComplexMatrix expected = parts.detuning + probe_envelope(t, p, sp) * parts.probe_unit +
                                 coupling_strength(0.0, p) * HamiltonianParts::coupling_unit(sp.modulation_phase);
        EXPECT_LE(max_abs_diff(build_hamiltonian(t, sp, p), expected), 1e-6);
    }
}

TEST(hamiltonian, dark_state_in_single_excitation_subspace) {
    // Resonant Lambda coupling without probe: the {|eg0>, |ge0>, |gg1>} block has a zero eigenvalue.
    SystemParams sp;
    sp.probe_rabi = 0.0;
    ProtocolParams p;
    p.continuous = true;
    const ComplexMatrix h = build_hamiltonian(0.0, sp, p);
    const std::size_t sub[3] = {idx(1, 0, 0), idx(0, 1, 0), idx(0, 0, 1)};
    Eigen::Matrix3cd block;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) block(r, c) = h(sub[r], sub[c]);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(block);
    EXPECT_LT(es.eigenvalues().cwiseAbs().minCoeff(), 1e-9 * sp.emitter_decay);
}

TEST(collapse_operators, rate_prefactors) {
    SystemParams sp;
    const auto cops = collapse_operators(sp);
    const auto& ops = AtomOperators::get();
    ASSERT_EQ(cops.size(), 5u);
    EXPECT_EQ(cops[0].op, ops.sigma1);
    EXPECT_DOUBLE_EQ(cops[0].rate, sp.emitter_decay / 2.0);
    EXPECT_EQ(cops[1].op, ops.sigma2);
    EXPECT_DOUBLE_EQ(cops[1].rate, sp.emitter_decay / 2.0);
    EXPECT_EQ(cops[2].op, ops.n1);
    EXPECT_DOUBLE_EQ(cops[2].rate, sp.emitter_dephasing);
    EXPECT_EQ(cops[3].op, ops.n2);
    EXPECT_DOUBLE_EQ(cops[3].rate, sp.emitter_dephasing);
    EXPECT_EQ(cops[4].op, ops.sigma_m);
    EXPECT_DOUBLE_EQ(cops[4].rate, sp.memory_loss / 2.0);
}
