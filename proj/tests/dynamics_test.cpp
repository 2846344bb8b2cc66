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

#include "chiralmem/dynamics.hpp"

#include <random>

#include "gtest/gtest.h"

using namespace chiralmem;

namespace {

ComplexMatrix random_hermitian(std::mt19937& gen, double scale) {
    std::normal_distribution<double> d;
    ComplexMatrix a(kDim, kDim);
    for (auto& v : a.entries()) v = cplx(d(gen), d(gen));
    return 0.5 * scale * (a + a.adjoint());
}

DensityMatrix random_state(std::mt19937& gen) {
    std::normal_distribution<double> d;
    ComplexMatrix a(kDim, kDim);
    for (auto& v : a.entries()) v = cplx(d(gen), d(gen));
    ComplexMatrix rho = a * a.adjoint();
    rho *= 1.0 / rho.trace();
    return DensityMatrix(rho);
}

// Drives switched off: probe centered far in the past, zero coupling.
ProtocolParams undriven() {
    ProtocolParams p;
    p.continuous = true;
    p.coupling_rabi = 0.0;
    p.probe_center = -1.0;
    return p;
}

}  // namespace

TEST(density_matrix, invariants_and_constructors) {
    EXPECT_TRUE(DensityMatrix::ground().is_valid());
    EXPECT_EQ(DensityMatrix::ground()(0, 0), cplx(1.0));
    EXPECT_THROW(DensityMatrix(ComplexMatrix::identity(4)), Error);
    ComplexMatrix bad = ComplexMatrix::identity(kDim);
    EXPECT_FALSE(DensityMatrix(bad).is_valid());  // trace 8
    bad *= 1.0 / 8.0;
    bad(0, 1) = 1e-9;
    EXPECT_FALSE(DensityMatrix(bad).is_valid());  // not Hermitian
    ComplexMatrix neg(kDim, kDim);
    neg(0, 0) = 1.1;
    neg(1, 1) = -0.1;
    EXPECT_NEAR(DensityMatrix::min_eigenvalue(neg), -0.1, 1e-14);
    EXPECT_FALSE(DensityMatrix(neg).is_valid());
}

TEST(lindblad_rhs, zero_generator) {
    std::mt19937 gen(1);
    const auto rho = random_state(gen);
    EXPECT_EQ(max_abs(lindblad_rhs(rho, ComplexMatrix(kDim, kDim), {})), 0.0);
}

TEST(lindblad_rhs, ground_state_stationary_without_drive) {
    SystemParams sp;
    ProtocolParams p;
    p.continuous = true;
    sp.probe_rabi = 0.0;
    const ComplexMatrix h = build_hamiltonian(0.0, sp, p);
    EXPECT_LE(max_abs(lindblad_rhs(DensityMatrix::ground(), h, collapse_operators(sp))), 1e-20);
}

TEST(lindblad_rhs, traceless_output) {
    std::mt19937 gen(2);
    SystemParams sp;
    for (int trial = 0; trial < 10; ++trial) {
        const auto rho = random_state(gen);
        const auto h = random_hermitian(gen, 1.0);
        SystemParams unit = sp;
        unit.emitter_decay = 1.0;
        unit.emitter_dephasing = 0.3;
        unit.memory_loss = 0.2;
        EXPECT_LE(std::abs(lindblad_rhs(rho, h, collapse_operators(unit)).trace()), 1e-13);
    }
}

TEST(lindblad_rhs, doubled_dissipator_convention) {
    // D[O]rho = 2 O rho O^+ - rho O^+ O - O^+ O rho, written out by hand for |e><e| on emitter 1.
    SystemParams sp;
    sp.emitter_decay = 2.0;
    sp.emitter_dephasing = 0.0;
    sp.memory_loss = 0.0;
    const auto rho = DensityMatrix::basis(basis_index(1, 0, 0));
    const auto out = lindblad_rhs(rho, ComplexMatrix(kDim, kDim), collapse_operators(sp));
    // (Gamma/2)(2|g><g| - 2|e><e|) = Gamma(|g><g| - |e><e|).
    EXPECT_NEAR(out(0, 0).real(), 2.0, 1e-15);
    EXPECT_NEAR(out(4, 4).real(), -2.0, 1e-15);
}

TEST(liouvillian, agrees_with_matrix_form) {
    std::mt19937 gen(3);
    SystemParams sp;
    sp.emitter_decay = 1.0;
    sp.emitter_dephasing = 0.05;
    sp.memory_loss = 0.01;
    const auto cops = collapse_operators(sp);
    for (int trial = 0; trial < 5; ++trial) {
        const auto h = random_hermitian(gen, 0.7);
        const auto rho = random_state(gen);
        const ComplexMatrix l = liouvillian(h, cops);
        const StateVector v = to_vector(rho.matrix());
        StateVector lv{};
        for (std::size_t r = 0; r < kVecDim; ++r)
            for (std::size_t c = 0; c < kVecDim; ++c) lv[r] += l(r, c) * v[c];
        EXPECT_LE(max_abs_diff(to_matrix(lv), lindblad_rhs(rho, h, cops)), 1e-13);
    }
}

TEST(sparse_superoperator, matches_dense) {
    std::mt19937 gen(4);
    const ComplexMatrix l = liouvillian(random_hermitian(gen, 1.0), collapse_operators(SystemParams{}));
    const SparseSuperoperator s(l);
    const StateVector v = to_vector(random_state(gen).matrix());
    StateVector out{};
    s.apply_add(v, 2.0, out);
    for (std::size_t r = 0; r < kVecDim; ++r) {
        cplx acc{};
        for (std::size_t c = 0; c < kVecDim; ++c) acc += l(r, c) * v[c];
        EXPECT_LE(std::abs(out[r] - 2.0 * acc), 1e-9 * (1.0 + std::abs(acc)));
    }
}

TEST(evolve, ground_state_stays_dark_without_probe) {
    SystemParams sp;
    sp.probe_rabi = 0.0;
    ProtocolParams p;
    p.continuous = true;
    const auto traj = evolve(DensityMatrix::ground(), 0.0, us(1.0), sp, p, ns(10.0));
    for (const auto& rho : traj.states)
        for (std::size_t i = 1; i < kDim; ++i) EXPECT_LT(std::abs(rho(i, i)), 1e-12);
}

TEST(evolve, sampling_grid) {
    SystemParams sp;
    const auto traj = evolve(DensityMatrix::ground(), -ns(100.0), ns(100.0), sp, undriven(), ns(2.0));
    ASSERT_EQ(traj.times.size(), 101u);
    ASSERT_EQ(traj.states.size(), traj.times.size());
    ASSERT_EQ(traj.expectations.size(), traj.times.size());
    for (std::size_t i = 1; i < traj.times.size(); ++i) EXPECT_GT(traj.times[i], traj.times[i - 1]);
    EXPECT_NEAR(traj.times.back(), ns(100.0), 1e-15);
    EXPECT_THROW(evolve(DensityMatrix::ground(), 0.0, 0.0, sp, undriven(), ns(1.0)), Error);
    EXPECT_THROW(evolve(DensityMatrix::ground(), 0.0, 1.0, sp, undriven(), 0.0), Error);
}

TEST(evolve, two_level_population_decay) {
    SystemParams sp;
    const double gamma = sp.emitter_decay;
    const auto traj = evolve(DensityMatrix::basis(basis_index(1, 0, 0)), 0.0, 2.0 / gamma, sp, undriven(),
                             0.05 / gamma);
    const auto& n1 = AtomOperators::get().n1;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double exact = std::exp(-gamma * traj.times[i]);
        EXPECT_NEAR(expect(n1, traj.states[i]).real(), exact, 1e-6 * exact);
    }
    EXPECT_NEAR(expect(n1, traj.states[20]).real(), std::exp(-1.0), 1e-6 * std::exp(-1.0));
}

TEST(evolve, coherence_decays_at_total_decoherence_rate) {
    SystemParams sp;
    sp.emitter_dephasing = mhz(0.7);
    const double gamma = sp.emitter_dephasing + sp.emitter_decay / 2.0;
    std::vector<cplx> psi(kDim);
    psi[basis_index(0, 0, 0)] = psi[basis_index(1, 0, 0)] = 1.0 / std::sqrt(2.0);
    const auto traj = evolve(DensityMatrix::pure(psi), 0.0, 2.0 / gamma, sp, undriven(), 0.1 / gamma);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double exact = 0.5 * std::exp(-gamma * traj.times[i]);
        EXPECT_NEAR(std::abs(traj.expectations[i].sigma1), exact, 1e-6 * exact);
    }
}

TEST(evolve, memory_population_decays_at_memory_rate) {
    SystemParams sp;
    sp.memory_loss = mhz(0.5);
    const auto traj = evolve(DensityMatrix::basis(basis_index(0, 0, 1)), 0.0, 2.0 / sp.memory_loss, sp,
                             undriven(), 0.1 / sp.memory_loss);
    const auto& nm = AtomOperators::get().n_m;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double exact = std::exp(-sp.memory_loss * traj.times[i]);
        EXPECT_NEAR(expect(nm, traj.states[i]).real(), exact, 1e-6 * exact);
    }
}

TEST(evolve, invariants_hold_through_storage_sequence) {
    SystemParams sp;
    ProtocolParams p;
    p.t_on = p.t_off + 5.0 / p.switch_slope + ns(300.0);
    p.phase_on = kPi / 2.0;
    const auto traj = evolve(DensityMatrix::ground(), -ns(500.0), p.t_on + ns(800.0), sp, p, ns(2.0));
    EXPECT_TRUE(traj.invariants.ok());
    EXPECT_LE(traj.invariants.max_trace_error, 1e-8);
    EXPECT_LE(traj.invariants.max_hermiticity_error, 1e-10);
    EXPECT_GE(traj.invariants.min_eigenvalue, -1e-8);
    for (const auto& rho : traj.states) EXPECT_TRUE(rho.is_valid());
}

TEST(evolve, linear_response_in_probe_amplitude) {
    SystemParams weak;
    weak.probe_rabi = 1e-4 * weak.emitter_decay;
    SystemParams doubled = weak;
    doubled.probe_rabi *= 2.0;
    ProtocolParams p;
    p.t_on = p.t_off + 5.0 / p.switch_slope + ns(200.0);
    const double t0 = -ns(500.0), t1 = p.t_on + ns(600.0);
    const auto a = evolve(DensityMatrix::ground(), t0, t1, weak, p, ns(5.0));
    const auto b = evolve(DensityMatrix::ground(), t0, t1, doubled, p, ns(5.0));
    double scale = 0.0;
    for (const auto& e : a.expectations)
        scale = std::max({scale, std::abs(e.sigma1), std::abs(e.sigma2), std::abs(e.sigma_m)});
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        EXPECT_LE(std::abs(b.expectations[i].sigma1 - 2.0 * a.expectations[i].sigma1), 1e-3 * 2.0 * scale);
        EXPECT_LE(std::abs(b.expectations[i].sigma2 - 2.0 * a.expectations[i].sigma2), 1e-3 * 2.0 * scale);
        EXPECT_LE(std::abs(b.expectations[i].sigma_m - 2.0 * a.expectations[i].sigma_m), 1e-3 * 2.0 * scale);
    }
}

TEST(evolve, tolerance_halving_is_converged) {
    SystemParams sp;
    ProtocolParams p;
    p.t_on = p.t_off + 5.0 / p.switch_slope + ns(200.0);
    EvolveOptions tight;
    tight.rtol = 0.5e-9;
    tight.atol = 0.5e-12;
    const auto a = evolve(DensityMatrix::ground(), -ns(500.0), p.t_on + ns(600.0), sp, p, ns(5.0));
    const auto b = evolve(DensityMatrix::ground(), -ns(500.0), p.t_on + ns(600.0), sp, p, ns(5.0), tight);
    double peak = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        peak = std::max(peak, std::abs(a.expectations[i].sigma_m));
        diff = std::max(diff, std::abs(a.expectations[i].sigma_m - b.expectations[i].sigma_m));
    }
    EXPECT_GT(peak, 0.0);
    EXPECT_LT(diff, 1e-6 * peak);
}

TEST(evolve, step_budget_reports_failure_time) {
    SystemParams sp;
    EvolveOptions opts;
    opts.max_steps = 3;
    try {
        evolve(DensityMatrix::ground(), 0.0, us(1.0), sp, ProtocolParams{}, ns(1.0), opts);
        FAIL() << "expected IntegrationError";
    } catch (const IntegrationError& e) {
        EXPECT_GE(e.time(), 0.0);
        EXPECT_LT(e.time(), us(1.0));
    }
}

TEST(steady_state, ground_without_probe) {
    SystemParams sp;
    sp.probe_rabi = 0.0;
    const auto rho = steady_state(sp, mhz(6.0));
    EXPECT_LE(max_abs_diff(rho.matrix(), DensityMatrix::ground().matrix()), 1e-12);
}

TEST(steady_state, is_a_fixed_point) {
    SystemParams sp;
    sp.probe_detuning = mhz(2.5);
    ProtocolParams p;
    p.continuous = true;
    p.cw_probe = true;
    p.coupling_rabi = mhz(6.0);
    const auto rho = steady_state(sp, p.coupling_rabi);
    EXPECT_TRUE(rho.is_valid());
    const auto rhs = lindblad_rhs(rho, build_hamiltonian(0.0, sp, p), collapse_operators(sp));
    EXPECT_LE(max_abs(rhs), 1e-10 * sp.emitter_decay);
}

TEST(steady_state, agrees_with_long_time_evolution) {
    SystemParams sp;
    sp.probe_detuning = mhz(3.0);
    ProtocolParams p;
    p.continuous = true;
    p.cw_probe = true;
    p.coupling_rabi = mhz(8.0);
    const double t1 = 50.0 / sp.emitter_decay;
    const auto traj = evolve(DensityMatrix::ground(), 0.0, t1, sp, p, t1 / 10.0);
    const auto rho = steady_state(sp, p.coupling_rabi);
    EXPECT_LE(max_abs_diff(traj.states.back().matrix(), rho.matrix()), 1e-6);
}

TEST(steady_state, transparency_leaves_emitters_unexcited) {
    SystemParams sp;
    sp.emitter_dephasing = 0.0;
    sp.memory_loss = 0.0;
    sp.probe_rabi = 1e-5 * sp.emitter_decay;
    const auto rho = steady_state(sp, mhz(8.0));
    const auto& ops = AtomOperators::get();
    const double bound = 1e-8 * sp.probe_rabi / sp.emitter_decay;
    EXPECT_LE(std::abs(expect(ops.sigma1, rho)), bound);
    EXPECT_LE(std::abs(expect(ops.sigma2, rho)), bound);
}
