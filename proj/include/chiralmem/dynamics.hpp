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

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "chiralmem/core.hpp"
#include "chiralmem/model.hpp"

namespace chiralmem {

inline constexpr std::size_t kVecDim = kDim * kDim;

/// Health of a density matrix against the physical invariants.
struct StateDiagnostics {
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
};

/// 8x8 Hermitian, unit-trace, positive semidefinite state of E1 (x) E2 (x) M.
class DensityMatrix {
public:
    static constexpr double kHermitianTol = 1e-10;
    static constexpr double kTraceTol = 1e-8;
    static constexpr double kPositivityTol = 1e-8;

    DensityMatrix() : m_(kDim, kDim) { m_(0, 0) = 1.0; }

    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
        if (m_.rows() != kDim || m_.cols() != kDim)
            throw Error("DensityMatrix: expected an 8x8 matrix");
    }

    static DensityMatrix ground() { return DensityMatrix(); }

    /// |psi><psi| for a normalized 8-component state vector.
    static DensityMatrix pure(const std::vector<cplx>& psi) {
        if (psi.size() != kDim) throw Error("DensityMatrix::pure: expected 8 amplitudes");
        ComplexMatrix m(kDim, kDim);
        for (std::size_t r = 0; r < kDim; ++r)
            for (std::size_t c = 0; c < kDim; ++c) m(r, c) = psi[r] * std::conj(psi[c]);
        return DensityMatrix(std::move(m));
    }

    /// Projector onto one basis state.
    static DensityMatrix basis(std::size_t index) {
        ComplexMatrix m(kDim, kDim);
        m(index, index) = 1.0;
        return DensityMatrix(std::move(m));
    }

    const ComplexMatrix& matrix() const noexcept { return m_; }
    cplx operator()(std::size_t r, std::size_t c) const noexcept { return m_(r, c); }

    StateDiagnostics diagnostics() const {
        StateDiagnostics d;
        d.trace_error = std::abs(m_.trace() - cplx{1.0});
        d.hermiticity_error = hermiticity_error(m_);
        d.min_eigenvalue = min_eigenvalue(m_);
        return d;
    }

    bool is_valid() const {
        const auto d = diagnostics();
        return d.trace_error <= kTraceTol && d.hermiticity_error <= kHermitianTol &&
               d.min_eigenvalue >= -kPositivityTol;
    }

    static double min_eigenvalue(const ComplexMatrix& m) {
        Eigen::Matrix<cplx, kDim, kDim> e;
        for (std::size_t r = 0; r < kDim; ++r)
            for (std::size_t c = 0; c < kDim; ++c)
                e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    0.5 * (m(r, c) + std::conj(m(c, r)));
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<cplx, kDim, kDim>> solver(e, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff();
    }

private:
    ComplexMatrix m_;
};

inline cplx expect(const ComplexMatrix& op, const DensityMatrix& rho) {
    return expect(op, rho.matrix());
}

/// -i[H, rho] + sum_k rate_k (2 O rho O^+ - rho O^+ O - O^+ O rho).
inline ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const ComplexMatrix& h,
                                  const std::vector<Collapse>& cops) {
    if (rho.rows() != kDim || rho.cols() != kDim || h.rows() != kDim || h.cols() != kDim)
        throw Error("lindblad_rhs: expected 8x8 operands");
    ComplexMatrix out = (-kI) * commutator(h, rho);
    for (const auto& c : cops) {
        if (c.rate == 0.0) continue;
        const ComplexMatrix od = c.op.adjoint();
        const ComplexMatrix odo = od * c.op;
        ComplexMatrix term = 2.0 * (c.op * rho * od);
        term -= rho * odo;
        term -= odo * rho;
        out += c.rate * term;
    }
    return out;
}

inline ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const ComplexMatrix& h,
                                  const std::vector<Collapse>& cops) {
    return lindblad_rhs(rho.matrix(), h, cops);
}

// ---------------------------------------------------------------------------
// Vectorized generator. vec(rho)[8*r + c] = rho(r, c), so
//   vec(A rho B) = (A (x) B^T) vec(rho).
// ---------------------------------------------------------------------------

inline ComplexMatrix liouvillian(const ComplexMatrix& h, const std::vector<Collapse>& cops) {
    const ComplexMatrix id = ComplexMatrix::identity(kDim);
    ComplexMatrix hT(kDim, kDim);
    for (std::size_t r = 0; r < kDim; ++r)
        for (std::size_t c = 0; c < kDim; ++c) hT(r, c) = h(c, r);
    ComplexMatrix l = (-kI) * (kron(h, id) - kron(id, hT));
    for (const auto& c : cops) {
        if (c.rate == 0.0) continue;
        ComplexMatrix conj_op(kDim, kDim);
        for (std::size_t i = 0; i < kDim * kDim; ++i) conj_op.entries()[i] = std::conj(c.op.entries()[i]);
        const ComplexMatrix odo = c.op.adjoint() * c.op;
        ComplexMatrix odoT(kDim, kDim);
        for (std::size_t r = 0; r < kDim; ++r)
            for (std::size_t col = 0; col < kDim; ++col) odoT(r, col) = odo(col, r);
        ComplexMatrix term = 2.0 * kron(c.op, conj_op);
        term -= kron(id, odoT);
        term -= kron(odo, id);
        l += c.rate * term;
    }
    return l;
}

using StateVector = std::array<cplx, kVecDim>;

inline StateVector to_vector(const ComplexMatrix& rho) {
    StateVector v{};
    std::copy(rho.entries().begin(), rho.entries().end(), v.begin());
    return v;
}

inline ComplexMatrix to_matrix(const StateVector& v) {
    return ComplexMatrix(kDim, kDim, std::vector<cplx>(v.begin(), v.end()));
}

/// Sparse 64x64 superoperator in row-compressed form.
class SparseSuperoperator {
public:
    SparseSuperoperator() = default;

    explicit SparseSuperoperator(const ComplexMatrix& dense) {
        row_start_.reserve(kVecDim + 1);
        for (std::size_t r = 0; r < kVecDim; ++r) {
            row_start_.push_back(cols_.size());
            for (std::size_t c = 0; c < kVecDim; ++c) {
                const cplx v = dense(r, c);
                if (v != cplx{}) {
                    cols_.push_back(static_cast<std::uint16_t>(c));
                    vals_.push_back(v);
                }
            }
        }
        row_start_.push_back(cols_.size());
    }

    std::size_t nonzeros() const noexcept { return vals_.size(); }

    /// out += scale * L * y
    void apply_add(const StateVector& y, cplx scale, StateVector& out) const {
        if (vals_.empty() || scale == cplx{}) return;
        for (std::size_t r = 0; r < kVecDim; ++r) {
            cplx acc{};
            for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) acc += vals_[k] * y[cols_[k]];
            out[r] += scale * acc;
        }
    }

private:
    std::vector<std::size_t> row_start_;
    std::vector<std::uint16_t> cols_;
    std::vector<cplx> vals_;
};

/// Time-dependent generator split into fixed superoperators.
class TimeDependentLiouvillian {
public:
    TimeDependentLiouvillian(const SystemParams& sp, const ProtocolParams& p) : sp_(sp), p_(p) {
        const auto parts = HamiltonianParts::build(sp);
        static_part_ = SparseSuperoperator(liouvillian(parts.detuning, collapse_operators(sp)));
        probe_part_ = SparseSuperoperator(liouvillian(parts.probe_unit, {}));
        coupling_before_ = SparseSuperoperator(
            liouvillian(HamiltonianParts::coupling_unit(sp.modulation_phase), {}));
        coupling_after_ = SparseSuperoperator(
            liouvillian(HamiltonianParts::coupling_unit(p.phase_on), {}));
    }

    void operator()(double t, const StateVector& y, StateVector& dy) const {
        dy.fill(cplx{});
        static_part_.apply_add(y, 1.0, dy);
        probe_part_.apply_add(y, probe_envelope(t, p_, sp_), dy);
        const double g = coupling_strength(t, p_);
        const bool after = !p_.continuous && t >= p_.switch_midpoint();
        (after ? coupling_after_ : coupling_before_).apply_add(y, g, dy);
    }

private:
    SystemParams sp_;
    ProtocolParams p_;
    SparseSuperoperator static_part_, probe_part_, coupling_before_, coupling_after_;
};

/// Raised when the adaptive step collapses; carries the time of failure.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double t) : Error(what), time_(t) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

struct EvolveOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    /// Evaluate the full invariant set (including eigenvalues) at every sample.
    bool monitor_invariants = true;
    bool store_states = true;
    std::size_t max_steps = 50'000'000;
};

struct Expectations {
    cplx sigma1, sigma2, sigma_m;
};

/// Worst-case invariant violations observed over a run.
struct InvariantReport {
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double min_eigenvalue = std::numeric_limits<double>::infinity();
    std::size_t samples = 0;

    void observe(const StateDiagnostics& d) {
        max_trace_error = std::max(max_trace_error, d.trace_error);
        max_hermiticity_error = std::max(max_hermiticity_error, d.hermiticity_error);
        min_eigenvalue = std::min(min_eigenvalue, d.min_eigenvalue);
        ++samples;
    }

    void merge(const InvariantReport& o) {
        max_trace_error = std::max(max_trace_error, o.max_trace_error);
        max_hermiticity_error = std::max(max_hermiticity_error, o.max_hermiticity_error);
        min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
        samples += o.samples;
    }

    bool ok() const {
        return max_trace_error <= DensityMatrix::kTraceTol &&
               max_hermiticity_error <= DensityMatrix::kHermitianTol &&
               (samples == 0 || min_eigenvalue >= -DensityMatrix::kPositivityTol);
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<Expectations> expectations;
    InvariantReport invariants;
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;
};

namespace detail {

inline Expectations expectations_of(const StateVector& v) {
    // <sigma> = Tr(sigma rho) = sum_{r,c} sigma(r,c) rho(c,r); each lowering operator
    // has four unit entries, so read them straight from the vectorized state.
    Expectations e{};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const std::size_t g1 = basis_index(0, a, b), x1 = basis_index(1, a, b);
            const std::size_t g2 = basis_index(a, 0, b), x2 = basis_index(a, 1, b);
            const std::size_t gm = basis_index(a, b, 0), xm = basis_index(a, b, 1);
            e.sigma1 += v[x1 * kDim + g1];
            e.sigma2 += v[x2 * kDim + g2];
            e.sigma_m += v[xm * kDim + gm];
        }
    return e;
}

inline void hermitize(StateVector& v) {
    for (std::size_t r = 0; r < kDim; ++r) {
        v[r * kDim + r] = cplx(v[r * kDim + r].real(), 0.0);
        for (std::size_t c = r + 1; c < kDim; ++c) {
            const cplx avg = 0.5 * (v[r * kDim + c] + std::conj(v[c * kDim + r]));
            v[r * kDim + c] = avg;
            v[c * kDim + r] = std::conj(avg);
        }
    }
}

inline StateDiagnostics diagnose(const StateVector& v, bool with_eigen) {
    StateDiagnostics d;
    cplx tr{};
    for (std::size_t i = 0; i < kDim; ++i) tr += v[i * kDim + i];
    d.trace_error = std::abs(tr - cplx{1.0});
    for (std::size_t r = 0; r < kDim; ++r)
        for (std::size_t c = r; c < kDim; ++c)
            d.hermiticity_error = std::max(d.hermiticity_error,
                                           std::abs(v[r * kDim + c] - std::conj(v[c * kDim + r])));
    d.min_eigenvalue = with_eigen ? DensityMatrix::min_eigenvalue(to_matrix(v)) : 0.0;
    return d;
}

// Dormand-Prince 5(4) tableau with Hairer's continuous extension.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

}  // namespace detail

/// Observer called at each uniform sample with (t, vec(rho)).
using SampleObserver = std::function<void(double, const StateVector&)>;

/// Integrates the master equation on [t0, t1] and reports samples t0 + k*sample_dt.
/// Returns the invariant report; the adaptive step never straddles the phase switch.
inline InvariantReport propagate(const DensityMatrix& rho0, double t0, double t1,
                                 const SystemParams& sp, const ProtocolParams& p,
                                 double sample_dt, const EvolveOptions& opts,
                                 const SampleObserver& observe, std::size_t* accepted = nullptr,
                                 std::size_t* rejected = nullptr) {
    using detail::Dopri5;
    if (!(t1 > t0)) throw Error("evolve: t1 must exceed t0");
    if (!(sample_dt > 0.0)) throw Error("evolve: sample_dt must be > 0");

    const TimeDependentLiouvillian f(sp, p);
    InvariantReport report;
    StateVector y = to_vector(rho0.matrix());

    const std::size_t n_samples = static_cast<std::size_t>(std::floor((t1 - t0) / sample_dt * (1.0 + 1e-12))) + 1;
    std::size_t next_sample = 0;
    auto emit = [&](double t, const StateVector& v) {
        report.observe(detail::diagnose(v, opts.monitor_invariants));
        observe(t, v);
    };

    std::vector<double> breakpoints;
    if (!p.continuous && p.switch_midpoint() > t0 && p.switch_midpoint() < t1)
        breakpoints.push_back(p.switch_midpoint());
    breakpoints.push_back(t1);

    std::array<StateVector, 7> k;
    StateVector tmp, ynew, err;
    double t = t0;
    double h = std::min(sample_dt, 0.05 / sp.emitter_decay);
    std::size_t n_acc = 0, n_rej = 0;

    emit(t0, y);
    next_sample = 1;

    for (double seg_end : breakpoints) {
        f(t, y, k[0]);
        while (t < seg_end) {
            if (n_acc + n_rej > opts.max_steps) throw IntegrationError("evolve: step budget exhausted", t);
            const bool last = t + h >= seg_end;
            double hs = last ? seg_end - t : h;
            const double h_min = 1e-14 * std::max(std::abs(t), 1e-6);
            if (hs < h_min && !last) {
                std::ostringstream os;
                os << "evolve: step size underflow at t=" << t;
                throw IntegrationError(os.str(), t);
            }

            auto stage = [&](StateVector& out, std::initializer_list<std::pair<int, double>> terms) {
                for (std::size_t i = 0; i < kVecDim; ++i) {
                    cplx acc{};
                    for (const auto& [idx, coef] : terms) acc += coef * k[idx][i];
                    out[i] = y[i] + hs * acc;
                }
            };
            stage(tmp, {{0, Dopri5::a21}});
            f(t + Dopri5::c2 * hs, tmp, k[1]);
            stage(tmp, {{0, Dopri5::a31}, {1, Dopri5::a32}});
            f(t + Dopri5::c3 * hs, tmp, k[2]);
            stage(tmp, {{0, Dopri5::a41}, {1, Dopri5::a42}, {2, Dopri5::a43}});
            f(t + Dopri5::c4 * hs, tmp, k[3]);
            stage(tmp, {{0, Dopri5::a51}, {1, Dopri5::a52}, {2, Dopri5::a53}, {3, Dopri5::a54}});
            f(t + Dopri5::c5 * hs, tmp, k[4]);
            stage(tmp, {{0, Dopri5::a61}, {1, Dopri5::a62}, {2, Dopri5::a63}, {3, Dopri5::a64},
                        {4, Dopri5::a65}});
            f(t + hs, tmp, k[5]);
            stage(ynew, {{0, Dopri5::a71}, {2, Dopri5::a73}, {3, Dopri5::a74}, {4, Dopri5::a75},
                         {5, Dopri5::a76}});
            // Evaluate at the segment end from the left so the pre-switch generator is used.
            const double t_eval = last ? std::nextafter(seg_end, t) : t + hs;
            f(t_eval, ynew, k[6]);

            double err_sq = 0.0;
            for (std::size_t i = 0; i < kVecDim; ++i) {
                const cplx e = hs * (Dopri5::e1 * k[0][i] + Dopri5::e3 * k[2][i] + Dopri5::e4 * k[3][i] +
                                     Dopri5::e5 * k[4][i] + Dopri5::e6 * k[5][i] + Dopri5::e7 * k[6][i]);
                const double sc_re = opts.atol + opts.rtol * std::max(std::abs(y[i].real()), std::abs(ynew[i].real()));
                const double sc_im = opts.atol + opts.rtol * std::max(std::abs(y[i].imag()), std::abs(ynew[i].imag()));
                err_sq += (e.real() / sc_re) * (e.real() / sc_re) + (e.imag() / sc_im) * (e.imag() / sc_im);
            }
            const double err_norm = std::sqrt(err_sq / (2.0 * kVecDim));

            if (err_norm <= 1.0) {
                // Dense output between t and t + hs for any pending samples.
                const double t_next = t + hs;
                const double limit = (last && seg_end == t1) ? t1 + 1e-9 * sample_dt : t_next;
                while (next_sample < n_samples) {
                    const double ts = t0 + static_cast<double>(next_sample) * sample_dt;
                    if (ts > limit) break;
                    const double theta = std::min((ts - t) / hs, 1.0);
                    const double th1 = 1.0 - theta;
                    for (std::size_t i = 0; i < kVecDim; ++i) {
                        const cplx ydiff = ynew[i] - y[i];
                        const cplx bspl = hs * k[0][i] - ydiff;
                        const cplx r4 = ydiff - hs * k[6][i] - bspl;
                        const cplx r5 = hs * (Dopri5::d1 * k[0][i] + Dopri5::d3 * k[2][i] + Dopri5::d4 * k[3][i] +
                                              Dopri5::d5 * k[4][i] + Dopri5::d6 * k[5][i] + Dopri5::d7 * k[6][i]);
                        tmp[i] = y[i] + theta * (ydiff + th1 * (bspl + theta * (r4 + th1 * r5)));
                    }
                    detail::hermitize(tmp);
                    emit(ts, tmp);
                    ++next_sample;
                }
                t = last ? seg_end : t_next;
                y = ynew;
                detail::hermitize(y);
                // The generator commutes with the adjoint, so the FSAL stage symmetrizes with y.
                k[0] = k[6];
                detail::hermitize(k[0]);
                ++n_acc;
                const double fac = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
                h = hs * fac;
            } else {
                ++n_rej;
                h = hs * std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
            }
        }
    }
    if (accepted) *accepted = n_acc;
    if (rejected) *rejected = n_rej;
    return report;
}

/// Full trajectory with sampled states and cached <sigma_1>, <sigma_2>, <sigma_m>.
inline Trajectory evolve(const DensityMatrix& rho0, double t0, double t1, const SystemParams& sp,
                         const ProtocolParams& p, double sample_dt, const EvolveOptions& opts = {}) {
    Trajectory traj;
    traj.invariants = propagate(
        rho0, t0, t1, sp, p, sample_dt, opts,
        [&](double t, const StateVector& v) {
            traj.times.push_back(t);
            traj.expectations.push_back(detail::expectations_of(v));
            if (opts.store_states) traj.states.emplace_back(to_matrix(v));
        },
        &traj.steps_accepted, &traj.steps_rejected);
    return traj;
}

/// Stationary state for continuous coupling and a constant probe.
inline DensityMatrix steady_state(const SystemParams& sp, double coupling_rabi) {
    ProtocolParams p;
    p.continuous = true;
    p.cw_probe = true;
    p.coupling_rabi = coupling_rabi;
    const ComplexMatrix h = build_hamiltonian(0.0, sp, p);
    const ComplexMatrix l = liouvillian(h, collapse_operators(sp));

    const double scale = 1.0 / sp.emitter_decay;
    Eigen::MatrixXcd a(kVecDim, kVecDim);
    for (std::size_t r = 0; r < kVecDim; ++r)
        for (std::size_t c = 0; c < kVecDim; ++c)
            a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = scale * l(r, c);
    Eigen::MatrixXcd constrained = a;
    constrained.row(0).setZero();
    for (std::size_t i = 0; i < kDim; ++i) constrained(0, static_cast<Eigen::Index>(i * kDim + i)) = 1.0;
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(kVecDim);
    b(0) = 1.0;

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(constrained);
    const Eigen::VectorXcd x = lu.solve(b);
    const double residual = (a * x).cwiseAbs().maxCoeff();
    const double constraint_residual = (constrained * x - b).cwiseAbs().maxCoeff();
    if (!x.allFinite() || residual > 1e-10 || constraint_residual > 1e-10) {
        std::ostringstream os;
        os << "steady_state: ill-conditioned Liouvillian (residual " << residual << ")";
        throw Error(os.str());
    }

    StateVector v{};
    for (std::size_t i = 0; i < kVecDim; ++i) v[i] = x(static_cast<Eigen::Index>(i));
    detail::hermitize(v);
    return DensityMatrix(to_matrix(v));
}

}  // namespace chiralmem
