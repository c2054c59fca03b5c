// Copyright 2026 The MTMS Toolkit Authors
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

#ifndef MTMS_DYNAMICS_H
#define MTMS_DYNAMICS_H

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mtms/spin.h"
#include "mtms/tones.h"

namespace mtms {

/// Everything needed to evaluate one gate: tones plus error parameters.
struct GateScenario {
    ToneSet tones;
    /// Symmetric shift of every tone on both sidebands, rad/s.
    double detuning_error = 0;
    /// Motional heating rate, quanta/s.
    double heating_rate = 0;
    /// Initial thermal occupation.
    double nbar = 0;

    /// Throws DomainError on negative heating rate or occupation.
    void validate() const;
    double detuning_ratio() const { return detuning_error / tones.delta(); }
};

struct TrajectorySample {
    double t;
    std::complex<double> displacement;
    double phase;
};

/// F(t) and G(t) sampled on a uniform grid over one gate.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    GateScenario scenario;
};

struct ErrorBudget {
    double e_heating;
    double e_detuning;
    std::string order;
    /// False when pi*ndot_MT/delta > 0.1 or |Delta/delta| > 0.05.
    bool in_validity_regime;
};

/// f(t) = sum_j c_j exp(i (j delta + Delta) t).
std::complex<double> drive_f(const ToneSet& tones, double detuning_error, double t);

/// F(t) = delta * int_0^t f, from the per-tone antiderivative. Tones that sit
/// exactly on resonance (j delta + Delta = 0) contribute c_j delta t.
std::complex<double> displacement_f_big(const ToneSet& tones, double detuning_error, double t);

/// F(t) by adaptive Gauss-Kronrod quadrature of drive_f. Independent of the
/// antiderivative; kept as a cross-check.
std::complex<double> displacement_by_quadrature(const ToneSet& tones, double detuning_error, double t);

/// Accumulated geometric phase G(t), by adaptive quadrature of
/// -delta * int_0^t Im(conj(f) F). Equals pi/8 at t = tau for an error-free
/// tone set satisfying the entangling constraint.
double phase_g(const ToneSet& tones, double detuning_error, double t);

/// G accumulated over [t0, t1].
double phase_increment(const ToneSet& tones, double detuning_error, double t0, double t1);

Trajectory trajectory(const GateScenario& scenario, int n_samples);

/// Columns t_s, re_F, im_F, G with a header row.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// max_t |F(t)| over one gate, sampled on `n_samples` points.
double max_displacement(const ToneSet& tones, double detuning_error, int n_samples = 2001);

/// |F_a(tau)| / |F_b(tau)| with Delta = frac_err * delta. Returns nullopt when
/// loop b is closed to machine precision (|F_b(tau)| < 1e-300).
std::optional<double> loop_closure_ratio(const ToneSet& a, const ToneSet& b, double frac_err);

/// ndot_MT / ndot = 8 (sum c_k^2/k^2 + (sum c_k/k)^2).
double effective_heating_factor(const ToneSet& tones);

/// (3 + 4 exp(-ndot_MT tau/2) + exp(-2 ndot_MT tau)) / 8.
double fidelity_heating(const ToneSet& tones, double heating_rate);

/// Gate fidelity under symmetric detuning error for an initial thermal state,
/// from F(tau) and G(tau). Ignores heating.
double fidelity_detuning(const GateScenario& scenario);

/// 1 - fidelity_detuning, evaluated without cancellation.
double infidelity_detuning(const GateScenario& scenario);

/// Reduced two-ion state after the gate under symmetric detuning error,
/// exact for a thermal initial motional state and no heating.
Matrix4c closed_form_internal_state(const GateScenario& scenario, SpinBasis basis = SpinBasis::sigma_x_sum);

/// Leading-order heating and detuning infidelities.
ErrorBudget leading_order_budget(const GateScenario& scenario);

/// Peak |f(t)| relative to the single-tone amplitude 1/4.
double peak_drive_ratio(const ToneSet& tones, int n_samples = 20001);

}  // namespace mtms

#endif
