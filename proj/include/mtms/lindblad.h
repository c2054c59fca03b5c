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

#ifndef MTMS_LINDBLAD_H
#define MTMS_LINDBLAD_H

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtms/dynamics.h"
#include "mtms/spin.h"

namespace mtms {

struct SimConfig {
    GateScenario scenario;
    /// Fock-space dimension M. Zero selects `default_fock_truncation`.
    int fock_truncation = 0;
    /// Relative tolerance of the adaptive integrator, in (0, 1e-3].
    double step_tolerance = 1e-8;
    SpinBasis basis = SpinBasis::sigma_x_sum;
    /// Constant shift added to the detuning error (rad/s), e.g. a calibration offset.
    double detuning_offset = 0;

    void validate() const;
    /// fock_truncation, or the default when it is zero.
    int resolved_fock_truncation() const;
    double effective_detuning() const { return scenario.detuning_error + detuning_offset; }
};

/// M = ceil(nbar + 10 sqrt(nbar + 1) + 20 + 16 max_t |F(t)|^2).
int default_fock_truncation(const GateScenario& scenario);

/// Density matrix on (two ions) x (M Fock levels); row index = 4-level spin
/// index * M + Fock number.
class JointState {
   public:
    JointState(Eigen::MatrixXcd rho, int fock_truncation);

    const Eigen::MatrixXcd& rho() const { return rho_; }
    int fock_truncation() const { return m_; }

    /// Partial trace over motion.
    Matrix4c internal_state() const;
    /// Diagonal of the motional reduced state.
    Eigen::VectorXd motional_populations() const;
    std::complex<double> trace() const { return rho_.trace(); }
    /// max |rho - rho^dagger|
    double hermiticity_error() const;
    double min_eigenvalue() const;

   private:
    Eigen::MatrixXcd rho_;
    int m_;
};

struct FidelityReport {
    /// <target|rho_internal|target>, target = ideal gate output on |00>.
    double fidelity = 0;
    bool truncation_converged = true;
    /// Largest population in the top two Fock levels seen at any accepted step.
    double leaked_population = 0;
    double max_trace_error = 0;
    double hermiticity_error = 0;
    /// <00|rho|00> + <11|rho|11>
    double population_even = 0;
    /// 2 |<00|rho|11>|
    double parity_amplitude = 0;
    /// Phase of <00|rho|11> relative to the ideal target, radians.
    double bell_phase_shift = 0;
    /// Fidelity with the Bell state whose phase best matches the output.
    double fidelity_free_phase = 0;
    int fock_truncation = 0;
    long accepted_steps = 0;
    long rejected_steps = 0;
};

struct EvolveResult {
    JointState state;
    FidelityReport report;
};

/// Thermal motional state on M levels, p_n proportional to (nbar/(nbar+1))^n.
/// Throws TruncationError when M levels hold < 99.9% of the untruncated weight.
Eigen::MatrixXcd thermal_state(double nbar, int m);

/// Dimensionless spin operator A(t) with H(t)/hbar = delta (A (x) a^dagger + A^dagger (x) a).
/// The blue sideband (sigma_+ a^dagger) carries delta_b, the red sideband (sigma_+ a) delta_r.
Matrix4c sideband_coupling(const ToneSet& tones, SpinBasis basis, double delta_r, double delta_b, double t);

/// Dense H(t)/hbar in rad/s on the joint space, symmetric detuning.
Eigen::MatrixXcd hamiltonian_at(const SimConfig& cfg, double t);

/// Integrates the master equation with heating dissipators D[a], D[a^dagger]
/// (rate ndot each) over one gate, starting from |00><00| (x) thermal.
EvolveResult evolve(const SimConfig& cfg);

/// As `evolve`, with independent red/blue sideband detuning errors (rad/s).
/// The config's symmetric detuning error is ignored; the offset is added to both.
EvolveResult asymmetric_detuning_evolve(const SimConfig& cfg, double delta_r, double delta_b);

struct SweepRow {
    SimConfig config;
    std::optional<FidelityReport> report;
    std::string error;
};

using SweepProgress = std::function<void(std::size_t done, std::size_t total)>;

/// Runs `evolve` on every config. Rows keep input order; a failing point
/// records its error message and the sweep continues. threads <= 0 uses
/// the hardware concurrency.
std::vector<SweepRow> sweep(std::span<const SimConfig> grid, int threads = 0, const SweepProgress& progress = {});

/// One row per point: scenario fields, fidelity and truncation diagnostics.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace mtms

#endif
