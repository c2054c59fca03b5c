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

#ifndef MTMS_SPIN_H
#define MTMS_SPIN_H

#include <array>
#include <complex>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace mtms {

using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;

/// Two-qubit basis ordering: index = 2*q1 + q2, so |00>, |01>, |10>, |11>.
/// Qubit level 1 is the fluorescing ("bright") level.
enum class SpinBasis {
    /// S = sigma_x1 + sigma_x2
    sigma_x_sum,
    /// S = sigma_y1 - sigma_y2, the stretch-mode gradient coupling
    sigma_y_difference,
};

std::string_view to_string(SpinBasis basis);
SpinBasis spin_basis_from_string(std::string_view name);

namespace spin {

/// Drive phase per ion: ion i couples through cos(p_i) sigma_x - sin(p_i) sigma_y.
std::array<double, 2> ion_phases(SpinBasis basis);

/// Raising operator |0><1| on ion 0 or 1 of the pair (sigma_+ = (sigma_x + i sigma_y)/2).
Matrix4c raising(int ion);

/// The collective coupling operator S of the chosen basis.
Matrix4c collective(SpinBasis basis);

/// |00>
Vector4c ground();

/// Output of the ideal gate on |00>: exp(i*pi/8 * S^2)|00>.
Vector4c ideal_target(SpinBasis basis);

/// exp(i*phase*S^2) applied to |00>, using the spectral decomposition of S.
Vector4c phase_gate_on_ground(SpinBasis basis, double phase);

/// Equal pi/2 analysis pulses on both ions, exp(-i pi/4 (cos(phi) sx + sin(phi) sy)) each.
Matrix4c analysis_pulse(double phi);

/// Probabilities of observing 0, 1, 2 bright ions.
std::array<double, 3> bright_count_probabilities(const Matrix4c& rho);

/// p0 + p2 - p1
double parity(const Matrix4c& rho);

/// Parity after the analysis pulse at phase phi.
double parity_after_pulse(const Matrix4c& rho, double phi);

/// Phase phi0 of the parity oscillation Pi(phi) = A cos(2 phi + phi0) + offset.
double parity_phase(const Matrix4c& rho);

/// <00|rho|11>, the coherence read out by the parity oscillation.
std::complex<double> bell_coherence(const Matrix4c& rho);

}  // namespace spin
}  // namespace mtms

#endif
