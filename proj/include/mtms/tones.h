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

#ifndef MTMS_TONES_H
#define MTMS_TONES_H

#include <cstddef>
#include <span>
#include <vector>

namespace mtms {

/// Drive-strength coefficients of a multi-tone gate.
///
/// Tone j (1-based) drives both sidebands at detuning j*delta with strength
/// coeff(j). The gate time is tau = 2*pi/delta. The constructor only checks the
/// shape of the data; the entangling and loop-closure constraints are
/// guaranteed by `single_tone` and `optimize_tones`, not by this type.
class ToneSet {
   public:
    ToneSet(std::vector<double> coeffs, double delta);

    std::size_t n_tones() const noexcept { return coeffs_.size(); }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    /// Coefficient of tone j, 1-based.
    double coeff(std::size_t j) const { return coeffs_.at(j - 1); }
    /// Base detuning in rad/s.
    double delta() const noexcept { return delta_; }
    /// tau = 2*pi/delta, in seconds.
    double gate_time() const noexcept;

    /// Same coefficients at a different base detuning.
    ToneSet with_delta(double delta) const { return ToneSet(coeffs_, delta); }

   private:
    std::vector<double> coeffs_;
    double delta_;
};

/// The standard single-tone gate, c_1 = 1/4.
ToneSet single_tone(double delta);

/// Smallest real root of sum_{j=1..n} 1/(1 - j*lambda) = 0, for n >= 2.
///
/// The function is increasing between its poles at 1/j, so each interval
/// (1/(j+1), 1/j) holds exactly one root and the smallest lies in
/// (1/n, 1/(n-1)). Found by bisection down to adjacent doubles.
double smallest_multiplier_root(int n_tones);

/// Coefficients minimizing sum c_k^2/k^2 subject to sum c_k^2/k = 1/16 and
/// sum c_k/k = 0 (for n_tones >= 2). n_tones == 1 gives `single_tone`.
///
/// The solution is unique up to a global sign; the sign is fixed so that
/// c_1 < 0.
ToneSet optimize_tones(int n_tones, double delta);

struct ConstraintResiduals {
    /// sum c_j^2/j - 1/16
    double entangling;
    /// sum c_j/j
    double closure;
};

ConstraintResiduals constraint_residuals(const ToneSet& tones);

/// sum c_k^2/k^2, proportional to the mean squared phase-space displacement.
double displacement_weight(const ToneSet& tones);

}  // namespace mtms

#endif
