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

#include "mtms/tones.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "mtms/errors.h"

namespace mtms {

ToneSet::ToneSet(std::vector<double> coeffs, double delta) : coeffs_(std::move(coeffs)), delta_(delta) {
    if (coeffs_.empty()) {
        throw DomainError("ToneSet needs at least one tone");
    }
    for (double c : coeffs_) {
        if (!std::isfinite(c)) {
            throw DomainError("ToneSet coefficients must be finite");
        }
    }
    if (!(delta_ > 0) || !std::isfinite(delta_)) {
        throw DomainError("ToneSet detuning must be positive and finite, got " + std::to_string(delta_));
    }
}

double ToneSet::gate_time() const noexcept { return 2 * std::numbers::pi / delta_; }

ToneSet single_tone(double delta) { return ToneSet({0.25}, delta); }

namespace {

double multiplier_equation(int n, double lambda) {
    double s = 0;
    for (int j = 1; j <= n; ++j) {
        s += 1.0 / (1.0 - j * lambda);
    }
    return s;
}

}  // namespace

double smallest_multiplier_root(int n_tones) {
    if (n_tones < 2) {
        throw DomainError("smallest_multiplier_root needs at least two tones");
    }
    const double pole_lo = 1.0 / n_tones;
    const double pole_hi = 1.0 / (n_tones - 1);
    // Stay clear of the poles: 1 - j*lambda rounds to zero within a few ulps of them.
    const double margin = 1e-12 * (pole_hi - pole_lo);
    double lo = pole_lo + margin;
    double hi = pole_hi - margin;
    double f_lo = multiplier_equation(n_tones, lo);
    double f_hi = multiplier_equation(n_tones, hi);
    if (!(f_lo < 0 && f_hi > 0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "root of the multiplier equation not bracketed for N=" << n_tones << ": f(" << lo << ")=" << f_lo
            << ", f(" << hi << ")=" << f_hi;
        throw NumericError(msg.str());
    }
    // The interval shrinks to adjacent doubles in at most ~64 halvings.
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            return std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
        }
        double f_mid = multiplier_equation(n_tones, mid);
        if (f_mid == 0) {
            return mid;
        }
        if (f_mid < 0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    std::ostringstream msg;
    msg.precision(17);
    msg << "bisection for the multiplier root did not converge for N=" << n_tones << "; last bracket [" << lo << ", "
        << hi << "]";
    throw NumericError(msg.str());
}

ToneSet optimize_tones(int n_tones, double delta) {
    if (n_tones < 1) {
        throw DomainError("optimize_tones needs n_tones >= 1, got " + std::to_string(n_tones));
    }
    if (n_tones == 1) {
        return single_tone(delta);
    }
    const double lambda = smallest_multiplier_root(n_tones);
    double norm = 0;
    for (int j = 1; j <= n_tones; ++j) {
        double d = 1.0 - j * lambda;
        norm += j / (d * d);
    }
    const double b = -0.25 / std::sqrt(norm);
    std::vector<double> coeffs(n_tones);
    for (int j = 1; j <= n_tones; ++j) {
        coeffs[j - 1] = j * b / (1.0 - j * lambda);
    }
    if (coeffs[0] > 0) {
        for (double& c : coeffs) {
            c = -c;
        }
    }
    return ToneSet(std::move(coeffs), delta);
}

ConstraintResiduals constraint_residuals(const ToneSet& tones) {
    double entangling = 0;
    double closure = 0;
    std::size_t j = 1;
    for (double c : tones.coeffs()) {
        entangling += c * c / j;
        closure += c / j;
        ++j;
    }
    return {entangling - 1.0 / 16.0, closure};
}

double displacement_weight(const ToneSet& tones) {
    double s = 0;
    std::size_t j = 1;
    for (double c : tones.coeffs()) {
        s += c * c / double(j * j);
        ++j;
    }
    return s;
}

}  // namespace mtms
