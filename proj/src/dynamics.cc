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

#include "mtms/dynamics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Eigenvalues>

#include "mtms/csv.h"
#include "mtms/errors.h"

namespace mtms {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kQuadratureTolerance = 1e-12;

/// (exp(ix) - 1) / (ix), continuous through x = 0.
cd phi1(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return {1.0 - x2 / 6.0 + x2 * x2 / 120.0, x / 2.0 - x * x2 / 24.0};
    }
    const double s = std::sin(0.5 * x);
    return {std::sin(x) / x, 2.0 * s * s / x};
}

/// Adaptive Gauss-Kronrod on panels no wider than `panel`, so each one sees a few oscillations at most.
template <class Fn>
double integrate(Fn&& fn, double a, double b, double panel, const char* what) {
    if (b <= a) {
        return 0.0;
    }
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / panel)));
    const double width = (b - a) / panels;
    double value = 0;
    double error = 0;
    double l1 = 0;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * width;
        const double hi = k + 1 == panels ? b : lo + width;
        // Integrate on [-1, 1]: this Boost version reports the error estimate without the interval scale.
        const double half = 0.5 * (hi - lo);
        const double mid = 0.5 * (hi + lo);
        double e = 0;
        double l = 0;
        value += half * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                            [&](double x) { return fn(mid + half * x); }, -1.0, 1.0, 20,
                            kQuadratureTolerance * 1e-2, &e, &l);
        error += half * e;
        l1 += half * l;
    }
    if (!std::isfinite(value) || error > kQuadratureTolerance * std::max(1.0, l1)) {
        std::ostringstream msg;
        msg << "adaptive quadrature did not converge for " << what << " (error estimate " << error << ")";
        throw NumericError(msg.str());
    }
    return value;
}

double panel_width(const ToneSet& tones, double detuning_error) {
    return kPi / (tones.n_tones() * tones.delta() + std::abs(detuning_error));
}

}  // namespace

void GateScenario::validate() const {
    if (!(heating_rate >= 0) || !std::isfinite(heating_rate)) {
        throw DomainError("heating rate must be finite and >= 0");
    }
    if (!(nbar >= 0) || !std::isfinite(nbar)) {
        throw DomainError("nbar must be finite and >= 0");
    }
    if (!std::isfinite(detuning_error)) {
        throw DomainError("detuning error must be finite");
    }
}

cd drive_f(const ToneSet& tones, double detuning_error, double t) {
    cd f = 0;
    const double delta = tones.delta();
    std::size_t j = 1;
    for (double c : tones.coeffs()) {
        f += c * std::polar(1.0, (j * delta + detuning_error) * t);
        ++j;
    }
    return f;
}

cd displacement_f_big(const ToneSet& tones, double detuning_error, double t) {
    cd sum = 0;
    const double delta = tones.delta();
    std::size_t j = 1;
    for (double c : tones.coeffs()) {
        sum += c * phi1((j * delta + detuning_error) * t);
        ++j;
    }
    return delta * t * sum;
}

cd displacement_by_quadrature(const ToneSet& tones, double detuning_error, double t) {
    const double delta = tones.delta();
    const double re =
        integrate([&](double s) { return delta * drive_f(tones, detuning_error, s).real(); }, 0.0, t,
                  panel_width(tones, detuning_error), "Re F");
    const double im =
        integrate([&](double s) { return delta * drive_f(tones, detuning_error, s).imag(); }, 0.0, t,
                  panel_width(tones, detuning_error), "Im F");
    return {re, im};
}

double phase_increment(const ToneSet& tones, double detuning_error, double t0, double t1) {
    const double delta = tones.delta();
    auto integrand = [&](double s) {
        const cd f = drive_f(tones, detuning_error, s);
        const cd big_f = displacement_f_big(tones, detuning_error, s);
        return -delta * (std::conj(f) * big_f).imag();
    };
    return integrate(integrand, t0, t1, panel_width(tones, detuning_error), "G");
}

double phase_g(const ToneSet& tones, double detuning_error, double t) {
    return phase_increment(tones, detuning_error, 0.0, t);
}

Trajectory trajectory(const GateScenario& scenario, int n_samples) {
    scenario.validate();
    if (n_samples < 2) {
        throw DomainError("trajectory needs at least two samples");
    }
    const ToneSet& tones = scenario.tones;
    const double tau = tones.gate_time();
    Trajectory out{{}, scenario};
    out.samples.reserve(n_samples);
    out.samples.push_back({0.0, cd(0, 0), 0.0});
    double g = 0;
    double t_prev = 0;
    for (int k = 1; k < n_samples; ++k) {
        const double t = (k == n_samples - 1) ? tau : tau * k / (n_samples - 1);
        g += phase_increment(tones, scenario.detuning_error, t_prev, t);
        out.samples.push_back({t, displacement_f_big(tones, scenario.detuning_error, t), g});
        t_prev = t;
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    CsvWriter csv(out, {"t_s", "re_F", "im_F", "G"});
    for (const auto& s : traj.samples) {
        csv.row({s.t, s.displacement.real(), s.displacement.imag(), s.phase});
    }
}

double max_displacement(const ToneSet& tones, double detuning_error, int n_samples) {
    const double tau = tones.gate_time();
    double best = 0;
    for (int k = 0; k < n_samples; ++k) {
        best = std::max(best, std::abs(displacement_f_big(tones, detuning_error, tau * k / (n_samples - 1))));
    }
    return best;
}

std::optional<double> loop_closure_ratio(const ToneSet& a, const ToneSet& b, double frac_err) {
    const double fa = std::abs(displacement_f_big(a, frac_err * a.delta(), a.gate_time()));
    const double fb = std::abs(displacement_f_big(b, frac_err * b.delta(), b.gate_time()));
    if (fb < 1e-300) {
        return std::nullopt;
    }
    return fa / fb;
}

double effective_heating_factor(const ToneSet& tones) {
    const double closure = constraint_residuals(tones).closure;
    return 8.0 * (displacement_weight(tones) + closure * closure);
}

double fidelity_heating(const ToneSet& tones, double heating_rate) {
    if (!(heating_rate >= 0)) {
        throw DomainError("heating rate must be >= 0");
    }
    const double x = effective_heating_factor(tones) * heating_rate * tones.gate_time();
    return (3.0 + 4.0 * std::exp(-x / 2) + std::exp(-2 * x)) / 8.0;
}

namespace {

struct GateEndpoint {
    double displacement_sq;
    double phase_error;
};

GateEndpoint endpoint(const GateScenario& sc) {
    const double tau = sc.tones.gate_time();
    const double f_abs = std::abs(displacement_f_big(sc.tones, sc.detuning_error, tau));
    return {f_abs * f_abs, phase_g(sc.tones, sc.detuning_error, tau) - kPi / 8};
}

}  // namespace

double infidelity_detuning(const GateScenario& scenario) {
    scenario.validate();
    const auto [f2, g_err] = endpoint(scenario);
    const double w = scenario.nbar + 0.5;
    const double s = std::sin(2 * g_err);
    // 1 - F = (1 - cos(4G) e^{-a})/2 + (1 - e^{-4a})/8 with a = 4 (nbar + 1/2) |F|^2
    const double a = 4 * w * f2;
    const double first = 2 * s * s - std::cos(4 * g_err) * std::expm1(-a);
    return 0.5 * first - std::expm1(-4 * a) / 8.0;
}

double fidelity_detuning(const GateScenario& scenario) {
    scenario.validate();
    const auto [f2, g_err] = endpoint(scenario);
    const double w = scenario.nbar + 0.5;
    return 3.0 / 8.0 + 0.5 * std::cos(4 * g_err) * std::exp(-4 * w * f2) + std::exp(-16 * w * f2) / 8.0;
}

Matrix4c closed_form_internal_state(const GateScenario& scenario, SpinBasis basis) {
    scenario.validate();
    const double tau = scenario.tones.gate_time();
    const double f2 = std::norm(displacement_f_big(scenario.tones, scenario.detuning_error, tau));
    const double g = phase_g(scenario.tones, scenario.detuning_error, tau);
    const double w = scenario.nbar + 0.5;

    Eigen::SelfAdjointEigenSolver<Matrix4c> eig(spin::collective(basis));
    const auto& vecs = eig.eigenvectors();
    const auto& vals = eig.eigenvalues();
    const Vector4c g0 = spin::ground();
    std::array<Vector4c, 4> parts;
    for (int a = 0; a < 4; ++a) {
        parts[a] = vecs.col(a) * vecs.col(a).dot(g0);
    }
    Matrix4c rho = Matrix4c::Zero();
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            const double sa = vals(a);
            const double sb = vals(b);
            const cd factor =
                std::polar(std::exp(-w * f2 * (sa - sb) * (sa - sb)), g * (sa * sa - sb * sb));
            rho += factor * parts[a] * parts[b].adjoint();
        }
    }
    return rho;
}

ErrorBudget leading_order_budget(const GateScenario& scenario) {
    scenario.validate();
    const ToneSet& tones = scenario.tones;
    const double heating_mt = effective_heating_factor(tones) * scenario.heating_rate;
    const double x = scenario.detuning_ratio();
    ErrorBudget out{};
    out.e_heating = kPi * heating_mt / tones.delta();
    if (tones.n_tones() == 1) {
        out.e_detuning = (0.75 + scenario.nbar) * kPi * kPi * x * x;
        out.order = "first order in heating rate, second order in Delta/delta (single tone)";
    } else {
        const double w = displacement_weight(tones);
        out.e_detuning = 16 * kPi * kPi * x * x * w * w;
        out.order = "first order in heating rate, second order in Delta/delta (closed-loop multi-tone)";
    }
    out.in_validity_regime = out.e_heating <= 0.1 && std::abs(x) <= 0.05;
    return out;
}

double peak_drive_ratio(const ToneSet& tones, int n_samples) {
    const double tau = tones.gate_time();
    double best = 0;
    for (int k = 0; k < n_samples; ++k) {
        best = std::max(best, std::abs(drive_f(tones, 0.0, tau * k / (n_samples - 1))));
    }
    return best / 0.25;
}

}  // namespace mtms
