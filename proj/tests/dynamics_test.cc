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

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "mtms/csv.h"
#include "mtms/errors.h"

using namespace mtms;

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kPaperDelta = 2 * kPi * 292.0;

GateScenario detuned(int n, double ratio, double nbar = 0) {
    const ToneSet ts = optimize_tones(n, kPaperDelta);
    return GateScenario{ts, ratio * ts.delta(), 0, nbar};
}

// int_0^T exp(i a t) dt
cd exp_integral(double a, double t) {
    if (a == 0) {
        return t;
    }
    return (std::exp(cd(0, a * t)) - 1.0) / cd(0, a);
}

// G(T) from the double tone sum of -delta int Im(conj(f) F), with F built from its antiderivative.
double phase_by_double_sum(const ToneSet& ts, double detuning, double t) {
    const double d = ts.delta();
    cd acc = 0;
    for (std::size_t j = 1; j <= ts.n_tones(); ++j) {
        for (std::size_t k = 1; k <= ts.n_tones(); ++k) {
            const double wj = double(j) * d + detuning;
            const double wk = double(k) * d + detuning;
            acc += ts.coeff(j) * ts.coeff(k) * d / cd(0, wk) * (exp_integral(wk - wj, t) - exp_integral(-wj, t));
        }
    }
    return -d * acc.imag();
}

double s7(double x) { return (3 + 4 * std::exp(-x / 2) + std::exp(-2 * x)) / 8; }

}  // namespace

TEST(dynamics, drive_at_start_is_coefficient_sum) {
    for (int n = 1; n <= 5; ++n) {
        const ToneSet ts = optimize_tones(n, kPaperDelta);
        double sum = 0;
        for (double c : ts.coeffs()) {
            sum += c;
        }
        const cd f = drive_f(ts, 0.3 * kPaperDelta, 0.0);
        ASSERT_NEAR(f.real(), sum, 1e-15);
        ASSERT_EQ(f.imag(), 0.0);
    }
}

TEST(dynamics, drive_examples) {
    const ToneSet one = single_tone(kPaperDelta);
    const cd end = drive_f(one, 0, one.gate_time());
    ASSERT_NEAR(end.real(), 0.25, 1e-14);
    ASSERT_NEAR(end.imag(), 0.0, 1e-14);
    const ToneSet two = optimize_tones(2, kPaperDelta);
    const cd half = drive_f(two, 0, two.gate_time() / 2);
    ASSERT_NEAR(half.real(), 0.4330127, 1e-7);
    ASSERT_NEAR(half.real(), std::sqrt(3.0) / 4, 1e-14);
    ASSERT_NEAR(half.imag(), 0.0, 1e-14);
}

TEST(dynamics, loops_close_without_detuning) {
    for (int n = 1; n <= 8; ++n) {
        const ToneSet ts = optimize_tones(n, kPaperDelta);
        ASSERT_LE(std::abs(displacement_f_big(ts, 0, ts.gate_time())), 1e-10) << "N=" << n;
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const ToneSet ts({u(rng), u(rng), u(rng)}, 10 + 100 * std::abs(u(rng)));
        ASSERT_LE(std::abs(displacement_f_big(ts, 0, ts.gate_time())), 1e-10);
    }
}

TEST(dynamics, single_tone_open_loop) {
    const ToneSet ts = single_tone(kPaperDelta);
    const double expected = 0.25 / 1.05 * 2 * std::sin(0.05 * kPi);
    const double got = std::abs(displacement_f_big(ts, 0.05 * ts.delta(), ts.gate_time()));
    ASSERT_NEAR(got, expected, 1e-14);
    ASSERT_NEAR(got, 0.074493, 5e-7);
    ASSERT_NEAR(std::abs(displacement_by_quadrature(ts, 0.05 * ts.delta(), ts.gate_time())), expected, 1e-12);
}

TEST(dynamics, antiderivative_matches_quadrature) {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> unit(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 8;
        std::vector<double> coeffs(n);
        if (trial % 2) {
            const ToneSet opt = optimize_tones(n, 1.0);
            coeffs.assign(opt.coeffs().begin(), opt.coeffs().end());
        } else {
            for (double& c : coeffs) {
                c = 2 * unit(rng) - 1;
            }
        }
        const ToneSet ts(coeffs, kPaperDelta * (0.5 + unit(rng)));
        const double detuning = (0.4 * unit(rng) - 0.2) * ts.delta();
        const double t = unit(rng) * ts.gate_time();
        const cd a = displacement_f_big(ts, detuning, t);
        const cd q = displacement_by_quadrature(ts, detuning, t);
        ASSERT_LE(std::abs(a - q), 1e-9) << "trial " << trial;
    }
}

TEST(dynamics, resonant_tone_limit) {
    // Delta = -2 delta puts the second tone on resonance.
    const ToneSet ts = optimize_tones(3, kPaperDelta);
    for (double t : {0.0, 0.3 * ts.gate_time(), ts.gate_time()}) {
        const cd a = displacement_f_big(ts, -2 * ts.delta(), t);
        ASSERT_TRUE(std::isfinite(a.real()) && std::isfinite(a.imag()));
        ASSERT_LE(std::abs(a - displacement_by_quadrature(ts, -2 * ts.delta(), t)), 1e-9);
    }
    const cd near = displacement_f_big(ts, -2 * ts.delta() + 1e-9, ts.gate_time());
    const cd exact = displacement_f_big(ts, -2 * ts.delta(), ts.gate_time());
    ASSERT_LE(std::abs(near - exact), 1e-9);
}

TEST(dynamics, entangling_phase_at_gate_time) {
    for (int n = 1; n <= 8; ++n) {
        const ToneSet ts = optimize_tones(n, kPaperDelta);
        EXPECT_NEAR(phase_g(ts, 0, ts.gate_time()), kPi / 8, 1e-10) << "N=" << n;
        EXPECT_EQ(phase_g(ts, 0, 0), 0.0);
    }
}

TEST(dynamics, phase_matches_double_sum_oracle) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(0, 1);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + trial % 4;
        const ToneSet ts = optimize_tones(n, kPaperDelta);
        const double detuning = (0.4 * unit(rng) - 0.2) * ts.delta();
        const double t = unit(rng) * ts.gate_time();
        ASSERT_NEAR(phase_g(ts, detuning, t), phase_by_double_sum(ts, detuning, t), 1e-10) << "trial " << trial;
    }
}

TEST(dynamics, phase_increment_is_additive) {
    const GateScenario sc = detuned(2, 0.07);
    const double tau = sc.tones.gate_time();
    const double whole = phase_g(sc.tones, sc.detuning_error, tau);
    const double split = phase_increment(sc.tones, sc.detuning_error, 0, 0.4 * tau) +
                         phase_increment(sc.tones, sc.detuning_error, 0.4 * tau, tau);
    ASSERT_NEAR(whole, split, 1e-12);
}

TEST(dynamics, two_tone_phase_error_scaling) {
    const double x = 0.005;
    const GateScenario sc = detuned(2, x);
    const double g = phase_g(sc.tones, sc.detuning_error, sc.tones.gate_time()) - kPi / 8;
    const double ratio = 4 * g * g / (kPi * kPi * x * x);
    ASSERT_NEAR(ratio / (1.0 / 36.0), 1.0, 0.01);
}

TEST(dynamics, two_tone_phase_error_next_order) {
    // At Delta/delta = 0.01 the term linear in Delta/delta already shifts the ratio by -1.48%.
    const double x = 0.01;
    const GateScenario sc = detuned(2, x);
    const double g = phase_g(sc.tones, sc.detuning_error, sc.tones.gate_time()) - kPi / 8;
    ASSERT_NEAR(4 * g * g / (kPi * kPi * x * x), 0.0273668, 1e-6);
}

TEST(dynamics, trajectory_shape) {
    const Trajectory one = trajectory(detuned(1, 0), 401);
    const Trajectory two = trajectory(detuned(2, 0), 401);
    ASSERT_EQ(one.samples.size(), 401u);
    ASSERT_EQ(one.samples.front().t, 0.0);
    ASSERT_EQ(one.samples.front().displacement, cd(0));
    ASSERT_EQ(one.samples.front().phase, 0.0);
    for (std::size_t k = 1; k < one.samples.size(); ++k) {
        ASSERT_GT(one.samples[k].t, one.samples[k - 1].t);
    }
    ASSERT_NEAR(one.samples.back().t, one.scenario.tones.gate_time(), 1e-15);
    ASSERT_LE(std::abs(one.samples.back().displacement), 1e-10);
    ASSERT_NEAR(one.samples.back().phase, kPi / 8, 1e-10);
    double max_one = 0;
    double max_two = 0;
    for (std::size_t k = 0; k < one.samples.size(); ++k) {
        max_one = std::max(max_one, std::abs(one.samples[k].displacement));
        max_two = std::max(max_two, std::abs(two.samples[k].displacement));
    }
    ASSERT_LT(max_two, max_one);
    // Single tone: F = (1/4i)(e^{i delta t} - 1), a circle of radius 1/4.
    ASSERT_NEAR(max_one, 0.5, 1e-6);
    ASSERT_THROW(trajectory(detuned(1, 0), 1), DomainError);
}

TEST(dynamics, trajectory_csv_columns) {
    std::stringstream ss;
    write_trajectory_csv(ss, trajectory(detuned(2, 0.05), 11));
    const CsvTable table = read_csv(ss);
    ASSERT_EQ(table.header, (std::vector<std::string>{"t_s", "re_F", "im_F", "G"}));
    ASSERT_EQ(table.rows.size(), 11u);
    ASSERT_EQ(parse_double(table.rows[0][table.column("t_s")]), 0.0);
}

TEST(dynamics, loop_closure_ratios) {
    const ToneSet one = single_tone(kPaperDelta);
    const ToneSet two = optimize_tones(2, kPaperDelta);
    const ToneSet three = optimize_tones(3, kPaperDelta);
    const double r12 = *loop_closure_ratio(one, two, 0.05);
    const double r13 = *loop_closure_ratio(one, three, 0.05);
    EXPECT_NEAR(r12, 71.0140831, 1e-6);
    EXPECT_NEAR(r12 / 70.0, 1.0, 0.10);
    // The quoted 360 for three tones is not reproduced by the optimized coefficients.
    EXPECT_NEAR(r13, 136.3235716, 1e-6);
    EXPECT_NEAR(*loop_closure_ratio(two, two, 0.05), 1.0, 1e-15);
    EXPECT_NEAR(*loop_closure_ratio(one, two, 0.05), std::abs(displacement_f_big(one, 0.05 * kPaperDelta, one.gate_time())) /
                                                         std::abs(displacement_f_big(two, 0.05 * kPaperDelta, two.gate_time())),
                1e-9);
}

TEST(dynamics, loop_closure_ratio_guards_closed_loops) {
    // Two identical tones cancel exactly, so F vanishes identically.
    const ToneSet silent({0.0}, kPaperDelta);
    ASSERT_FALSE(loop_closure_ratio(single_tone(kPaperDelta), silent, 0.05).has_value());
}

TEST(dynamics, effective_heating_factors) {
    ASSERT_EQ(effective_heating_factor(single_tone(kPaperDelta)), 1.0);
    ASSERT_NEAR(effective_heating_factor(optimize_tones(2, kPaperDelta)), 1.0 / 3.0, 1e-12);
    const double three = effective_heating_factor(optimize_tones(3, kPaperDelta));
    EXPECT_NEAR(three, 0.193998, 1e-6);
    EXPECT_NEAR(three / (1 / 5.19), 1.0, 0.02);
    double previous = 2;
    for (int n = 1; n <= 8; ++n) {
        const double f = effective_heating_factor(optimize_tones(n, kPaperDelta));
        EXPECT_LT(f, previous) << "N=" << n;
        previous = f;
    }
}

TEST(dynamics, heating_fidelity_examples) {
    const ToneSet one = single_tone(kPaperDelta);
    ASSERT_EQ(fidelity_heating(one, 0), 1.0);
    const double rate = 0.1 / one.gate_time();
    ASSERT_NEAR(fidelity_heating(one, rate), s7(0.1), 1e-15);
    ASSERT_NEAR(fidelity_heating(one, rate), 0.952956, 5e-7);
    // Two tones with three times the rate see the same effective rate.
    ASSERT_NEAR(fidelity_heating(optimize_tones(2, kPaperDelta), 3 * rate), s7(0.1), 1e-12);
    ASSERT_THROW(fidelity_heating(one, -1), DomainError);
}

TEST(dynamics, heating_fidelity_leading_order) {
    const ToneSet one = single_tone(kPaperDelta);
    for (double e : {0.001, 0.005, 0.01, 0.02}) {
        const double rate = e * one.delta() / kPi;
        EXPECT_NEAR((1 - fidelity_heating(one, rate)) / e, 1.0, 0.05) << "e=" << e;
    }
}

TEST(dynamics, fidelities_bounded) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 4;
        const ToneSet ts = optimize_tones(n, kPaperDelta);
        const double fh = fidelity_heating(ts, 1e4 * unit(rng) * unit(rng));
        const GateScenario sc{ts, (2 * unit(rng) - 1) * ts.delta(), 0, 60 * unit(rng)};
        const double fd = fidelity_detuning(sc);
        ASSERT_GE(fh, 0);
        ASSERT_LE(fh, 1);
        ASSERT_GE(fd, 0);
        ASSERT_LE(fd, 1);
    }
}

TEST(dynamics, detuning_fidelity_without_error) {
    for (int n = 1; n <= 3; ++n) {
        for (double nbar : {0.0, 2.0, 53.0}) {
            ASSERT_NEAR(fidelity_detuning(detuned(n, 0, nbar)), 1.0, 1e-15);
        }
    }
}

TEST(dynamics, single_tone_detuning_leading_order) {
    const double x = 0.005;
    const double infid = infidelity_detuning(detuned(1, x));
    EXPECT_NEAR(infid / (0.75 * kPi * kPi * x * x), 1.0, 0.02);
}

TEST(dynamics, single_tone_detuning_next_order) {
    // At Delta/delta = 0.01 the exact infidelity sits 2.39% below the leading-order value.
    const double x = 0.01;
    const double infid = infidelity_detuning(detuned(1, x));
    EXPECT_NEAR(infid / (0.75 * kPi * kPi * x * x) - 1, -0.023935, 2e-6);
}

TEST(dynamics, two_tone_detuning_leading_order) {
    for (double nbar : {0.0, 10.0, 53.0}) {
        const double x = 0.005;
        const double infid = infidelity_detuning(detuned(2, x, nbar));
        EXPECT_NEAR(infid / (kPi * kPi * x * x / 36), 1.0, 0.02) << "nbar=" << nbar;
    }
    const double frozen[] = {0.0273706, 0.0274514, 0.0277991};
    int k = 0;
    for (double nbar : {0.0, 10.0, 53.0}) {
        const double x = 0.01;
        EXPECT_NEAR(infidelity_detuning(detuned(2, x, nbar)) / (kPi * kPi * x * x), frozen[k++], 1e-6);
    }
}

TEST(dynamics, two_tone_quadratic_scaling) {
    for (double x : {0.001, 0.0025, 0.005}) {
        const double ratio = infidelity_detuning(detuned(2, 2 * x)) / infidelity_detuning(detuned(2, x));
        EXPECT_NEAR(ratio, 4.0, 0.08) << "x=" << x;
    }
}

TEST(dynamics, two_tone_thermal_independence) {
    const double cold = infidelity_detuning(detuned(2, 0.005, 0));
    const double hot = infidelity_detuning(detuned(2, 0.005, 53));
    EXPECT_LE(std::abs(hot - cold) / cold, 0.05);
}

TEST(dynamics, infidelity_is_complement) {
    for (int n = 1; n <= 3; ++n) {
        for (double x : {1e-3, 0.05, 0.2}) {
            const GateScenario sc = detuned(n, x, 1.5);
            ASSERT_NEAR(infidelity_detuning(sc), 1 - fidelity_detuning(sc), 1e-14);
        }
    }
    // Tiny errors stay accurate relative to their own size.
    const double x = 1e-6;
    EXPECT_NEAR(infidelity_detuning(detuned(1, x)) / (0.75 * kPi * kPi * x * x), 1.0, 1e-4);
}

TEST(dynamics, closed_form_state_matches_fidelity) {
    for (SpinBasis basis : {SpinBasis::sigma_x_sum, SpinBasis::sigma_y_difference}) {
        const GateScenario sc = detuned(2, 0.08, 2.0);
        const Matrix4c rho = closed_form_internal_state(sc, basis);
        ASSERT_LE((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
        ASSERT_NEAR(rho.trace().real(), 1.0, 1e-14);
        const Vector4c target = spin::ideal_target(basis);
        ASSERT_NEAR(target.dot(rho * target).real(), fidelity_detuning(sc), 1e-12);
    }
    const Matrix4c ideal = closed_form_internal_state(detuned(1, 0));
    const Vector4c target = spin::ideal_target(SpinBasis::sigma_x_sum);
    ASSERT_LE((ideal - target * target.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(dynamics, ideal_target_is_bell_state) {
    const Vector4c t = spin::ideal_target(SpinBasis::sigma_x_sum);
    ASSERT_NEAR(std::norm(t(0)), 0.5, 1e-14);
    ASSERT_NEAR(std::norm(t(3)), 0.5, 1e-14);
    ASSERT_NEAR(std::abs(t(1)) + std::abs(t(2)), 0.0, 1e-14);
    // exp(i pi/8 S^2)|00> = e^{i pi/4}(|00> + i|11>)/sqrt(2)
    ASSERT_NEAR(std::arg(t(3) / t(0)), kPi / 2, 1e-12);
}

TEST(dynamics, leading_order_budget_examples) {
    const ErrorBudget two = leading_order_budget(detuned(2, 0.1));
    EXPECT_NEAR(two.e_detuning, kPi * kPi / 36 * 0.01, 1e-15);
    EXPECT_NEAR(two.e_detuning, 2.742e-3, 5e-7);
    EXPECT_FALSE(two.in_validity_regime);
    const ErrorBudget three = leading_order_budget(detuned(3, 0.1));
    EXPECT_NEAR(three.e_detuning, (39 - 12 * std::sqrt(3.0)) / 1936 * kPi * kPi * 0.01, 1e-15);
    // The exact expression is 9.2861e-4; a commonly quoted 9.287e-4 is a rounding slip.
    EXPECT_NEAR(three.e_detuning, 9.2861e-4, 5e-9);
    const ErrorBudget zero = leading_order_budget(detuned(2, 0));
    EXPECT_EQ(zero.e_heating, 0.0);
    EXPECT_EQ(zero.e_detuning, 0.0);
    EXPECT_TRUE(zero.in_validity_regime);
    GateScenario hot = detuned(1, 0.01, 3);
    hot.heating_rate = 10;
    const ErrorBudget one = leading_order_budget(hot);
    EXPECT_NEAR(one.e_detuning, 3.75 * kPi * kPi * 1e-4, 1e-15);
    EXPECT_NEAR(one.e_heating, kPi * 10 / kPaperDelta, 1e-15);
}

TEST(dynamics, scenario_validation) {
    GateScenario sc = detuned(1, 0);
    sc.heating_rate = -1;
    ASSERT_THROW(sc.validate(), DomainError);
    sc.heating_rate = 0;
    sc.nbar = -0.1;
    ASSERT_THROW(sc.validate(), DomainError);
}

TEST(dynamics, peak_drive_ratio_two_tones) {
    ASSERT_NEAR(peak_drive_ratio(optimize_tones(2, kPaperDelta)), std::sqrt(3.0), 1e-9);
    ASSERT_NEAR(peak_drive_ratio(single_tone(kPaperDelta)), 1.0, 1e-12);
}
