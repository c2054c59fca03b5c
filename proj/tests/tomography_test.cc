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

#include "mtms/tomography.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "mtms/errors.h"
#include "mtms/lindblad.h"

using namespace mtms;

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

SpamMap paper_spam() { return SpamMap::from_combined_fidelity(0.87); }

// Column-stochastic map with a dominant diagonal, drawn at random.
SpamMap random_spam(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 0.25);
    Eigen::Matrix3d p;
    for (int j = 0; j < 3; ++j) {
        double off = 0;
        for (int i = 0; i < 3; ++i) {
            if (i != j) {
                p(i, j) = u(rng);
                off += p(i, j);
            }
        }
        p(j, j) = 1 - off;
    }
    return SpamMap(p);
}

double condition_number(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
    return svd.singularValues()(0) / svd.singularValues()(2);
}

}  // namespace

TEST(tomography, symmetric_spam_structure) {
    const SpamMap s = SpamMap::symmetric(0.1);
    EXPECT_NEAR(s(0, 0), 0.81, 1e-15);
    EXPECT_NEAR(s(1, 0), 0.18, 1e-15);
    EXPECT_NEAR(s(2, 0), 0.01, 1e-15);
    EXPECT_NEAR(s(1, 1), 0.82, 1e-15);
    EXPECT_NEAR(paper_spam()(0, 0), 0.87, 1e-12);
    EXPECT_NEAR(paper_spam()(2, 2), 0.87, 1e-12);
    EXPECT_NEAR(default_spam_epsilon(), 1 - std::sqrt(0.87), 1e-15);
    EXPECT_THROW(SpamMap::symmetric(1.5), DomainError);
    Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
    bad(0, 0) = 0.9;
    EXPECT_THROW(SpamMap{bad}, DomainError);
}

TEST(tomography, apply_spam_examples) {
    const Triple p{0.5, 0.3, 0.2};
    const Triple same = apply_spam(p, SpamMap::identity());
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(same[i], p[i]);
    }
    std::mt19937_64 rng(7);
    const SpamMap s = random_spam(rng);
    const Triple first = apply_spam({1, 0, 0}, s);
    for (int i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(first[i], s(i, 0));
    }
    Eigen::Matrix3d ds;
    ds << 0.8, 0.1, 0.1, 0.1, 0.7, 0.2, 0.1, 0.2, 0.7;
    const Triple uniform = apply_spam({1.0 / 3, 1.0 / 3, 1.0 / 3}, SpamMap(ds));
    for (double v : uniform) {
        EXPECT_NEAR(v, 1.0 / 3, 1e-15);
    }
    EXPECT_THROW(apply_spam({0.5, 0.6, 0.1}, s), DomainError);
    EXPECT_THROW(apply_spam({-0.1, 0.6, 0.5}, s), DomainError);
}

TEST(tomography, apply_spam_preserves_simplex) {
    std::mt19937_64 rng(11);
    std::gamma_distribution<double> g(1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const SpamMap s = random_spam(rng);
        const double a = g(rng), b = g(rng), c = g(rng);
        const Triple out = apply_spam({a / (a + b + c), b / (a + b + c), c / (a + b + c)}, s);
        EXPECT_NEAR(out[0] + out[1] + out[2], 1.0, 1e-15);
        for (double v : out) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(tomography, sampling) {
    const CountsRecord degenerate = sample_counts({1, 0, 0}, 100, 5);
    EXPECT_EQ(degenerate.x0, 100);
    EXPECT_EQ(degenerate.x1 + degenerate.x2, 0);
    const CountsRecord a = sample_counts({0.5, 0.3, 0.2}, 1000, 42);
    const CountsRecord b = sample_counts({0.5, 0.3, 0.2}, 1000, 42);
    EXPECT_EQ(a.x0, b.x0);
    EXPECT_EQ(a.x1, b.x1);
    EXPECT_EQ(a.x2, b.x2);
    EXPECT_THROW(sample_counts({0.5, 0.3, 0.2}, 0, 1), DomainError);
}

TEST(tomography, sampling_matches_multinomial) {
    const Triple p{0.5, 0.3, 0.2};
    const std::int64_t n = 1000000;
    const CountsRecord c = sample_counts(p, n, 2024);
    ASSERT_EQ(c.n(), n);
    const std::array<std::int64_t, 3> x{c.x0, c.x1, c.x2};
    for (int i = 0; i < 3; ++i) {
        const double sigma = std::sqrt(n * p[i] * (1 - p[i]));
        EXPECT_LE(std::abs(x[i] - n * p[i]), 3 * sigma) << "outcome " << i;
    }
}

TEST(tomography, mle_identity_examples) {
    const PopulationEstimate e = mle_populations({50, 30, 20}, SpamMap::identity());
    EXPECT_NEAR(e.p1, 0.3, 1e-9);
    EXPECT_NEAR(e.p2, 0.2, 1e-9);
    EXPECT_NEAR(e.p0, 0.5, 1e-9);
    const PopulationEstimate corner = mle_populations({40, 0, 0}, SpamMap::identity());
    EXPECT_EQ(corner.p1, 0.0);
    EXPECT_EQ(corner.p2, 0.0);
    EXPECT_TRUE(corner.on_boundary);
    EXPECT_THROW(mle_populations({0, 0, 0}, SpamMap::identity()), DomainError);
    EXPECT_THROW(mle_populations({-1, 2, 0}, SpamMap::identity()), DomainError);
}

TEST(tomography, mle_identity_is_empirical) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> d(0, 500);
    for (int trial = 0; trial < 500; ++trial) {
        CountsRecord c{d(rng), d(rng), d(rng)};
        if (c.n() == 0) {
            continue;
        }
        const PopulationEstimate e = mle_populations(c, SpamMap::identity());
        EXPECT_NEAR(e.p1, double(c.x1) / c.n(), 1e-9);
        EXPECT_NEAR(e.p2, double(c.x2) / c.n(), 1e-9);
    }
}

TEST(tomography, mle_likelihood_is_maximal) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    const SpamMap s = paper_spam();
    for (int trial = 0; trial < 50; ++trial) {
        const CountsRecord c = sample_counts(apply_spam({0.05, 0.05, 0.9}, s), 300, rng);
        const PopulationEstimate e = mle_populations(c, s);
        for (int k = 0; k < 200; ++k) {
            double p1 = u(rng), p2 = u(rng);
            if (p1 + p2 > 1) {
                p1 = 1 - p1;
                p2 = 1 - p2;
            }
            EXPECT_GE(e.log_likelihood, populations_log_likelihood(c, s, p1, p2) - 1e-9);
        }
    }
}

TEST(tomography, mle_spam_coverage) {
    const SpamMap s = paper_spam();
    const Triple truth{0.45, 0.1, 0.45};
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const PopulationEstimate e = mle_populations(sample_counts(apply_spam(truth, s), 10000, seed), s);
        covered += std::abs(e.p1 - truth[1]) <= 3 * e.se_p1 && std::abs(e.p2 - truth[2]) <= 3 * e.se_p2;
    }
    EXPECT_GE(covered, 95);
}

TEST(tomography, mle_consistency) {
    std::mt19937_64 rng(99);
    std::gamma_distribution<double> g(1.0);
    int checked = 0;
    while (checked < 40) {
        const SpamMap s = random_spam(rng);
        if (condition_number(s.matrix()) > 50) {
            continue;
        }
        const double a = g(rng), b = g(rng), c = g(rng);
        const Triple truth{a / (a + b + c), b / (a + b + c), c / (a + b + c)};
        const PopulationEstimate e = mle_populations(sample_counts(apply_spam(truth, s), 1000000, rng), s);
        EXPECT_LE(std::abs(e.p1 - truth[1]), 1e-2);
        EXPECT_LE(std::abs(e.p2 - truth[2]), 1e-2);
        ++checked;
    }
}

TEST(tomography, singular_spam_is_rejected) {
    Eigen::Matrix3d p;
    p << 0.5, 0.5, 0.2, 0.5, 0.5, 0.3, 0.0, 0.0, 0.5;
    EXPECT_THROW(mle_populations({10, 10, 10}, SpamMap(p)), DomainError);
}

TEST(tomography, analysis_phases) {
    const auto phases = analysis_phases(12);
    ASSERT_EQ(phases.size(), 12u);
    EXPECT_EQ(phases[0], 0.0);
    EXPECT_NEAR(phases[3], kPi / 2, 1e-15);
    EXPECT_THROW(analysis_phases(3), DomainError);
}

TEST(tomography, parity_noiseless_recovery) {
    const ParityDataset ds = generate_model_dataset(1.0, 0.0, SpamMap::identity(), 12, 100000, 0, true);
    const ParityFit fit = mle_parity_fit(ds);
    EXPECT_NEAR(fit.amplitude, 1.0, 1e-6);
    EXPECT_NEAR(fit.phase, 0.0, 1e-6);
    const ParityDataset spam_ds = generate_model_dataset(0.7, 0.4, paper_spam(), 16, 1000000, 0, true);
    const ParityFit spam_fit = mle_parity_fit(spam_ds);
    EXPECT_NEAR(spam_fit.amplitude, 0.7, 1e-4);
    EXPECT_NEAR(spam_fit.phase, 0.4, 1e-4);
}

TEST(tomography, parity_coverage) {
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const ParityDataset ds = generate_model_dataset(0.9, kPi / 4, SpamMap::identity(), 12, 500, seed);
        const ParityFit fit = mle_parity_fit(ds);
        covered += std::abs(fit.amplitude - 0.9) <= 3 * fit.se_amplitude;
        EXPECT_GE(fit.log_likelihood, parity_log_likelihood(ds, 0.9, kPi / 4) - 1e-9) << "seed " << seed;
    }
    EXPECT_GE(covered, 95);
}

TEST(tomography, parity_null_case) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ParityDataset ds = generate_model_dataset(0.0, 0.0, SpamMap::identity(), 12, 500, seed);
        const ParityFit fit = mle_parity_fit(ds);
        EXPECT_LE(fit.amplitude, 3 * 2 / std::sqrt(12 * 500.0)) << "seed " << seed;
        EXPECT_GE(fit.log_likelihood, parity_log_likelihood(ds, 0.0, 0.0) - 1e-9);
    }
}

TEST(tomography, parity_dataset_validation) {
    ParityDataset ds = generate_model_dataset(0.5, 0.0, SpamMap::identity(), 12, 100, 1);
    ds.points.resize(3);
    EXPECT_THROW(mle_parity_fit(ds), DomainError);
    ParityDataset same_phase = generate_model_dataset(0.5, 0.0, SpamMap::identity(), 12, 100, 1);
    for (auto& p : same_phase.points) {
        p.phi = 0.1;
    }
    EXPECT_THROW(mle_parity_fit(same_phase), DomainError);
    ParityDataset blind = generate_model_dataset(0.5, 0.0, SpamMap::identity(), 12, 100, 1);
    blind.spam = SpamMap::symmetric(0.5);
    EXPECT_THROW(mle_parity_fit(blind), DomainError);
}

TEST(tomography, parity_csv_round_trip) {
    const ParityDataset ds = generate_model_dataset(0.8, 1.0, SpamMap::identity(), 8, 200, 9);
    std::stringstream ss;
    write_parity_csv(ss, ds);
    const ParityDataset back = read_parity_csv(ss);
    ASSERT_EQ(back.points.size(), ds.points.size());
    for (std::size_t i = 0; i < ds.points.size(); ++i) {
        EXPECT_DOUBLE_EQ(back.points[i].phi, ds.points[i].phi);
        EXPECT_EQ(back.points[i].counts.x1, ds.points[i].counts.x1);
    }
}

TEST(tomography, bell_fidelity_examples) {
    EXPECT_DOUBLE_EQ(bell_fidelity_estimate(1, 1, 0), 1.0);
    EXPECT_NEAR(bell_fidelity_estimate(1, 1, kPi / 2), 0.5, 1e-15);
    EXPECT_NEAR(bell_fidelity_estimate(0.96, 0.92, 0), 0.94, 1e-15);
    EXPECT_THROW(bell_fidelity_estimate(1.1, 0.5, 0), DomainError);
    EXPECT_THROW(bell_fidelity_estimate(0.5, 1.1, 0), DomainError);
}

TEST(tomography, bell_fidelity_from_density_matrix) {
    // Even population 0.96 split equally, coherence 0.92/2 aligned with the target, 0.04 in an odd state.
    const Vector4c t = spin::ideal_target(SpinBasis::sigma_x_sum);
    Matrix4c rho = Matrix4c::Zero();
    rho(0, 0) = 0.48;
    rho(3, 3) = 0.48;
    rho(1, 1) = 0.04;
    const cd aligned = t(0) * std::conj(t(3)) / std::abs(t(0) * std::conj(t(3)));
    rho(0, 3) = 0.46 * aligned;
    rho(3, 0) = std::conj(rho(0, 3));
    const double direct = (t.adjoint() * rho * t)(0, 0).real();
    const double pop_even = (rho(0, 0) + rho(3, 3)).real();
    const double amplitude = 2 * std::abs(rho(0, 3));
    EXPECT_NEAR(direct, 0.94, 1e-15);
    EXPECT_NEAR(bell_fidelity_estimate(pop_even, amplitude, 0), direct, 1e-15);
    const double delta = spin::parity_phase(rho) - spin::parity_phase(t * t.adjoint());
    EXPECT_NEAR(delta, 0.0, 1e-12);
}

TEST(tomography, pipeline_closure) {
    const ToneSet ts = optimize_tones(2, 2 * kPi * 292);
    SimConfig cfg{GateScenario{ts, 0.0, 0.0, 0.1}};
    cfg.fock_truncation = 20;
    const EvolveResult r = evolve(cfg);
    const Matrix4c rho = r.state.internal_state();
    const PipelineResult p =
        run_fidelity_pipeline(rho, spin::ideal_target(SpinBasis::sigma_x_sum), paper_spam(), {}, 12345);
    EXPECT_NEAR(p.true_fidelity, 1.0, 1e-6);
    EXPECT_GT(p.estimate.standard_error, 0.0);
    EXPECT_LE(std::abs(p.estimate.fidelity - 1.0), 3 * p.estimate.standard_error);
}

TEST(tomography, pipeline_is_deterministic) {
    const Vector4c t = spin::ideal_target(SpinBasis::sigma_x_sum);
    const Matrix4c rho = 0.9 * t * t.adjoint() + 0.025 * Matrix4c::Identity();
    const PipelineResult a = run_fidelity_pipeline(rho, t, paper_spam(), {}, 77);
    const PipelineResult b = run_fidelity_pipeline(rho, t, paper_spam(), {}, 77);
    EXPECT_EQ(a.estimate.fidelity, b.estimate.fidelity);
    EXPECT_NEAR(a.true_fidelity, 0.925, 1e-12);
}
