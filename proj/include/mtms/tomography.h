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


#ifndef MTMS_TOMOGRAPHY_H
#define MTMS_TOMOGRAPHY_H

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mtms/spin.h"

namespace mtms {

/// Probabilities of observing 0, 1 and 2 bright ions.
using Triple = std::array<double, 3>;

/// P(observed | true) over bright-ion counts. Rows index the observed count, columns the true count.
class SpamMap {
   public:
    SpamMap() : p_(Eigen::Matrix3d::Identity()) {}
    explicit SpamMap(const Eigen::Matrix3d& p_obs_given_true);

    static SpamMap identity() { return SpamMap(); }
    /// Each ion is misread independently with probability epsilon.
    static SpamMap symmetric(double epsilon);
    /// Symmetric map whose diagonal for 0 or 2 bright ions is (1-epsilon)^2 = combined_fidelity.
    static SpamMap from_combined_fidelity(double combined_fidelity);

    const Eigen::Matrix3d& matrix() const { return p_; }
    double operator()(int observed, int truth) const { return p_(observed, truth); }
    /// P(observe odd | true odd) and P(observe odd | true even), the latter averaged over 0 and 2.
    double odd_given_odd() const { return p_(1, 1); }
    double odd_given_even() const { return 0.5 * (p_(1, 0) + p_(1, 2)); }

   private:
    Eigen::Matrix3d p_;
};

/// Misidentification probability per ion for the default synthetic map, combined fidelity 0.87.
double default_spam_epsilon();

struct CountsRecord {
    std::int64_t x0 = 0;
    std::int64_t x1 = 0;
    std::int64_t x2 = 0;

    std::int64_t n() const { return x0 + x1 + x2; }
    void validate() const;
};

Triple apply_spam(const Triple& p_true, const SpamMap& spam);

CountsRecord sample_counts(const Triple& p_obs, std::int64_t n_shots, std::uint64_t seed);
CountsRecord sample_counts(const Triple& p_obs, std::int64_t n_shots, std::mt19937_64& rng);

struct PopulationEstimate {
    double p0 = 0;
    double p1 = 0;
    double p2 = 0;
    /// Observed-information standard errors. NaN when the information matrix is singular.
    double se_p1 = 0;
    double se_p2 = 0;
    double log_likelihood = 0;
    bool on_boundary = false;

    double population_even() const { return p0 + p2; }
    /// p0 + p2 = 1 - p1, so its error equals that of p1.
    double se_population_even() const { return se_p1; }
};

/// Full multinomial log-likelihood including the combinatorial constant.
double populations_log_likelihood(const CountsRecord& counts, const SpamMap& spam, double p1, double p2);

PopulationEstimate mle_populations(const CountsRecord& counts, const SpamMap& spam);

struct ParityPoint {
    double phi = 0;
    CountsRecord counts;
};

struct ParityDataset {
    std::vector<ParityPoint> points;
    SpamMap spam;

    /// At least four distinct phases spanning pi, every record non-empty.
    void validate() const;
};

struct ParityFit {
    /// Pi(phi) = amplitude * cos(2 phi + phase), amplitude >= 0.
    double amplitude = 0;
    double phase = 0;
    double se_amplitude = 0;
    double se_phase = 0;
    double log_likelihood = 0;
    bool on_boundary = false;
};

double parity_log_likelihood(const ParityDataset& ds, double amplitude, double phase);

ParityFit mle_parity_fit(const ParityDataset& ds);

/// pop_even/2 + |A cos(delta_phi)|/2
double bell_fidelity_estimate(double pop_even, double parity_amplitude, double delta_phi);

/// Evenly spaced analysis phases 2 pi k / n.
std::vector<double> analysis_phases(int n_phases);

/// Counts after an analysis pulse at each phase, drawn from one generator seeded once.
ParityDataset generate_parity_dataset(const Matrix4c& rho, const SpamMap& spam, int n_phases,
                                      std::int64_t shots_per_phase, std::uint64_t seed);

/// Dataset from the parametric model Pi = A cos(2 phi + phi0) with the even population split equally.
/// With `noiseless`, counts are the rounded expectations instead of samples.
ParityDataset generate_model_dataset(double amplitude, double phase, const SpamMap& spam, int n_phases,
                                     std::int64_t shots_per_phase, std::uint64_t seed, bool noiseless = false);

void write_parity_csv(std::ostream& out, const ParityDataset& ds);
/// Reads phi_rad, x0, x1, x2 columns. The SPAM map is left as identity.
ParityDataset read_parity_csv(std::istream& in);

struct PipelineSettings {
    std::int64_t population_shots = 10000;
    int n_phases = 12;
    std::int64_t shots_per_phase = 1000;
};

struct FidelityEstimate {
    double fidelity = 0;
    double standard_error = 0;
    double population_even = 0;
    double se_population_even = 0;
    ParityFit parity;
    /// Fitted phase minus the target's parity phase, wrapped to (-pi, pi].
    double delta_phi = 0;
};

/// Standard error of bell_fidelity_estimate propagated from the population and parity fits.
FidelityEstimate combine_fidelity_estimate(const PopulationEstimate& pops, const ParityFit& fit,
                                           double reference_phase);

struct PipelineResult {
    double true_fidelity = 0;
    PopulationEstimate populations;
    FidelityEstimate estimate;
};

/// State -> SPAM -> sampled counts -> MLE -> parity fit -> fidelity, against `target`.
PipelineResult run_fidelity_pipeline(const Matrix4c& rho, const Vector4c& target, const SpamMap& spam,
                                     const PipelineSettings& settings, std::uint64_t seed);

}  // namespace mtms

#endif
