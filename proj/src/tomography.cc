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

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mtms/csv.h"
#include "mtms/errors.h"

namespace mtms {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// x log p with the 0 log 0 = 0 convention.
double xlogp(double x, double p) {
    if (x == 0) {
        return 0;
    }
    return p > 0 ? x * std::log(p) : -std::numeric_limits<double>::infinity();
}

double log_multinomial(std::int64_t n, std::initializer_list<std::int64_t> xs) {
    double out = std::lgamma(double(n) + 1);
    for (auto x : xs) {
        out -= std::lgamma(double(x) + 1);
    }
    return out;
}

void check_triple(const Triple& p, const char* what) {
    double total = 0;
    for (double v : p) {
        if (!std::isfinite(v) || v < -1e-15 || v > 1 + 1e-15) {
            throw DomainError(std::string(what) + ": probabilities must lie in [0, 1]");
        }
        total += v;
    }
    if (std::abs(total - 1) > 1e-12) {
        std::ostringstream msg;
        msg << what << ": probabilities sum to " << total << ", not 1";
        throw DomainError(msg.str());
    }
}

Eigen::Vector3d observed_probabilities(const SpamMap& spam, double p1, double p2) {
    return spam.matrix() * Eigen::Vector3d(1 - p1 - p2, p1, p2);
}

}  // namespace

SpamMap::SpamMap(const Eigen::Matrix3d& p_obs_given_true) : p_(p_obs_given_true) {
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) {
            if (!std::isfinite(p_(i, j)) || p_(i, j) < 0 || p_(i, j) > 1) {
                throw DomainError("SPAM map entries must lie in [0, 1]");
            }
        }
        if (std::abs(p_.col(j).sum() - 1) > 1e-12) {
            throw DomainError("SPAM map column " + std::to_string(j) + " does not sum to 1");
        }
    }
}

SpamMap SpamMap::symmetric(double epsilon) {
    if (!(epsilon >= 0 && epsilon <= 1)) {
        throw DomainError("per-ion misidentification probability must lie in [0, 1]");
    }
    const double e = epsilon;
    const double k = 1 - e;
    Eigen::Matrix3d p;
    p << k * k, e * k, e * e,
         2 * e * k, k * k + e * e, 2 * e * k,
         e * e, e * k, k * k;
    return SpamMap(p);
}

SpamMap SpamMap::from_combined_fidelity(double combined_fidelity) {
    if (!(combined_fidelity > 0 && combined_fidelity <= 1)) {
        throw DomainError("combined detection fidelity must lie in (0, 1]");
    }
    return symmetric(1 - std::sqrt(combined_fidelity));
}

double default_spam_epsilon() { return 1 - std::sqrt(0.87); }

void CountsRecord::validate() const {
    if (x0 < 0 || x1 < 0 || x2 < 0) {
        throw DomainError("counts must be non-negative");
    }
    if (n() < 1) {
        throw DomainError("counts record is empty");
    }
}

Triple apply_spam(const Triple& p_true, const SpamMap& spam) {
    check_triple(p_true, "apply_spam");
    const Eigen::Vector3d out = spam.matrix() * Eigen::Vector3d(p_true[0], p_true[1], p_true[2]);
    Triple result{};
    double total = 0;
    for (int i = 0; i < 3; ++i) {
        result[i] = std::clamp(out(i), 0.0, 1.0);
        total += result[i];
    }
    for (double& v : result) {
        v /= total;
    }
    return result;
}

CountsRecord sample_counts(const Triple& p_obs, std::int64_t n_shots, std::mt19937_64& rng) {
    check_triple(p_obs, "sample_counts");
    if (n_shots < 1) {
        throw DomainError("n_shots must be >= 1");
    }
    CountsRecord out;
    out.x0 = std::binomial_distribution<std::int64_t>(n_shots, std::clamp(p_obs[0], 0.0, 1.0))(rng);
    const std::int64_t rest = n_shots - out.x0;
    const double p12 = std::max(0.0, p_obs[1]) + std::max(0.0, p_obs[2]);
    if (rest > 0 && p12 > 0) {
        const double split = std::clamp(std::max(0.0, p_obs[1]) / p12, 0.0, 1.0);
        out.x1 = std::binomial_distribution<std::int64_t>(rest, split)(rng);
    }
    out.x2 = rest - out.x1;
    return out;
}

CountsRecord sample_counts(const Triple& p_obs, std::int64_t n_shots, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_counts(p_obs, n_shots, rng);
}

double populations_log_likelihood(const CountsRecord& counts, const SpamMap& spam, double p1, double p2) {
    const Eigen::Vector3d q = observed_probabilities(spam, p1, p2);
    return log_multinomial(counts.n(), {counts.x0, counts.x1, counts.x2}) + xlogp(double(counts.x0), q(0)) +
           xlogp(double(counts.x1), q(1)) + xlogp(double(counts.x2), q(2));
}

PopulationEstimate mle_populations(const CountsRecord& counts, const SpamMap& spam) {
    counts.validate();
    const Eigen::Matrix3d& p = spam.matrix();
    if (std::abs(p.determinant()) < 1e-12) {
        throw DomainError("SPAM map is singular; populations are not identifiable");
    }
    const double n = double(counts.n());
    const Eigen::Vector3d x(double(counts.x0), double(counts.x1), double(counts.x2));

    Eigen::Vector3d best;
    bool boundary = false;
    const Eigen::Vector3d inverted = p.partialPivLu().solve(x / n);
    if (inverted.minCoeff() >= -1e-12) {
        // The empirical frequencies are attainable, so they are the maximum.
        best = inverted.cwiseMax(0.0);
        best /= best.sum();
        boundary = best.minCoeff() <= 0;
    } else {
        // Log-concave likelihood with an exterior unconstrained optimum: search the three edges.
        boundary = true;
        const std::array<Eigen::Vector3d, 3> corners{Eigen::Vector3d::Unit(0), Eigen::Vector3d::Unit(1),
                                                     Eigen::Vector3d::Unit(2)};
        auto loglik = [&](const Eigen::Vector3d& q) {
            const Eigen::Vector3d obs = p * q;
            return xlogp(x(0), obs(0)) + xlogp(x(1), obs(1)) + xlogp(x(2), obs(2));
        };
        double best_ll = -std::numeric_limits<double>::infinity();
        best = corners[0];
        for (int e = 0; e < 3; ++e) {
            const Eigen::Vector3d& a = corners[e];
            const Eigen::Vector3d& b = corners[(e + 1) % 3];
            const Eigen::Vector3d slope = p * (b - a);
            auto derivative = [&](double t) {
                const Eigen::Vector3d obs = p * (a + t * (b - a));
                double d = 0;
                for (int i = 0; i < 3; ++i) {
                    if (x(i) > 0) {
                        d += x(i) * slope(i) / obs(i);
                    }
                }
                return d;
            };
            double lo = 0;
            double hi = 1;
            for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
                const double mid = 0.5 * (lo + hi);
                (derivative(mid) > 0 ? lo : hi) = mid;
            }
            for (double t : {0.0, 0.5 * (lo + hi), 1.0}) {
                const Eigen::Vector3d q = a + t * (b - a);
                const double ll = loglik(q);
                if (ll > best_ll) {
                    best_ll = ll;
                    best = q;
                }
            }
        }
        if (!std::isfinite(best_ll)) {
            throw NumericError("population likelihood is -inf on the whole simplex boundary");
        }
    }

    PopulationEstimate out;
    out.p0 = best(0);
    out.p1 = best(1);
    out.p2 = best(2);
    out.on_boundary = boundary;
    out.log_likelihood = populations_log_likelihood(counts, spam, out.p1, out.p2);

    const Eigen::Vector3d d1 = p.col(1) - p.col(0);
    const Eigen::Vector3d d2 = p.col(2) - p.col(0);
    const Eigen::Vector3d obs = p * best;
    Eigen::Matrix2d info = Eigen::Matrix2d::Zero();
    for (int i = 0; i < 3; ++i) {
        if (x(i) > 0 && obs(i) > 0) {
            const Eigen::Vector2d g(d1(i), d2(i));
            info += x(i) / (obs(i) * obs(i)) * g * g.transpose();
        }
    }
    if (std::abs(info.determinant()) > 1e-12 * std::max(1.0, info.squaredNorm())) {
        const Eigen::Matrix2d cov = info.inverse();
        out.se_p1 = std::sqrt(std::max(0.0, cov(0, 0)));
        out.se_p2 = std::sqrt(std::max(0.0, cov(1, 1)));
    } else {
        out.se_p1 = kNaN;
        out.se_p2 = kNaN;
    }
    return out;
}

void ParityDataset::validate() const {
    std::vector<double> phases;
    for (const auto& pt : points) {
        if (!std::isfinite(pt.phi)) {
            throw DomainError("parity dataset phase is not finite");
        }
        pt.counts.validate();
        phases.push_back(pt.phi);
    }
    std::sort(phases.begin(), phases.end());
    const auto distinct = std::unique(phases.begin(), phases.end(),
                                      [](double a, double b) { return std::abs(a - b) < 1e-12; }) -
                          phases.begin();
    if (distinct < 4) {
        throw DomainError("parity dataset needs at least 4 distinct phases, got " + std::to_string(distinct));
    }
    if (phases.back() - phases.front() < kPi - 1e-12) {
        throw DomainError("parity dataset phases must span at least pi");
    }
}

namespace {

struct ParityModel {
    // p'_odd = alpha + beta * (u c_k + v s_k)
    double alpha;
    double beta;
    std::vector<double> c;
    std::vector<double> s;
    std::vector<double> odd;
    std::vector<double> total;
    double constant = 0;

    explicit ParityModel(const ParityDataset& ds) {
        const double r1 = ds.spam.odd_given_odd();
        const double r0 = ds.spam.odd_given_even();
        alpha = 0.5 * (r0 + r1);
        beta = -0.5 * (r1 - r0);
        if (std::abs(beta) < 1e-12) {
            throw DomainError("SPAM map erases the parity signal (P(odd|odd) == P(odd|even))");
        }
        for (const auto& pt : ds.points) {
            c.push_back(std::cos(2 * pt.phi));
            s.push_back(-std::sin(2 * pt.phi));
            const std::int64_t n = pt.counts.n();
            odd.push_back(double(pt.counts.x1));
            total.push_back(double(n));
            constant += log_multinomial(n, {pt.counts.x1, n - pt.counts.x1});
        }
    }

    double prob(std::size_t k, double u, double v) const {
        return std::clamp(alpha + beta * (u * c[k] + v * s[k]), 0.0, 1.0);
    }

    double loglik(double u, double v) const {
        double ll = constant;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double q = prob(k, u, v);
            ll += xlogp(odd[k], q) + xlogp(total[k] - odd[k], 1 - q);
        }
        return ll;
    }

    void derivatives(double u, double v, Eigen::Vector2d& grad, Eigen::Matrix2d& neg_hess) const {
        grad.setZero();
        neg_hess.setZero();
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double q = prob(k, u, v);
            const double x = odd[k];
            const double y = total[k] - odd[k];
            const Eigen::Vector2d d(beta * c[k], beta * s[k]);
            double g = 0;
            double h = 0;
            if (x > 0) {
                g += x / q;
                h += x / (q * q);
            }
            if (y > 0) {
                g -= y / (1 - q);
                h += y / ((1 - q) * (1 - q));
            }
            grad += g * d;
            neg_hess += h * d * d.transpose();
        }
    }
};

}  // namespace

double parity_log_likelihood(const ParityDataset& ds, double amplitude, double phase) {
    const ParityModel model(ds);
    return model.loglik(amplitude * std::cos(phase), amplitude * std::sin(phase));
}

ParityFit mle_parity_fit(const ParityDataset& ds) {
    ds.validate();
    const ParityModel model(ds);

    // Damped Newton inside the unit disk.
    double u = 0;
    double v = 0;
    double ll = model.loglik(u, v);
    bool interior_converged = false;
    for (int it = 0; it < 200; ++it) {
        Eigen::Vector2d grad;
        Eigen::Matrix2d neg_hess;
        model.derivatives(u, v, grad, neg_hess);
        const Eigen::Vector2d step = neg_hess.ldlt().solve(grad);
        if (!step.allFinite()) {
            break;
        }
        if (grad.dot(step) < 1e-20) {
            interior_converged = true;
            break;
        }
        double t = 1;
        bool moved = false;
        for (int k = 0; k < 60; ++k, t *= 0.5) {
            const double nu = u + t * step(0);
            const double nv = v + t * step(1);
            if (nu * nu + nv * nv >= 1) {
                continue;
            }
            const double nll = model.loglik(nu, nv);
            if (nll >= ll) {
                moved = nll > ll || t == 1;
                u = nu;
                v = nv;
                ll = nll;
                break;
            }
        }
        if (!moved) {
            break;
        }
    }

    // Concavity puts the optimum on the circle whenever the interior search stalls there.
    constexpr int kGrid = 2880;
    const double h = 2 * kPi / kGrid;
    auto on_circle = [&](double theta) { return model.loglik(std::cos(theta), std::sin(theta)); };
    int best_k = 0;
    double best_circle = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < kGrid; ++k) {
        const double val = on_circle(k * h);
        if (val > best_circle) {
            best_circle = val;
            best_k = k;
        }
    }
    double lo = best_k * h - h;
    double hi = best_k * h + h;
    const double golden = 0.5 * (std::sqrt(5.0) - 1);
    double a = hi - golden * (hi - lo);
    double b = lo + golden * (hi - lo);
    double fa = on_circle(a);
    double fb = on_circle(b);
    while (hi - lo > 1e-12) {
        if (fa >= fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - golden * (hi - lo);
            fa = on_circle(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + golden * (hi - lo);
            fb = on_circle(b);
        }
    }
    const double theta = 0.5 * (lo + hi);
    const double circle_ll = std::max(on_circle(theta), best_circle);

    ParityFit fit;
    if (circle_ll > ll || (!interior_converged && circle_ll >= ll)) {
        const double th = on_circle(theta) >= best_circle ? theta : best_k * h;
        u = std::cos(th);
        v = std::sin(th);
        ll = circle_ll;
        fit.on_boundary = true;
    }
    if (!std::isfinite(ll)) {
        throw NumericError("parity fit failed: likelihood is not finite at the optimum");
    }

    fit.amplitude = std::hypot(u, v);
    fit.phase = std::atan2(v, u);
    fit.log_likelihood = ll;

    Eigen::Vector2d grad;
    Eigen::Matrix2d neg_hess;
    model.derivatives(u, v, grad, neg_hess);
    const Eigen::Matrix2d cov = neg_hess.inverse();
    if (!cov.allFinite()) {
        fit.se_amplitude = kNaN;
        fit.se_phase = kNaN;
    } else if (fit.amplitude > 1e-12) {
        const Eigen::Vector2d da(u / fit.amplitude, v / fit.amplitude);
        const Eigen::Vector2d dp(-v / (fit.amplitude * fit.amplitude), u / (fit.amplitude * fit.amplitude));
        fit.se_amplitude = std::sqrt(std::max(0.0, da.dot(cov * da)));
        fit.se_phase = std::sqrt(std::max(0.0, dp.dot(cov * dp)));
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
        fit.se_amplitude = std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
        fit.se_phase = kPi;
    }
    return fit;
}

double bell_fidelity_estimate(double pop_even, double parity_amplitude, double delta_phi) {
    if (!(pop_even >= 0 && pop_even <= 1)) {
        throw DomainError("even population must lie in [0, 1]");
    }
    if (!(std::abs(parity_amplitude) <= 1)) {
        throw DomainError("parity amplitude must satisfy |A| <= 1");
    }
    if (!std::isfinite(delta_phi)) {
        throw DomainError("phase offset must be finite");
    }
    return 0.5 * pop_even + 0.5 * std::abs(parity_amplitude * std::cos(delta_phi));
}

std::vector<double> analysis_phases(int n_phases) {
    if (n_phases < 4) {
        throw DomainError("at least 4 analysis phases are required");
    }
    std::vector<double> out(n_phases);
    for (int k = 0; k < n_phases; ++k) {
        out[k] = 2 * kPi * k / n_phases;
    }
    return out;
}

namespace {

Triple true_counts(const Matrix4c& rho) {
    Triple p = spin::bright_count_probabilities(rho);
    double total = 0;
    for (double& x : p) {
        x = std::max(0.0, x);
        total += x;
    }
    for (double& x : p) {
        x /= total;
    }
    return p;
}

Triple true_counts_after_pulse(const Matrix4c& rho, double phi) {
    const Matrix4c r = spin::analysis_pulse(phi);
    return true_counts(r * rho * r.adjoint());
}

ParityDataset sample_dataset(const Matrix4c& rho, const SpamMap& spam, int n_phases, std::int64_t shots,
                             std::mt19937_64& rng) {
    ParityDataset ds;
    ds.spam = spam;
    for (double phi : analysis_phases(n_phases)) {
        const Triple obs = apply_spam(true_counts_after_pulse(rho, phi), spam);
        ds.points.push_back({phi, sample_counts(obs, shots, rng)});
    }
    return ds;
}

}  // namespace

ParityDataset generate_parity_dataset(const Matrix4c& rho, const SpamMap& spam, int n_phases,
                                      std::int64_t shots_per_phase, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_dataset(rho, spam, n_phases, shots_per_phase, rng);
}

ParityDataset generate_model_dataset(double amplitude, double phase, const SpamMap& spam, int n_phases,
                                     std::int64_t shots_per_phase, std::uint64_t seed, bool noiseless) {
    if (!(std::abs(amplitude) <= 1) || !std::isfinite(phase)) {
        throw DomainError("model amplitude must satisfy |A| <= 1 with a finite phase");
    }
    if (shots_per_phase < 1) {
        throw DomainError("shots per phase must be >= 1");
    }
    std::mt19937_64 rng(seed);
    ParityDataset ds;
    ds.spam = spam;
    for (double phi : analysis_phases(n_phases)) {
        const double parity = amplitude * std::cos(2 * phi + phase);
        const double odd = std::clamp(0.5 * (1 - parity), 0.0, 1.0);
        const double even = 1 - odd;
        const Triple obs = apply_spam({0.5 * even, odd, 0.5 * even}, spam);
        CountsRecord counts;
        if (noiseless) {
            const double n = double(shots_per_phase);
            // Round the odd count first; the parity fit sees only odd versus even.
            counts.x1 = std::clamp<std::int64_t>(std::llround(n * obs[1]), 0, shots_per_phase);
            const std::int64_t rest = shots_per_phase - counts.x1;
            const double even = obs[0] + obs[2];
            counts.x0 = even > 0 ? std::clamp<std::int64_t>(std::llround(rest * obs[0] / even), 0, rest) : 0;
            counts.x2 = rest - counts.x0;
        } else {
            counts = sample_counts(obs, shots_per_phase, rng);
        }
        ds.points.push_back({phi, counts});
    }
    return ds;
}

void write_parity_csv(std::ostream& out, const ParityDataset& ds) {
    CsvWriter csv(out, {"phi_rad", "x0", "x1", "x2"});
    for (const auto& pt : ds.points) {
        csv.row(std::vector<CsvCell>{pt.phi, pt.counts.x0, pt.counts.x1, pt.counts.x2});
    }
}

ParityDataset read_parity_csv(std::istream& in) {
    const CsvTable table = read_csv(in);
    const std::size_t c_phi = table.column("phi_rad");
    const std::size_t c0 = table.column("x0");
    const std::size_t c1 = table.column("x1");
    const std::size_t c2 = table.column("x2");
    ParityDataset ds;
    for (const auto& row : table.rows) {
        ParityPoint pt;
        pt.phi = parse_double(row.at(c_phi));
        pt.counts = {parse_int(row.at(c0)), parse_int(row.at(c1)), parse_int(row.at(c2))};
        ds.points.push_back(pt);
    }
    return ds;
}

FidelityEstimate combine_fidelity_estimate(const PopulationEstimate& pops, const ParityFit& fit,
                                           double reference_phase) {
    FidelityEstimate est;
    est.parity = fit;
    est.population_even = std::clamp(pops.population_even(), 0.0, 1.0);
    est.se_population_even = pops.se_population_even();
    est.delta_phi = std::remainder(fit.phase - reference_phase, 2 * kPi);
    const double amplitude = std::min(1.0, fit.amplitude);
    est.fidelity = bell_fidelity_estimate(est.population_even, amplitude, est.delta_phi);
    const double ca = std::cos(est.delta_phi) * fit.se_amplitude;
    const double cp = amplitude * std::sin(est.delta_phi) * fit.se_phase;
    est.standard_error =
        0.5 * std::sqrt(est.se_population_even * est.se_population_even + ca * ca + cp * cp);
    return est;
}

PipelineResult run_fidelity_pipeline(const Matrix4c& rho, const Vector4c& target, const SpamMap& spam,
                                     const PipelineSettings& settings, std::uint64_t seed) {
    if (settings.population_shots < 1 || settings.shots_per_phase < 1) {
        throw DomainError("pipeline shot counts must be >= 1");
    }
    std::mt19937_64 rng(seed);
    PipelineResult out;
    out.true_fidelity = target.dot(rho * target).real();

    const CountsRecord pop_counts = sample_counts(apply_spam(true_counts(rho), spam), settings.population_shots, rng);
    out.populations = mle_populations(pop_counts, spam);

    const ParityDataset ds = sample_dataset(rho, spam, settings.n_phases, settings.shots_per_phase, rng);
    const ParityFit fit = mle_parity_fit(ds);
    const Matrix4c target_rho = target * target.adjoint();
    out.estimate = combine_fidelity_estimate(out.populations, fit, spin::parity_phase(target_rho));
    return out;
}

}  // namespace mtms
