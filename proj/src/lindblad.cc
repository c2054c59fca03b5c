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

#include "mtms/lindblad.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "mtms/csv.h"
#include "mtms/errors.h"

namespace mtms {

namespace {

using cd = std::complex<double>;
using Eigen::MatrixXcd;
constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr double kLeakThreshold = 1e-6;

}  // namespace

void SimConfig::validate() const {
    scenario.validate();
    if (fock_truncation != 0 && fock_truncation < 2) {
        throw DomainError("Fock truncation must be >= 2");
    }
    if (!(step_tolerance > 0 && step_tolerance <= 1e-3)) {
        throw DomainError("step tolerance must lie in (0, 1e-3]");
    }
    if (!std::isfinite(detuning_offset)) {
        throw DomainError("detuning offset must be finite");
    }
}

int default_fock_truncation(const GateScenario& scenario) {
    const double nbar = scenario.nbar;
    const double fmax = max_displacement(scenario.tones, scenario.detuning_error);
    const int margin = static_cast<int>(std::ceil(nbar + 10 * std::sqrt(nbar + 1) + 20 + 16 * fmax * fmax));
    // Hot states need more room than the margin: keep 99.9% of the thermal weight at least.
    int thermal = 2;
    if (nbar > 0) {
        thermal = std::max(thermal, static_cast<int>(std::ceil(std::log(1e-3) / std::log(nbar / (nbar + 1)))) + 1);
    }
    return std::max(margin, thermal);
}

int SimConfig::resolved_fock_truncation() const {
    return fock_truncation > 0 ? fock_truncation : default_fock_truncation(scenario);
}

JointState::JointState(MatrixXcd rho, int fock_truncation) : rho_(std::move(rho)), m_(fock_truncation) {
    if (m_ < 1 || rho_.rows() != 4 * m_ || rho_.cols() != 4 * m_) {
        throw DomainError("JointState dimension must be 4*M");
    }
}

Matrix4c JointState::internal_state() const {
    Matrix4c out;
    for (int p = 0; p < 4; ++p) {
        for (int q = 0; q < 4; ++q) {
            out(p, q) = rho_.block(p * m_, q * m_, m_, m_).diagonal().sum();
        }
    }
    return out;
}

Eigen::VectorXd JointState::motional_populations() const {
    Eigen::VectorXd pops = Eigen::VectorXd::Zero(m_);
    for (int s = 0; s < 4; ++s) {
        pops += rho_.block(s * m_, s * m_, m_, m_).diagonal().real();
    }
    return pops;
}

double JointState::hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

double JointState::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(rho_, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

MatrixXcd thermal_state(double nbar, int m) {
    if (m < 2) {
        throw DomainError("thermal_state needs at least two Fock levels");
    }
    if (!(nbar >= 0) || !std::isfinite(nbar)) {
        throw DomainError("nbar must be finite and >= 0");
    }
    const double ratio = nbar / (nbar + 1);
    const double held = 1 - std::pow(ratio, m);
    if (held < 0.999) {
        std::ostringstream msg;
        msg << "Fock truncation M=" << m << " holds only " << held << " of the thermal weight at nbar=" << nbar;
        throw TruncationError(msg.str());
    }
    MatrixXcd rho = MatrixXcd::Zero(m, m);
    double p = 1;
    double total = 0;
    for (int n = 0; n < m; ++n) {
        rho(n, n) = p;
        total += p;
        p *= ratio;
    }
    return rho / total;
}

Matrix4c sideband_coupling(const ToneSet& tones, SpinBasis basis, double delta_r, double delta_b, double t) {
    cd g_blue = 0;
    cd g_red = 0;
    const double delta = tones.delta();
    std::size_t j = 1;
    for (double c : tones.coeffs()) {
        g_blue += c * std::polar(1.0, (j * delta + delta_b) * t);
        g_red += c * std::polar(1.0, (j * delta + delta_r) * t);
        ++j;
    }
    const auto phases = spin::ion_phases(basis);
    Matrix4c a = Matrix4c::Zero();
    for (int ion = 0; ion < 2; ++ion) {
        const Matrix4c up = spin::raising(ion);
        a += std::polar(1.0, phases[ion]) * g_blue * up + std::polar(1.0, -phases[ion]) * g_red * up.adjoint();
    }
    return a;
}

MatrixXcd hamiltonian_at(const SimConfig& cfg, double t) {
    cfg.validate();
    const int m = cfg.resolved_fock_truncation();
    const double detuning = cfg.effective_detuning();
    const Matrix4c a = sideband_coupling(cfg.scenario.tones, cfg.basis, detuning, detuning, t);
    MatrixXcd lower = MatrixXcd::Zero(m, m);
    for (int n = 1; n < m; ++n) {
        lower(n - 1, n) = std::sqrt(double(n));
    }
    const MatrixXcd raise = lower.adjoint();
    const Matrix4c a_dag = a.adjoint();
    MatrixXcd h(4 * m, 4 * m);
    for (int p = 0; p < 4; ++p) {
        for (int q = 0; q < 4; ++q) {
            h.block(p * m, q * m, m, m) = a(p, q) * raise + a_dag(p, q) * lower;
        }
    }
    return cfg.scenario.tones.delta() * h;
}

namespace {

/// Right-hand side of the master equation in dimensionless time u = delta*t.
class MasterEquation {
   public:
    MasterEquation(const ToneSet& tones, SpinBasis basis, double delta_r, double delta_b, double gamma, int m)
        : tones_(tones), basis_(basis), delta_r_(delta_r), delta_b_(delta_b), gamma_(gamma), m_(m), dim_(4 * m) {
        sqrt_n_.resize(m);
        for (int n = 0; n < m; ++n) {
            sqrt_n_(n) = std::sqrt(double(n));
        }
        up_.resize(dim_, dim_);
        down_.resize(dim_, dim_);
        commutator_.resize(dim_, dim_);
    }

    void operator()(double u, const MatrixXcd& rho, MatrixXcd& out) {
        const Matrix4c a = sideband_coupling(tones_, basis_, delta_r_, delta_b_, u / tones_.delta());
        const int m = m_;
        const auto sq = sqrt_n_.segment(1, m - 1).asDiagonal();
        for (int r = 0; r < 4; ++r) {
            up_.row(r * m).setZero();
            up_.middleRows(r * m + 1, m - 1).noalias() = sq * rho.middleRows(r * m, m - 1);
            down_.middleRows(r * m, m - 1).noalias() = sq * rho.middleRows(r * m + 1, m - 1);
            down_.row(r * m + m - 1).setZero();
        }
        commutator_.setZero();
        for (int p = 0; p < 4; ++p) {
            for (int r = 0; r < 4; ++r) {
                const cd raise_coeff = a(p, r);
                const cd lower_coeff = std::conj(a(r, p));
                if (raise_coeff != cd(0)) {
                    commutator_.middleRows(p * m, m) += raise_coeff * up_.middleRows(r * m, m);
                }
                if (lower_coeff != cd(0)) {
                    commutator_.middleRows(p * m, m) += lower_coeff * down_.middleRows(r * m, m);
                }
            }
        }
        // -i [H, rho] with rho H = (H rho)^dagger for Hermitian rho.
        out.noalias() = commutator_.adjoint();
        out = cd(0, -1) * (commutator_ - out);
        if (gamma_ > 0) {
            add_heating(rho, out);
        }
    }

   private:
    // gamma (D[a] + D[a^dagger]) rho, truncated ladder operators throughout.
    void add_heating(const MatrixXcd& rho, MatrixXcd& out) const {
        const int m = m_;
        for (int j = 0; j < dim_; ++j) {
            const int fj = j % m;
            const double kj = fj < m - 1 ? fj + 1 : 0;
            for (int i = 0; i < dim_; ++i) {
                const int fi = i % m;
                const double ki = fi < m - 1 ? fi + 1 : 0;
                cd v = -0.5 * (fi + fj + ki + kj) * rho(i, j);
                if (fi + 1 < m && fj + 1 < m) {
                    v += sqrt_n_(fi + 1) * sqrt_n_(fj + 1) * rho(i + 1, j + 1);
                }
                if (fi > 0 && fj > 0) {
                    v += sqrt_n_(fi) * sqrt_n_(fj) * rho(i - 1, j - 1);
                }
                out(i, j) += gamma_ * v;
            }
        }
    }

    const ToneSet& tones_;
    SpinBasis basis_;
    double delta_r_;
    double delta_b_;
    double gamma_;
    int m_;
    int dim_;
    Eigen::VectorXcd sqrt_n_;
    MatrixXcd up_;
    MatrixXcd down_;
    MatrixXcd commutator_;
};

double top_fock_population(const MatrixXcd& rho, int m) {
    double leak = 0;
    for (int s = 0; s < 4; ++s) {
        for (int n = std::max(0, m - 2); n < m; ++n) {
            leak += rho(s * m + n, s * m + n).real();
        }
    }
    return leak;
}

struct IntegrationStats {
    long accepted = 0;
    long rejected = 0;
    double max_trace_error = 0;
    double leaked_population = 0;
};

// Dormand-Prince 5(4) with error control in the max norm.
IntegrationStats integrate_dopri(MasterEquation& rhs, MatrixXcd& rho, double u_end, double h_max, double rtol,
                                 int m) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    const auto dim = rho.rows();
    MatrixXcd k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), k5(dim, dim), k6(dim, dim), k7(dim, dim);
    MatrixXcd stage(dim, dim), next(dim, dim), err(dim, dim);

    IntegrationStats stats;
    double u = 0;
    double h = h_max;
    const double h_min = 1e-12 * u_end;
    rhs(u, rho, k1);
    while (u < u_end) {
        if (u + h > u_end) {
            h = u_end - u;
        }
        stage = rho + h * a21 * k1;
        rhs(u + c2 * h, stage, k2);
        stage = rho + h * (a31 * k1 + a32 * k2);
        rhs(u + c3 * h, stage, k3);
        stage = rho + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(u + c4 * h, stage, k4);
        stage = rho + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(u + c5 * h, stage, k5);
        stage = rho + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(u + h, stage, k6);
        next = rho + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(u + h, next, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double scale_floor = rtol;
        double err_norm = 0;
        for (Eigen::Index idx = 0; idx < err.size(); ++idx) {
            const double sc = scale_floor + rtol * std::max(std::abs(rho(idx)), std::abs(next(idx)));
            err_norm = std::max(err_norm, std::abs(err(idx)) / sc);
        }
        if (!std::isfinite(err_norm)) {
            throw NumericError("master equation integration produced non-finite values at u=" +
                               std::to_string(u));
        }
        if (err_norm <= 1.0) {
            u += h;
            rho.swap(next);
            k1.swap(k7);
            ++stats.accepted;
            stats.max_trace_error = std::max(stats.max_trace_error, std::abs(rho.trace() - cd(1)));
            stats.leaked_population = std::max(stats.leaked_population, top_fock_population(rho, m));
            const double grow = err_norm > 0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
            h = std::min(h_max, h * std::clamp(grow, 0.2, 5.0));
        } else {
            ++stats.rejected;
            h *= std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 1.0);
            if (h < h_min) {
                throw NumericError("master equation step size underflow at u=" + std::to_string(u));
            }
        }
    }
    return stats;
}

EvolveResult run_evolution(const SimConfig& cfg, double delta_r, double delta_b) {
    cfg.validate();
    const GateScenario& sc = cfg.scenario;
    const int m = cfg.resolved_fock_truncation();
    const MatrixXcd motion = thermal_state(sc.nbar, m);
    MatrixXcd rho = MatrixXcd::Zero(4 * m, 4 * m);
    rho.topLeftCorner(m, m) = motion;

    const double delta = sc.tones.delta();
    MasterEquation rhs(sc.tones, cfg.basis, delta_r, delta_b, sc.heating_rate / delta, m);
    const double h_max = kTwoPi / (200.0 * double(sc.tones.n_tones()));
    const IntegrationStats stats = integrate_dopri(rhs, rho, kTwoPi, h_max, cfg.step_tolerance, m);

    JointState state(std::move(rho), m);
    const Matrix4c internal = state.internal_state();
    const Vector4c target = spin::ideal_target(cfg.basis);

    FidelityReport report;
    report.fidelity = std::clamp(target.dot(internal * target).real(), 0.0, 1.0);
    report.leaked_population = stats.leaked_population;
    report.truncation_converged = stats.leaked_population <= kLeakThreshold;
    report.max_trace_error = stats.max_trace_error;
    report.hermiticity_error = state.hermiticity_error();
    report.population_even = internal(0, 0).real() + internal(3, 3).real();
    const cd coherence = spin::bell_coherence(internal);
    const cd target_coherence = target(0) * std::conj(target(3));
    report.parity_amplitude = 2 * std::abs(coherence);
    report.bell_phase_shift = std::arg(coherence * std::conj(target_coherence));
    report.fidelity_free_phase = std::clamp(0.5 * report.population_even + std::abs(coherence), 0.0, 1.0);
    report.fock_truncation = m;
    report.accepted_steps = stats.accepted;
    report.rejected_steps = stats.rejected;
    return {std::move(state), report};
}

}  // namespace

EvolveResult evolve(const SimConfig& cfg) {
    const double detuning = cfg.effective_detuning();
    return run_evolution(cfg, detuning, detuning);
}

EvolveResult asymmetric_detuning_evolve(const SimConfig& cfg, double delta_r, double delta_b) {
    if (!std::isfinite(delta_r) || !std::isfinite(delta_b)) {
        throw DomainError("sideband detuning errors must be finite");
    }
    return run_evolution(cfg, delta_r + cfg.detuning_offset, delta_b + cfg.detuning_offset);
}

std::vector<SweepRow> sweep(std::span<const SimConfig> grid, int threads, const SweepProgress& progress) {
    if (grid.empty()) {
        throw DomainError("sweep grid is empty");
    }
    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (const auto& cfg : grid) {
        rows.push_back({cfg, std::nullopt, {}});
    }
    std::size_t workers = threads > 0 ? std::size_t(threads) : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, grid.size());

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                rows[i].report = evolve(grid[i]).report;
            } catch (const std::exception& e) {
                rows[i].error = e.what();
            }
            const std::size_t finished = ++done;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(finished, grid.size());
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    CsvWriter csv(out, {"n_tones", "delta_rad_per_s", "detuning_error_rad_per_s", "detuning_ratio",
                        "detuning_offset_rad_per_s", "heating_rate", "nbar", "fock_truncation", "basis",
                        "fidelity", "fidelity_free_phase", "bell_phase_shift", "truncation_converged",
                        "leaked_population", "error"});
    for (const auto& row : rows) {
        const auto& cfg = row.config;
        const auto& sc = cfg.scenario;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const bool ok = row.report.has_value();
        std::string error = row.error;
        std::replace(error.begin(), error.end(), ',', ';');
        std::replace(error.begin(), error.end(), '\n', ' ');
        csv.row({std::int64_t(sc.tones.n_tones()), sc.tones.delta(), sc.detuning_error, sc.detuning_ratio(),
                 cfg.detuning_offset, sc.heating_rate, sc.nbar,
                 std::int64_t(ok ? row.report->fock_truncation : cfg.fock_truncation),
                 std::string(to_string(cfg.basis)), ok ? row.report->fidelity : nan,
                 ok ? row.report->fidelity_free_phase : nan, ok ? row.report->bell_phase_shift : nan,
                 std::int64_t(ok && row.report->truncation_converged), ok ? row.report->leaked_population : nan,
                 error});
    }
}

}  // namespace mtms
