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

#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "commands.h"
#include "mtms/csv.h"
#include "mtms/dynamics.h"
#include "mtms/preset.h"

namespace mtms::cli {

namespace {

namespace fs = std::filesystem;

std::vector<double> linspace(double from, double to, int count) {
    std::vector<double> out(count);
    for (int k = 0; k < count; ++k) {
        out[k] = count == 1 ? from : from + (to - from) * k / (count - 1);
    }
    return out;
}

class FigureWriter {
   public:
    FigureWriter(std::string dir, std::string tag, std::ostream& err) : dir_(std::move(dir)), tag_(std::move(tag)), err_(err) {
        fs::create_directories(dir_);
    }

    template <class Fn>
    void file(const std::string& name, Fn&& fill) {
        AtomicOutput output(fs::path(dir_) / name);
        fill(output.stream());
        output.commit();
        err_ << "[" << tag_ << "] wrote " << (fs::path(dir_) / name).string() << "\n";
    }

    void sweep_file(const std::string& name, const std::vector<SimConfig>& grid, int threads) {
        file(name, [&](std::ostream& os) {
            const auto rows = sweep(grid, threads, [&](std::size_t done, std::size_t total) {
                err_ << "[" << tag_ << "] " << name << " " << done << "/" << total << "\n";
            });
            write_sweep_csv(os, rows);
        });
    }

   private:
    std::string dir_;
    std::string tag_;
    std::ostream& err_;
};

void trajectories(FigureWriter& w, const std::string& prefix, double ratio, int samples) {
    for (int n = 1; n <= 3; ++n) {
        const GateScenario sc{optimize_tones(n, paper::delta_rad_per_s), ratio * paper::delta_rad_per_s};
        w.file(prefix + "_n" + std::to_string(n) + ".csv",
               [&](std::ostream& os) { write_trajectory_csv(os, trajectory(sc, samples)); });
    }
}

void closure_summary(FigureWriter& w, double ratio) {
    w.file("fig1c_closure.csv", [&](std::ostream& os) {
        CsvWriter csv(os, {"n_tones", "detuning_ratio", "abs_F_tau", "closure_ratio_vs_single_tone"});
        const ToneSet single = single_tone(paper::delta_rad_per_s);
        for (int n = 1; n <= 3; ++n) {
            const ToneSet ts = optimize_tones(n, paper::delta_rad_per_s);
            const double f = std::abs(displacement_f_big(ts, ratio * ts.delta(), ts.gate_time()));
            const auto r = loop_closure_ratio(single, ts, ratio);
            csv.row(std::vector<CsvCell>{std::int64_t(n), ratio, f,
                                         r ? *r : std::numeric_limits<double>::infinity()});
        }
    });
}

SimConfig point(const ToneSet& ts, double detuning, double heating, double nbar) {
    return SimConfig{GateScenario{ts, detuning, heating, nbar}};
}

void heating_figure(FigureWriter& w, int points, int threads) {
    const double delta = paper::delta_rad_per_s;
    const ToneSet one = optimize_tones(1, delta);
    const ToneSet two = optimize_tones(2, delta);
    // Single tone driven at the two-tone peak Rabi frequency closes its loop faster.
    const ToneSet fast = single_tone(peak_drive_ratio(two) * delta);
    const auto rates = linspace(0, paper::max_heating_rate, points);
    const double nbar = paper::nbar_cooled;

    std::vector<SimConfig> g1, g2, g3;
    for (double r : rates) {
        g1.push_back(point(one, 0, r, nbar));
        g2.push_back(point(two, 0, r, nbar));
        g3.push_back(point(fast, 0, r, nbar));
    }
    w.sweep_file("fig2_single_tone.csv", g1, threads);
    w.sweep_file("fig2_two_tone.csv", g2, threads);
    w.sweep_file("fig2_fast_single_tone.csv", g3, threads);
    w.file("fig2_closed_form.csv", [&](std::ostream& os) {
        CsvWriter csv(os, {"heating_rate", "single_tone", "two_tone", "fast_single_tone", "fast_delta_rad_per_s"});
        for (double r : rates) {
            csv.row({r, fidelity_heating(one, r), fidelity_heating(two, r), fidelity_heating(fast, r), fast.delta()});
        }
    });
}

void detuning_figure(FigureWriter& w, int points, int threads) {
    const double delta = paper::delta_rad_per_s;
    const ToneSet one = optimize_tones(1, delta);
    const ToneSet two = optimize_tones(2, delta);
    const auto ratios = linspace(-paper::max_detuning_ratio, paper::max_detuning_ratio, points);
    const double nbar = paper::nbar_cooled;

    std::vector<SimConfig> g1, g2;
    for (double x : ratios) {
        g1.push_back(point(one, x * delta, 0, nbar));
        g2.push_back(point(two, x * delta, 0, nbar));
    }
    w.sweep_file("fig3_single_tone.csv", g1, threads);
    w.sweep_file("fig3_two_tone.csv", g2, threads);
    w.file("fig3_closed_form.csv", [&](std::ostream& os) {
        CsvWriter csv(os, {"detuning_ratio", "single_tone", "two_tone"});
        for (double x : ratios) {
            csv.row({x, fidelity_detuning(GateScenario{one, x * delta, 0, nbar}),
                     fidelity_detuning(GateScenario{two, x * delta, 0, nbar})});
        }
    });
}

void hot_parity_figure(FigureWriter& w, int points, double ratio) {
    const double delta = paper::delta_rad_per_s;
    const auto phases = linspace(0, std::numbers::pi, points);
    std::vector<std::pair<int, Matrix4c>> states;
    for (int n : {1, 2}) {
        const GateScenario sc{optimize_tones(n, delta), ratio * delta, 0, paper::nbar_doppler};
        states.emplace_back(n, closed_form_internal_state(sc));
        w.file(n == 1 ? "fig4_single_tone.csv" : "fig4_two_tone.csv", [&](std::ostream& os) {
            CsvWriter csv(os, {"phi_rad", "parity"});
            for (double phi : phases) {
                csv.row({phi, spin::parity_after_pulse(states.back().second, phi)});
            }
        });
    }
    w.file("fig4_summary.csv", [&](std::ostream& os) {
        CsvWriter csv(os, {"n_tones", "nbar", "detuning_ratio", "fidelity", "population_even", "parity_amplitude"});
        const Vector4c target = spin::ideal_target(SpinBasis::sigma_x_sum);
        for (const auto& [n, rho] : states) {
            csv.row(std::vector<CsvCell>{std::int64_t(n), paper::nbar_doppler, ratio,
                                         target.dot(rho * target).real(), rho(0, 0).real() + rho(3, 3).real(),
                                         2 * std::abs(spin::bell_coherence(rho))});
        }
    });
}

}  // namespace

void run_figure(const FigureOptions& opts, std::ostream& err) {
    FigureWriter w(opts.out_dir, opts.which, err);
    if (opts.which == "fig1b") {
        trajectories(w, "fig1b", 0.0, opts.points.value_or(401));
    } else if (opts.which == "fig1c") {
        const double ratio = 0.05;
        trajectories(w, "fig1c", ratio, opts.points.value_or(401));
        closure_summary(w, ratio);
    } else if (opts.which == "fig2") {
        heating_figure(w, opts.points.value_or(16), opts.threads);
    } else if (opts.which == "fig3") {
        detuning_figure(w, opts.points.value_or(21), opts.threads);
    } else if (opts.which == "fig4-analytic") {
        const double ratio = opts.detuning_ratio.value_or(0.03);
        if (!std::isfinite(ratio) || std::abs(ratio) > 0.5) {
            throw DomainError("fig4-analytic: |detuning ratio| must be <= 0.5");
        }
        hot_parity_figure(w, opts.points.value_or(181), ratio);
    } else {
        throw DomainError("unknown figure '" + opts.which + "'");
    }
}

}  // namespace mtms::cli
