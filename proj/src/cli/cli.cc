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

#include "mtms/cli.h"

#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "commands.h"
#include "mtms/csv.h"
#include "mtms/dynamics.h"
#include "mtms/preset.h"

namespace mtms::cli {

std::string dump_json(const json& value) { return value.dump(2) + "\n"; }

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
        return;
    }
    AtomicOutput file(out_path);
    file.stream() << text;
    file.commit();
}

namespace {

json tones_json(const ToneSet& ts) {
    const ConstraintResiduals res = constraint_residuals(ts);
    json j = {
        {"n_tones", ts.n_tones()},
        {"coeffs", std::vector<double>(ts.coeffs().begin(), ts.coeffs().end())},
        {"delta_rad_per_s", ts.delta()},
        {"gate_time_s", ts.gate_time()},
        {"residuals", {{"entangling", res.entangling}, {"closure", res.closure}}},
        {"heating_factor", effective_heating_factor(ts)},
        {"displacement_weight", displacement_weight(ts)},
    };
    j["multiplier"] = ts.n_tones() >= 2 ? json(smallest_multiplier_root(int(ts.n_tones()))) : json(nullptr);
    return j;
}

json scenario_json(const SimulateRequest& req) {
    const SimConfig& cfg = req.config;
    const GateScenario& sc = cfg.scenario;
    json j = {
        {"n_tones", sc.tones.n_tones()},
        {"coeffs", std::vector<double>(sc.tones.coeffs().begin(), sc.tones.coeffs().end())},
        {"delta_rad_per_s", sc.tones.delta()},
        {"detuning_error_rad_per_s", sc.detuning_error},
        {"detuning_ratio", sc.detuning_ratio()},
        {"heating_rate", sc.heating_rate},
        {"nbar", sc.nbar},
        {"basis", std::string(to_string(cfg.basis))},
        {"step_tolerance", cfg.step_tolerance},
        {"detuning_offset_rad_per_s", cfg.detuning_offset},
    };
    if (req.asymmetric) {
        j["delta_r_rad_per_s"] = (*req.asymmetric)[0];
        j["delta_b_rad_per_s"] = (*req.asymmetric)[1];
    }
    return j;
}

std::vector<json> grid_values(const std::string& key, const json& spec) {
    std::vector<json> out;
    if (spec.is_array()) {
        if (spec.empty()) {
            throw ConfigError("sweep config: grid key '" + key + "' has no values");
        }
        for (const auto& v : spec) {
            out.push_back(v);
        }
        return out;
    }
    ObjectReader r(spec, "sweep grid '" + key + "'");
    const double from = r.number("from");
    const double to = r.number("to");
    const std::int64_t count = r.integer("count");
    r.finish();
    if (count < 1 || !std::isfinite(from) || !std::isfinite(to)) {
        throw ConfigError("sweep grid '" + key + "': need finite from/to and count >= 1");
    }
    for (std::int64_t k = 0; k < count; ++k) {
        out.push_back(count == 1 ? from : from + (to - from) * double(k) / double(count - 1));
    }
    return out;
}

std::vector<SimConfig> expand_sweep(const json& cfg) {
    ObjectReader r(cfg, "sweep config");
    check_schema(r);
    const json base = r.raw("base");
    const json grid = r.has("grid") ? r.raw("grid") : json::object();
    r.finish();
    if (!base.is_object() || !grid.is_object()) {
        throw ConfigError("sweep config: 'base' and 'grid' must be JSON objects");
    }
    std::vector<json> points{base};
    for (const auto& item : grid.items()) {
        const std::vector<json> values = grid_values(item.key(), item.value());
        std::vector<json> next;
        for (const auto& p : points) {
            for (const auto& v : values) {
                json q = p;
                q[item.key()] = v;
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }
    std::vector<SimConfig> configs;
    for (const auto& p : points) {
        SimulateRequest req = parse_simulate(p, false);
        if (req.asymmetric) {
            throw ConfigError("sweep config: asymmetric sideband shifts are only supported by simulate");
        }
        configs.push_back(req.config);
    }
    return configs;
}

json fidelity_json(const GateScenario& sc) {
    const ErrorBudget budget = leading_order_budget(sc);
    return {
        {"n_tones", sc.tones.n_tones()},
        {"delta_rad_per_s", sc.tones.delta()},
        {"detuning_ratio", sc.detuning_ratio()},
        {"heating_rate", sc.heating_rate},
        {"nbar", sc.nbar},
        {"heating_factor", effective_heating_factor(sc.tones)},
        {"fidelity_heating", fidelity_heating(sc.tones, sc.heating_rate)},
        {"fidelity_detuning", fidelity_detuning(sc)},
        {"infidelity_detuning", infidelity_detuning(sc)},
        {"leading_order",
         {{"e_heating", budget.e_heating},
          {"e_detuning", budget.e_detuning},
          {"order", budget.order},
          {"in_validity_regime", budget.in_validity_regime}}},
    };
}

double preset_delta(const std::string& preset, std::optional<double> delta) {
    if (!preset.empty() && preset != "paper") {
        throw ConfigError("unknown preset '" + preset + "' (known: paper)");
    }
    return delta.value_or(paper::delta_rad_per_s);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Design and validation toolkit for multi-tone Molmer-Sorensen gates", "mtms"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");
    std::function<void()> action;

    std::string out_path;
    std::string config_path;
    std::string preset;
    int threads = 0;
    int n_tones = 1;
    std::optional<double> delta;
    double detuning_ratio = 0;

    auto* tones = app.add_subcommand("tones", "Optimized tone coefficients as JSON");
    tones->add_option("--n", n_tones, "Number of tones")->required()->check(CLI::Range(1, 64));
    tones->add_option("--delta", delta, "Base detuning delta in rad/s (default: paper preset)");
    tones->add_option("--preset", preset, "Named parameter set")->check(CLI::IsMember({"paper"}));
    tones->add_option("--out", out_path, "Output path (default stdout)");
    tones->callback([&] {
        action = [&] {
            emit(dump_json(tones_json(optimize_tones(n_tones, preset_delta(preset, delta)))), out_path, out);
        };
    });

    int samples = 401;
    auto* traj = app.add_subcommand("trajectory", "Phase-space trajectory F(t), G(t) as CSV");
    traj->add_option("--n", n_tones, "Number of tones")->required()->check(CLI::Range(1, 64));
    traj->add_option("--detuning-ratio", detuning_ratio, "Symmetric detuning error Delta/delta");
    traj->add_option("--samples", samples, "Number of time samples")->check(CLI::Range(2, 10000000));
    traj->add_option("--delta", delta, "Base detuning delta in rad/s (default: paper preset)");
    traj->add_option("--preset", preset, "Named parameter set")->check(CLI::IsMember({"paper"}));
    traj->add_option("--out", out_path, "Output CSV path (default stdout)");
    traj->callback([&] {
        action = [&] {
            const double d = preset_delta(preset, delta);
            const GateScenario sc{optimize_tones(n_tones, d), detuning_ratio * d};
            std::ostringstream text;
            write_trajectory_csv(text, trajectory(sc, samples));
            emit(text.str(), out_path, out);
        };
    });

    std::optional<double> heating_rate;
    std::optional<double> heating_per_gate;
    double nbar = 0;
    auto* fid = app.add_subcommand("fidelity", "Closed-form fidelities and leading-order error budget");
    fid->add_option("--n", n_tones, "Number of tones")->check(CLI::Range(1, 64));
    fid->add_option("--detuning-ratio", detuning_ratio, "Symmetric detuning error Delta/delta");
    auto* rate_opt = fid->add_option("--heating-rate", heating_rate, "Heating rate in quanta/s");
    fid->add_option("--heating-quanta-per-gate", heating_per_gate, "Heating rate times gate time")
        ->excludes(rate_opt);
    fid->add_option("--nbar", nbar, "Initial thermal occupation");
    fid->add_option("--delta", delta, "Base detuning delta in rad/s (default: paper preset)");
    fid->add_option("--preset", preset, "Named parameter set")->check(CLI::IsMember({"paper"}));
    fid->add_option("--config", config_path, "Simulate-style JSON config instead of flags");
    fid->add_option("--out", out_path, "Output path (default stdout)");
    fid->callback([&] {
        action = [&] {
            GateScenario sc{single_tone(1.0)};
            if (!config_path.empty()) {
                sc = parse_simulate(load_json_file(config_path), true).config.scenario;
            } else {
                const double d = preset_delta(preset, delta);
                double rate = heating_rate.value_or(0);
                if (heating_per_gate) {
                    rate = *heating_per_gate * d / (2 * std::numbers::pi);
                }
                sc = GateScenario{optimize_tones(n_tones, d), detuning_ratio * d, rate, nbar};
                sc.validate();
            }
            emit(dump_json(fidelity_json(sc)), out_path, out);
        };
    });

    auto* sim = app.add_subcommand("simulate", "Single master-equation run, JSON report");
    sim->add_option("--config", config_path, "JSON config")->required();
    sim->add_option("--out", out_path, "Output path (default stdout)");
    sim->callback([&] {
        action = [&] {
            const SimulateRequest req = parse_simulate(load_json_file(config_path), true);
            const auto start = std::chrono::steady_clock::now();
            const EvolveResult res =
                req.asymmetric
                    ? asymmetric_detuning_evolve(req.config, (*req.asymmetric)[0], (*req.asymmetric)[1])
                    : evolve(req.config);
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            json j = {{"scenario", scenario_json(req)}, {"report", report_to_json(res.report)}};
            const GateScenario& sc = req.config.scenario;
            j["closed_form"] = {{"fidelity_heating", fidelity_heating(sc.tones, sc.heating_rate)},
                                {"fidelity_detuning", fidelity_detuning(sc)}};
            j["wall_time_s"] = wall;
            emit(dump_json(j), out_path, out);
        };
    });

    auto* sw = app.add_subcommand("sweep", "Master-equation runs over a parameter grid, CSV");
    sw->add_option("--config", config_path, "JSON sweep config")->required();
    sw->add_option("--threads", threads, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
    sw->add_option("--out", out_path, "Output CSV path (default stdout)");
    sw->callback([&] {
        action = [&] {
            const std::vector<SimConfig> grid = expand_sweep(load_json_file(config_path));
            const auto rows = sweep(grid, threads, [&](std::size_t done, std::size_t total) {
                err << "sweep: " << done << "/" << total << "\n";
            });
            std::ostringstream text;
            write_sweep_csv(text, rows);
            emit(text.str(), out_path, out);
        };
    });

    FigureOptions fig_opts;
    std::optional<int> points;
    std::optional<double> fig_ratio;
    auto* fig = app.add_subcommand("figure", "Figure data as CSV files in an output directory");
    fig->add_option("which", fig_opts.which, "Figure id")
        ->required()
        ->check(CLI::IsMember({"fig1b", "fig1c", "fig2", "fig3", "fig4-analytic"}));
    fig->add_option("--out", fig_opts.out_dir, "Output directory")->required();
    fig->add_option("--threads", fig_opts.threads, "Worker threads (default: all cores)")
        ->check(CLI::NonNegativeNumber);
    fig->add_option("--points", points, "Grid points per curve")->check(CLI::Range(2, 100000));
    fig->add_option("--detuning-ratio", fig_ratio, "Delta/delta for fig4-analytic");
    fig->add_option("--preset", preset, "Named parameter set")->check(CLI::IsMember({"paper"}));
    fig->callback([&] {
        action = [&] {
            fig_opts.points = points;
            fig_opts.detuning_ratio = fig_ratio;
            run_figure(fig_opts, err);
        };
    });

    TomoOptions tomo_opts;
    std::optional<std::uint64_t> seed;
    auto* tomo = app.add_subcommand("tomo", "Synthetic tomography data and maximum-likelihood fits");
    tomo->require_subcommand(1);
    auto* gen = tomo->add_subcommand("generate", "Synthetic parity dataset as CSV");
    gen->add_option("--config", tomo_opts.config, "JSON config")->required();
    gen->add_option("--seed", seed, "Random seed (overrides the config)");
    gen->add_option("--out", tomo_opts.out, "Output CSV path (default stdout)");
    gen->callback([&] {
        action = [&] {
            tomo_opts.seed = seed;
            tomo_generate(tomo_opts, out);
        };
    });
    auto* fit = tomo->add_subcommand("fit", "Parity fit and Bell-fidelity estimate as JSON");
    fit->add_option("--config", tomo_opts.config, "JSON config");
    fit->add_option("--data", tomo_opts.data, "Parity dataset CSV (overrides the config)");
    fit->add_option("--out", tomo_opts.out, "Output path (default stdout)");
    fit->callback([&] { action = [&] { tomo_fit(tomo_opts, out); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        action();
        return 0;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace mtms::cli
