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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.h"

namespace mtms::cli {

namespace {

namespace fs = std::filesystem;

SpamMap optional_spam(ObjectReader& r) {
    return r.has("spam") ? spam_from_json(r.raw("spam")) : SpamMap::identity();
}

}  // namespace

void tomo_generate(const TomoOptions& opts, std::ostream& out) {
    const json cfg = load_json_file(opts.config);
    ObjectReader r(cfg, "tomo generate config");
    check_schema(r);
    json source = r.raw("source");
    const std::int64_t n_phases = r.integer_or("n_phases", 12);
    const std::int64_t shots = r.integer_or("shots_per_phase", 500);
    const bool noiseless = r.boolean_or("noiseless", false);
    const std::int64_t config_seed = r.integer_or("seed", 0);
    const SpamMap spam = r.has("spam") ? spam_from_json(r.raw("spam")) : SpamMap::identity();
    r.finish();
    if (n_phases < 4 || n_phases > 100000) {
        throw ConfigError("tomo generate config: 'n_phases' must lie in [4, 100000]");
    }
    if (shots < 1) {
        throw ConfigError("tomo generate config: 'shots_per_phase' must be >= 1");
    }
    const std::uint64_t seed = opts.seed.value_or(std::uint64_t(config_seed));
    if (!source.is_object() || !source.contains("kind") || !source["kind"].is_string()) {
        throw ConfigError("tomo generate config: 'source' needs a string 'kind' (model or gate)");
    }
    const std::string kind = source["kind"].get<std::string>();
    source.erase("kind");

    ParityDataset ds;
    if (kind == "model") {
        ObjectReader s(source, "tomo generate source");
        const double amplitude = s.number("amplitude");
        const double phase = s.number_or("phase", 0.0);
        s.finish();
        ds = generate_model_dataset(amplitude, phase, spam, int(n_phases), shots, seed, noiseless);
    } else if (kind == "gate") {
        if (noiseless) {
            throw ConfigError("tomo generate config: 'noiseless' is only available for model sources");
        }
        const SimulateRequest req = parse_simulate(source, false);
        const EvolveResult res =
            req.asymmetric ? asymmetric_detuning_evolve(req.config, (*req.asymmetric)[0], (*req.asymmetric)[1])
                           : evolve(req.config);
        ds = generate_parity_dataset(res.state.internal_state(), spam, int(n_phases), shots, seed);
    } else {
        throw ConfigError("tomo generate config: unknown source kind '" + kind + "' (model or gate)");
    }
    std::ostringstream text;
    write_parity_csv(text, ds);
    emit(text.str(), opts.out, out);
}

void tomo_fit(const TomoOptions& opts, std::ostream& out) {
    std::string data = opts.data;
    SpamMap spam;
    double reference_phase = 0;
    std::optional<CountsRecord> population_counts;
    if (!opts.config.empty()) {
        const json cfg = load_json_file(opts.config);
        ObjectReader r(cfg, "tomo fit config");
        check_schema(r);
        if (r.has("data")) {
            const json& d = r.raw("data");
            if (!d.is_string()) {
                r.invalid("data", "expected a path string");
            } else if (data.empty()) {
                // Relative paths are taken relative to the config file.
                fs::path p = d.get<std::string>();
                if (p.is_relative()) {
                    p = fs::path(opts.config).parent_path() / p;
                }
                data = p.string();
            }
        }
        spam = optional_spam(r);
        reference_phase = r.number_or("reference_phase_rad", 0.0);
        if (r.has("population_counts")) {
            const json& pc = r.raw("population_counts");
            if (!pc.is_array() || pc.size() != 3 || !pc[0].is_number_integer() || !pc[1].is_number_integer() ||
                !pc[2].is_number_integer()) {
                r.invalid("population_counts", "expected [x0, x1, x2] integers");
            } else {
                population_counts = CountsRecord{pc[0].get<std::int64_t>(), pc[1].get<std::int64_t>(),
                                                 pc[2].get<std::int64_t>()};
            }
        }
        r.finish();
    }
    if (data.empty()) {
        throw ConfigError("tomo fit: no dataset given (use --data or the config key 'data')");
    }
    std::ifstream in(data);
    if (!in) {
        throw ConfigError("cannot open dataset '" + data + "'");
    }
    ParityDataset ds = read_parity_csv(in);
    ds.spam = spam;
    const ParityFit fit = mle_parity_fit(ds);

    json j = {
        {"n_points", ds.points.size()},
        {"amplitude", fit.amplitude},
        {"se_amplitude", fit.se_amplitude},
        {"phase_rad", fit.phase},
        {"se_phase_rad", fit.se_phase},
        {"log_likelihood", fit.log_likelihood},
        {"on_boundary", fit.on_boundary},
        {"spam", spam_to_json(spam)},
    };
    if (population_counts) {
        const PopulationEstimate pops = mle_populations(*population_counts, spam);
        const FidelityEstimate est = combine_fidelity_estimate(pops, fit, reference_phase);
        j["populations"] = {{"p0", pops.p0},       {"p1", pops.p1},       {"p2", pops.p2},
                            {"se_p1", pops.se_p1}, {"se_p2", pops.se_p2}, {"log_likelihood", pops.log_likelihood}};
        j["fidelity"] = {{"value", est.fidelity},
                         {"standard_error", est.standard_error},
                         {"population_even", est.population_even},
                         {"delta_phi_rad", est.delta_phi}};
    }
    emit(dump_json(j), opts.out, out);
}

}  // namespace mtms::cli
