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

#include "config.h"

#include <cmath>
#include <sstream>

#include "mtms/preset.h"

namespace mtms::cli {

ObjectReader::ObjectReader(const json& obj, std::string context) : obj_(obj), context_(std::move(context)) {
    if (!obj_.is_object()) {
        throw ConfigError(context_ + ": expected a JSON object");
    }
}

const json& ObjectReader::raw(const std::string& key) {
    used_.insert(key);
    if (!obj_.contains(key)) {
        problems_.push_back("missing required key '" + key + "'");
        static const json null_value;
        return null_value;
    }
    return obj_.at(key);
}

void ObjectReader::invalid(const std::string& key, const std::string& why) {
    used_.insert(key);
    problems_.push_back("key '" + key + "': " + why);
}

double ObjectReader::number(const std::string& key) {
    const json& v = raw(key);
    if (v.is_null()) {
        return std::nan("");
    }
    if (!v.is_number()) {
        invalid(key, "expected a number");
        return std::nan("");
    }
    return v.get<double>();
}

double ObjectReader::number_or(const std::string& key, double fallback) {
    if (!has(key)) {
        used_.insert(key);
        return fallback;
    }
    return number(key);
}

std::int64_t ObjectReader::integer(const std::string& key) {
    const json& v = raw(key);
    if (v.is_null()) {
        return 0;
    }
    if (!v.is_number_integer()) {
        invalid(key, "expected an integer");
        return 0;
    }
    return v.get<std::int64_t>();
}

std::int64_t ObjectReader::integer_or(const std::string& key, std::int64_t fallback) {
    if (!has(key)) {
        used_.insert(key);
        return fallback;
    }
    return integer(key);
}

std::string ObjectReader::string_or(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    if (!has(key)) {
        return fallback;
    }
    const json& v = obj_.at(key);
    if (!v.is_string()) {
        invalid(key, "expected a string");
        return fallback;
    }
    return v.get<std::string>();
}

bool ObjectReader::boolean_or(const std::string& key, bool fallback) {
    used_.insert(key);
    if (!has(key)) {
        return fallback;
    }
    const json& v = obj_.at(key);
    if (!v.is_boolean()) {
        invalid(key, "expected true or false");
        return fallback;
    }
    return v.get<bool>();
}

void ObjectReader::finish() const {
    std::vector<std::string> problems = problems_;
    for (const auto& item : obj_.items()) {
        if (!used_.count(item.key())) {
            problems.push_back("unknown key '" + item.key() + "'");
        }
    }
    if (problems.empty()) {
        return;
    }
    std::ostringstream msg;
    msg << context_ << ":";
    for (const auto& p : problems) {
        msg << "\n  " << p;
    }
    throw ConfigError(msg.str());
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void check_schema(ObjectReader& reader) {
    const json& v = reader.raw("schema");
    if (!v.is_null() && (!v.is_number_integer() || v.get<int>() != kSchemaVersion)) {
        reader.invalid("schema", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
    }
}

SimulateRequest parse_simulate(const json& obj, bool top_level) {
    ObjectReader r(obj, top_level ? "simulate config" : "simulate parameters");
    if (top_level) {
        check_schema(r);
    }
    const std::string preset = r.string_or("preset", "");
    const bool paper_preset = preset == "paper";
    if (!preset.empty() && !paper_preset) {
        r.invalid("preset", "unknown preset '" + preset + "' (known: paper)");
    }
    const std::int64_t n_tones = r.integer("n_tones");
    const double delta =
        paper_preset ? r.number_or("delta_rad_per_s", paper::delta_rad_per_s) : r.number("delta_rad_per_s");

    double detuning = 0;
    if (r.has("detuning_error_rad_per_s") && r.has("detuning_ratio")) {
        r.invalid("detuning_ratio", "give either detuning_error_rad_per_s or detuning_ratio, not both");
    } else if (r.has("detuning_ratio")) {
        detuning = r.number("detuning_ratio") * delta;
    } else {
        detuning = r.number_or("detuning_error_rad_per_s", 0.0);
    }

    double heating = 0;
    if (r.has("heating_rate") && r.has("heating_quanta_per_gate")) {
        r.invalid("heating_quanta_per_gate", "give either heating_rate or heating_quanta_per_gate, not both");
    } else if (r.has("heating_quanta_per_gate")) {
        heating = r.number("heating_quanta_per_gate") * delta / (2 * std::numbers::pi);
    } else {
        heating = r.number_or("heating_rate", 0.0);
    }

    const double nbar = r.number_or("nbar", paper_preset ? paper::nbar_cooled : 0.0);
    const std::int64_t fock = r.integer_or("fock_truncation", 0);
    const double tolerance = r.number_or("step_tolerance", 1e-8);
    const std::string basis_name = r.string_or("basis", "sigma_x_sum");
    const double offset = r.number_or("detuning_offset_rad_per_s", 0.0);

    std::optional<std::array<double, 2>> asymmetric;
    const bool has_r = r.has("delta_r_rad_per_s");
    const bool has_b = r.has("delta_b_rad_per_s");
    if (has_r != has_b) {
        r.invalid(has_r ? "delta_r_rad_per_s" : "delta_b_rad_per_s",
                  "delta_r_rad_per_s and delta_b_rad_per_s must be given together");
    } else if (has_r) {
        asymmetric = std::array<double, 2>{r.number("delta_r_rad_per_s"), r.number("delta_b_rad_per_s")};
        if (detuning != 0) {
            r.invalid("delta_r_rad_per_s", "cannot be combined with a symmetric detuning error");
        }
    }
    r.finish();

    if (n_tones < 1 || n_tones > 64) {
        throw ConfigError("simulate config: key 'n_tones' must lie in [1, 64]");
    }
    if (fock < 0 || fock > 100000) {
        throw ConfigError("simulate config: key 'fock_truncation' must be >= 0 (0 selects the default)");
    }
    SimConfig cfg{GateScenario{optimize_tones(int(n_tones), delta), detuning, heating, nbar}};
    cfg.fock_truncation = int(fock);
    cfg.step_tolerance = tolerance;
    cfg.basis = spin_basis_from_string(basis_name);
    cfg.detuning_offset = offset;
    cfg.validate();
    return {cfg, asymmetric};
}

SpamMap spam_from_json(const json& value) {
    ObjectReader r(value, "spam");
    const int forms = int(r.has("combined_fidelity")) + int(r.has("epsilon")) + int(r.has("matrix"));
    if (forms != 1) {
        throw ConfigError("spam: give exactly one of combined_fidelity, epsilon or matrix");
    }
    if (r.has("combined_fidelity")) {
        const double f = r.number("combined_fidelity");
        r.finish();
        return SpamMap::from_combined_fidelity(f);
    }
    if (r.has("epsilon")) {
        const double e = r.number("epsilon");
        r.finish();
        return SpamMap::symmetric(e);
    }
    const json& m = r.raw("matrix");
    r.finish();
    // Rows are observed bright counts, columns the true counts.
    if (!m.is_array() || m.size() != 3) {
        throw ConfigError("spam: matrix must be a 3x3 array of rows");
    }
    Eigen::Matrix3d p;
    for (int i = 0; i < 3; ++i) {
        if (!m[i].is_array() || m[i].size() != 3) {
            throw ConfigError("spam: matrix must be a 3x3 array of rows");
        }
        for (int j = 0; j < 3; ++j) {
            if (!m[i][j].is_number()) {
                throw ConfigError("spam: matrix entries must be numbers");
            }
            p(i, j) = m[i][j].get<double>();
        }
    }
    return SpamMap(p);
}

json spam_to_json(const SpamMap& spam) {
    json rows = json::array();
    for (int i = 0; i < 3; ++i) {
        rows.push_back({spam(i, 0), spam(i, 1), spam(i, 2)});
    }
    return {{"matrix", rows}, {"orientation", "rows=observed,cols=true"}};
}

json report_to_json(const FidelityReport& report) {
    return {
        {"fidelity", report.fidelity},
        {"fidelity_free_phase", report.fidelity_free_phase},
        {"population_even", report.population_even},
        {"parity_amplitude", report.parity_amplitude},
        {"bell_phase_shift_rad", report.bell_phase_shift},
        {"truncation_converged", report.truncation_converged},
        {"leaked_population", report.leaked_population},
        {"max_trace_error", report.max_trace_error},
        {"hermiticity_error", report.hermiticity_error},
        {"fock_truncation", report.fock_truncation},
        {"accepted_steps", report.accepted_steps},
        {"rejected_steps", report.rejected_steps},
    };
}

AtomicOutput::AtomicOutput(std::filesystem::path path) : path_(std::move(path)) {
    partial_ = path_;
    partial_ += ".partial";
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    file_.open(partial_);
    if (!file_) {
        throw ConfigError("cannot write output file '" + partial_.string() + "'");
    }
}

void AtomicOutput::commit() {
    file_.flush();
    if (!file_) {
        throw NumericError("failed while writing '" + partial_.string() + "'");
    }
    file_.close();
    std::filesystem::rename(partial_, path_);
}

}  // namespace mtms::cli
