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


#ifndef MTMS_CLI_CONFIG_H
#define MTMS_CLI_CONFIG_H

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mtms/errors.h"
#include "mtms/lindblad.h"
#include "mtms/tomography.h"

namespace mtms::cli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Config file problem; the message lists every offending key.
class ConfigError : public DomainError {
   public:
    using DomainError::DomainError;
};

/// Reads keys from one JSON object, remembering which were consumed so leftovers can be reported.
class ObjectReader {
   public:
    ObjectReader(const json& obj, std::string context);

    bool has(const std::string& key) const { return obj_.contains(key); }
    double number(const std::string& key);
    double number_or(const std::string& key, double fallback);
    std::int64_t integer(const std::string& key);
    std::int64_t integer_or(const std::string& key, std::int64_t fallback);
    std::string string_or(const std::string& key, const std::string& fallback);
    bool boolean_or(const std::string& key, bool fallback);
    /// Marks the key used and returns it; records it as missing when absent.
    const json& raw(const std::string& key);
    /// Records a problem with a key that was present but unusable.
    void invalid(const std::string& key, const std::string& why);
    /// Throws ConfigError naming missing, invalid and unknown keys.
    void finish() const;

   private:
    json obj_;
    std::string context_;
    std::set<std::string> used_;
    std::vector<std::string> problems_;
};

json load_json_file(const std::filesystem::path& path);
/// Requires "schema": 1.
void check_schema(ObjectReader& reader);

struct SimulateRequest {
    SimConfig config;
    /// Independent red and blue sideband shifts, rad/s.
    std::optional<std::array<double, 2>> asymmetric;
};

/// Parses the simulate keys of `obj`; `top_level` also requires the schema field.
SimulateRequest parse_simulate(const json& obj, bool top_level);

SpamMap spam_from_json(const json& value);
json spam_to_json(const SpamMap& spam);
json report_to_json(const FidelityReport& report);

/// Writes to `path.partial` and renames on commit, so interrupted runs never look complete.
class AtomicOutput {
   public:
    explicit AtomicOutput(std::filesystem::path path);
    std::ostream& stream() { return file_; }
    void commit();

   private:
    std::filesystem::path path_;
    std::filesystem::path partial_;
    std::ofstream file_;
};

}  // namespace mtms::cli

#endif
