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


#ifndef MTMS_CLI_COMMANDS_H
#define MTMS_CLI_COMMANDS_H

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.h"

namespace mtms::cli {

/// Writes `text` to `out_path` atomically, or to `out` when the path is empty.
void emit(const std::string& text, const std::string& out_path, std::ostream& out);
std::string dump_json(const json& value);

struct FigureOptions {
    std::string which;
    std::string out_dir;
    int threads = 0;
    std::optional<int> points;
    std::optional<double> detuning_ratio;
};

void run_figure(const FigureOptions& opts, std::ostream& err);

struct TomoOptions {
    std::string config;
    std::string data;
    std::string out;
    std::optional<std::uint64_t> seed;
};

void tomo_generate(const TomoOptions& opts, std::ostream& out);
void tomo_fit(const TomoOptions& opts, std::ostream& out);

}  // namespace mtms::cli

#endif
