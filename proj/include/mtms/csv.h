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

#ifndef MTMS_CSV_H
#define MTMS_CSV_H

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace mtms {

/// Shortest round-trip decimal form of a double ('.' separator).
std::string format_double(double value);

using CsvCell = std::variant<double, std::int64_t, std::string>;

/// Comma-separated output with a mandatory header row; every line is
/// newline-terminated and every row must match the header width.
class CsvWriter {
   public:
    CsvWriter(std::ostream& out, std::vector<std::string> header);
    void row(const std::vector<CsvCell>& cells);
    void row(std::initializer_list<double> cells);

   private:
    std::ostream& out_;
    std::size_t width_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws DomainError if absent.
    std::size_t column(const std::string& name) const;
};

/// Parses a header-first CSV. Blank lines are skipped; ragged rows are a DomainError.
CsvTable read_csv(std::istream& in);

double parse_double(const std::string& text);
std::int64_t parse_int(const std::string& text);

}  // namespace mtms

#endif
