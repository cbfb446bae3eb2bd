// Copyright 2026 The ghl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef GHL_CSV_HPP_
#define GHL_CSV_HPP_

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "ghl/glm.hpp"

namespace ghl {

// Raw cells of a comma-separated table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string &name) const;
};

// Strict dialect: header required, no quoting, every row the same width.
Table read_csv(std::istream &in);
Table read_csv_file(const std::filesystem::path &path);

double parse_double(const std::string &cell);

struct DesignSpec {
  std::string response;
  // Terms: column names or interactions "A:B"; empty means all other columns.
  std::vector<std::string> terms;
  bool intercept = true;
  // Columns expanded to indicators, dropping the first level in sorted order.
  std::vector<std::string> one_hot;
};

struct Design {
  Dataset<double> data;
  std::vector<std::string> column_names;
};

Design build_design(const Table &table, const DesignSpec &spec);

}  // namespace ghl

#endif  // GHL_CSV_HPP_
