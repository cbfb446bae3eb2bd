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


#include "ghl/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <utility>

#include "ghl/errors.hpp"

namespace ghl {

namespace {

std::vector<std::string> split_line(const std::string &line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto b = cell.find_first_not_of(' ');
    const auto e = cell.find_last_not_of(' ');
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

using Column = std::pair<std::string, Eigen::VectorXd>;

}  // namespace

std::size_t Table::column(const std::string &name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidArgument("no column named '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

Table read_csv(std::istream &in) {
  Table table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty()) continue;
    if (line.find('"') != std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) + ": quoted fields are not supported");
    }
    auto cells = split_line(line);
    if (table.header.empty()) {
      std::set<std::string> seen;
      for (const auto &h : cells) {
        if (h.empty()) throw ParseError("empty column name in header");
        if (!seen.insert(h).second) throw ParseError("duplicate column '" + h + "'");
      }
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(table.header.size()) +
                       " fields, found " + std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw ParseError("missing header row");
  return table;
}

Table read_csv_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return read_csv(in);
}

double parse_double(const std::string &cell) {
  double value = 0;
  const char *first = cell.data();
  const char *last = first + cell.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("not a number: '" + cell + "'");
  }
  return value;
}

Design build_design(const Table &table, const DesignSpec &spec) {
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n == 0) throw ParseError("no data rows");
  const std::size_t response_col = table.column(spec.response);
  const std::set<std::string> one_hot(spec.one_hot.begin(), spec.one_hot.end());
  for (const auto &name : one_hot) table.column(name);

  // Expands one source column into its design columns.
  auto expand = [&](const std::string &name) {
    const std::size_t c = table.column(name);
    std::vector<Column> out;
    if (!one_hot.count(name)) {
      Eigen::VectorXd v(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        try {
          v(i) = parse_double(table.rows[i][c]);
        } catch (const ParseError &e) {
          throw ParseError("row " + std::to_string(i + 1) + ", column '" + name + "': " + e.what());
        }
      }
      out.emplace_back(name, std::move(v));
      return out;
    }
    std::set<std::string> levels;
    for (const auto &row : table.rows) levels.insert(row[c]);
    for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
      Eigen::VectorXd v(n);
      for (Eigen::Index i = 0; i < n; ++i) v(i) = table.rows[i][c] == *it ? 1.0 : 0.0;
      out.emplace_back(name + "=" + *it, std::move(v));
    }
    return out;
  };

  std::vector<std::string> terms = spec.terms;
  if (terms.empty()) {
    for (const auto &h : table.header) {
      if (h != spec.response) terms.push_back(h);
    }
  }

  std::vector<Column> columns;
  if (spec.intercept) columns.emplace_back("(Intercept)", Eigen::VectorXd::Ones(n));
  for (const auto &term : terms) {
    std::vector<Column> acc;
    std::size_t start = 0;
    while (true) {
      const auto colon = term.find(':', start);
      const std::string factor = term.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
      if (factor == spec.response) throw InvalidArgument("response '" + factor + "' used as a covariate");
      auto cols = expand(factor);
      if (acc.empty()) {
        acc = std::move(cols);
      } else {
        std::vector<Column> product;
        for (const auto &[an, av] : acc) {
          for (const auto &[bn, bv] : cols) product.emplace_back(an + ":" + bn, av.cwiseProduct(bv));
        }
        acc = std::move(product);
      }
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
    for (auto &c : acc) columns.push_back(std::move(c));
  }

  Design design;
  design.data.design.resize(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    design.data.design.col(static_cast<Eigen::Index>(j)) = columns[j].second;
    design.column_names.push_back(columns[j].first);
  }
  design.data.response.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      design.data.response(i) = parse_double(table.rows[i][response_col]);
    } catch (const ParseError &e) {
      throw ParseError("row " + std::to_string(i + 1) + ", column '" + spec.response + "': " + e.what());
    }
  }
  return design;
}

}  // namespace ghl
