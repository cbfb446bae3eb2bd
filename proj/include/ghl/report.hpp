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


#ifndef GHL_REPORT_HPP_
#define GHL_REPORT_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghl/gof.hpp"
#include "ghl/glm.hpp"
#include "ghl/grouping.hpp"
#include "ghl/sim.hpp"

namespace ghl {

using Json = nlohmann::ordered_json;

Json model_json(const FittedModel<double> &model, const std::vector<std::string> &column_names);

// The group table is included when `spec` is given.
Json test_json(const TestResult<double> &result, const GroupSpec<double> *spec = nullptr);

Json sim_json(const SimResult &result);

// One row per test: setting, J, d, n, test, evaluated, rejections, rate, Wilson bounds.
std::string rejection_csv_header();
std::string rejection_csv_rows(const SimResult &result);

}  // namespace ghl

#endif  // GHL_REPORT_HPP_
