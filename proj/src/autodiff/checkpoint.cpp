// SPDX-License-Identifier: Apache-2.0
//
// Copyright (C) 2026 The ialab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <string_view>

#include "ialab/autodiff.hpp"
#include "ialab/error.hpp"

namespace ialab::ad {

void save_checkpoint(const std::vector<Tensor>& params, const std::string& path) {
  if (path.empty()) fail(ErrorCode::IoFailure, "empty checkpoint path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  char buf[32];
  for (const Tensor& p : params) {
    if (p.name().empty() || p.name().find(',') != std::string::npos)
      fail(ErrorCode::IoFailure, "checkpoint tensors need a comma-free name");
    out << p.name() << ',';
    for (std::size_t k = 0; k < p.shape().size(); ++k) out << (k ? "x" : "") << p.shape()[k];
    for (double v : p.value()) {
      const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',';
      out.write(buf, n);
    }
    out << '\n';
  }
  if (!out) fail(ErrorCode::IoFailure, "write to '" + path + "' failed");
}

void load_checkpoint(std::vector<Tensor>& params, const std::string& path) {
  if (path.empty()) fail(ErrorCode::IoFailure, "empty checkpoint path");
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path + "'");
  std::map<std::string, std::pair<std::string, std::vector<double>>> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto bad = [&](const std::string& what) {
      fail(ErrorCode::FormatViolation, path + ":" + std::to_string(line_no) + ": " + what);
    };
    const std::size_t c1 = line.find(',');
    if (c1 == std::string::npos) bad("missing shape field");
    const std::size_t c2 = line.find(',', c1 + 1);
    const std::string name = line.substr(0, c1);
    const std::string shape = line.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1);
    std::vector<double> values;
    std::size_t pos = c2;
    while (pos != std::string::npos) {
      const std::size_t next = line.find(',', pos + 1);
      const std::string_view field(line.data() + pos + 1, (next == std::string::npos ? line.size() : next) - pos - 1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) bad("bad value '" + std::string(field) + "'");
      values.push_back(v);
      pos = next;
    }
    records[name] = {shape, std::move(values)};
  }
  for (Tensor& p : params) {
    auto it = records.find(p.name());
    if (it == records.end()) fail(ErrorCode::FormatViolation, path + ": no record for tensor '" + p.name() + "'");
    std::string shape;
    for (std::size_t k = 0; k < p.shape().size(); ++k) shape += (k ? "x" : "") + std::to_string(p.shape()[k]);
    if (it->second.first != shape || it->second.second.size() != p.size())
      fail(ErrorCode::FormatViolation, path + ": tensor '" + p.name() + "' has shape " + it->second.first +
                                           ", expected " + shape);
    p.value() = it->second.second;
  }
}

}  // namespace ialab::ad
