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
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ialab/error.hpp"
#include "ialab/netmodel.hpp"

namespace ialab::netmodel {
namespace {

constexpr std::string_view kTraceMagic = "#ialab-trace ";
constexpr std::string_view kTraceHeader = "t,j,i,row,col,re,im";
constexpr std::string_view kScalerHeader = "feature_index,min,max";

std::ofstream open_out(const std::string& path) {
  if (path.empty()) fail(ErrorCode::IoFailure, "empty output path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  if (path.empty()) fail(ErrorCode::IoFailure, "empty input path");
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path + "'");
  return in;
}

[[noreturn]] void bad_line(const std::string& path, std::size_t line, const std::string& what) {
  fail(ErrorCode::FormatViolation, path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

void write_double(std::ofstream& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.write(buf, n);
}

}  // namespace

void save_trace(const ChannelTrace& trace, const std::string& path) {
  std::ofstream out = open_out(path);
  const TraceMeta& m = trace.meta;
  nlohmann::json meta = {{"seed", m.seed}, {"K", m.K},       {"mt", m.mt},
                         {"nr", m.nr},     {"T", m.T},       {"doppler", m.doppler},
                         {"fir_order", m.fir_order}};
  out << kTraceMagic << meta.dump() << '\n' << kTraceHeader << '\n';
  for (std::size_t t = 0; t < trace.samples.size(); ++t) {
    const ChannelSet& set = trace.samples[t];
    for (int j = 0; j < set.K; ++j)
      for (int i = 0; i < set.K; ++i) {
        const CMatrix& h = set(j, i);
        for (Eigen::Index r = 0; r < h.rows(); ++r)
          for (Eigen::Index c = 0; c < h.cols(); ++c) {
            out << t << ',' << j << ',' << i << ',' << r << ',' << c << ',';
            write_double(out, h(r, c).real());
            out << ',';
            write_double(out, h(r, c).imag());
            out << '\n';
          }
      }
  }
  if (!out) fail(ErrorCode::IoFailure, "write to '" + path + "' failed");
}

ChannelTrace load_trace(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) bad_line(path, line_no, "missing metadata line");
  strip_cr(line);
  if (line.rfind(kTraceMagic, 0) != 0) bad_line(path, line_no, "metadata line must start with '#ialab-trace'");

  ChannelTrace trace;
  try {
    const nlohmann::json meta = nlohmann::json::parse(line.substr(kTraceMagic.size()));
    trace.meta.seed = meta.at("seed").get<std::uint64_t>();
    trace.meta.K = meta.at("K").get<int>();
    trace.meta.mt = meta.at("mt").get<int>();
    trace.meta.nr = meta.at("nr").get<int>();
    trace.meta.T = meta.at("T").get<int>();
    trace.meta.doppler = meta.at("doppler").get<double>();
    trace.meta.fir_order = meta.at("fir_order").get<int>();
  } catch (const nlohmann::json::exception& e) {
    bad_line(path, line_no, std::string("bad metadata: ") + e.what());
  }
  const TraceMeta& m = trace.meta;
  if (m.K < 1 || m.mt < 1 || m.nr < 1 || m.T < 1) bad_line(path, line_no, "metadata dimensions must be positive");

  ++line_no;
  if (!std::getline(in, line)) bad_line(path, line_no, "missing CSV header");
  strip_cr(line);
  if (line != kTraceHeader) bad_line(path, line_no, "expected header '" + std::string(kTraceHeader) + "'");

  trace.samples.assign(static_cast<std::size_t>(m.T), ChannelSet(m.K, m.nr, m.mt));
  // Rows must come in the order save_trace writes them.
  for (int t = 0; t < m.T; ++t)
    for (int j = 0; j < m.K; ++j)
      for (int i = 0; i < m.K; ++i)
        for (int r = 0; r < m.nr; ++r)
          for (int c = 0; c < m.mt; ++c) {
            ++line_no;
            if (!std::getline(in, line)) bad_line(path, line_no, "unexpected end of file (truncated trace)");
            strip_cr(line);
            const auto fields = split_csv(line);
            if (fields.size() != 7) bad_line(path, line_no, "expected 7 fields");
            int idx[5];
            for (int f = 0; f < 5; ++f)
              if (!parse_number(fields[static_cast<std::size_t>(f)], idx[f])) bad_line(path, line_no, "bad index field");
            if (idx[0] != t || idx[1] != j || idx[2] != i || idx[3] != r || idx[4] != c)
              bad_line(path, line_no, "entry out of order");
            double re = 0.0;
            double im = 0.0;
            if (!parse_number(fields[5], re) || !parse_number(fields[6], im))
              bad_line(path, line_no, "bad numeric field");
            trace.samples[static_cast<std::size_t>(t)](j, i)(r, c) = cd(re, im);
          }
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (!line.empty()) bad_line(path, line_no, "trailing data after last entry");
  }
  return trace;
}

void save_scaler(const MinMaxScaler& scaler, const std::string& path) {
  std::ofstream out = open_out(path);
  out << kScalerHeader << '\n';
  for (Eigen::Index f = 0; f < scaler.min.size(); ++f) {
    out << f << ',';
    write_double(out, scaler.min(f));
    out << ',';
    write_double(out, scaler.max(f));
    out << '\n';
  }
  if (!out) fail(ErrorCode::IoFailure, "write to '" + path + "' failed");
}

MinMaxScaler load_scaler(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) bad_line(path, line_no, "missing header");
  strip_cr(line);
  if (line != kScalerHeader) bad_line(path, line_no, "expected header '" + std::string(kScalerHeader) + "'");
  std::vector<double> mins;
  std::vector<double> maxs;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    std::size_t index = 0;
    double lo = 0.0;
    double hi = 0.0;
    if (fields.size() != 3 || !parse_number(fields[0], index) || !parse_number(fields[1], lo) ||
        !parse_number(fields[2], hi))
      bad_line(path, line_no, "expected feature_index,min,max");
    if (index != mins.size()) bad_line(path, line_no, "feature indices must be consecutive from 0");
    mins.push_back(lo);
    maxs.push_back(hi);
  }
  MinMaxScaler s;
  s.min = Eigen::Map<const RVector>(mins.data(), static_cast<Eigen::Index>(mins.size()));
  s.max = Eigen::Map<const RVector>(maxs.data(), static_cast<Eigen::Index>(maxs.size()));
  return s;
}

}  // namespace ialab::netmodel
