// Copyright 2026 The zoopt Authors.
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

#include "zoopt/tasks/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace zoopt {

namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool ParseDouble(const std::string& token, double& out) {
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

// Maps raw numeric labels onto 0..C-1. -1/+1 data becomes 0/1.
std::vector<int> NormalizeLabels(const std::vector<double>& raw,
                                 const std::vector<std::size_t>& lines,
                                 int& num_classes) {
  bool has_minus_one = false;
  for (double v : raw) has_minus_one = has_minus_one || v == -1.0;
  std::vector<int> out;
  out.reserve(raw.size());
  int max_label = -1;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double v = raw[i];
    if (has_minus_one) {
      if (v != -1.0 && v != 1.0) {
        throw LabelDomainError("line " + std::to_string(lines[i]) +
                               ": label " + std::to_string(v) +
                               " in -1/+1 data");
      }
      v = v > 0.0 ? 1.0 : 0.0;
    }
    if (v < 0.0 || v != std::floor(v) || v > 1e6) {
      throw LabelDomainError("line " + std::to_string(lines[i]) +
                             ": label must be a non-negative integer");
    }
    out.push_back(static_cast<int>(v));
    max_label = std::max(max_label, out.back());
  }
  num_classes = std::max(max_label + 1, 2);
  return out;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(Trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Dataset Dataset::Rows(const std::vector<Index>& rows) const {
  Dataset out;
  out.num_classes = num_classes;
  out.features.resize(static_cast<Index>(rows.size()), dim());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Index>(i)) = features.row(rows[i]);
    out.labels.push_back(labels[static_cast<std::size_t>(rows[i])]);
  }
  return out;
}

DatasetFormat ParseDatasetFormat(std::string_view name) {
  if (name == "csv") return DatasetFormat::kCsv;
  if (name == "svmlight" || name == "libsvm") return DatasetFormat::kSvmlight;
  throw InvalidArgument("unknown dataset format '" + std::string(name) + "'");
}

Dataset ReadCsv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!Trim(line).empty()) header = SplitCsv(Trim(line));
  }
  if (header.empty()) throw ParseError("missing header row", line_no);
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) {
    throw ParseError("header has no 'label' column", line_no);
  }
  const std::size_t label_col = label_it - header.begin();
  const std::size_t width = header.size();

  std::vector<std::vector<double>> rows;
  std::vector<double> raw_labels;
  std::vector<std::size_t> lines;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const auto cells = SplitCsv(trimmed);
    if (cells.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no);
    }
    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t c = 0; c < width; ++c) {
      double v = 0.0;
      if (!ParseDouble(cells[c], v) || !std::isfinite(v)) {
        throw ParseError("field '" + header[c] + "' is not a finite number: '" +
                             cells[c] + "'",
                         line_no);
      }
      if (c == label_col) {
        raw_labels.push_back(v);
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
    lines.push_back(line_no);
  }

  Dataset out;
  out.labels = NormalizeLabels(raw_labels, lines, out.num_classes);
  out.features.resize(static_cast<Index>(rows.size()),
                      static_cast<Index>(width - 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out.features(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return out;
}

Dataset ReadSvmlight(std::istream& in, Index dim) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<std::pair<Index, double>>> rows;
  std::vector<double> raw_labels;
  std::vector<std::size_t> lines;
  Index max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string content = Trim(
        hash == std::string::npos ? line : line.substr(0, hash));
    if (content.empty()) continue;
    std::istringstream tokens(content);
    std::string token;
    tokens >> token;
    double label = 0.0;
    if (!ParseDouble(token, label)) {
      throw ParseError("label '" + token + "' is not a number", line_no);
    }
    std::vector<std::pair<Index, double>> entries;
    Index last_index = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) {
        throw ParseError("expected index:value, found '" + token + "'",
                         line_no);
      }
      if (token.substr(0, colon) == "qid") continue;
      double index_value = 0.0, value = 0.0;
      if (!ParseDouble(token.substr(0, colon), index_value) ||
          !ParseDouble(token.substr(colon + 1), value) ||
          index_value != std::floor(index_value) || index_value < 1.0 ||
          !std::isfinite(value)) {
        throw ParseError("malformed feature '" + token + "'", line_no);
      }
      const Index index = static_cast<Index>(index_value);
      if (index <= last_index) {
        throw ParseError("feature indices must increase", line_no);
      }
      last_index = index;
      max_index = std::max(max_index, index);
      entries.emplace_back(index - 1, value);
    }
    rows.push_back(std::move(entries));
    raw_labels.push_back(label);
    lines.push_back(line_no);
  }
  if (dim > 0 && max_index > dim) {
    throw ParseError("feature index " + std::to_string(max_index) +
                         " exceeds the declared dimension",
                     line_no);
  }
  const Index d = dim > 0 ? dim : max_index;
  Dataset out;
  out.labels = NormalizeLabels(raw_labels, lines, out.num_classes);
  out.features = Matrix::Zero(static_cast<Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [j, v] : rows[i]) {
      out.features(static_cast<Index>(i), j) = v;
    }
  }
  return out;
}

Dataset LoadDataset(const std::string& path, DatasetFormat format) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset '" + path + "'");
  return format == DatasetFormat::kCsv ? ReadCsv(in) : ReadSvmlight(in);
}

namespace {

// Fisher-Yates shuffle of 0..n-1 driven by `rng`.
std::vector<Index> Permutation(Index n, CounterRng& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.NextU64() %
                                      static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace

Dataset SynthClassification(Index n, Index dim, int classes, double margin,
                            std::uint64_t seed) {
  if (classes < 2 || n < classes) {
    throw InvalidArgument("need n >= classes >= 2");
  }
  if (dim < 1) throw InvalidArgument("dimension must be >= 1");
  const SeedStream stream(seed);
  CounterRng center_rng(stream.Derive(0, 0, 0, StreamPurpose::kData));
  Matrix centers(classes, dim);
  for (int c = 0; c < classes; ++c) {
    for (Index j = 0; j < dim; ++j) centers(c, j) = center_rng.NextGaussian();
    centers.row(c) *= margin / centers.row(c).norm();
  }

  CounterRng rng(stream.Derive(1, 0, 0, StreamPurpose::kData));
  const std::vector<Index> order = Permutation(n, rng);
  Dataset out;
  out.num_classes = classes;
  out.features.resize(n, dim);
  out.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int c = static_cast<int>(order[static_cast<std::size_t>(i)] % classes);
    out.labels[static_cast<std::size_t>(i)] = c;
    for (Index j = 0; j < dim; ++j) {
      out.features(i, j) = centers(c, j) + 0.5 * rng.NextGaussian();
    }
  }
  return out;
}

TrainTestSplit SplitDataset(const Dataset& data, double test_fraction,
                            std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("test fraction must lie in (0, 1)");
  }
  const Index n = data.size();
  const Index n_test = static_cast<Index>(std::llround(test_fraction * n));
  if (n_test < 1 || n_test >= n) {
    throw InvalidArgument("split leaves an empty train or test set");
  }
  CounterRng rng(SeedStream(seed).Derive(2, 0, 0, StreamPurpose::kData));
  const std::vector<Index> perm = Permutation(n, rng);
  std::vector<Index> test(perm.begin(), perm.begin() + n_test);
  std::vector<Index> train(perm.begin() + n_test, perm.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {data.Rows(train), data.Rows(test)};
}

std::vector<Index> BatchIndices(Index n, Index batch_size,
                                std::uint64_t dataset_seed,
                                std::uint64_t step) {
  if (n < 1) throw InvalidArgument("dataset is empty");
  if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (batch_size >= n) {
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});
    return all;
  }
  const auto per_epoch = static_cast<std::uint64_t>(n / batch_size);
  const std::uint64_t epoch = step / per_epoch;
  const std::uint64_t slot = step % per_epoch;
  CounterRng rng(
      SeedStream(dataset_seed).Derive(epoch, 0, 0, StreamPurpose::kData));
  const std::vector<Index> perm = Permutation(n, rng);
  const auto begin = perm.begin() + static_cast<Index>(slot) * batch_size;
  std::vector<Index> batch(begin, begin + batch_size);
  std::sort(batch.begin(), batch.end());
  return batch;
}

}  // namespace zoopt
