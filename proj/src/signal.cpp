// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "catequiv/signal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "catequiv/rng.hpp"

namespace catequiv::signal {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(DataError::Kind::kMissingFile,
                    "cannot open " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<double> parse_row(const std::string& line, const fs::path& path,
                              std::size_t line_no) {
  std::vector<double> values;
  const char* p = line.data();
  const char* end = p + line.size();
  while (true) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p >= end) break;
    const char* token_end = p;
    while (token_end < end && *token_end != ' ' && *token_end != '\t') ++token_end;
    double v = 0.0;
    // from_chars rejects a leading '+', which the dataset never uses.
    auto [ptr, ec] = std::from_chars(p, token_end, v);
    if (ec != std::errc() || ptr != token_end || !std::isfinite(v)) {
      throw DataError(DataError::Kind::kNonNumeric,
                      path.string() + ":" + std::to_string(line_no) +
                          ": non-numeric token '" + std::string(p, token_end) + "'");
    }
    values.push_back(v);
    p = token_end;
  }
  return values;
}

std::vector<std::vector<double>> read_matrix(const fs::path& path,
                                             std::size_t columns) {
  const auto lines = read_lines(path);
  std::vector<std::vector<double>> rows;
  rows.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto row = parse_row(lines[i], path, i + 1);
    if (row.size() != columns) {
      throw DataError(DataError::Kind::kBadRowLength,
                      path.string() + ":" + std::to_string(i + 1) + ": expected " +
                          std::to_string(columns) + " values, found " +
                          std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<int> read_integers(const fs::path& path) {
  std::vector<int> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto row = parse_row(lines[i], path, i + 1);
    if (row.size() != 1 || row[0] != std::floor(row[0])) {
      throw DataError(DataError::Kind::kNonNumeric,
                      path.string() + ":" + std::to_string(i + 1) +
                          ": expected a single integer");
    }
    out.push_back(static_cast<int>(row[0]));
  }
  return out;
}

}  // namespace

Tensor Window::sensor(Sensor s) const {
  const std::size_t begin = s == Sensor::kAcc ? 0 : 3;
  return values.rows(begin, begin + 3);
}

std::array<std::size_t, kNumClasses> DatasetSplit::class_counts() const {
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& w : windows) ++counts.at(w.class_index());
  return counts;
}

RmsStats compute_rms(const Tensor& block, double epsilon) {
  if (block.rank() != 2 || block.dim(0) != 3 || block.dim(1) == 0) {
    throw core::ShapeError("compute_rms: expected [3 x T], got " +
                           core::to_string(block.shape()));
  }
  double acc = 0.0;
  for (double v : block.data()) acc += v * v;
  RmsStats s;
  s.energy = acc / static_cast<double>(block.size());
  s.scale = std::max(epsilon, std::sqrt(s.energy));
  s.log_rms = 0.5 * std::log(std::max(s.energy, epsilon * epsilon));
  return s;
}

Tensor normalize_sensor(const Tensor& block, double epsilon) {
  const double scale = compute_rms(block, epsilon).scale;
  Tensor out = block;
  for (double& v : out.data()) v /= scale;
  return out;
}

ProcessedInput gain_process(const Window& window, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("gain_process: epsilon must be positive");
  if (window.values.rank() != 2 || window.values.dim(0) != kRawChannels) {
    throw core::ShapeError("gain_process: window must be [6 x T], got " +
                           core::to_string(window.values.shape()));
  }
  const Tensor acc = window.sensor(Sensor::kAcc);
  const Tensor gyr = window.sensor(Sensor::kGyr);
  const RmsStats acc_stats = compute_rms(acc, epsilon);
  const RmsStats gyr_stats = compute_rms(gyr, epsilon);

  ProcessedInput out;
  out.log_rms_acc = acc_stats.log_rms;
  out.log_rms_gyr = gyr_stats.log_rms;
  const std::size_t length = window.length();
  out.axes = Tensor({kRawChannels, length});
  out.assembled = Tensor({kInputChannels, length});
  for (std::size_t c = 0; c < kRawChannels; ++c) {
    const double scale = c < 3 ? acc_stats.scale : gyr_stats.scale;
    for (std::size_t t = 0; t < length; ++t) {
      const double v = window.values[c * length + t] / scale;
      out.axes[c * length + t] = v;
      out.assembled[c * length + t] = v;
    }
  }
  for (std::size_t t = 0; t < length; ++t) {
    out.assembled[6 * length + t] = out.log_rms_acc;
    out.assembled[7 * length + t] = out.log_rms_gyr;
  }
  return out;
}

DatasetSplit load_ucihar(const fs::path& root, SplitKind split,
                         const LoadOptions& options) {
  if (split == SplitKind::kValidation) {
    throw std::invalid_argument(
        "load_ucihar: validation windows come from stratified_split of train");
  }
  const std::string tag = split == SplitKind::kTrain ? "train" : "test";
  const fs::path dir = root / tag;
  const fs::path signals = dir / "Inertial Signals";
  const std::string acc_prefix =
      options.acc_source == AccSource::kTotal ? "total_acc_" : "body_acc_";

  std::vector<fs::path> files;
  for (const char* axis : {"x", "y", "z"}) {
    files.push_back(signals / (acc_prefix + axis + "_" + tag + ".txt"));
  }
  for (const char* axis : {"x", "y", "z"}) {
    files.push_back(signals / (std::string("body_gyro_") + axis + "_" + tag + ".txt"));
  }
  const fs::path label_file = dir / ("y_" + tag + ".txt");
  for (const auto& f : files) {
    if (!fs::exists(f)) {
      throw DataError(DataError::Kind::kMissingFile,
                      "missing signal file " + f.string());
    }
  }
  if (!fs::exists(label_file)) {
    throw DataError(DataError::Kind::kMissingFile,
                    "missing label file " + label_file.string());
  }

  const std::vector<int> labels = read_integers(label_file);
  const fs::path subject_file = dir / ("subject_" + tag + ".txt");
  std::vector<int> subjects;
  if (fs::exists(subject_file)) subjects = read_integers(subject_file);

  std::vector<std::vector<std::vector<double>>> channels;
  for (const auto& f : files) {
    channels.push_back(read_matrix(f, options.window_length));
    if (channels.back().size() != labels.size()) {
      throw DataError(DataError::Kind::kRowCountMismatch,
                      f.string() + " has " + std::to_string(channels.back().size()) +
                          " rows but " + label_file.string() + " has " +
                          std::to_string(labels.size()));
    }
  }
  if (!subjects.empty() && subjects.size() != labels.size()) {
    throw DataError(DataError::Kind::kRowCountMismatch,
                    subject_file.string() + " has " + std::to_string(subjects.size()) +
                        " rows but " + label_file.string() + " has " +
                        std::to_string(labels.size()));
  }

  DatasetSplit out;
  out.split = split;
  out.windows.reserve(labels.size());
  const std::size_t length = options.window_length;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 1 || labels[n] > static_cast<int>(kNumClasses)) {
      throw DataError(DataError::Kind::kBadLabel,
                      label_file.string() + ":" + std::to_string(n + 1) +
                          ": label " + std::to_string(labels[n]) + " outside 1..6");
    }
    Window w;
    w.values = Tensor({kRawChannels, length});
    for (std::size_t c = 0; c < kRawChannels; ++c) {
      std::copy(channels[c][n].begin(), channels[c][n].end(),
                w.values.data().begin() + static_cast<std::ptrdiff_t>(c * length));
    }
    w.label = labels[n];
    w.subject = subjects.empty() ? 0 : subjects[n];
    out.windows.push_back(std::move(w));
  }
  return out;
}

std::pair<DatasetSplit, DatasetSplit> stratified_split(const DatasetSplit& data,
                                                       double fraction,
                                                       std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) {
    throw std::invalid_argument("stratified_split: fraction must lie in [0, 1)");
  }
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_class.at(data.windows[i].class_index()).push_back(i);
  }
  core::Rng rng(seed);
  std::vector<bool> to_val(data.size(), false);
  for (auto& idx : by_class) {
    // Fisher-Yates with the repo's portable integer draws.
    for (std::size_t i = idx.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(idx[i - 1], idx[j]);
    }
    auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    if (fraction > 0.0 && take == 0 && idx.size() > 1) take = 1;
    for (std::size_t k = 0; k < take; ++k) to_val[idx[k]] = true;
  }
  DatasetSplit train, val;
  train.split = SplitKind::kTrain;
  val.split = SplitKind::kValidation;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (to_val[i] ? val : train).windows.push_back(data.windows[i]);
  }
  return {std::move(train), std::move(val)};
}

}  // namespace catequiv::signal
