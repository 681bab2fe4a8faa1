// Copyright 2026 The sgzsl Authors
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

#include "sgzsl/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "sgzsl/errors.h"
#include "sgzsl/rng.h"

namespace sgzsl {
namespace {

DataView MakeView(const ZslDataset& dataset,
                  const std::vector<std::size_t>& rows) {
  DataView view;
  view.row_ids = rows;
  view.features = SelectRows(dataset.features, rows);
  for (std::size_t r : rows) {
    view.labels.push_back(dataset.labels[r]);
    view.splits.push_back(dataset.splits[r]);
  }
  return view;
}

// Assigns teacher-train / eval splits per class, in place.
void AssignSplits(ZslDataset& dataset, double teacher_fraction,
                  std::uint64_t seed) {
  Rng rng(seed, streams::kDataset + 100);
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t r = 0; r < dataset.labels.size(); ++r) {
    by_class[dataset.labels[r]].push_back(r);
  }
  dataset.splits.assign(dataset.labels.size(), Split::kEvalSeen);
  for (auto& [label, rows] : by_class) {
    rng.Shuffle(rows);
    const auto n_train = static_cast<std::size_t>(
        std::llround(teacher_fraction * static_cast<double>(rows.size())));
    const bool unseen = dataset.IsUnseen(label);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i < n_train) {
        dataset.splits[rows[i]] =
            unseen ? Split::kTeacherTrainUnseen : Split::kTeacherTrainSeen;
      } else {
        dataset.splits[rows[i]] = unseen ? Split::kEvalUnseen : Split::kEvalSeen;
      }
    }
  }
}

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitCells(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(Trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string Where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

double ParseDouble(const std::string& cell, const std::filesystem::path& path,
                   std::size_t line) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError(Where(path, line) + ": non-numeric cell '" + cell + "'");
  }
  return v;
}

int ParseInt(const std::string& cell, const std::filesystem::path& path,
             std::size_t line) {
  int v = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (cell.empty() || ec != std::errc() || ptr != end || v < 0) {
    throw ParseError(Where(path, line) + ": invalid label '" + cell + "'");
  }
  return v;
}

// Reads a numeric CSV into a matrix, requiring a constant column count.
Matrix ReadNumericCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open");
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto cells = SplitCells(line);
    if (rows == 0) {
      cols = cells.size();
    } else if (cells.size() != cols) {
      throw ParseError(Where(path, line_no) + ": ragged row with " +
                       std::to_string(cells.size()) + " columns, expected " +
                       std::to_string(cols));
    }
    for (const auto& c : cells) data.push_back(ParseDouble(c, path, line_no));
    ++rows;
  }
  return Matrix(rows, cols, std::move(data));
}

void WriteDouble(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

void WriteMatrixCsv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path.string() + ": cannot open for writing");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ',';
      WriteDouble(out, m(r, c));
    }
    out << '\n';
  }
}

}  // namespace

std::string TeacherModeName(TeacherMode mode) {
  return mode == TeacherMode::kOmniscient ? "omniscient" : "quasi_omniscient";
}

TeacherMode ParseTeacherMode(const std::string& name) {
  if (name == "omniscient" || name == "om") return TeacherMode::kOmniscient;
  if (name == "quasi_omniscient" || name == "quasi" || name == "q-om") {
    return TeacherMode::kQuasiOmniscient;
  }
  throw ConfigError("teacher_mode", "unknown teacher mode '" + name + "'");
}

std::string SplitName(Split split) {
  switch (split) {
    case Split::kTeacherTrainSeen:
      return "teacher_train_seen";
    case Split::kTeacherTrainUnseen:
      return "teacher_train_unseen";
    case Split::kEvalSeen:
      return "eval_seen";
    case Split::kEvalUnseen:
      return "eval_unseen";
  }
  return "eval_seen";
}

Split ParseSplit(const std::string& name) {
  if (name == "teacher_train_seen") return Split::kTeacherTrainSeen;
  if (name == "teacher_train_unseen") return Split::kTeacherTrainUnseen;
  if (name == "eval_seen") return Split::kEvalSeen;
  if (name == "eval_unseen") return Split::kEvalUnseen;
  throw ParseError("unknown split '" + name + "'");
}

bool ZslDataset::IsUnseen(int label) const {
  return std::find(unseen_classes.begin(), unseen_classes.end(), label) !=
         unseen_classes.end();
}

void ZslDataset::Validate() const {
  if (features.rows() != labels.size()) {
    throw DataError("dataset: " + std::to_string(features.rows()) +
                    " feature rows vs " + std::to_string(labels.size()) +
                    " labels");
  }
  if (splits.size() != labels.size() || provenance.size() != labels.size()) {
    throw DataError("dataset: split/provenance tags do not cover every row");
  }
  std::set<int> seen(seen_classes.begin(), seen_classes.end());
  for (int u : unseen_classes) {
    if (seen.count(u)) {
      throw DataError("dataset: class " + std::to_string(u) +
                      " is both seen and unseen");
    }
  }
  const auto k = static_cast<int>(num_classes());
  for (int c : seen_classes) {
    if (c < 0 || c >= k) {
      throw DataError("dataset: seen class " + std::to_string(c) +
                      " has no semantics row");
    }
  }
  for (int c : unseen_classes) {
    if (c < 0 || c >= k) {
      throw DataError("dataset: unseen class " + std::to_string(c) +
                      " has no semantics row");
    }
  }
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const int y = labels[r];
    if (y < 0 || y >= k) {
      throw DataError("dataset: class " + std::to_string(y) +
                      " has no semantics row (semantics covers ids 0-" +
                      std::to_string(k - 1) + ")");
    }
    const bool unseen = IsUnseen(y);
    if (!unseen && !seen.count(y)) {
      throw DataError("dataset: class " + std::to_string(y) +
                      " is neither seen nor unseen");
    }
    const bool split_unseen = splits[r] == Split::kTeacherTrainUnseen ||
                              splits[r] == Split::kEvalUnseen;
    if (unseen != split_unseen) {
      throw DataError("dataset: row " + std::to_string(r) + " of class " +
                      std::to_string(y) + " carries split " +
                      SplitName(splits[r]));
    }
  }
}

std::vector<int> TaskInfo::AllClasses() const {
  std::vector<int> all = seen_classes;
  all.insert(all.end(), unseen_classes.begin(), unseen_classes.end());
  std::sort(all.begin(), all.end());
  return all;
}

TaskInfo PublicTaskInfo(const ZslDataset& dataset) {
  TaskInfo info{dataset.semantics, dataset.seen_classes,
                dataset.unseen_classes};
  info.semantics.set_origin(Origin::kUntagged);
  return info;
}

DataView TeacherView(const ZslDataset& dataset, TeacherMode mode) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < dataset.num_rows(); ++r) {
    const Split s = dataset.splits[r];
    if (s == Split::kTeacherTrainSeen ||
        (mode == TeacherMode::kOmniscient && s == Split::kTeacherTrainUnseen)) {
      rows.push_back(r);
    }
  }
  return MakeView(dataset, rows);
}

DataView EvalView(const ZslDataset& dataset, TeacherMode mode,
                  ClassGroup group) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < dataset.num_rows(); ++r) {
    const Split s = dataset.splits[r];
    if (group == ClassGroup::kSeen) {
      if (s == Split::kEvalSeen) rows.push_back(r);
    } else if (s == Split::kEvalUnseen ||
               (mode == TeacherMode::kQuasiOmniscient &&
                s == Split::kTeacherTrainUnseen)) {
      rows.push_back(r);
    }
  }
  return MakeView(dataset, rows);
}

void SyntheticSpec::Validate() const {
  if (num_seen <= 0) throw ConfigError("num_seen", "must be > 0");
  if (num_unseen <= 0) throw ConfigError("num_unseen", "must be > 0");
  if (feature_dim <= 0) throw ConfigError("feature_dim", "must be > 0");
  if (semantic_dim <= 0) throw ConfigError("semantic_dim", "must be > 0");
  if (samples_per_class <= 0) {
    throw ConfigError("samples_per_class", "must be > 0");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std", "must be >= 0");
  if (!(semantic_scale > 0.0)) {
    throw ConfigError("semantic_scale", "must be > 0");
  }
  if (!std::isfinite(feature_offset)) {
    throw ConfigError("feature_offset", "must be finite");
  }
  if (!(teacher_train_fraction > 0.0 && teacher_train_fraction < 1.0)) {
    throw ConfigError("teacher_train_fraction", "must be in (0, 1)");
  }
}

ZslDataset GenerateSynthetic(const SyntheticSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed, streams::kDataset);
  const auto k = static_cast<std::size_t>(spec.num_seen + spec.num_unseen);
  const auto dx = static_cast<std::size_t>(spec.feature_dim);
  const auto da = static_cast<std::size_t>(spec.semantic_dim);
  const auto per_class = static_cast<std::size_t>(spec.samples_per_class);

  ZslDataset ds;
  ds.semantics = Matrix(k, da);
  for (std::size_t c = 0; c < k; ++c) {
    auto row = ds.semantics.row(c);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : row) {
        v = rng.Normal();
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : row) v = v / norm * spec.semantic_scale;
  }
  Matrix w(dx, da);
  for (double& v : w.data()) v = rng.Normal();
  const Matrix centers = MatMulTransB(ds.semantics, w);  // k x dx

  ds.features = Matrix(k * per_class, dx);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      auto row = ds.features.row(c * per_class + i);
      for (std::size_t j = 0; j < dx; ++j) {
        const double mean = std::max(0.0, centers(c, j) + spec.feature_offset);
        row[j] = std::max(0.0, mean + spec.noise_std * rng.Normal());
      }
      ds.labels.push_back(static_cast<int>(c));
    }
  }
  ds.features.set_origin(Origin::kOwnerData);
  for (int c = 0; c < spec.num_seen; ++c) ds.seen_classes.push_back(c);
  for (int c = spec.num_seen; c < static_cast<int>(k); ++c) {
    ds.unseen_classes.push_back(c);
  }
  ds.provenance.assign(ds.labels.size(), SourceKind::kSynthetic);
  AssignSplits(ds, spec.teacher_train_fraction, spec.seed);
  ds.Validate();
  return ds;
}

DatasetPaths DatasetPaths::InDirectory(const std::filesystem::path& dir) {
  return {dir / "features.csv", dir / "labels.csv", dir / "semantics.csv"};
}

ZslDataset LoadCsv(const DatasetPaths& paths, const SplitPlan& plan) {
  ZslDataset ds;
  ds.features = ReadNumericCsv(paths.features);
  ds.semantics = ReadNumericCsv(paths.semantics);

  std::ifstream in(paths.labels);
  if (!in) throw ParseError(paths.labels.string() + ": cannot open");
  std::vector<std::optional<Split>> parsed_splits;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto cells = SplitCells(line);
    if (cells.size() > 2) {
      throw ParseError(Where(paths.labels, line_no) +
                       ": expected 'label' or 'label,split'");
    }
    const int y = ParseInt(cells[0], paths.labels, line_no);
    if (static_cast<std::size_t>(y) >= ds.semantics.rows()) {
      throw ParseError(Where(paths.labels, line_no) + ": class " +
                       std::to_string(y) + " has no semantics row (" +
                       std::to_string(ds.semantics.rows()) + " rows in " +
                       paths.semantics.string() + ")");
    }
    ds.labels.push_back(y);
    if (cells.size() == 2) {
      try {
        parsed_splits.emplace_back(ParseSplit(cells[1]));
      } catch (const ParseError& e) {
        throw ParseError(Where(paths.labels, line_no) + ": " + e.what());
      }
    } else {
      parsed_splits.emplace_back(std::nullopt);
    }
  }
  if (ds.labels.size() != ds.features.rows()) {
    throw ParseError(paths.labels.string() + ": " +
                     std::to_string(ds.labels.size()) + " labels but " +
                     std::to_string(ds.features.rows()) + " feature rows");
  }

  const bool has_split =
      !parsed_splits.empty() &&
      std::all_of(parsed_splits.begin(), parsed_splits.end(),
                  [](const auto& s) { return s.has_value(); });
  const bool mixed = !has_split && std::any_of(parsed_splits.begin(),
                                               parsed_splits.end(),
                                               [](const auto& s) {
                                                 return s.has_value();
                                               });
  if (mixed) {
    throw ParseError(paths.labels.string() +
                     ": split column present on some rows only");
  }

  std::set<int> present(ds.labels.begin(), ds.labels.end());
  std::set<int> unseen;
  if (has_split) {
    for (std::size_t r = 0; r < ds.labels.size(); ++r) {
      const Split s = *parsed_splits[r];
      if (s == Split::kTeacherTrainUnseen || s == Split::kEvalUnseen) {
        unseen.insert(ds.labels[r]);
      }
    }
  } else {
    unseen.insert(plan.unseen_classes.begin(), plan.unseen_classes.end());
  }
  for (int c = 0; c < static_cast<int>(ds.semantics.rows()); ++c) {
    if (unseen.count(c)) {
      ds.unseen_classes.push_back(c);
    } else if (present.count(c)) {
      ds.seen_classes.push_back(c);
    }
  }
  ds.features.set_origin(Origin::kOwnerData);
  ds.provenance.assign(ds.labels.size(), SourceKind::kReal);
  if (has_split) {
    for (const auto& s : parsed_splits) ds.splits.push_back(*s);
  } else {
    if (!(plan.teacher_train_fraction > 0.0 &&
          plan.teacher_train_fraction < 1.0)) {
      throw ConfigError("teacher_train_fraction", "must be in (0, 1)");
    }
    AssignSplits(ds, plan.teacher_train_fraction, plan.seed);
  }
  ds.Validate();
  return ds;
}

void ExportCsv(const ZslDataset& dataset, const DatasetPaths& paths) {
  WriteMatrixCsv(dataset.features, paths.features);
  WriteMatrixCsv(dataset.semantics, paths.semantics);
  std::ofstream out(paths.labels, std::ios::binary);
  if (!out) throw ParseError(paths.labels.string() + ": cannot open");
  for (std::size_t r = 0; r < dataset.num_rows(); ++r) {
    out << dataset.labels[r] << ',' << SplitName(dataset.splits[r]) << '\n';
  }
}

}  // namespace sgzsl
