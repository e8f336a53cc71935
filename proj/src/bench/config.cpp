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

#include "zoopt/bench/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "zoopt/tasks/dataset.hpp"
#include "zoopt/tasks/logistic.hpp"
#include "zoopt/tasks/mlp.hpp"
#include "zoopt/tasks/quadratic.hpp"

namespace zoopt {

namespace {

// Every accepted key with its default ("" means unset).
const std::map<std::string, std::string>& Defaults() {
  static const std::map<std::string, std::string> defaults = {
      {"name", "run"},
      {"task.kind", "quadratic"},
      {"task.dim", "10"},
      {"task.kappa", "10"},
      {"task.layers", "1"},
      {"task.rotation", "global"},
      {"task.seed", "0"},
      {"task.data", "synth"},
      {"task.format", "csv"},
      {"task.n", "2000"},
      {"task.features", "20"},
      {"task.classes", "2"},
      {"task.margin", "2"},
      {"task.test_fraction", "0.2"},
      {"task.batch_size", "32"},
      {"task.l2", "0"},
      {"task.hidden", "16,16,16"},
      {"task.rank", "2"},
      {"task.base_seed", "0"},
      {"task.base_steps", "0"},
      {"task.base_lr", "0.1"},
      {"optimizer.kind", "zo_sgd"},
      {"optimizer.lr", "0.001"},
      {"optimizer.beta1", "0.9"},
      {"optimizer.beta2", "0.999"},
      {"optimizer.eps", "1e-8"},
      {"optimizer.mu", "0.001"},
      {"optimizer.q", "1"},
      {"optimizer.sign_mode", "elementwise"},
      {"rge.representation", "implicit"},
      {"sparsity.ratio", ""},
      {"sparsity.resample", "true"},
      {"sparsity.recompute_ratios", "true"},
      {"blocks.count", ""},
      {"hybrid.k", ""},
      {"hybrid.fo_lr", ""},
      {"run.iterations", "1000"},
      {"run.eval_every", "100"},
      {"run.master_seed", "0"},
      {"run.dataset_seed", "0"},
  };
  return defaults;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double ToDouble(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t ToUint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v +
                      "'");
  }
  return out;
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string SanitizeName(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
                    c == '_' || c == '-' || c == '=';
    out.push_back(ok ? c : '_');
  }
  return out;
}

}  // namespace

ConfigFile ConfigFile::Parse(const std::string& text,
                             const std::string& base_dir) {
  ConfigFile file;
  file.base_dir = base_dir;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string content =
        Trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = Trim(content.substr(0, eq));
    const std::string value = Trim(content.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    if (key.rfind("grid.", 0) == 0) {
      const std::string target = key.substr(5);
      if (!Defaults().count(target) || target == "name") {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": unknown grid axis '" + target + "'");
      }
      auto values = SplitList(value);
      if (values.empty()) {
        throw ConfigError("line " + std::to_string(line_no) + ": grid axis '" +
                          target + "' has no values");
      }
      if (file.grid.count(target)) {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": duplicate grid axis '" + target + "'");
      }
      file.grid[target] = std::move(values);
      continue;
    }
    if (!Defaults().count(key)) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" +
                        key + "'");
    }
    if (file.values.count(key)) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");
    }
    file.values[key] = value;
  }
  return file;
}

ConfigFile ConfigFile::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const auto parent = std::filesystem::path(path).parent_path();
  return Parse(text.str(), parent.empty() ? "." : parent.string());
}

std::string RunConfig::Canonical() const {
  std::string out;
  for (const auto& [key, value] : settings) {
    out += key + "=" + value + "\n";
  }
  return out;
}

RunConfig MakeRunConfig(const std::map<std::string, std::string>& values,
                        const std::string& base_dir) {
  std::map<std::string, std::string> s;
  for (const auto& [key, value] : Defaults()) {
    if (!value.empty()) s[key] = value;
  }
  for (const auto& [key, value] : values) {
    if (!Defaults().count(key)) throw ConfigError("unknown key '" + key + "'");
    if (value.empty()) {
      s.erase(key);
    } else {
      s[key] = value;
    }
  }
  auto get = [&](const std::string& key) -> std::string {
    auto it = s.find(key);
    return it == s.end() ? std::string() : it->second;
  };

  RunConfig rc;
  rc.name = SanitizeName(get("name"));
  if (rc.name.empty()) throw ConfigError("name must not be empty");

  TaskSpec& t = rc.task;
  t.kind = get("task.kind");
  if (t.kind != "quadratic" && t.kind != "logistic" && t.kind != "mlp" &&
      t.kind != "lora_mlp") {
    throw ConfigError("task.kind: unknown task '" + t.kind + "'");
  }
  t.dim = static_cast<Index>(ToUint("task.dim", get("task.dim")));
  t.kappa = ToDouble("task.kappa", get("task.kappa"));
  t.layers = ToUint("task.layers", get("task.layers"));
  t.rotation = get("task.rotation");
  if (t.rotation != "global" && t.rotation != "per_layer") {
    throw ConfigError("task.rotation: expected global or per_layer");
  }
  t.seed = ToUint("task.seed", get("task.seed"));
  t.data = get("task.data");
  if (t.data != "synth") {
    const std::filesystem::path p(t.data);
    t.data = p.is_absolute() ? p.string()
                             : (std::filesystem::path(base_dir) / p).string();
  }
  t.format = get("task.format");
  ParseDatasetFormat(t.format);
  t.n = static_cast<Index>(ToUint("task.n", get("task.n")));
  t.features = static_cast<Index>(ToUint("task.features", get("task.features")));
  t.classes = static_cast<int>(ToUint("task.classes", get("task.classes")));
  t.margin = ToDouble("task.margin", get("task.margin"));
  t.test_fraction = ToDouble("task.test_fraction", get("task.test_fraction"));
  t.batch_size =
      static_cast<Index>(ToUint("task.batch_size", get("task.batch_size")));
  t.l2 = ToDouble("task.l2", get("task.l2"));
  t.hidden.clear();
  for (const auto& w : SplitList(get("task.hidden"))) {
    t.hidden.push_back(static_cast<Index>(ToUint("task.hidden", w)));
  }
  t.rank = static_cast<Index>(ToUint("task.rank", get("task.rank")));
  t.base_seed = ToUint("task.base_seed", get("task.base_seed"));
  t.base_steps = ToUint("task.base_steps", get("task.base_steps"));
  t.base_lr = ToDouble("task.base_lr", get("task.base_lr"));

  TrainOptions& o = rc.train;
  try {
    o.kind = ParseOptimizerKind(get("optimizer.kind"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("optimizer.kind: ") + e.what());
  }
  o.hp.lr = ToDouble("optimizer.lr", get("optimizer.lr"));
  o.hp.beta1 = ToDouble("optimizer.beta1", get("optimizer.beta1"));
  o.hp.beta2 = ToDouble("optimizer.beta2", get("optimizer.beta2"));
  o.hp.eps = ToDouble("optimizer.eps", get("optimizer.eps"));
  o.hp.mu = ToDouble("optimizer.mu", get("optimizer.mu"));
  o.hp.q = static_cast<int>(ToUint("optimizer.q", get("optimizer.q")));
  const std::string sign_mode = get("optimizer.sign_mode");
  if (sign_mode == "elementwise") {
    o.hp.sign_mode = SignMode::kElementwise;
  } else if (sign_mode == "slope") {
    o.hp.sign_mode = SignMode::kSlopeTimesDirection;
  } else {
    throw ConfigError("optimizer.sign_mode: expected elementwise or slope");
  }
  try {
    o.hp.Validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("optimizer: ") + e.what());
  }

  const std::string rep = get("rge.representation");
  if (rep == "dense") {
    o.representation = Representation::kDense;
  } else if (rep == "implicit") {
    o.representation = Representation::kImplicit;
  } else {
    throw ConfigError("rge.representation: expected dense or implicit");
  }

  if (!get("sparsity.ratio").empty()) {
    SparsityConfig sp;
    sp.global_ratio = ToDouble("sparsity.ratio", get("sparsity.ratio"));
    if (!(sp.global_ratio >= 0.0 && sp.global_ratio < 1.0)) {
      throw ConfigError("sparsity.ratio: must lie in [0, 1)");
    }
    sp.resample = ToBool("sparsity.resample", get("sparsity.resample"));
    sp.recompute_ratios =
        ToBool("sparsity.recompute_ratios", get("sparsity.recompute_ratios"));
    o.sparsity = sp;
  }
  if (!get("blocks.count").empty()) {
    rc.block_count = ToUint("blocks.count", get("blocks.count"));
    if (*rc.block_count == 0) throw ConfigError("blocks.count: must be >= 1");
  }
  if (!get("hybrid.k").empty()) {
    if (o.kind != OptimizerKind::kZoSgd) {
      throw ConfigError(
          "hybrid.k: hybrid training pairs zo_sgd with fo_sgd; set "
          "optimizer.kind = zo_sgd");
    }
    if (!get("sparsity.ratio").empty() || !get("blocks.count").empty()) {
      throw ConfigError("hybrid.k cannot be combined with sparsity or blocks");
    }
    HybridConfig h;
    h.k = ToUint("hybrid.k", get("hybrid.k"));
    h.zo_hp = o.hp;
    h.fo_hp = o.hp;
    if (!get("hybrid.fo_lr").empty()) {
      h.fo_hp.lr = ToDouble("hybrid.fo_lr", get("hybrid.fo_lr"));
    }
    h.representation = o.representation;
    o.hybrid = h;
  } else if (!get("hybrid.fo_lr").empty()) {
    throw ConfigError("hybrid.fo_lr needs hybrid.k");
  }
  if ((o.sparsity || rc.block_count) && !IsZerothOrder(o.kind)) {
    throw ConfigError(
        "sparsity and blocks apply to zeroth-order optimizers only");
  }

  o.iterations = ToUint("run.iterations", get("run.iterations"));
  o.eval_every = ToUint("run.eval_every", get("run.eval_every"));
  o.master_seed = ToUint("run.master_seed", get("run.master_seed"));
  o.dataset_seed = ToUint("run.dataset_seed", get("run.dataset_seed"));

  rc.settings = std::move(s);
  rc.settings["name"] = rc.name;
  return rc;
}

std::vector<RunConfig> ExpandGrid(const ConfigFile& file) {
  std::vector<std::map<std::string, std::string>> points = {{}};
  for (const auto& [axis, values] : file.grid) {
    std::vector<std::map<std::string, std::string>> next;
    for (const auto& point : points) {
      for (const auto& v : values) {
        auto p = point;
        p[axis] = v;
        next.push_back(std::move(p));
      }
    }
    points = std::move(next);
  }
  std::vector<RunConfig> out;
  std::set<std::string> names;
  for (const auto& point : points) {
    auto values = file.values;
    std::string name = values.count("name") ? values["name"] : "run";
    for (const auto& [axis, v] : point) {
      values[axis] = v;
      name += "__" + axis + "=" + v;
    }
    values["name"] = name;
    RunConfig rc = MakeRunConfig(values, file.base_dir);
    rc.overrides = point;
    if (!names.insert(rc.name).second) {
      throw ConfigError("grid produces duplicate run name '" + rc.name + "'");
    }
    out.push_back(std::move(rc));
  }
  return out;
}

namespace {

TrainTestSplit LoadSplit(const TaskSpec& spec) {
  Dataset data = spec.data == "synth"
                     ? SynthClassification(spec.n, spec.features, spec.classes,
                                           spec.margin, spec.seed)
                     : LoadDataset(spec.data, ParseDatasetFormat(spec.format));
  return SplitDataset(data, spec.test_fraction, spec.seed);
}

MlpTask BuildMlp(const TaskSpec& spec) {
  TrainTestSplit split = LoadSplit(spec);
  std::vector<Index> widths = {split.train.dim()};
  widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
  widths.push_back(std::max(split.train.num_classes, split.test.num_classes));
  return MlpTask(std::move(split.train), std::move(split.test), widths,
                 spec.batch_size);
}

}  // namespace

std::unique_ptr<Objective> BuildTask(const TaskSpec& spec) {
  if (spec.kind == "quadratic") {
    QuadraticOptions q;
    q.dim = spec.dim;
    q.kappa = spec.kappa;
    q.seed = spec.seed;
    q.n_layers = spec.layers;
    q.rotation =
        spec.rotation == "per_layer" ? Rotation::kPerLayer : Rotation::kGlobal;
    return std::make_unique<QuadraticTask>(QuadraticTask::Make(q));
  }
  if (spec.kind == "logistic") {
    TrainTestSplit split = LoadSplit(spec);
    return std::make_unique<LogisticTask>(std::move(split.train),
                                          std::move(split.test), spec.l2,
                                          spec.batch_size);
  }
  if (spec.kind == "mlp") {
    return std::make_unique<MlpTask>(BuildMlp(spec));
  }
  if (spec.kind == "lora_mlp") {
    MlpTask base = BuildMlp(spec);
    Vector base_params = base.InitialPoint(spec.base_seed);
    if (spec.base_steps > 0) {
      TrainOptions pre;
      pre.kind = OptimizerKind::kFoSgd;
      pre.hp.lr = spec.base_lr;
      pre.iterations = spec.base_steps;
      pre.master_seed = spec.base_seed;
      pre.dataset_seed = spec.base_seed;
      Trajectory t = Train(base, pre, base_params);
      if (t.failed) throw ConfigError("base model training failed: " + t.error);
      base_params = t.final_params;
    }
    return std::make_unique<LoraMlpTask>(std::move(base),
                                         std::move(base_params), spec.rank);
  }
  throw ConfigError("unknown task '" + spec.kind + "'");
}

}  // namespace zoopt
