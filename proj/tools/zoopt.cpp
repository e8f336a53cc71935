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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zoopt/bench/config.hpp"
#include "zoopt/bench/report.hpp"
#include "zoopt/bench/run.hpp"
#include "zoopt/memcost.hpp"

namespace {

using namespace zoopt;

constexpr int kExitRunFailed = 1;
constexpr int kExitConfig = 2;

struct RunArgs {
  std::string config;
  std::string out = "out";
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

std::vector<RunConfig> LoadRuns(const RunArgs& args, bool allow_grid) {
  ConfigFile file = ConfigFile::Load(args.config);
  if (!allow_grid && !file.grid.empty()) {
    throw ConfigError("config has grid axes; use the grid subcommand");
  }
  if (args.seed) {
    if (file.grid.count("run.master_seed")) {
      throw ConfigError("--seed conflicts with the run.master_seed grid axis");
    }
    file.values["run.master_seed"] = std::to_string(*args.seed);
  }
  std::vector<RunConfig> runs = ExpandGrid(file);
  if (runs.empty()) throw ConfigError("grid is empty");
  return runs;
}

int Finish(const std::vector<RunRecord>& records, const RunArgs& args) {
  for (const auto& r : records) WriteRunFiles(r, args.out);
  WriteReport(records, args.out, "csv");
  if (args.format != "csv") WriteReport(records, args.out, args.format);
  bool ok = true;
  for (const auto& r : records) {
    const RunSummary& s = r.summary;
    std::printf("%-48s %-6s loss=%s metric=%s queries=%llu\n", r.name.c_str(),
                s.failed ? "FAILED" : "ok",
                FormatNumber(s.final_train_loss).c_str(),
                FormatNumber(s.final_test_metric).c_str(),
                static_cast<unsigned long long>(s.queries.total()));
    if (s.failed) {
      std::fprintf(stderr, "%s: %s\n", r.name.c_str(), s.error.c_str());
      ok = false;
    }
  }
  return ok ? 0 : kExitRunFailed;
}

int CmdRun(const RunArgs& args) {
  const auto runs = LoadRuns(args, false);
  return Finish({ExecuteRun(runs.front())}, args);
}

int CmdGrid(const RunArgs& args) {
  const auto runs = LoadRuns(args, true);
  const std::size_t workers = args.workers ? *args.workers : WorkersFromEnv();
  const auto records = ExecuteAll(runs, workers);
  const int code = Finish(records, args);
  if (auto best = SelectBest(records)) {
    const RunRecord& r = records[*best];
    std::string text = "best = " + r.name + "\n";
    for (const auto& [k, v] : r.overrides) text += k + " = " + v + "\n";
    WriteTextFile(
        (std::filesystem::path(args.out) / "best.txt").string(), text);
    std::printf("best: %s (final test metric %s)\n", r.name.c_str(),
                FormatNumber(r.summary.final_test_metric).c_str());
  } else {
    std::printf("best: none (every run failed)\n");
  }
  return code;
}

std::vector<double> ParseLengths(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !(v > 0.0)) {
      throw ConfigError("--sweep: bad length '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--sweep needs at least one length");
  return out;
}

struct MemArgs {
  std::string arch;
  std::string kind = "all";
  std::string precision = "full";
  std::optional<double> batch;
  std::optional<double> seq_len;
  bool lora = false;
  std::string sweep;
  std::string format = "text";
};

int CmdMemcost(const MemArgs& args) {
  const ArchSpec arch = ArchSpec::Load(args.arch);
  const PrecisionMode precision = ParsePrecisionMode(args.precision);
  const double batch = args.batch ? *args.batch : arch.nominal_batch;
  const double seq_len = args.seq_len ? *args.seq_len : arch.nominal_seq_len;
  std::vector<MemKind> kinds;
  if (args.kind == "all") {
    for (MemKind k : AllMemKinds()) {
      if (IsCompatible(k, precision)) kinds.push_back(k);
    }
  } else {
    kinds.push_back(ParseMemKind(args.kind));
  }
  const bool csv = args.format == "csv";
  if (!csv && args.format != "text") {
    throw ConfigError("--format must be text or csv for memcost");
  }

  if (!args.sweep.empty()) {
    if (args.lora) throw ConfigError("--sweep models full fine-tuning only");
    const SeqLenSweep sweep =
        SweepSeqLen(arch, kinds, ParseLengths(args.sweep), precision, batch);
    if (csv) {
      std::printf("kind");
      for (double l : sweep.lengths) std::printf(",%s", FormatNumber(l).c_str());
      std::printf("\n");
      for (std::size_t k = 0; k < sweep.kinds.size(); ++k) {
        std::printf("%s", std::string(ToString(sweep.kinds[k])).c_str());
        for (double b : sweep.peak_bytes[k]) {
          std::printf(",%s", FormatNumber(b).c_str());
        }
        std::printf("\n");
      }
    } else {
      std::printf("%-20s", "seq_len");
      for (double l : sweep.lengths) std::printf(" %9s", FormatNumber(l).c_str());
      std::printf("\n");
      for (std::size_t k = 0; k < sweep.kinds.size(); ++k) {
        std::printf("%-20s", std::string(ToString(sweep.kinds[k])).c_str());
        for (double b : sweep.peak_bytes[k]) {
          std::printf(" %9.2f", b / kBytesPerGB);
        }
        std::printf("\n");
      }
      std::printf("(peak memory in GB, batch %s, %s precision)\n",
                  FormatNumber(batch).c_str(),
                  std::string(ToString(precision)).c_str());
    }
    if (sweep.knee_length) {
      std::printf("crossover length (first layer activation > parameters): %s\n",
                  FormatNumber(*sweep.knee_length).c_str());
    }
    if (sweep.overtake_length) {
      std::printf("total activations exceed total parameters at length: %s\n",
                  FormatNumber(*sweep.overtake_length).c_str());
    }
    return 0;
  }

  if (csv) {
    std::printf(
        "kind,precision,scheme,batch,seq_len,weight_bytes,opt_state_bytes,"
        "dynamic_bytes,peak_bytes\n");
  }
  for (MemKind kind : kinds) {
    const MemoryReport r =
        args.lora ? PeakMemoryLora(arch, kind, precision, batch, seq_len)
                  : PeakMemoryFt(arch, kind, precision, batch, seq_len);
    const std::string name(ToString(kind));
    if (csv) {
      std::printf("%s,%s,%s,%s,%s,%s,%s,%s,%s\n", name.c_str(),
                  std::string(ToString(precision)).c_str(),
                  args.lora ? "lora" : "full", FormatNumber(batch).c_str(),
                  FormatNumber(seq_len).c_str(),
                  FormatNumber(r.weight_bytes).c_str(),
                  FormatNumber(r.opt_state_bytes).c_str(),
                  FormatNumber(r.dynamic_bytes).c_str(),
                  FormatNumber(r.peak_bytes).c_str());
    } else {
      std::printf(
          "%-20s weights %8.2f GB  optimizer state %8.2f GB  dynamic %8.2f GB"
          "  peak %8.2f GB\n",
          name.c_str(), r.weight_bytes / kBytesPerGB,
          r.opt_state_bytes / kBytesPerGB, r.dynamic_bytes / kBytesPerGB,
          r.peak_bytes / kBytesPerGB);
    }
  }
  return 0;
}

void AddRunOptions(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("--config", args.config, "run config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--format", args.format, "extra report format")
      ->check(CLI::IsMember({"csv", "jsonl", "svg"}));
  cmd->add_option("--seed", args.seed, "override run.master_seed");
  cmd->add_option("--workers", args.workers,
                  "parallel runs (default: ZOOPT_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order optimization benchmark harness"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "train one configuration");
  AddRunOptions(run, run_args);

  RunArgs grid_args;
  auto* grid = app.add_subcommand("grid", "train every point of a grid");
  AddRunOptions(grid, grid_args);

  std::string report_out = "out";
  std::string report_format = "csv";
  auto* report = app.add_subcommand("report", "rebuild reports from runs/");
  report->add_option("--out", report_out, "output directory holding runs/");
  report->add_option("--format", report_format, "report format")
      ->check(CLI::IsMember({"csv", "jsonl", "svg"}));

  MemArgs mem_args;
  auto* mem = app.add_subcommand("memcost", "modeled peak memory");
  mem->add_option("--arch", mem_args.arch, "architecture JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  mem->add_option("--kind", mem_args.kind, "memory row or 'all'");
  mem->add_option("--precision", mem_args.precision, "full, f16 or fp16")
      ->check(CLI::IsMember({"full", "f16", "fp16"}));
  mem->add_option("--batch", mem_args.batch, "batch size")
      ->check(CLI::PositiveNumber);
  mem->add_option("--seq-len", mem_args.seq_len, "sequence length")
      ->check(CLI::PositiveNumber);
  mem->add_flag("--lora", mem_args.lora, "LoRA fine-tuning rows");
  mem->add_option("--sweep", mem_args.sweep,
                  "comma-separated sequence lengths");
  mem->add_option("--format", mem_args.format, "text or csv")
      ->check(CLI::IsMember({"text", "csv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return CmdRun(run_args);
    if (*grid) return CmdGrid(grid_args);
    if (*report) {
      WriteReport(ReadRunFiles(report_out), report_out, report_format);
      return 0;
    }
    if (*mem) return CmdMemcost(mem_args);
  } catch (const zoopt::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const zoopt::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRunFailed;
  }
  return 0;
}
