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

#ifndef ZOOPT_BENCH_REPORT_HPP_
#define ZOOPT_BENCH_REPORT_HPP_

#include <string>
#include <vector>

#include "zoopt/bench/run.hpp"

namespace zoopt {

// One JSON object per line: a "config" line, one "row" line per recorded
// step and a closing "summary" line. Wall-clock times are left out so equal
// configs give byte-identical files; they go to the timing file instead.
std::string RecordJsonl(const RunRecord& record);
std::string TimingJsonl(const RunRecord& record);
RunRecord ParseRecordJsonl(const std::string& text);

std::string SummaryCsv(const std::vector<RunRecord>& records);

// Training loss against step.
std::string LossChartSvg(const RunRecord& record);
// Final test metric against the query budget q, one series per optimizer,
// averaged over runs that share (optimizer, q).
std::string QueryBudgetSvg(const std::vector<RunRecord>& records);

// Writes runs/<name>.jsonl and runs/<name>.timing.jsonl under `out_dir`.
void WriteRunFiles(const RunRecord& record, const std::string& out_dir);
std::vector<RunRecord> ReadRunFiles(const std::string& out_dir);

// format: "csv" writes summary.csv, "jsonl" writes summary.jsonl, "svg"
// writes plots/<name>.svg per record and plots/query_budget.svg.
void WriteReport(const std::vector<RunRecord>& records,
                 const std::string& out_dir, const std::string& format);

std::string FormatNumber(double v);
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace zoopt

#endif  // ZOOPT_BENCH_REPORT_HPP_
