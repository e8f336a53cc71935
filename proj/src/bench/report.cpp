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

#include "zoopt/bench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace zoopt {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string FormatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void WriteTextFile(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

namespace {

Json Number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double ReadNumber(const Json& j) {
  return j.is_number() ? j.get<double>()
                       : std::numeric_limits<double>::quiet_NaN();
}

Json QueriesJson(const QueryCounts& q) {
  Json j;
  j["evals"] = q.evals;
  j["grads"] = q.grads;
  j["jvps"] = q.jvps;
  j["partial_grads"] = q.partial_grads;
  j["total"] = q.total();
  return j;
}

}  // namespace

std::string RecordJsonl(const RunRecord& record) {
  std::string out;
  Json config;
  config["type"] = "config";
  config["name"] = record.name;
  config["settings"] = record.settings;
  config["overrides"] = record.overrides;
  out += config.dump() + "\n";
  for (const auto& row : record.rows) {
    Json j;
    j["type"] = "row";
    j["step"] = row.step;
    j["train_loss"] = Number(row.train_loss);
    j["test_metric"] = Number(row.test_metric);
    j["cumulative_queries"] = row.cumulative_queries;
    out += j.dump() + "\n";
  }
  const RunSummary& s = record.summary;
  Json j;
  j["type"] = "summary";
  j["status"] = s.failed ? "failed" : "ok";
  j["error"] = s.error;
  j["final_train_loss"] = Number(s.final_train_loss);
  j["final_test_metric"] = Number(s.final_test_metric);
  j["best_test_metric"] = Number(s.best_test_metric);
  j["higher_is_better"] = s.higher_is_better;
  j["queries"] = QueriesJson(s.queries);
  j["modeled_peak_bytes"] = Number(s.modeled_peak_bytes);
  out += j.dump() + "\n";
  return out;
}

std::string TimingJsonl(const RunRecord& record) {
  std::string out;
  for (const auto& row : record.rows) {
    Json j;
    j["step"] = row.step;
    j["wall_ms"] = Number(row.wall_ms);
    out += j.dump() + "\n";
  }
  return out;
}

RunRecord ParseRecordJsonl(const std::string& text) {
  RunRecord record;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool saw_summary = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(e.what(), line_no);
    }
    const std::string type = j.value("type", "");
    if (type == "config") {
      record.name = j.at("name").get<std::string>();
      record.settings =
          j.at("settings").get<std::map<std::string, std::string>>();
      record.overrides =
          j.at("overrides").get<std::map<std::string, std::string>>();
    } else if (type == "row") {
      TrajectoryRow row;
      row.step = j.at("step").get<std::uint64_t>();
      row.train_loss = ReadNumber(j.at("train_loss"));
      row.test_metric = ReadNumber(j.at("test_metric"));
      row.cumulative_queries = j.at("cumulative_queries").get<std::uint64_t>();
      record.rows.push_back(row);
    } else if (type == "summary") {
      RunSummary& s = record.summary;
      s.failed = j.at("status").get<std::string>() != "ok";
      s.error = j.at("error").get<std::string>();
      s.final_train_loss = ReadNumber(j.at("final_train_loss"));
      s.final_test_metric = ReadNumber(j.at("final_test_metric"));
      s.best_test_metric = ReadNumber(j.at("best_test_metric"));
      s.higher_is_better = j.at("higher_is_better").get<bool>();
      const Json& q = j.at("queries");
      s.queries.evals = q.at("evals").get<std::uint64_t>();
      s.queries.grads = q.at("grads").get<std::uint64_t>();
      s.queries.jvps = q.at("jvps").get<std::uint64_t>();
      s.queries.partial_grads = q.at("partial_grads").get<std::uint64_t>();
      s.modeled_peak_bytes = ReadNumber(j.at("modeled_peak_bytes"));
      saw_summary = true;
    } else {
      throw ParseError("unknown record line type '" + type + "'", line_no);
    }
  }
  if (!saw_summary) throw ParseError("record has no summary line", line_no);
  return record;
}

namespace {

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string Setting(const RunRecord& r, const std::string& key) {
  auto it = r.settings.find(key);
  return it == r.settings.end() ? "" : it->second;
}

}  // namespace

std::string SummaryCsv(const std::vector<RunRecord>& records) {
  std::string out =
      "name,task,optimizer,q,lr,status,iterations,final_train_loss,"
      "final_test_metric,best_test_metric,total_queries,evals,grads,jvps,"
      "partial_grads,modeled_peak_bytes,overrides\n";
  for (const auto& r : records) {
    const RunSummary& s = r.summary;
    std::string overrides;
    for (const auto& [k, v] : r.overrides) {
      if (!overrides.empty()) overrides += ";";
      overrides += k + "=" + v;
    }
    std::vector<std::string> fields = {
        r.name,
        Setting(r, "task.kind"),
        Setting(r, "optimizer.kind"),
        Setting(r, "optimizer.q"),
        Setting(r, "optimizer.lr"),
        s.failed ? "failed" : "ok",
        r.rows.empty() ? "0" : std::to_string(r.rows.back().step),
        FormatNumber(s.final_train_loss),
        FormatNumber(s.final_test_metric),
        FormatNumber(s.best_test_metric),
        std::to_string(s.queries.total()),
        std::to_string(s.queries.evals),
        std::to_string(s.queries.grads),
        std::to_string(s.queries.jvps),
        std::to_string(s.queries.partial_grads),
        FormatNumber(s.modeled_peak_bytes),
        overrides};
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out += ",";
      out += CsvField(fields[i]);
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

struct Series {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b",
                                    "#e377c2", "#17becf"};

std::string LineChart(const std::string& title, const std::string& x_label,
                      const std::string& y_label,
                      const std::vector<Series>& series, bool log_y,
                      const std::vector<double>& x_ticks) {
  const double width = 720, height = 440;
  const double left = 80, right = 180, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;

  auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
  double x_min = INFINITY, x_max = -INFINITY, y_min = INFINITY,
         y_max = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.ys[i]) || (log_y && s.ys[i] <= 0.0)) continue;
      x_min = std::min(x_min, s.xs[i]);
      x_max = std::max(x_max, s.xs[i]);
      y_min = std::min(y_min, ty(s.ys[i]));
      y_max = std::max(y_max, ty(s.ys[i]));
    }
  }
  if (!std::isfinite(x_min)) x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  if (x_max == x_min) x_min -= 1, x_max += 1;
  if (y_max == y_min) y_min -= 1, y_max += 1;
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) {
    return top + ph - (ty(y) - y_min) / (y_max - y_min) * ph;
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
      << "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" "
         "\"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << width << "\" height=\"" << height << "\" viewBox=\"0 0 " << width
      << " " << height << "\">\n"
      << "<title>" << Escape(title) << "</title>\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << Escape(title)
      << "</text>\n";

  // Axes and ticks.
  svg << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\""
      << left + pw << "\" y2=\"" << top + ph << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << top + ph << "\"/>\n</g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  std::vector<double> xt = x_ticks;
  if (xt.empty()) {
    for (int i = 0; i <= 4; ++i) xt.push_back(x_min + (x_max - x_min) * i / 4);
  }
  for (double x : xt) {
    svg << "<text class=\"xtick\" x=\"" << px(x) << "\" y=\"" << top + ph + 16
        << "\" text-anchor=\"middle\">" << FormatNumber(x) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = y_min + (y_max - y_min) * i / 4;
    const double label = log_y ? std::pow(10.0, v) : v;
    svg << "<text x=\"" << left - 6 << "\" y=\""
        << top + ph - (v - y_min) / (y_max - y_min) * ph + 4
        << "\" text-anchor=\"end\">" << FormatNumber(label) << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16
      << "\" text-anchor=\"middle\" font-size=\"13\">" << Escape(x_label)
      << "</text>\n"
      << "<text x=\"18\" y=\"" << top + ph / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << top + ph / 2 << ")\">" << Escape(y_label)
      << (log_y ? " (log scale)" : "") << "</text>\n</g>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    svg << "<g class=\"series\" data-name=\"" << Escape(s.name) << "\">\n";
    std::ostringstream points;
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.ys[i]) || (log_y && s.ys[i] <= 0.0)) continue;
      points << px(s.xs[i]) << "," << py(s.ys[i]) << " ";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"" << points.str() << "\"/>\n";
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.ys[i]) || (log_y && s.ys[i] <= 0.0)) continue;
      svg << "<circle cx=\"" << px(s.xs[i]) << "\" cy=\"" << py(s.ys[i])
          << "\" r=\"2.5\" fill=\"" << color << "\" data-x=\""
          << FormatNumber(s.xs[i]) << "\" data-y=\"" << FormatNumber(s.ys[i])
          << "\"/>\n";
    }
    svg << "</g>\n";
    const double ly = top + 14 + 18 * static_cast<double>(k);
    svg << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\""
        << left + pw + 32 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << Escape(s.name)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::string LossChartSvg(const RunRecord& record) {
  Series s;
  s.name = "train loss";
  bool positive = true;
  for (const auto& row : record.rows) {
    s.xs.push_back(static_cast<double>(row.step));
    s.ys.push_back(row.train_loss);
    positive = positive && row.train_loss > 0.0;
  }
  double lo = INFINITY, hi = 0.0;
  for (double y : s.ys) {
    if (y > 0.0 && std::isfinite(y)) lo = std::min(lo, y), hi = std::max(hi, y);
  }
  const bool log_y = positive && std::isfinite(lo) && hi / lo > 100.0;
  return LineChart(record.name, "step", "training loss", {s}, log_y, {});
}

std::string QueryBudgetSvg(const std::vector<RunRecord>& records) {
  // optimizer -> q -> (sum, count)
  std::map<std::string, std::map<double, std::pair<double, int>>> groups;
  std::set<double> qs;
  for (const auto& r : records) {
    if (r.summary.failed) continue;
    const std::string q_text = Setting(r, "optimizer.q");
    if (q_text.empty()) continue;
    const double q = std::stod(q_text);
    auto& cell = groups[Setting(r, "optimizer.kind")][q];
    cell.first += r.summary.final_test_metric;
    cell.second += 1;
    qs.insert(q);
  }
  std::vector<Series> series;
  for (const auto& [name, by_q] : groups) {
    Series s;
    s.name = name;
    for (const auto& [q, cell] : by_q) {
      s.xs.push_back(q);
      s.ys.push_back(cell.first / cell.second);
    }
    series.push_back(std::move(s));
  }
  return LineChart("final test metric vs query budget", "query budget q",
                   "final test metric", series, false,
                   std::vector<double>(qs.begin(), qs.end()));
}

void WriteRunFiles(const RunRecord& record, const std::string& out_dir) {
  const fs::path runs = fs::path(out_dir) / "runs";
  WriteTextFile((runs / (record.name + ".jsonl")).string(),
                RecordJsonl(record));
  WriteTextFile((runs / (record.name + ".timing.jsonl")).string(),
                TimingJsonl(record));
}

std::vector<RunRecord> ReadRunFiles(const std::string& out_dir) {
  const fs::path runs = fs::path(out_dir) / "runs";
  if (!fs::is_directory(runs)) {
    throw ConfigError("no runs directory under '" + out_dir + "'");
  }
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(runs)) {
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() == ".jsonl" &&
        name.find(".timing.") == std::string::npos) {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RunRecord> records;
  for (const auto& p : paths) {
    std::ifstream in(p);
    std::ostringstream text;
    text << in.rdbuf();
    records.push_back(ParseRecordJsonl(text.str()));
  }
  return records;
}

void WriteReport(const std::vector<RunRecord>& records,
                 const std::string& out_dir, const std::string& format) {
  if (records.empty()) throw ConfigError("report needs at least one record");
  const fs::path out(out_dir);
  if (format == "csv") {
    WriteTextFile((out / "summary.csv").string(), SummaryCsv(records));
  } else if (format == "jsonl") {
    std::string text;
    for (const auto& r : records) text += RecordJsonl(r);
    WriteTextFile((out / "summary.jsonl").string(), text);
  } else if (format == "svg") {
    for (const auto& r : records) {
      WriteTextFile((out / "plots" / (r.name + ".svg")).string(),
                    LossChartSvg(r));
    }
    WriteTextFile((out / "plots" / "query_budget.svg").string(),
                  QueryBudgetSvg(records));
  } else {
    throw ConfigError("unknown report format '" + format + "'");
  }
}

}  // namespace zoopt
