// Copyright 2026 The vidsum Authors
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

#include "vidsum/report.hpp"

#include <cstdio>
#include <sstream>

#include "serialization.hpp"
#include "vidsum/errors.hpp"

namespace vidsum {
namespace {

using detail::json;

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n' || c == '\r') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

std::string fmt_seconds(double s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", s);
  return buf;
}

std::string render_markdown(const RunReport& r) {
  std::ostringstream md;
  md << "# " << r.title << "\n\n";
  md << "Run: `" << r.run_id << "`\n\n";

  md << "## Summary\n\n";
  md << (r.summary ? *r.summary : std::string("_No summary._")) << "\n\n";

  md << "## Incidents\n\n";
  if (r.query) md << "Query: " << *r.query << "\n\n";
  md << "| " << kIncidentColumns[0] << " | " << kIncidentColumns[1] << " | "
     << kIncidentColumns[2] << " |\n";
  md << "|---|---|---|\n";
  for (const auto& i : r.incidents) {
    md << "| " << i.timestamp << " | " << i.frame_number << " | " << md_cell(i.information)
       << " |\n";
  }
  md << "\n";

  md << "## Frame descriptions\n\n";
  if (r.descriptions.empty()) md << "_None._\n";
  for (const auto& d : r.descriptions) {
    md << "- Frame " << d.frame_number << " (" << format_mmss(d.timestamp_s) << "): ";
    md << (d.blocked ? std::string("_blocked by safety settings_") : md_cell(d.text)) << "\n";
  }
  md << "\n";

  if (!r.raw_outputs.empty()) {
    md << "## Raw provider output\n\n";
    for (const auto& raw : r.raw_outputs) {
      md << "### " << raw.kind << ": " << md_cell(raw.prompt_or_query) << "\n\n```\n"
         << raw.text << "\n```\n\n";
    }
  }

  md << "## Timing\n\n";
  md << "| Stage | Calls | Mean (s) | Min (s) | Max (s) |\n|---|---|---|---|---|\n";
  for (const auto& [stage, t] : r.stats.stages) {
    md << "| " << to_string(stage) << " | " << t.count << " | " << fmt_seconds(t.mean_s) << " | "
       << fmt_seconds(t.min_s) << " | " << fmt_seconds(t.max_s) << " |\n";
  }
  return md.str();
}

std::string render_csv(const RunReport& r) {
  std::string out = std::string(kIncidentColumns[0]) + "," + std::string(kIncidentColumns[1]) +
                    "," + std::string(kIncidentColumns[2]) + "\r\n";
  for (const auto& i : r.incidents) {
    out += csv_field(i.timestamp) + "," + std::to_string(i.frame_number) + "," +
           csv_field(i.information) + "\r\n";
  }
  return out;
}

json report_to_json(const RunReport& r) {
  json incidents = json::array();
  for (const auto& i : r.incidents) incidents.push_back(detail::to_json(i));
  json descriptions = json::array();
  for (const auto& d : r.descriptions) descriptions.push_back(detail::to_json(d));
  json raw = json::array();
  for (const auto& o : r.raw_outputs) {
    raw.push_back({{"kind", o.kind}, {"prompt_or_query", o.prompt_or_query}, {"text", o.text}});
  }
  return json{{"report_version", 1},
              {"run_id", r.run_id},
              {"title", r.title},
              {"summary", r.summary ? json(*r.summary) : json(nullptr)},
              {"query", r.query ? json(*r.query) : json(nullptr)},
              {"columns", json::array({kIncidentColumns[0], kIncidentColumns[1], kIncidentColumns[2]})},
              {"incidents", incidents},
              {"descriptions", descriptions},
              {"stats", detail::to_json(r.stats)},
              {"config", detail::config_to_json(r.config_snapshot)},
              {"raw_outputs", raw}};
}

}  // namespace

ReportFormat report_format_from_string(std::string_view text) {
  if (text == "json" || text == "structured_json") return ReportFormat::structured_json;
  if (text == "csv" || text == "csv_table") return ReportFormat::csv_table;
  if (text == "md" || text == "markdown") return ReportFormat::markdown;
  throw PreconditionError("unknown report format '" + std::string(text) + "' (json, csv, md)");
}

std::string_view content_type(ReportFormat format) {
  switch (format) {
    case ReportFormat::structured_json: return "application/json";
    case ReportFormat::csv_table: return "text/csv; charset=utf-8";
    case ReportFormat::markdown: return "text/markdown; charset=utf-8";
  }
  return "application/octet-stream";
}

std::string_view file_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::structured_json: return ".json";
    case ReportFormat::csv_table: return ".csv";
    case ReportFormat::markdown: return ".md";
  }
  return "";
}

RunReport make_report(const AnalysisRun& run, const QueryResult* query) {
  const QueryResult* source = query ? query : (run.incident_query ? &*run.incident_query : nullptr);
  const auto& incidents = query ? query->incidents : run.incidents;
  if (!run.summary && incidents.empty() && !source) {
    throw PreconditionError("run '" + run.run_id + "' is incomplete: no summary and no incidents");
  }
  RunReport r;
  r.run_id = run.run_id;
  r.title = query ? "Incident query for run " + run.run_id : "Video analysis report";
  r.summary = run.summary;
  if (source) r.query = source->query;
  r.incidents = incidents;
  r.descriptions = run.descriptions;
  r.stats = run.stats;
  r.config_snapshot = run.config_snapshot;
  if (source) r.raw_outputs.push_back({"query", source->query, source->raw_text});
  return r;
}

std::string render(const RunReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::structured_json: return report_to_json(report).dump(2) + "\n";
    case ReportFormat::csv_table: return render_csv(report);
    case ReportFormat::markdown: return render_markdown(report);
  }
  return {};
}

std::string render_report(const AnalysisRun& run, ReportFormat format, const QueryResult* query) {
  return render(make_report(run, query), format);
}

RunReport parse_structured_report(std::string_view text) {
  try {
    const auto j = json::parse(text);
    RunReport r;
    r.run_id = j.at("run_id").get<std::string>();
    r.title = j.at("title").get<std::string>();
    if (!j.at("summary").is_null()) r.summary = j.at("summary").get<std::string>();
    if (!j.at("query").is_null()) r.query = j.at("query").get<std::string>();
    for (const auto& i : j.at("incidents")) r.incidents.push_back(detail::incident_from_json(i));
    for (const auto& d : j.at("descriptions")) {
      r.descriptions.push_back(detail::description_from_json(d));
    }
    r.stats = detail::timing_from_json(j.at("stats"));
    r.config_snapshot = detail::config_from_json(j.at("config"));
    for (const auto& o : j.at("raw_outputs")) {
      r.raw_outputs.push_back({o.at("kind").get<std::string>(),
                               o.at("prompt_or_query").get<std::string>(),
                               o.at("text").get<std::string>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace vidsum
