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

#include "vidsum/corpus.hpp"

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <tuple>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "encoding.hpp"
#include "serialization.hpp"
#include "vidsum/errors.hpp"
#include "vidsum/image.hpp"

namespace vidsum {
namespace {

namespace fs = std::filesystem;
using detail::json;

constexpr const char* kManifest = "manifest.json";
constexpr const char* kDescriptions = "descriptions.jsonl";
constexpr const char* kQueries = "queries.jsonl";

// Splits into lines; the final segment is kept when it lacks a newline.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw StoreError("cannot write " + tmp.string() + ": " + std::strerror(errno));
    const bool ok = std::fwrite(content.data(), 1, content.size(), f) == content.size() &&
                    std::fflush(f) == 0 && fsync(fileno(f)) == 0;
    std::fclose(f);
    if (!ok) throw StoreError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

json manifest_json(const AnalysisRun& run) {
  json incidents = json::array();
  for (const auto& r : run.incidents) incidents.push_back(detail::to_json(r));
  json incident_query = nullptr;
  if (run.incident_query) {
    incident_query = detail::to_json(*run.incident_query);
    incident_query.erase("incidents");
  }
  return json{{"schema_version", RunStore::kSchemaVersion},
              {"run_id", run.run_id},
              {"created_at", run.created_at},
              {"source", run.source},
              {"status", std::string(to_string(run.status))},
              {"failure", run.failure},
              {"config", detail::config_to_json(run.config_snapshot)},
              {"sampled_frames", run.sampled_frames},
              {"gated_frames", run.gated_frames},
              {"duration_s", run.duration_s},
              {"summary", run.summary ? json(*run.summary) : json(nullptr)},
              {"incidents", incidents},
              {"incident_query", incident_query},
              {"stats", detail::to_json(run.stats)}};
}

void apply_manifest(const json& m, AnalysisRun& run) {
  const int version = m.at("schema_version").get<int>();
  if (version != RunStore::kSchemaVersion) {
    throw StoreError("unsupported manifest schema_version " + std::to_string(version));
  }
  run.run_id = m.at("run_id").get<std::string>();
  run.created_at = m.at("created_at").get<std::string>();
  run.source = m.at("source").get<std::string>();
  run.status = detail::run_status_from_string(m.at("status").get<std::string>());
  run.failure = m.value("failure", std::string());
  run.config_snapshot = detail::config_from_json(m.at("config"));
  run.sampled_frames = m.at("sampled_frames").get<std::uint64_t>();
  run.gated_frames = m.at("gated_frames").get<std::uint64_t>();
  run.duration_s = m.at("duration_s").get<double>();
  if (!m.at("summary").is_null()) run.summary = m.at("summary").get<std::string>();
  for (const auto& r : m.at("incidents")) run.incidents.push_back(detail::incident_from_json(r));
  if (const auto& q = m.at("incident_query"); !q.is_null()) {
    json full = q;
    full["incidents"] = m.at("incidents");
    run.incident_query = detail::query_result_from_json(full);
  }
  run.stats = detail::timing_from_json(m.at("stats"));
}

json read_manifest(const fs::path& path) {
  const std::string text = detail::read_file(path.string());
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw StoreError(path.string() + ": corrupt manifest: " + e.what());
  }
}

std::vector<QueryResult> read_queries(const fs::path& path) {
  std::vector<QueryResult> out;
  if (!fs::exists(path)) return out;
  const std::string text = detail::read_file(path.string());
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      out.push_back(detail::query_result_from_json(json::parse(lines[i])));
    } catch (const std::exception& e) {
      throw StoreError(path.string() + " line " + std::to_string(i + 1) +
                       ": corrupt record: " + e.what());
    }
  }
  return out;
}

}  // namespace

std::string format_mmss(double seconds) {
  const auto total = static_cast<std::int64_t>(std::floor(std::max(0.0, seconds) + 1e-9));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld", static_cast<long long>(total / 60),
                static_cast<long long>(total % 60));
  return buf;
}

std::string build_paragraph(std::span<const FrameDescription> descriptions) {
  std::string out;
  for (const auto& d : descriptions) {
    if (d.blocked) continue;
    if (!out.empty()) out += '\n';
    out += "Frame " + std::to_string(d.frame_number) + " (" + format_mmss(d.timestamp_s) +
           "): " + d.text;
  }
  return out;
}

void check_run(const AnalysisRun& run) {
  for (std::size_t i = 0; i < run.descriptions.size(); ++i) {
    const auto& d = run.descriptions[i];
    if (i > 0 && run.descriptions[i - 1].frame_number >= d.frame_number) {
      throw StoreError("descriptions are not strictly ascending at frame " +
                       std::to_string(d.frame_number));
    }
    if (d.blocked && !d.text.empty()) {
      throw StoreError("blocked description for frame " + std::to_string(d.frame_number) +
                       " carries text");
    }
  }
  for (const auto& r : run.incidents) {
    auto it = std::lower_bound(
        run.descriptions.begin(), run.descriptions.end(), r.frame_number,
        [](const FrameDescription& d, std::uint64_t n) { return d.frame_number < n; });
    if (it == run.descriptions.end() || it->frame_number != r.frame_number) {
      throw StoreError("incident references unknown frame " + std::to_string(r.frame_number));
    }
    if (r.timestamp != format_mmss(it->timestamp_s)) {
      throw StoreError("incident timestamp " + r.timestamp + " does not match frame " +
                       std::to_string(r.frame_number));
    }
  }
}

std::string description_to_line(const FrameDescription& d) {
  return detail::to_json(d).dump() + "\n";
}

FrameDescription description_from_line(std::string_view line) {
  try {
    return detail::description_from_json(json::parse(line));
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

LogScan scan_description_log(const fs::path& path) {
  LogScan scan;
  const std::string text = detail::read_file(path.string());
  const auto lines = split_lines(text);
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      auto d = description_from_line(lines[i]);
      if (!seen.insert(d.frame_number).second) {
        throw ParseError("duplicate frame_number " + std::to_string(d.frame_number));
      }
      scan.records.push_back(std::move(d));
    } catch (const Error& e) {
      scan.corrupt_line = i + 1;
      scan.corrupt_reason = e.what();
      break;
    }
  }
  std::sort(scan.records.begin(), scan.records.end(),
            [](const FrameDescription& a, const FrameDescription& b) {
              return a.frame_number < b.frame_number;
            });
  return scan;
}

DescriptionLog::DescriptionLog(fs::path path) : path_(std::move(path)) {
  if (fs::exists(path_)) {
    const auto scan = scan_description_log(path_);
    if (scan.corrupt_line) {
      throw StoreError(path_.string() + " line " + std::to_string(*scan.corrupt_line) +
                       ": corrupt record: " + scan.corrupt_reason);
    }
    for (const auto& d : scan.records) frames_.insert(d.frame_number);
  }
  file_ = std::fopen(path_.c_str(), "ab");
  if (!file_) throw StoreError("cannot open " + path_.string() + ": " + std::strerror(errno));
}

DescriptionLog::~DescriptionLog() {
  if (file_) std::fclose(file_);
}

void DescriptionLog::append(const FrameDescription& d) {
  if (d.blocked && !d.text.empty()) throw StoreError("blocked description carries text");
  const std::string line = description_to_line(d);
  std::lock_guard lock(mutex_);
  if (frames_.contains(d.frame_number)) {
    throw StoreError("duplicate frame_number " + std::to_string(d.frame_number) + " in " +
                     path_.string());
  }
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0) {
    throw StoreError("write to " + path_.string() + " failed: " + std::strerror(errno));
  }
  fsync(fileno(file_));
  frames_.insert(d.frame_number);
}

std::vector<FrameDescription> DescriptionLog::read_all() const {
  auto scan = scan_description_log(path_);
  if (scan.corrupt_line) {
    throw StoreError(path_.string() + " line " + std::to_string(*scan.corrupt_line) +
                     ": corrupt record: " + scan.corrupt_reason);
  }
  return std::move(scan.records);
}

bool is_valid_run_id(std::string_view run_id) {
  if (run_id.empty() || run_id.size() > 128 || run_id.front() == '.') return false;
  return std::all_of(run_id.begin(), run_id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  });
}

RunStore::RunStore(fs::path data_root) : root_(std::move(data_root)) {}

fs::path RunStore::run_dir(const std::string& run_id) const {
  if (!is_valid_run_id(run_id)) throw PreconditionError("invalid run id '" + run_id + "'");
  return root_ / "runs" / run_id;
}

fs::path RunStore::frames_dir(const std::string& run_id) const { return run_dir(run_id) / "frames"; }

fs::path RunStore::reports_dir(const std::string& run_id) const {
  return run_dir(run_id) / "reports";
}

bool RunStore::exists(const std::string& run_id) const {
  return is_valid_run_id(run_id) && fs::exists(run_dir(run_id) / kManifest);
}

void RunStore::create(const AnalysisRun& header) {
  const auto dir = run_dir(header.run_id);
  if (fs::exists(dir)) {
    throw StoreError("run '" + header.run_id + "' already exists; runs are immutable");
  }
  fs::create_directories(dir / "frames");
  fs::create_directories(dir / "reports");
  write_manifest(header);
  std::FILE* f = std::fopen((dir / kDescriptions).c_str(), "ab");
  if (!f) throw StoreError("cannot create descriptions log in " + dir.string());
  std::fclose(f);
}

void RunStore::write_manifest(const AnalysisRun& run) {
  write_file_atomic(run_dir(run.run_id) / kManifest, manifest_json(run).dump(2) + "\n");
}

std::unique_ptr<DescriptionLog> RunStore::open_log(const std::string& run_id) const {
  return std::make_unique<DescriptionLog>(run_dir(run_id) / kDescriptions);
}

void RunStore::append_query(const std::string& run_id, const QueryResult& result) {
  if (!exists(run_id)) throw NotFoundError("unknown run '" + run_id + "'");
  const auto path = run_dir(run_id) / kQueries;
  const std::string line = detail::to_json(result).dump() + "\n";
  std::FILE* f = std::fopen(path.c_str(), "ab");
  if (!f) throw StoreError("cannot open " + path.string());
  const bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size() && std::fflush(f) == 0;
  std::fclose(f);
  if (!ok) throw StoreError("write to " + path.string() + " failed");
}

AnalysisRun RunStore::load_run(const std::string& run_id) const {
  if (!exists(run_id)) throw NotFoundError("unknown run '" + run_id + "'");
  const auto dir = run_dir(run_id);
  AnalysisRun run;
  try {
    apply_manifest(read_manifest(dir / kManifest), run);
  } catch (const json::exception& e) {
    throw StoreError((dir / kManifest).string() + ": corrupt manifest: " + e.what());
  } catch (const ParseError& e) {
    throw StoreError((dir / kManifest).string() + ": corrupt manifest: " + e.what());
  } catch (const ValidationError& e) {
    throw StoreError((dir / kManifest).string() + ": invalid config snapshot: " + e.what());
  }
  const auto log_path = dir / kDescriptions;
  if (fs::exists(log_path)) {
    auto scan = scan_description_log(log_path);
    if (scan.corrupt_line) {
      throw StoreError(log_path.string() + " line " + std::to_string(*scan.corrupt_line) +
                       ": corrupt record: " + scan.corrupt_reason);
    }
    run.descriptions = std::move(scan.records);
  }
  run.queries = read_queries(dir / kQueries);
  return run;
}

void RunStore::save_run(const AnalysisRun& run) {
  check_run(run);
  const auto dir = run_dir(run.run_id);
  fs::create_directories(dir / "frames");
  fs::create_directories(dir / "reports");
  write_manifest(run);
  std::string log;
  for (const auto& d : run.descriptions) log += description_to_line(d);
  write_file_atomic(dir / kDescriptions, log);
  std::string queries;
  for (const auto& q : run.queries) queries += detail::to_json(q).dump() + "\n";
  if (!run.queries.empty() || fs::exists(dir / kQueries)) {
    write_file_atomic(dir / kQueries, queries);
  }
}

std::vector<RunListing> RunStore::list() const {
  std::vector<RunListing> out;
  const auto runs = root_ / "runs";
  if (!fs::is_directory(runs)) return out;
  for (const auto& entry : fs::directory_iterator(runs)) {
    if (!entry.is_directory() || !fs::exists(entry.path() / kManifest)) continue;
    try {
      const auto m = read_manifest(entry.path() / kManifest);
      RunListing item;
      item.run_id = m.at("run_id").get<std::string>();
      item.created_at = m.at("created_at").get<std::string>();
      item.status = detail::run_status_from_string(m.at("status").get<std::string>());
      item.frame_count = m.at("sampled_frames").get<std::uint64_t>();
      item.duration_s = m.at("duration_s").get<double>();
      item.has_summary = !m.at("summary").is_null();
      item.incident_count = m.at("incidents").size();
      out.push_back(std::move(item));
    } catch (const std::exception&) {
      // damaged runs are skipped in listings; load_run reports the details
    }
  }
  std::sort(out.begin(), out.end(), [](const RunListing& a, const RunListing& b) {
    return std::tie(a.created_at, a.run_id) < std::tie(b.created_at, b.run_id);
  });
  return out;
}

std::optional<fs::path> RunStore::frame_path(const std::string& run_id,
                                             std::uint64_t frame_number) const {
  const auto dir = frames_dir(run_id);
  if (!fs::is_directory(dir)) return std::nullopt;
  char stem[32];
  std::snprintf(stem, sizeof stem, "%06llu", static_cast<unsigned long long>(frame_number));
  for (const char* ext : {".png", ".jpg", ".jpeg", ".bmp", ".webp"}) {
    auto candidate = dir / (std::string(stem) + ext);
    if (fs::exists(candidate)) return candidate;
  }
  return std::nullopt;
}

}  // namespace vidsum
