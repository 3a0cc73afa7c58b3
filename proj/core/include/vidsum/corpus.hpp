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

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vidsum/config.hpp"
#include "vidsum/timing.hpp"

namespace vidsum {

struct FrameDescription {
  std::uint64_t frame_number = 0;
  double timestamp_s = 0.0;
  std::string text;
  double latency_s = 0.0;
  bool blocked = false;  // => text empty
  /// Frames folded into this description by a sequence/collage request;
  /// empty for single-frame calls.
  std::vector<std::uint64_t> covered_frames;

  friend bool operator==(const FrameDescription&, const FrameDescription&) = default;
};

/// One row of an incident table.
struct IncidentRecord {
  std::string timestamp;  // mm:ss
  std::uint64_t frame_number = 0;
  std::string information;

  friend bool operator==(const IncidentRecord&, const IncidentRecord&) = default;
};

/// Outcome of a specific-incident query, raw provider text included.
struct QueryResult {
  std::string query;
  std::vector<IncidentRecord> incidents;
  std::string raw_text;
  std::vector<std::string> unparsed_lines;
  bool parse_warning = false;
  bool blocked = false;
  std::string created_at;

  friend bool operator==(const QueryResult&, const QueryResult&) = default;
};

enum class RunStatus { in_progress, complete, failed };

std::string_view to_string(RunStatus status);

struct AnalysisRun {
  std::string run_id;
  std::string created_at;
  std::string source;
  RunStatus status = RunStatus::in_progress;
  std::string failure;  // stage-named diagnostic when status == failed
  PipelineConfig config_snapshot;
  std::uint64_t sampled_frames = 0;
  std::uint64_t gated_frames = 0;
  double duration_s = 0.0;
  std::vector<FrameDescription> descriptions;  // ascending frame_number
  std::optional<std::string> summary;
  std::vector<IncidentRecord> incidents;
  std::optional<QueryResult> incident_query;  // how `incidents` was produced
  std::vector<QueryResult> queries;           // later queries, in order
  TimingStats stats;

  friend bool operator==(const AnalysisRun&, const AnalysisRun&) = default;
};

/// "mm:ss" of whole seconds; minutes grow past two digits when needed.
std::string format_mmss(double seconds);

/// One line "Frame {n} ({mm:ss}): {text}" per non-blocked description,
/// newline separated, in the given order.
std::string build_paragraph(std::span<const FrameDescription> descriptions);

/// Throws StoreError if `run` breaks an AnalysisRun invariant.
void check_run(const AnalysisRun& run);

std::string description_to_line(const FrameDescription& d);
FrameDescription description_from_line(std::string_view line);

/// Result of reading a descriptions log without failing on damage.
struct LogScan {
  std::vector<FrameDescription> records;  // ascending frame_number
  std::optional<std::size_t> corrupt_line;  // 1-based
  std::string corrupt_reason;
};

LogScan scan_description_log(const std::filesystem::path& path);

/// Append-only descriptions log for one run. One writer; appends are
/// serialised internally so worker threads may share it.
class DescriptionLog {
 public:
  /// Opens (creating if needed) for append; loads existing frame numbers.
  explicit DescriptionLog(std::filesystem::path path);
  ~DescriptionLog();
  DescriptionLog(const DescriptionLog&) = delete;
  DescriptionLog& operator=(const DescriptionLog&) = delete;

  /// Throws StoreError on a duplicate frame_number or a failed write.
  void append(const FrameDescription& d);

  /// All records sorted by frame_number; StoreError on a corrupt line.
  std::vector<FrameDescription> read_all() const;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
  std::set<std::uint64_t> frames_;
  std::FILE* file_ = nullptr;
};

struct RunListing {
  std::string run_id;
  std::string created_at;
  RunStatus status = RunStatus::in_progress;
  std::uint64_t frame_count = 0;
  double duration_s = 0.0;
  bool has_summary = false;
  std::size_t incident_count = 0;
};

/// Layout under the data root:
///
///   runs/<run_id>/manifest.json       schema_version, config, summary, ...
///   runs/<run_id>/descriptions.jsonl  append-only FrameDescription log
///   runs/<run_id>/queries.jsonl       append-only QueryResult log
///   runs/<run_id>/frames/             sampled stills, <frame:06>.<ext>
///   runs/<run_id>/reports/            rendered reports
class RunStore {
 public:
  static constexpr int kSchemaVersion = 1;

  explicit RunStore(std::filesystem::path data_root);

  const std::filesystem::path& data_root() const { return root_; }
  std::filesystem::path run_dir(const std::string& run_id) const;
  std::filesystem::path frames_dir(const std::string& run_id) const;
  std::filesystem::path reports_dir(const std::string& run_id) const;
  bool exists(const std::string& run_id) const;

  /// Creates the run directory and an in-progress manifest. Throws
  /// StoreError if the run already exists (runs are immutable).
  void create(const AnalysisRun& header);
  /// Rewrites the manifest of a run created by this process.
  void write_manifest(const AnalysisRun& run);
  std::unique_ptr<DescriptionLog> open_log(const std::string& run_id) const;
  void append_query(const std::string& run_id, const QueryResult& result);

  /// NotFoundError for an unknown id, StoreError for damaged records.
  AnalysisRun load_run(const std::string& run_id) const;
  /// Writes every file of `run`, replacing existing ones.
  void save_run(const AnalysisRun& run);

  std::vector<RunListing> list() const;

  /// Path of the cached still for a frame, if present.
  std::optional<std::filesystem::path> frame_path(const std::string& run_id,
                                                  std::uint64_t frame_number) const;

 private:
  std::filesystem::path root_;
};

/// Reject ids that could escape the data root.
bool is_valid_run_id(std::string_view run_id);

}  // namespace vidsum
