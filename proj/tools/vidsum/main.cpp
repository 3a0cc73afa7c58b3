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

// vidsum: analyze videos, query runs, score descriptions, serve results.

#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vidsum/config.hpp"
#include "vidsum/corpus.hpp"
#include "vidsum/errors.hpp"
#include "vidsum/eval.hpp"
#include "vidsum/gate.hpp"
#include "vidsum/ingest.hpp"
#include "vidsum/pipeline.hpp"
#include "vidsum/providers.hpp"
#include "vidsum/report.hpp"
#include "vidsum/serve.hpp"
#include "vidsum/summarize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kUsageError = 2;

class UsageError : public vidsum::Error {
  using Error::Error;
};

std::string default_data_root() {
  const char* env = std::getenv("VIDSUM_DATA_ROOT");
  return env && *env ? env : "vidsum-data";
}

struct AnalyzeArgs {
  std::string source;
  std::string config_path;
  std::string run_id;
  std::string detector;
  std::string provider;
  std::string text_provider;
  std::string base_url;
  std::string decoder = "vidsum-frames";
  std::optional<std::string> query;
  std::optional<std::string> frame_rate;
  std::optional<int> parallel;
  std::optional<double> gate_confidence;
  std::vector<std::string> targets;
  std::optional<std::string> submission;
  std::optional<std::string> prompting;
  std::optional<int> batch_size;
  bool crop = false;
};

// Flags win over the file, the file over defaults. Overrides go through the
// JSON form so they get the same parsing and validation as the file.
vidsum::PipelineConfig resolve_config(const AnalyzeArgs& a) {
  vidsum::PipelineConfig base =
      a.config_path.empty() ? vidsum::PipelineConfig{} : vidsum::load_config(a.config_path);
  json j = json::parse(vidsum::serialize_config(base));
  if (a.frame_rate) j["frame_rate"] = *a.frame_rate;
  if (a.parallel) j["max_parallel_calls"] = *a.parallel;
  if (a.gate_confidence) j["gate_confidence"] = *a.gate_confidence;
  if (!a.targets.empty()) j["target_labels"] = a.targets;
  if (a.submission) j["submission_mode"] = *a.submission;
  if (a.batch_size) j["batch_size"] = *a.batch_size;
  if (a.crop) j["crop_to_detection"] = true;
  if (a.prompting) {
    j["prompting_mode"] = *a.prompting;
    const auto prompt = j["describe_prompt"].get<std::string>();
    if (*a.prompting == "direct" && prompt == vidsum::kDefaultDescribePrompt) {
      j["describe_prompt"] = vidsum::kDefaultDirectDescribePrompt;
    } else if (*a.prompting == "indirect" && prompt == vidsum::kDefaultDirectDescribePrompt) {
      j["describe_prompt"] = vidsum::kDefaultDescribePrompt;
    }
  }
  return vidsum::parse_config(j.dump());
}

int cmd_analyze(const AnalyzeArgs& a, const std::string& data_root) {
  if (!fs::exists(a.source)) throw UsageError("source '" + a.source + "' does not exist");
  const auto config = resolve_config(a);

  vidsum::ProviderOptions provider_options;
  provider_options.base_url = a.base_url;
  provider_options.limiter = std::make_shared<vidsum::RateLimiter>(config.requests_per_second);
  auto vision = vidsum::make_provider(a.provider, config, provider_options);
  auto text = a.text_provider.empty() ? vision
                                      : vidsum::make_provider(a.text_provider, config, provider_options);

  vidsum::RunStore store(data_root);
  const std::string run_id = a.run_id.empty() ? vidsum::generate_run_id() : a.run_id;
  if (store.exists(run_id)) {
    throw vidsum::StoreError("run '" + run_id + "' already exists; runs are immutable");
  }
  const fs::path work = fs::path(data_root) / "work" / run_id;
  fs::create_directories(work);
  auto detector = vidsum::make_detector(a.detector, work / "detector");

  std::unique_ptr<vidsum::FrameSource> frames;
  try {
    if (fs::is_directory(a.source)) {
      frames = vidsum::load_image_sequence(a.source, config.frame_rate);
    } else {
      frames = vidsum::sample_video(a.source, config.frame_rate, work / "frames",
                                    vidsum::VideoDecoder{a.decoder});
    }
  } catch (const std::exception& e) {
    fs::remove_all(work);
    throw vidsum::PipelineError("sample", e.what());
  }

  vidsum::AnalyzeOptions options;
  options.run_id = run_id;
  options.source = fs::absolute(a.source).lexically_normal().string();
  options.query = a.query;
  vidsum::AnalysisRun run;
  try {
    run = vidsum::analyze(*frames, config, {*detector, *vision, *text}, store, options);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(work, ec);
    throw;
  }
  std::error_code ec;
  fs::remove_all(work, ec);

  std::cout << "run_id: " << run.run_id << "\n";
  std::cout << "frames: " << run.sampled_frames << " sampled, " << run.gated_frames << " gated\n";
  const auto reports = vidsum::write_reports(store, run);
  if (reports.empty()) {
    std::cout << "report: none (no frame passed the gate)\n";
  }
  for (const auto& path : reports) std::cout << "report: " << path.string() << "\n";
  return 0;
}

int cmd_query(const std::string& data_root, const std::string& run_id, const std::string& query,
              const std::string& provider_spec, const std::string& base_url,
              const std::string& format) {
  vidsum::RunStore store(data_root);
  const auto run = store.load_run(run_id);
  const std::string paragraph = vidsum::build_paragraph(run.descriptions);
  if (paragraph.empty()) throw vidsum::PreconditionError("run '" + run_id + "' has an empty corpus");

  vidsum::ProviderOptions provider_options;
  provider_options.base_url = base_url;
  auto provider = vidsum::make_provider(provider_spec, run.config_snapshot, provider_options);
  const auto result = vidsum::query_incidents(paragraph, query, run.config_snapshot, *provider,
                                              run.descriptions);
  store.append_query(run_id, result);

  std::cout << vidsum::render_report(run, vidsum::report_format_from_string(format), &result);
  if (result.parse_warning) {
    std::cerr << "warning: no FRAME lines could be parsed; raw provider text kept in the query log\n";
  }
  for (const auto& line : result.unparsed_lines) std::cerr << "unparsed: " << line << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string pairs;
  std::string run_id;
  std::string truth;
  std::string embeddings;
  std::string stopwords;
  std::string output;
  double threshold = vidsum::kDefaultMatchThreshold;
};

// Truth file for a run: JSON Lines of {"frame_number": n, "truth": "..."};
// each is paired with that frame's stored description.
std::vector<vidsum::TextPair> run_pairs(const vidsum::AnalysisRun& run, const fs::path& truth) {
  std::ifstream in(truth);
  if (!in) throw vidsum::NotFoundError("cannot open " + truth.string());
  std::vector<vidsum::TextPair> pairs;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::uint64_t frame = 0;
    std::string text;
    try {
      const auto j = json::parse(line);
      frame = j.at("frame_number").get<std::uint64_t>();
      text = j.at("truth").get<std::string>();
    } catch (const json::exception& e) {
      throw vidsum::ParseError(truth.string() + " line " + std::to_string(n) + ": " + e.what());
    }
    auto it = std::find_if(run.descriptions.begin(), run.descriptions.end(),
                           [frame](const auto& d) { return d.frame_number == frame; });
    if (it == run.descriptions.end()) {
      throw vidsum::PreconditionError("run '" + run.run_id + "' has no description for frame " +
                                      std::to_string(frame));
    }
    pairs.push_back({it->text, text});
  }
  return pairs;
}

int cmd_evaluate(const EvaluateArgs& a, const std::string& data_root) {
  if (a.pairs.empty() == a.run_id.empty()) {
    throw UsageError("give either --pairs or --run with --truth");
  }
  std::vector<vidsum::TextPair> pairs;
  fs::path output = a.output;
  if (!a.pairs.empty()) {
    pairs = vidsum::load_text_pairs(a.pairs);
    if (output.empty()) output = fs::path(a.pairs).replace_extension(".scores.json");
  } else {
    if (a.truth.empty()) throw UsageError("--run needs --truth");
    vidsum::RunStore store(data_root);
    const auto run = store.load_run(a.run_id);
    pairs = run_pairs(run, a.truth);
    if (output.empty()) output = store.reports_dir(a.run_id) / "evaluation.json";
  }
  if (pairs.empty()) throw vidsum::PreconditionError("no pairs to score");

  const auto stopwords =
      a.stopwords.empty() ? vidsum::default_stopwords() : vidsum::load_stopwords(a.stopwords);
  std::set<std::string> vocabulary;
  for (const auto& p : pairs) {
    for (auto& w : vidsum::preprocess(p.generated, stopwords)) vocabulary.insert(std::move(w));
    for (auto& w : vidsum::preprocess(p.truth, stopwords)) vocabulary.insert(std::move(w));
  }
  const auto store = vidsum::load_embeddings(a.embeddings, vocabulary);
  const auto score = vidsum::score_batch(pairs, store, stopwords, a.threshold);

  fs::create_directories(fs::absolute(output).parent_path());
  std::ofstream out(output, std::ios::binary);
  out << vidsum::batch_to_json(pairs, score, a.threshold);
  if (!out) throw vidsum::StoreError("cannot write " + output.string());
  std::cout << vidsum::batch_to_text(score);
  std::cout << "scores: " << output.string() << "\n";
  return 0;
}

int cmd_report(const std::string& data_root, const std::string& run_id, const std::string& format,
               std::optional<std::size_t> query_index) {
  vidsum::RunStore store(data_root);
  const auto run = store.load_run(run_id);
  const vidsum::QueryResult* query = nullptr;
  if (query_index) {
    if (*query_index >= run.queries.size()) {
      throw vidsum::NotFoundError("run '" + run_id + "' has " + std::to_string(run.queries.size()) +
                                  " queries");
    }
    query = &run.queries[*query_index];
  }
  std::cout << vidsum::render_report(run, vidsum::report_format_from_string(format), query);
  return 0;
}

vidsum::Server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const std::string& data_root, int port, const std::string& host,
              const std::string& provider_spec, const std::string& base_url,
              const std::string& ui_dir) {
  if (!fs::is_directory(data_root)) throw UsageError("data root '" + data_root + "' does not exist");
  vidsum::ServeOptions options;
  options.data_root = data_root;
  options.host = host;
  if (!provider_spec.empty()) {
    vidsum::ProviderOptions provider_options;
    provider_options.base_url = base_url;
    options.text_provider =
        vidsum::make_provider(provider_spec, vidsum::PipelineConfig{}, provider_options);
  }
  if (!ui_dir.empty()) options.ui_dir = ui_dir;
  vidsum::Server server(std::move(options));
  const int bound = server.bind(port);
  std::cout << "serving " << data_root << " on http://" << host << ":" << bound << std::endl;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gated video analysis: describe sampled frames, summarize, query incidents."};
  app.require_subcommand(1);
  std::string data_root = default_data_root();
  app.add_option("--data-root", data_root, "Directory holding runs/ (env VIDSUM_DATA_ROOT)");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Run the pipeline over a video or a frame directory");
  analyze->add_option("source", an.source, "Video file or directory of numbered stills")->required();
  analyze->add_option("--config", an.config_path, "Pipeline config (JSON)");
  analyze->add_option("--run-id", an.run_id, "Run id (default: generated)");
  analyze->add_option("--detector", an.detector, "mock:<fixture>, exec:<command>, or http(s)://...")
      ->required();
  analyze->add_option("--provider", an.provider, "Vision provider: mock:<fixture>, echo, gemini:<model>, chat:<model>")
      ->required();
  analyze->add_option("--text-provider", an.text_provider, "Text provider (default: --provider)");
  analyze->add_option("--base-url", an.base_url, "Override the remote provider endpoint");
  analyze->add_option("--decoder", an.decoder, "External decoder program");
  analyze->add_option("--query", an.query, "Incident query answered after summarizing");
  analyze->add_option("--frame-rate", an.frame_rate, "Samples per second, e.g. 1, 0.5, 2/1");
  analyze->add_option("--parallel", an.parallel, "Concurrent detector/provider calls")
      ->check(CLI::Range(1, 256));
  analyze->add_option("--gate-confidence", an.gate_confidence, "Minimum detection confidence");
  analyze->add_option("--target", an.targets, "Target label (repeatable)");
  analyze->add_option("--submission", an.submission, "per_frame, sequence or collage")
      ->check(CLI::IsMember({"per_frame", "sequence", "collage"}));
  analyze->add_option("--prompting", an.prompting, "indirect or direct")
      ->check(CLI::IsMember({"indirect", "direct"}));
  analyze->add_option("--batch-size", an.batch_size, "Frames per sequence/collage request");
  analyze->add_flag("--crop", an.crop, "Describe the detection crop instead of the whole frame");

  std::string q_run, q_text, q_provider, q_base_url, q_format = "md";
  auto* query = app.add_subcommand("query", "Ask a run's corpus about a specific incident");
  query->add_option("run_id", q_run, "Run id")->required();
  query->add_option("query", q_text, "What to look for, e.g. \"accidents\"")->required();
  query->add_option("--provider", q_provider, "Text provider spec")->required();
  query->add_option("--base-url", q_base_url, "Override the remote provider endpoint");
  query->add_option("--format", q_format, "md, csv or json")->check(CLI::IsMember({"md", "csv", "json"}));

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Word-match similarity against ground truth");
  evaluate->add_option("--pairs", ev.pairs, "JSON Lines of {generated, truth}");
  evaluate->add_option("--run", ev.run_id, "Score a run's descriptions");
  evaluate->add_option("--truth", ev.truth, "JSON Lines of {frame_number, truth} for --run");
  evaluate->add_option("--embeddings", ev.embeddings, "Word vectors, one \"word c1 ... cd\" per line")
      ->required();
  evaluate->add_option("--stopwords", ev.stopwords, "Stopword list (default: shipped English list)");
  evaluate->add_option("--threshold", ev.threshold, "Cosine a match must exceed")
      ->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--output", ev.output, "Where to write the JSON scores");

  std::string r_run, r_format = "md";
  std::optional<std::size_t> r_query;
  auto* report = app.add_subcommand("report", "Render a stored run");
  report->add_option("run_id", r_run, "Run id")->required();
  report->add_option("--format", r_format, "md, csv or json")->check(CLI::IsMember({"md", "csv", "json"}));
  report->add_option("--query-index", r_query, "Render the n-th later query (0-based) instead");

  int s_port = 8765;
  std::string s_host = "127.0.0.1", s_provider, s_base_url, s_ui;
  auto* serve = app.add_subcommand("serve", "HTTP/JSON service over the data root");
  serve->add_option("--port", s_port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", s_host, "Bind address");
  serve->add_option("--provider", s_provider, "Text provider for POSTed queries");
  serve->add_option("--base-url", s_base_url, "Override the remote provider endpoint");
  serve->add_option("--ui", s_ui, "Static files to serve at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every other parse failure is a usage error.
    return app.exit(e) == 0 ? 0 : kUsageError;
  }

  try {
    if (*analyze) return cmd_analyze(an, data_root);
    if (*query) return cmd_query(data_root, q_run, q_text, q_provider, q_base_url, q_format);
    if (*evaluate) return cmd_evaluate(ev, data_root);
    if (*report) return cmd_report(data_root, r_run, r_format, r_query);
    if (*serve) return cmd_serve(data_root, s_port, s_host, s_provider, s_base_url, s_ui);
  } catch (const UsageError& e) {
    std::cerr << "vidsum: " << e.what() << "\n";
    return kUsageError;
  } catch (const vidsum::NotFoundError& e) {
    std::cerr << "vidsum: not found: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "vidsum: " << e.what() << "\n";
    return 1;
  }
  return kUsageError;
}
