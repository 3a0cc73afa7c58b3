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

#include "vidsum/serve.hpp"

#include <map>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "serialization.hpp"
#include "vidsum/errors.hpp"
#include "vidsum/image.hpp"
#include "vidsum/report.hpp"
#include "vidsum/summarize.hpp"

namespace vidsum {
namespace {

using detail::json;

constexpr int kDefaultThumbnailSide = 320;
constexpr char kJson[] = "application/json";

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump() + "\n", kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  send_json(res, status, json{{"error", {{"code", code}, {"message", message}}}});
}

std::string frame_url(const std::string& run_id, std::uint64_t frame) {
  return "/api/v1/runs/" + run_id + "/frames/" + std::to_string(frame);
}

json listing_json(const RunListing& l) {
  return json{{"run_id", l.run_id},
              {"created_at", l.created_at},
              {"status", std::string(to_string(l.status))},
              {"frame_count", l.frame_count},
              {"duration_s", l.duration_s},
              {"has_summary", l.has_summary},
              {"incident_count", l.incident_count}};
}

json incidents_json(const std::string& run_id, const std::vector<IncidentRecord>& incidents) {
  json out = json::array();
  for (const auto& i : incidents) {
    json j = detail::to_json(i);
    j["frame_url"] = frame_url(run_id, i.frame_number);
    out.push_back(std::move(j));
  }
  return out;
}

json query_json(const std::string& run_id, const QueryResult& q) {
  json j = detail::to_json(q);
  j["incidents"] = incidents_json(run_id, q.incidents);
  return j;
}

json run_json(const AnalysisRun& run) {
  json descriptions = json::array();
  for (const auto& d : run.descriptions) {
    json j = detail::to_json(d);
    j["timestamp"] = format_mmss(d.timestamp_s);
    j["frame_url"] = frame_url(run.run_id, d.frame_number);
    descriptions.push_back(std::move(j));
  }
  return json{{"run_id", run.run_id},
              {"created_at", run.created_at},
              {"source", run.source},
              {"status", std::string(to_string(run.status))},
              {"failure", run.failure},
              {"sampled_frames", run.sampled_frames},
              {"gated_frames", run.gated_frames},
              {"duration_s", run.duration_s},
              {"summary", run.summary ? json(*run.summary) : json(nullptr)},
              {"incidents", incidents_json(run.run_id, run.incidents)},
              {"incident_query", run.incident_query ? json(run.incident_query->query) : json(nullptr)},
              {"query_count", run.queries.size()},
              {"descriptions", descriptions},
              {"config", detail::config_to_json(run.config_snapshot)},
              {"stats", detail::to_json(run.stats)}};
}

}  // namespace

struct Server::Impl {
  ServeOptions options;
  RunStore store;
  httplib::Server http;
  std::thread thread;
  std::mutex locks_mutex;
  std::map<std::string, std::shared_ptr<std::mutex>> run_locks;

  explicit Impl(ServeOptions o) : options(std::move(o)), store(options.data_root) { routes(); }

  std::shared_ptr<std::mutex> lock_for(const std::string& run_id) {
    std::lock_guard guard(locks_mutex);
    auto& slot = run_locks[run_id];
    if (!slot) slot = std::make_shared<std::mutex>();
    return slot;
  }

  /// Loads the run named by the first path capture, or answers 404.
  std::optional<AnalysisRun> load(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!store.exists(id)) {
      send_error(res, 404, "run_not_found", "unknown run '" + id + "'");
      return std::nullopt;
    }
    return store.load_run(id);
  }

  std::optional<ImagePayload> frame_image(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!store.exists(id)) {
      send_error(res, 404, "run_not_found", "unknown run '" + id + "'");
      return std::nullopt;
    }
    const auto path = store.frame_path(id, std::stoull(req.matches[2]));
    if (!path) {
      send_error(res, 404, "frame_not_found", "no stored image for frame " + req.matches[2].str());
      return std::nullopt;
    }
    return read_image_file(*path);
  }

  void routes() {
    // httplib's default adds SO_REUSEPORT, which lets a second server share a
    // busy port instead of failing to bind.
    http.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    // Requests no route handled (unknown paths, methods) still get a JSON body.
    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      send_error(res, res.status, res.status == 404 ? "not_found" : "http_error",
                 httplib::status_message(res.status));
    });
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                                  std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const NotFoundError& e) {
        send_error(res, 404, "not_found", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    });

    http.Get("/api/v1/runs", [this](const httplib::Request&, httplib::Response& res) {
      json runs = json::array();
      for (const auto& l : store.list()) runs.push_back(listing_json(l));
      send_json(res, 200, json{{"runs", runs}});
    });

    http.Get(R"(/api/v1/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      if (auto run = load(req, res)) send_json(res, 200, run_json(*run));
    });

    http.Get(R"(/api/v1/runs/([^/]+)/report)",
             [this](const httplib::Request& req, httplib::Response& res) {
               auto run = load(req, res);
               if (!run) return;
               ReportFormat format = ReportFormat::structured_json;
               try {
                 if (req.has_param("format")) {
                   format = report_format_from_string(req.get_param_value("format"));
                 }
               } catch (const PreconditionError& e) {
                 return send_error(res, 400, "bad_format", e.what());
               }
               try {
                 res.set_content(render_report(*run, format), std::string(content_type(format)));
               } catch (const PreconditionError& e) {
                 send_error(res, 409, "incomplete_run", e.what());
               }
             });

    http.Get(R"(/api/v1/runs/([^/]+)/frames/(\d+))",
             [this](const httplib::Request& req, httplib::Response& res) {
               if (auto image = frame_image(req, res)) {
                 res.set_content(reinterpret_cast<const char*>(image->bytes.data()),
                                 image->bytes.size(), image->media_type);
               }
             });

    http.Get(R"(/api/v1/runs/([^/]+)/thumbnails/(\d+))",
             [this](const httplib::Request& req, httplib::Response& res) {
               int side = kDefaultThumbnailSide;
               if (req.has_param("max")) {
                 try {
                   side = std::stoi(req.get_param_value("max"));
                 } catch (const std::exception&) {
                   side = 0;
                 }
                 if (side <= 0 || side > 4096) {
                   return send_error(res, 400, "bad_size", "max must be in 1..4096");
                 }
               }
               if (auto image = frame_image(req, res)) {
                 const auto thumb = make_thumbnail(*image, side);
                 res.set_content(reinterpret_cast<const char*>(thumb.bytes.data()),
                                 thumb.bytes.size(), thumb.media_type);
               }
             });

    http.Get(R"(/api/v1/runs/([^/]+)/queries)",
             [this](const httplib::Request& req, httplib::Response& res) {
               auto run = load(req, res);
               if (!run) return;
               json queries = json::array();
               for (const auto& q : run->queries) queries.push_back(query_json(run->run_id, q));
               send_json(res, 200, json{{"queries", queries}});
             });

    http.Post(R"(/api/v1/runs/([^/]+)/queries)",
              [this](const httplib::Request& req, httplib::Response& res) { post_query(req, res); });

    if (options.ui_dir && !http.set_mount_point("/", options.ui_dir->string())) {
      throw Error("ui directory " + options.ui_dir->string() + " does not exist");
    }
  }

  void post_query(const httplib::Request& req, httplib::Response& res) {
    std::string query;
    try {
      query = json::parse(req.body).at("query").get<std::string>();
    } catch (const json::exception&) {
      return send_error(res, 400, "bad_request", R"(body must be {"query": "<text>"})");
    }
    if (query.find_first_not_of(" \t\r\n") == std::string::npos) {
      return send_error(res, 400, "bad_request", "query is empty");
    }
    const std::string id = req.matches[1];
    if (!store.exists(id)) return send_error(res, 404, "run_not_found", "unknown run '" + id + "'");
    if (!options.text_provider) {
      return send_error(res, 503, "no_provider", "server started without a text provider");
    }

    auto lock = lock_for(id);
    std::lock_guard guard(*lock);
    const AnalysisRun run = store.load_run(id);
    const std::string paragraph = build_paragraph(run.descriptions);
    if (paragraph.empty()) {
      return send_error(res, 409, "empty_corpus", "run '" + id + "' has no descriptions to query");
    }
    QueryResult result;
    try {
      result = query_incidents(paragraph, query, run.config_snapshot, *options.text_provider,
                               run.descriptions);
    } catch (const ProviderError& e) {
      return send_error(res, 502, "provider_error", e.what());
    }
    store.append_query(id, result);
    send_json(res, 200, query_json(id, result));
  }
};

Server::Server(ServeOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Server::~Server() { stop(); }

int Server::bind(int port) {
  const int bound = port == 0 ? impl_->http.bind_to_any_port(impl_->options.host)
                              : (impl_->http.bind_to_port(impl_->options.host, port) ? port : -1);
  if (bound < 0) {
    throw Error("cannot bind " + impl_->options.host + ":" + std::to_string(port) +
                " (port busy or unavailable)");
  }
  return bound;
}

void Server::listen() { impl_->http.listen_after_bind(); }

int Server::start(int port) {
  const int bound = bind(port);
  impl_->thread = std::thread([this] { listen(); });
  impl_->http.wait_until_ready();
  return bound;
}

void Server::stop() {
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace vidsum
