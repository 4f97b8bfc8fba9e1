#include "rshape/server.hpp"

#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

namespace rshape {

using json = nlohmann::json;

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::queued: return "queued";
    case RunStatus::running: return "running";
    case RunStatus::done: return "done";
    case RunStatus::failed: return "failed";
  }
  return "unknown";
}

namespace {

std::optional<RunStatus> parse_status(const std::string& s) {
  for (auto st : {RunStatus::queued, RunStatus::running, RunStatus::done, RunStatus::failed})
    if (to_string(st) == s) return st;
  return std::nullopt;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string new_token() {
  static std::mutex mutex;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mutex);
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(16) << rng();
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

double RunHandle::progress() const {
  if (status == RunStatus::done) return 1.0;
  return total == 0 ? 0.0 : static_cast<double>(completed) / static_cast<double>(total);
}

json handle_to_json(const RunHandle& handle) {
  json doc{{"id", handle.id},
           {"status", to_string(handle.status)},
           {"progress", handle.progress()},
           {"completed", handle.completed},
           {"total", handle.total},
           {"created_at", handle.created_at}};
  if (!handle.error.empty()) doc["error"] = handle.error;
  return doc;
}

json list_environments() {
  json out = json::array();
  for (const char* id : {"fourrooms", "pinball"}) {
    const MapDocument map = resolve_environment(id);
    out.push_back({{"id", id}, {"kind", std::holds_alternative<GridMap>(map) ? "grid" : "pinball"},
                   {"map", map_to_json(map)}});
  }
  return out;
}

json curve_payload(const RunConfig& config, const std::vector<RunResult>& results) {
  json curves = json::array();
  for (const auto& c : learning_curves(results, config.smoothing_window))
    curves.push_back({{"method", c.method}, {"mean", c.mean}, {"se", c.se}});
  json failures = json::array();
  for (const auto& r : results)
    if (r.failed) failures.push_back({{"method", r.method}, {"seed", r.seed}, {"error", r.error}});
  const auto report = compute_report(results, config.thresholds, config.smoothing_window, config.asymptotic_tail);
  return {{"episodes", config.episodes},
          {"smoothing_window", config.smoothing_window},
          {"curves", curves},
          {"metrics", report_to_json(report)},
          {"failed_runs", failures}};
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

struct RunRegistry::Impl {
  struct Entry {
    RunHandle handle;
    json config_doc;
    std::shared_ptr<const RunConfig> config;
    json payload;
  };

  int workers;
  std::filesystem::path spool;
  mutable std::mutex mutex;
  mutable std::condition_variable changed;
  std::map<std::string, Entry> entries;
  std::deque<std::string> queue;
  bool stopping = false;
  std::jthread dispatcher;

  std::filesystem::path dir(const std::string& id) const { return spool / id; }

  void save_status(const Entry& e) const {
    if (spool.empty()) return;
    write_file(dir(e.handle.id) / "status.json", handle_to_json(e.handle).dump(2));
  }

  void load_spool() {
    if (spool.empty()) return;
    std::filesystem::create_directories(spool);
    std::vector<std::pair<std::string, std::string>> pending;  // (created_at, id)
    for (const auto& d : std::filesystem::directory_iterator(spool)) {
      if (!d.is_directory()) continue;
      const std::string id = d.path().filename().string();
      try {
        const json status = json::parse(read_file(d.path() / "status.json"));
        const json config_doc = json::parse(read_file(d.path() / "config.json"));
        Entry e;
        e.handle.id = id;
        e.handle.created_at = status.value("created_at", "");
        e.handle.total = status.value("total", std::size_t{0});
        e.handle.error = status.value("error", "");
        e.config_doc = config_doc;
        e.config = std::make_shared<const RunConfig>(parse_run_config(config_doc));
        const auto st = parse_status(status.value("status", "")).value_or(RunStatus::queued);
        if (st == RunStatus::done && std::filesystem::exists(d.path() / "curves.json")) {
          e.handle.status = RunStatus::done;
          e.handle.completed = e.handle.total;
          e.payload = json::parse(read_file(d.path() / "curves.json"));
        } else if (st == RunStatus::failed) {
          e.handle.status = RunStatus::failed;
        } else {
          e.handle.status = RunStatus::queued;
          pending.emplace_back(e.handle.created_at, id);
        }
        entries.emplace(id, std::move(e));
      } catch (const std::exception&) {
        // not a run directory
      }
    }
    std::sort(pending.begin(), pending.end());
    for (const auto& p : pending) queue.push_back(p.second);
  }

  void loop(std::stop_token stop) {
    for (;;) {
      std::string id;
      std::shared_ptr<const RunConfig> config;
      {
        std::unique_lock lock(mutex);
        changed.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping || stop.stop_requested()) return;
        id = queue.front();
        queue.pop_front();
        Entry& e = entries.at(id);
        e.handle.status = RunStatus::running;
        e.handle.total = plan_battery(*e.config).size();
        config = e.config;
        save_status(e);
      }
      changed.notify_all();
      try {
        const auto results = run_battery(*config, workers, [&](std::size_t done, std::size_t total) {
          std::lock_guard lock(mutex);
          Entry& e = entries.at(id);
          e.handle.completed = std::max(e.handle.completed, done);
          e.handle.total = total;
        });
        json payload = curve_payload(*config, results);
        payload["id"] = id;
        if (!spool.empty()) {
          std::ostringstream csv;
          write_results_csv(csv, results);
          write_file(dir(id) / "results.csv", csv.str());
          const auto report =
              compute_report(results, config->thresholds, config->smoothing_window, config->asymptotic_tail);
          write_file(dir(id) / "report.json", report_to_json(report).dump(2));
          write_file(dir(id) / "curves.json", payload.dump());
        }
        const bool all_failed =
            std::all_of(results.begin(), results.end(), [](const RunResult& r) { return r.failed; });
        std::lock_guard lock(mutex);
        Entry& e = entries.at(id);
        e.payload = std::move(payload);
        e.handle.completed = e.handle.total;
        if (all_failed) {
          e.handle.status = RunStatus::failed;
          e.handle.error = results.empty() ? "no runs" : results.front().error;
        } else {
          e.handle.status = RunStatus::done;
        }
        save_status(e);
      } catch (const std::exception& ex) {
        std::lock_guard lock(mutex);
        Entry& e = entries.at(id);
        e.handle.status = RunStatus::failed;
        e.handle.error = ex.what();
        save_status(e);
      }
      changed.notify_all();
    }
  }
};

RunRegistry::RunRegistry(int workers, std::filesystem::path spool_dir) : impl_(std::make_unique<Impl>()) {
  impl_->workers = std::max(1, workers);
  impl_->spool = std::move(spool_dir);
  impl_->load_spool();
  impl_->dispatcher = std::jthread([this](std::stop_token st) { impl_->loop(st); });
}

RunRegistry::~RunRegistry() {
  {
    std::lock_guard lock(impl_->mutex);
    impl_->stopping = true;
  }
  impl_->changed.notify_all();
  impl_->dispatcher = {};
}

std::string RunRegistry::submit(const json& config_doc) {
  Impl::Entry e;
  e.config = std::make_shared<const RunConfig>(parse_run_config(config_doc));
  e.config_doc = config_doc;
  e.handle.id = new_token();
  e.handle.created_at = utc_now();
  e.handle.total = plan_battery(*e.config).size();
  const std::string id = e.handle.id;
  {
    std::lock_guard lock(impl_->mutex);
    if (!impl_->spool.empty()) {
      std::filesystem::create_directories(impl_->dir(id));
      write_file(impl_->dir(id) / "config.json", config_doc.dump(2));
      impl_->save_status(e);
    }
    impl_->entries.emplace(id, std::move(e));
    impl_->queue.push_back(id);
  }
  impl_->changed.notify_all();
  return id;
}

std::optional<RunHandle> RunRegistry::poll(const std::string& id) const {
  std::lock_guard lock(impl_->mutex);
  const auto it = impl_->entries.find(id);
  if (it == impl_->entries.end()) return std::nullopt;
  return it->second.handle;
}

RunRegistry::CurveLookup RunRegistry::curves(const std::string& id) const {
  std::lock_guard lock(impl_->mutex);
  const auto it = impl_->entries.find(id);
  if (it == impl_->entries.end()) return {};
  if (it->second.handle.status != RunStatus::done) return {CurveState::pending, {}};
  return {CurveState::ready, it->second.payload};
}

bool RunRegistry::wait(const std::string& id) const {
  std::unique_lock lock(impl_->mutex);
  if (!impl_->entries.count(id)) return false;
  impl_->changed.wait(lock, [&] {
    const auto st = impl_->entries.at(id).handle.status;
    return st == RunStatus::done || st == RunStatus::failed || impl_->stopping;
  });
  return true;
}

// ---------------------------------------------------------------------------
// HTTP
// ---------------------------------------------------------------------------

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                const json& fields = json::object()) {
  send_json(res, status, {{"error", {{"code", code}, {"message", message}, {"fields", fields}}}});
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    send_error(res, 400, "malformed_json", e.what());
    return std::nullopt;
  }
}

json issues_to_fields(const std::vector<ValidationIssue>& issues) {
  json fields = json::object();
  for (const auto& i : issues) {
    const std::string key = i.field.empty() ? "/" : i.field;
    if (fields.contains(key)) fields[key] = fields[key].get<std::string>() + "; " + i.message;
    else fields[key] = i.message;
  }
  return fields;
}

constexpr const char* kPlaceholderPage =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>rshape</title></head>"
    "<body><h1>rshape server</h1><p>The UI bundle is not installed. The JSON API is available under "
    "<code>/api/</code>: <a href=\"/api/envs\">/api/envs</a>.</p></body></html>";

}  // namespace

struct Server::Impl {
  ServerOptions options;
  RunRegistry registry;
  httplib::Server http;
  int port = -1;

  explicit Impl(ServerOptions o) : options(std::move(o)), registry(options.workers, options.spool_dir) {}

  void routes() {
    http.Get("/api/envs", [](const httplib::Request&, httplib::Response& res) {
      try {
        send_json(res, 200, list_environments());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    });

    http.Post("/api/runs", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req, res);
      if (!body) return;
      try {
        send_json(res, 202, {{"id", registry.submit(*body)}});
      } catch (const SeriesValidationError& e) {
        send_error(res, 422, "invalid_series", e.what(), issues_to_fields(e.issues));
      } catch (const LoadError& e) {
        send_error(res, 422, "invalid_map", e.what(), {{e.where.empty() ? "/" : e.where, e.what()}});
      } catch (const ConfigError& e) {
        send_error(res, 400, "invalid_config", e.what());
      } catch (const UsageError& e) {
        send_error(res, 400, "invalid_config", e.what());
      }
    });

    http.Get("/api/runs/:id", [this](const httplib::Request& req, httplib::Response& res) {
      const auto handle = registry.poll(req.path_params.at("id"));
      if (!handle) return send_error(res, 404, "not_found", "unknown run id");
      send_json(res, 200, handle_to_json(*handle));
    });

    http.Get("/api/runs/:id/curves", [this](const httplib::Request& req, httplib::Response& res) {
      const auto lookup = registry.curves(req.path_params.at("id"));
      switch (lookup.state) {
        case RunRegistry::CurveState::unknown: return send_error(res, 404, "not_found", "unknown run id");
        case RunRegistry::CurveState::pending: return send_error(res, 409, "not_done", "run has not finished");
        case RunRegistry::CurveState::ready: return send_json(res, 200, lookup.payload);
      }
    });

    http.Post("/api/subgoals/validate", [](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req, res);
      if (!body) return;
      try {
        const json& series = body->contains("series") ? body->at("series") : *body;
        MapDocument map = [&] {
          if (body->contains("map")) {
            const json& m = body->at("map");
            return m.is_string() ? resolve_environment(m.get<std::string>()) : parse_map(m);
          }
          const std::string env = series.is_object() ? series.value("env", "") : "";
          if (env.empty()) throw ConfigError("/env: name the environment or give a map");
          return resolve_environment(env);
        }();
        const auto issues = check_series_document(series, map);
        json errors = json::array();
        for (const auto& i : issues) errors.push_back({{"field", i.field}, {"message", i.message}});
        send_json(res, 200, {{"ok", issues.empty()}, {"errors", errors}});
      } catch (const LoadError& e) {
        send_error(res, 422, "invalid_map", e.what(), {{e.where.empty() ? "/" : e.where, e.what()}});
      } catch (const std::exception& e) {
        send_error(res, 400, "invalid_request", e.what());
      }
    });

    const auto ui = options.ui_dir.empty() ? std::filesystem::path(RSHAPE_UI_DIR) : options.ui_dir;
    if (std::filesystem::exists(ui / "index.html")) {
      http.set_mount_point("/", ui.string());
    } else {
      http.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
      });
    }
  }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) { impl_->routes(); }

Server::~Server() { stop(); }

int Server::bind() {
  if (impl_->port >= 0) return impl_->port;
  if (impl_->options.port == 0) {
    impl_->port = impl_->http.bind_to_any_port(impl_->options.host);
  } else if (impl_->http.bind_to_port(impl_->options.host, impl_->options.port)) {
    impl_->port = impl_->options.port;
  }
  if (impl_->port < 0) throw ConfigError("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  return impl_->port;
}

void Server::run() {
  bind();
  impl_->http.listen_after_bind();
}

void Server::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

RunRegistry& Server::registry() { return impl_->registry; }

}  // namespace rshape
