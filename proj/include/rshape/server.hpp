#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "rshape/harness.hpp"

namespace rshape {

enum class RunStatus { queued, running, done, failed };
std::string_view to_string(RunStatus status);

struct RunHandle {
  std::string id;
  RunStatus status = RunStatus::queued;
  std::size_t completed = 0;
  std::size_t total = 0;
  std::string created_at;  // UTC, ISO 8601
  std::string error;

  double progress() const;
};

nlohmann::json handle_to_json(const RunHandle& handle);

/// Descriptors of the shipped environments with their full geometry.
nlohmann::json list_environments();

/// Mean/standard-error learning curves per method plus the metrics report.
nlohmann::json curve_payload(const RunConfig& config, const std::vector<RunResult>& results);

/// Queue of submitted batteries executed one at a time on a background
/// thread. With a spool directory every battery keeps its config, results
/// CSV and report on disk; unfinished ones are re-queued on construction.
class RunRegistry {
 public:
  explicit RunRegistry(int workers = 1, std::filesystem::path spool_dir = {});
  ~RunRegistry();

  RunRegistry(const RunRegistry&) = delete;
  RunRegistry& operator=(const RunRegistry&) = delete;

  /// Validates and queues a run config document. Throws ConfigError,
  /// SeriesValidationError or LoadError.
  std::string submit(const nlohmann::json& config);

  std::optional<RunHandle> poll(const std::string& id) const;

  enum class CurveState { unknown, pending, ready };
  struct CurveLookup {
    CurveState state = CurveState::unknown;
    nlohmann::json payload;
  };
  CurveLookup curves(const std::string& id) const;

  /// Blocks until the run is done or failed; false for an unknown id.
  bool wait(const std::string& id) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  int workers = 1;
  std::filesystem::path spool_dir;
  std::filesystem::path ui_dir;  // empty: the default bundle location
};

/// HTTP JSON API over a RunRegistry.
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();

  /// Binds the listening socket and returns the port.
  int bind();
  /// Serves until stop(); binds first if needed.
  void run();
  void stop();

  RunRegistry& registry();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rshape
