#include <pthread.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rshape/harness.hpp"
#include "rshape/server.hpp"

namespace {

using namespace rshape;
using json = nlohmann::json;

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDegenerate = 3;

int finish_report(const MetricsReport& report, const std::filesystem::path& out_dir) {
  std::cout << format_table(report);
  if (!out_dir.empty()) {
    std::ofstream(out_dir / "report.json") << report_to_json(report).dump(2) << "\n";
    std::ofstream(out_dir / "report.txt") << format_table(report);
  }
  if (report.degenerate()) {
    std::cerr << "warning: degenerate statistics (no within-group variance)\n";
    return kDegenerate;
  }
  return kOk;
}

int cmd_run(const std::string& config_path, const std::filesystem::path& out_dir, int workers, bool quiet) {
  const RunConfig config = load_run_config(config_path);
  std::filesystem::create_directories(out_dir);
  const auto results = run_battery(config, workers, [&](std::size_t done, std::size_t total) {
    if (!quiet) std::cerr << "\r" << done << "/" << total << " runs" << std::flush;
  });
  if (!quiet) std::cerr << "\n";
  {
    std::ofstream csv(out_dir / "results.csv");
    write_results_csv(csv, results);
  }
  for (const auto& r : results)
    if (r.failed) std::cerr << "run " << r.method << " seed " << r.seed << " failed: " << r.error << "\n";
  return finish_report(compute_report(results, config.thresholds, config.smoothing_window, config.asymptotic_tail),
                       out_dir);
}

int cmd_report(const std::string& results_path, const std::vector<double>& thresholds, int window, int tail,
               const std::filesystem::path& out_dir) {
  std::ifstream in(results_path);
  if (!in) throw ConfigError(results_path + ": cannot open results");
  const auto results = read_results_csv(in);
  if (results.empty()) throw ConfigError(results_path + ": no runs");
  for (const double t : thresholds)
    if (!(t > 0.0)) throw ConfigError("--thresholds: values must be positive");
  return finish_report(compute_report(results, thresholds, window, tail), out_dir);
}

int cmd_validate(const std::string& env, const std::string& series_path) {
  const MapDocument map = resolve_environment(env);
  std::ifstream in(series_path);
  if (!in) throw ConfigError(series_path + ": cannot open subgoal series");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(series_path + ": malformed JSON: " + e.what());
  }
  const auto issues = check_series_document(doc, map);
  json errors = json::array();
  for (const auto& i : issues) errors.push_back({{"field", i.field}, {"message", i.message}});
  std::cout << json{{"ok", issues.empty()}, {"errors", errors}}.dump(2) << "\n";
  return issues.empty() ? kOk : kConfigError;
}

int cmd_serve(const ServerOptions& options) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Server server(options);
  const int port = server.bind();
  std::cerr << "listening on http://" << options.host << ":" << port << "\n";
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.run();
  if (waiter.joinable()) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward shaping workbench"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "results";
  int workers = 1;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a learning battery");
  run->add_option("--config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--workers", workers, "Parallel runs")->check(CLI::PositiveNumber);
  run->add_flag("--quiet", quiet, "No progress output");

  std::string results_path;
  std::vector<double> thresholds{500, 300, 100, 50};
  int window = 1;
  int tail = 10;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Summarise a results CSV");
  report->add_option("--results", results_path, "Results CSV")->required()->check(CLI::ExistingFile);
  report->add_option("--thresholds", thresholds, "Step thresholds")->delimiter(',');
  report->add_option("--smoothing", window, "Moving-average window")->check(CLI::PositiveNumber);
  report->add_option("--tail", tail, "Episodes in the asymptotic tail")->check(CLI::PositiveNumber);
  report->add_option("--out", report_out, "Directory for report.json and report.txt");

  std::string env;
  std::string series_path;
  auto* validate = app.add_subcommand("validate-subgoals", "Validate a subgoal series against a map");
  validate->add_option("--env", env, "fourrooms, pinball or a map file")->required();
  validate->add_option("--series", series_path, "Subgoal series (JSON)")->required();

  ServerOptions server_options;
  std::string spool;
  std::string ui;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--host", server_options.host, "Bind address");
  serve->add_option("--port", server_options.port, "Port (0 picks one)");
  serve->add_option("--workers", server_options.workers, "Parallel runs per battery")->check(CLI::PositiveNumber);
  serve->add_option("--spool", spool, "Directory for run results");
  serve->add_option("--ui", ui, "Directory with the UI bundle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, workers, quiet);
    if (*report) return cmd_report(results_path, thresholds, window, tail, report_out);
    if (*validate) return cmd_validate(env, series_path);
    if (*serve) {
      server_options.spool_dir = spool;
      server_options.ui_dir = ui;
      return cmd_serve(server_options);
    }
  } catch (const SeriesValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
