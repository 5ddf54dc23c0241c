// qnm-susy <task> --config <path> [--out <dir>] [--grid N] [--tol-root X]
//
// Exit status: 0 success, 1 computation error (or a failed verification),
// 2 config or usage error. Diagnostics go to stderr as one JSON object.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli.hpp"
#include "qnmsusy/errors.hpp"

namespace {

using nlohmann::ordered_json;

int report(int status, const std::string& task, const std::string& code, const std::string& message) {
  std::cerr << ordered_json{{"status", "error"}, {"exit_code", status}, {"task", task}, {"code", code},
                            {"message", message}}
                   .dump()
            << "\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = qnmsusy::cli;
  CLI::App app{"Outgoing-wave spectra and SUSY partners of finite-support potentials", "qnm-susy"};
  std::string task;
  std::string config;
  std::string out;
  long long grid = 0;
  double tol_root = 0.0;
  app.add_option("task", task, "Task to run")->required()->check(CLI::IsMember(cli::task_names()));
  app.add_option("--config", config, "TOML run configuration")->required();
  auto* out_opt = app.add_option("--out", out, "Output directory (overrides the config)");
  auto* grid_opt = app.add_option("--grid", grid, "Grid points, a power of two plus one, at least 129");
  auto* tol_opt = app.add_option("--tol-root", tol_root, "Root tolerance relative to the edge-median |J|");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(2, task, "usage", e.what());
  }

  cli::RunConfig cfg;
  try {
    cli::Overrides ov;
    if (*out_opt) ov.out = out;
    if (*grid_opt) ov.grid = grid;
    if (*tol_opt) ov.tol_root = tol_root;
    cfg = cli::load_config(config, cli::task_from_string(task), ov);
  } catch (const cli::ConfigError& e) {
    return report(2, task, "config", e.what());
  }
  // The environment wins over the config.
  if (cfg.threads && std::getenv("QNM_SUSY_THREADS") == nullptr) {
    setenv("QNM_SUSY_THREADS", std::to_string(*cfg.threads).c_str(), 1);
  }

  try {
    const auto res = cli::run(cfg);
    cli::write_artifacts(cfg.output, res.files);
    ordered_json files = ordered_json::array();
    for (const auto& [name, body] : res.files) files.push_back((cfg.output / name).string());
    std::cout << ordered_json{{"status", res.checks_failed ? "checks_failed" : "ok"}, {"task", task}, {"files", files}}
                     .dump()
              << "\n";
    if (res.checks_failed) return report(1, task, "checks_failed", "one or more verification checks failed");
    return 0;
  } catch (const qnmsusy::Error& e) {
    return report(1, task, e.code(), e.what());
  } catch (const std::exception& e) {
    return report(1, task, "internal", e.what());
  }
}
