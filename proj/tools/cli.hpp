#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnmsusy/potential.hpp"
#include "qnmsusy/spectrum.hpp"

namespace qnmsusy::cli {

/// Anything wrong with the config or the command line. Exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Task { Spectrum, Generators, Partner, Verify, Jordan, Sweep, EmitFigure };

[[nodiscard]] const char* to_string(Task t);
[[nodiscard]] Task task_from_string(const std::string& s);
[[nodiscard]] const std::vector<std::string>& task_names();

struct GeneratorChoice {
  WronskianKind kind = WronskianKind::Gamma;
  double omega_im = 0.0;  // the generator is the axis zero nearest -i|omega_im|
};

struct SweepConfig {
  double lo = 0.0;
  double hi = 0.0;
  double gamma_lo = 0.01;
  double gamma_hi = 5.0;
  int points = 21;
};

struct RunConfig {
  Task task = Task::Spectrum;
  Potential potential = Potential::zero(1.0);
  Rect region = kDefaultRegion;
  std::size_t grid = kDefaultGridPoints;
  double tol_root = kTolRoot;
  double tol_axis = 1e-8;  // coefficient of (1 + |ω|)
  std::optional<int> threads;
  std::filesystem::path output = "out";
  std::vector<WronskianKind> kinds{WronskianKind::Gamma};
  std::optional<GeneratorChoice> generator;
  std::optional<SweepConfig> sweep;
  bool plain_alpha = false;
};

/// Command-line overrides applied on top of the file.
struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<long long> grid;
  std::optional<double> tol_root;
};

/// Parses and validates. Relative sample paths resolve against the config's
/// directory. Throws ConfigError.
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path, Task task, const Overrides& ov);
[[nodiscard]] RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir, Task task,
                                     const Overrides& ov);

/// Files of one run, keyed by name relative to the output directory.
using Artifacts = std::map<std::string, std::string>;

struct RunResult {
  Artifacts files;
  /// A verification task completed but one of its checks failed (exit 1).
  bool checks_failed = false;
};

/// Runs the task; throws qnmsusy::Error on computation failures.
[[nodiscard]] RunResult run(const RunConfig& cfg);

/// Writes every artifact under dir, creating it if needed.
void write_artifacts(const std::filesystem::path& dir, const Artifacts& files);

}  // namespace qnmsusy::cli
