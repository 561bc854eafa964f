#pragma once

// Batch front end: one JSON scenario file in, CSV/JSON artifacts plus a
// checksummed manifest out. The config grammar is documented in README.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cosmoqm/cosmoqm.hpp"

namespace cosmoqm::cli {

enum class Command { Horizon, Bound, Branches, Decay, CollapseSim, Frequency, Products };

std::string_view to_string(Command c) noexcept;
std::optional<Command> parse_command(std::string_view name) noexcept;

struct CosmologyConfig {
  double h0 = 1.0;
  double omega_m = 0.0;
  double omega_r = 0.0;
  double omega_lambda = 0.0;
  double c = 1.0;
  double max_scale_factor = kDefaultMaxScaleFactor;
  double t_i = 0.0;
  double t_f = 0.0;
  double a_i = 0.0;
};

enum class SequenceKind { Constant, InverseSquare, Harmonic, UniformSymmetric };

struct SequenceConfig {
  SequenceKind kind = SequenceKind::UniformSymmetric;
  double value = 0.0;  // the constant factor for Constant
};

struct ToleranceConfig {
  GridControl grid{};
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  std::uint64_t table_cap = kDefaultTableCap;
  ProductThresholds products{};
};

struct Scenario {
  std::string name;
  Command command = Command::Horizon;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  std::optional<CosmologyConfig> cosmology;
  std::vector<double> times;
  std::optional<ObserverState> state;
  std::optional<std::uint64_t> N;
  std::vector<std::uint64_t> N_list;
  std::size_t outcome = 0;  // 0-based; the config file counts from 1
  std::optional<std::uint64_t> cutoff_J;
  CollapseMode mode = CollapseMode::Correlated;
  std::uint64_t trials = 10000;
  double entropy_density = 0.0;
  double planck_length = 1.0;
  std::optional<SequenceConfig> sequence;
  ToleranceConfig tolerances;
};

struct ConfigIssue {
  std::string path;  // dotted field path, e.g. "cosmology.omega_m"
  std::string message;
  ErrorCode code = ErrorCode::ConfigInvalid;
};

struct ValidationResult {
  std::optional<Scenario> scenario;
  std::vector<ConfigIssue> errors;

  bool ok() const noexcept { return scenario.has_value(); }
};

/// Name of the environment variable that supplies the default output directory.
inline constexpr const char* kOutputDirEnv = "SIM_OUTPUT_DIR";

/// Parses and checks a scenario. Reports every problem at once. When
/// `command` is given it must agree with any `command` key in the file.
ValidationResult validate_config(std::string_view raw_text, std::optional<Command> command = std::nullopt);

struct FileRecord {
  std::string name;
  std::uint64_t bytes = 0;
  std::string sha256;
};

struct ReportBundle {
  std::filesystem::path output_dir;
  std::vector<FileRecord> files;
  std::filesystem::path manifest;
};

/// Runs the scenario and writes its artifacts. Throws cosmoqm::Error.
ReportBundle run_scenario(const Scenario& scenario);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Full command-line entry point; returns the process exit status.
int run_cli(int argc, char** argv);

}  // namespace cosmoqm::cli
