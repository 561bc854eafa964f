#include "scenario.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace cosmoqm::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::pair<Command, std::string_view>, 7> kCommands{{
    {Command::Horizon, "horizon"},
    {Command::Bound, "bound"},
    {Command::Branches, "branches"},
    {Command::Decay, "decay"},
    {Command::CollapseSim, "collapse-sim"},
    {Command::Frequency, "frequency"},
    {Command::Products, "products"},
}};

const std::set<std::string> kTopLevelKeys{
    "name",  "command", "seed",   "output_dir", "cosmology",       "times",         "state",
    "N",     "N_list",  "K",      "outcome",    "cutoff_J",        "mode",          "trials",
    "entropy_density",  "planck_length",        "sequence",        "tolerances"};
const std::set<std::string> kCosmologyKeys{"h0",  "omega_m", "omega_r", "omega_lambda", "c",
                                           "t_i", "t_f",     "a_i",     "max_scale_factor"};
const std::set<std::string> kRangeKeys{"from", "to", "count", "spacing", "step"};
const std::set<std::string> kSequenceKeys{"kind", "value"};
const std::set<std::string> kToleranceKeys{
    "ode_relative",     "ode_absolute",       "quadrature_relative", "max_hubble_step",
    "enumeration_cap",  "table_cap",          "cauchy_tolerance",    "away_from_one_margin",
    "log_floor",        "diverges_exponent",  "converges_exponent"};

/// Walks a JSON document, recording problems instead of stopping at the first.
class Reader {
 public:
  std::vector<ConfigIssue> issues;

  void fail(std::string path, std::string message, ErrorCode code = ErrorCode::ConfigInvalid) {
    issues.push_back({std::move(path), std::move(message), code});
  }

  void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
    for (const auto& [key, _] : obj.items()) {
      if (!allowed.contains(key)) fail(join(prefix, key), "unknown key");
    }
  }

  static std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
  }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_number()) {
      fail(path, "expected a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<std::uint64_t> count(const json& obj, const std::string& key, const std::string& path,
                                     std::uint64_t min = 0) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(path, "expected a non-negative integer");
      return std::nullopt;
    }
    const auto n = v.get<std::uint64_t>();
    if (n < min) {
      fail(path, "must be at least " + std::to_string(min));
      return std::nullopt;
    }
    return n;
  }

  std::optional<std::string> string(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_string()) {
      fail(path, "expected a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::vector<double> real_list(const json& v, const std::string& path) {
    std::vector<double> out;
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) {
          fail(path + "[" + std::to_string(i) + "]", "expected a number");
          continue;
        }
        out.push_back(v[i].get<double>());
      }
      return out;
    }
    if (!v.is_object()) {
      fail(path, "expected a list or a {from, to, count, spacing} range");
      return out;
    }
    reject_unknown(v, kRangeKeys, path);
    const auto from = number(v, "from", path + ".from");
    const auto to = number(v, "to", path + ".to");
    const auto n = count(v, "count", path + ".count", 2);
    const auto spacing = string(v, "spacing", path + ".spacing").value_or("log");
    if (!from) fail(path + ".from", "required");
    if (!to) fail(path + ".to", "required");
    if (!n) fail(path + ".count", "required (at least 2)");
    if (spacing != "log" && spacing != "linear") fail(path + ".spacing", "must be \"log\" or \"linear\"");
    if (!from || !to || !n) return out;
    if (spacing == "log" && !(*from > 0.0 && *to > 0.0)) {
      fail(path, "log spacing needs positive bounds");
      return out;
    }
    for (std::uint64_t i = 0; i < *n; ++i) {
      const double f = static_cast<double>(i) / static_cast<double>(*n - 1);
      out.push_back(spacing == "log" ? *from * std::pow(*to / *from, f) : *from + (*to - *from) * f);
    }
    out.back() = *to;
    return out;
  }

  std::vector<std::uint64_t> count_list(const json& v, const std::string& path) {
    std::vector<std::uint64_t> out;
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_unsigned() && !(v[i].is_number_integer() && v[i].get<std::int64_t>() >= 0)) {
          fail(path + "[" + std::to_string(i) + "]", "expected a non-negative integer");
          continue;
        }
        out.push_back(v[i].get<std::uint64_t>());
      }
      return out;
    }
    if (!v.is_object()) {
      fail(path, "expected a list or a {from, to, step} range");
      return out;
    }
    reject_unknown(v, kRangeKeys, path);
    const auto from = count(v, "from", path + ".from", 1);
    const auto to = count(v, "to", path + ".to", 1);
    const auto step = count(v, "step", path + ".step", 1).value_or(1);
    if (!from) fail(path + ".from", "required");
    if (!to) fail(path + ".to", "required");
    if (!from || !to) return out;
    for (std::uint64_t n = *from; n <= *to; n += step) out.push_back(n);
    return out;
  }
};

std::optional<ObserverState> read_state(Reader& r, const json& v) {
  if (!v.is_array()) {
    r.fail("state", "expected a list of [re, im] pairs");
    return std::nullopt;
  }
  std::vector<Amplitude> amps;
  bool ok = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& pair = v[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      r.fail("state[" + std::to_string(i) + "]", "expected [re, im]");
      ok = false;
      continue;
    }
    amps.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  if (!ok) return std::nullopt;
  try {
    return make_state(amps);
  } catch (const Error& e) {
    r.fail("state", e.what(), e.code());
    return std::nullopt;
  }
}

void check_increasing(Reader& r, const std::vector<std::uint64_t>& ns, const std::string& path) {
  if (ns.empty()) r.fail(path, "must not be empty");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1) r.fail(path + "[" + std::to_string(i) + "]", "must be at least 1");
    if (i > 0 && ns[i] <= ns[i - 1]) {
      r.fail(path + "[" + std::to_string(i) + "]", "N_list must be strictly increasing");
    }
  }
}

}  // namespace

std::string_view to_string(Command c) noexcept {
  for (const auto& [cmd, name] : kCommands) {
    if (cmd == c) return name;
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) noexcept {
  for (const auto& [cmd, n] : kCommands) {
    if (n == name) return cmd;
  }
  return std::nullopt;
}

ValidationResult validate_config(std::string_view raw_text, std::optional<Command> command) {
  ValidationResult result;
  Reader r;
  json doc;
  try {
    doc = json::parse(raw_text);
  } catch (const json::parse_error& e) {
    r.fail("", std::string("not valid JSON: ") + e.what());
    result.errors = std::move(r.issues);
    return result;
  }
  if (!doc.is_object()) {
    r.fail("", "top level must be an object");
    result.errors = std::move(r.issues);
    return result;
  }
  r.reject_unknown(doc, kTopLevelKeys, "");

  Scenario s;
  if (auto name = r.string(doc, "command", "command")) {
    const auto parsed = parse_command(*name);
    if (!parsed) {
      r.fail("command", "unknown command \"" + *name + "\"");
    } else if (command && *command != *parsed) {
      r.fail("command", "config says \"" + *name + "\" but \"" + std::string(to_string(*command)) +
                            "\" was requested");
    } else {
      command = parsed;
    }
  }
  if (!command) {
    if (!doc.contains("command")) r.fail("command", "required (in the file or on the command line)");
    result.errors = std::move(r.issues);
    return result;
  }
  s.command = *command;
  s.name = r.string(doc, "name", "name").value_or(std::string(to_string(s.command)));
  s.seed = r.count(doc, "seed", "seed").value_or(0);
  if (auto out = r.string(doc, "output_dir", "output_dir")) {
    s.output_dir = *out;
  } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    s.output_dir = env;
  } else {
    s.output_dir = "sim-output";
  }

  // tolerances
  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    if (!t.is_object()) {
      r.fail("tolerances", "expected an object");
    } else {
      r.reject_unknown(t, kToleranceKeys, "tolerances");
      auto& tol = s.tolerances;
      auto positive = [&](const char* key, double& target) {
        if (auto v = r.number(t, key, std::string("tolerances.") + key)) {
          if (*v > 0.0) {
            target = *v;
          } else {
            r.fail(std::string("tolerances.") + key, "must be positive");
          }
        }
      };
      positive("ode_relative", tol.grid.ode.relative);
      positive("ode_absolute", tol.grid.ode.absolute);
      positive("quadrature_relative", tol.grid.quadrature_relative);
      positive("max_hubble_step", tol.grid.max_hubble_step);
      positive("cauchy_tolerance", tol.products.cauchy_tolerance);
      positive("away_from_one_margin", tol.products.away_from_one_margin);
      positive("diverges_exponent", tol.products.diverges_exponent);
      positive("converges_exponent", tol.products.converges_exponent);
      if (auto v = r.number(t, "log_floor", "tolerances.log_floor")) {
        if (*v < 0.0) {
          tol.products.log_floor = *v;
        } else {
          r.fail("tolerances.log_floor", "must be negative");
        }
      }
      if (auto v = r.count(t, "enumeration_cap", "tolerances.enumeration_cap", 1)) tol.enumeration_cap = *v;
      if (auto v = r.count(t, "table_cap", "tolerances.table_cap", 1)) tol.table_cap = *v;
    }
  }

  if (doc.contains("cosmology")) {
    const auto& c = doc["cosmology"];
    if (!c.is_object()) {
      r.fail("cosmology", "expected an object");
    } else {
      r.reject_unknown(c, kCosmologyKeys, "cosmology");
      CosmologyConfig cc;
      bool complete = true;
      auto required = [&](const char* key, double& target) {
        if (auto v = r.number(c, key, std::string("cosmology.") + key)) {
          target = *v;
        } else {
          if (!c.contains(key)) r.fail(std::string("cosmology.") + key, "required");
          complete = false;
        }
      };
      auto optional = [&](const char* key, double& target) {
        if (auto v = r.number(c, key, std::string("cosmology.") + key)) target = *v;
      };
      required("h0", cc.h0);
      required("omega_m", cc.omega_m);
      optional("omega_r", cc.omega_r);
      optional("omega_lambda", cc.omega_lambda);
      optional("c", cc.c);
      optional("max_scale_factor", cc.max_scale_factor);
      required("t_i", cc.t_i);
      required("t_f", cc.t_f);
      required("a_i", cc.a_i);
      if (complete) {
        try {
          (void)build_model(cc.h0, cc.omega_m, cc.omega_r, cc.omega_lambda, cc.c, cc.max_scale_factor);
          if (!(cc.t_i < cc.t_f)) r.fail("cosmology.t_f", "must exceed t_i", ErrorCode::TimeOutOfRange);
          if (!(cc.a_i > 0.0)) r.fail("cosmology.a_i", "must be positive", ErrorCode::TimeOutOfRange);
          s.cosmology = cc;
        } catch (const Error& e) {
          r.fail("cosmology", e.what(), e.code());
        }
      }
    }
  }

  if (doc.contains("times")) s.times = r.real_list(doc["times"], "times");
  if (doc.contains("state")) s.state = read_state(r, doc["state"]);
  if (auto n = r.count(doc, "N", "N", 1)) s.N = *n;
  if (doc.contains("N_list")) s.N_list = r.count_list(doc["N_list"], "N_list");
  if (auto k = r.count(doc, "K", "K", 2)) {
    if (s.state && s.state->dimension() != *k) {
      r.fail("K", "state has " + std::to_string(s.state->dimension()) + " amplitudes",
             ErrorCode::DimensionMismatch);
    }
  }
  if (auto k = r.count(doc, "outcome", "outcome", 1)) {
    s.outcome = *k - 1;
    if (s.state && s.outcome >= s.state->dimension()) {
      r.fail("outcome", "outside 1.." + std::to_string(s.state->dimension()), ErrorCode::OutcomeOutOfRange);
    }
  }
  if (auto j = r.count(doc, "cutoff_J", "cutoff_J", 10)) s.cutoff_J = *j;
  if (auto m = r.string(doc, "mode", "mode")) {
    if (*m == "correlated") {
      s.mode = CollapseMode::Correlated;
    } else if (*m == "independent") {
      s.mode = CollapseMode::Independent;
    } else {
      r.fail("mode", "must be \"correlated\" or \"independent\"");
    }
  }
  if (auto t = r.count(doc, "trials", "trials", 100)) s.trials = *t;
  if (auto v = r.number(doc, "entropy_density", "entropy_density")) {
    if (*v >= 0.0) {
      s.entropy_density = *v;
    } else {
      r.fail("entropy_density", "must be non-negative", ErrorCode::NegativeDensity);
    }
  }
  if (auto v = r.number(doc, "planck_length", "planck_length")) {
    if (*v > 0.0) {
      s.planck_length = *v;
    } else {
      r.fail("planck_length", "must be positive");
    }
  }
  if (doc.contains("sequence")) {
    const auto& q = doc["sequence"];
    if (!q.is_object()) {
      r.fail("sequence", "expected an object");
    } else {
      r.reject_unknown(q, kSequenceKeys, "sequence");
      SequenceConfig sc;
      const auto kind = r.string(q, "kind", "sequence.kind");
      bool ok = true;
      if (!kind) {
        if (!q.contains("kind")) r.fail("sequence.kind", "required");
        ok = false;
      } else if (*kind == "constant") {
        sc.kind = SequenceKind::Constant;
        const auto v = r.number(q, "value", "sequence.value");
        if (!v || !(*v > 0.0 && *v <= 1.0)) {
          r.fail("sequence.value", "constant factor in (0, 1] required", ErrorCode::InvalidWeight);
          ok = false;
        } else {
          sc.value = *v;
        }
      } else if (*kind == "inverse_square") {
        sc.kind = SequenceKind::InverseSquare;
      } else if (*kind == "harmonic") {
        sc.kind = SequenceKind::Harmonic;
      } else if (*kind == "uniform_symmetric") {
        sc.kind = SequenceKind::UniformSymmetric;
      } else {
        r.fail("sequence.kind", "one of constant, inverse_square, harmonic, uniform_symmetric");
        ok = false;
      }
      if (ok) s.sequence = sc;
    }
  }

  // required groups per command
  auto need = [&](bool present, const char* path, const char* what) {
    if (!present && !doc.contains(path)) r.fail(path, std::string("required for ") +
                                                          std::string(to_string(s.command)) + ": " + what);
  };
  switch (s.command) {
    case Command::Horizon:
    case Command::Bound:
      need(s.cosmology.has_value(), "cosmology", "model parameters");
      need(!s.times.empty(), "times", "evaluation times");
      if (s.cosmology) {
        for (std::size_t i = 0; i < s.times.size(); ++i) {
          if (s.times[i] < s.cosmology->t_i || s.times[i] > s.cosmology->t_f) {
            r.fail("times[" + std::to_string(i) + "]", "outside [t_i, t_f]", ErrorCode::TimeOutOfRange);
          }
        }
      }
      if (s.command == Command::Bound) {
        need(doc.contains("entropy_density"), "entropy_density", "comoving entropy density");
        need(doc.contains("planck_length"), "planck_length", "Planck length in model units");
      }
      break;
    case Command::Branches:
      need(s.state.has_value(), "state", "observer amplitudes");
      need(s.N.has_value(), "N", "number of observers");
      break;
    case Command::Decay:
      need(s.state.has_value(), "state", "observer amplitudes");
      need(!s.N_list.empty(), "N_list", "observer counts");
      if (!s.N_list.empty()) check_increasing(r, s.N_list, "N_list");
      break;
    case Command::CollapseSim:
      need(s.state.has_value(), "state", "observer amplitudes");
      need(s.N.has_value(), "N", "number of observers");
      need(doc.contains("mode"), "mode", "correlated or independent");
      break;
    case Command::Frequency:
      need(s.state.has_value(), "state", "observer amplitudes");
      need(!s.N_list.empty(), "N_list", "observer counts");
      if (!s.N_list.empty()) check_increasing(r, s.N_list, "N_list");
      break;
    case Command::Products:
      need(s.sequence.has_value(), "sequence", "weight sequence");
      need(s.cutoff_J.has_value(), "cutoff_J", "number of factors");
      if (s.sequence && s.sequence->kind == SequenceKind::UniformSymmetric) {
        need(s.state.has_value(), "state", "observer amplitudes for uniform_symmetric");
      }
      break;
  }

  result.errors = std::move(r.issues);
  if (result.errors.empty()) result.scenario = std::move(s);
  return result;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::OutputUnwritable, "SHA-256 failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  constexpr char kDigits[] = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kDigits[digest[i] >> 4]);
    hex.push_back(kDigits[digest[i] & 0xf]);
  }
  return hex;
}

namespace {

class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw Error(ErrorCode::OutputUnwritable, "cannot create " + dir_.string() + ": " + ec.message());
    }
  }

  /// Write-then-rename, so readers never see a partial file.
  void write(const std::string& name, const std::string& content) {
    const fs::path target = dir_ / name;
    const fs::path tmp = dir_ / (name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::OutputUnwritable, "cannot open " + tmp.string());
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      if (!out) throw Error(ErrorCode::OutputUnwritable, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw Error(ErrorCode::OutputUnwritable, "cannot rename to " + target.string());
    records_.push_back({name, content.size(), sha256_hex(content)});
  }

  const fs::path& dir() const noexcept { return dir_; }
  const std::vector<FileRecord>& records() const noexcept { return records_; }

 private:
  fs::path dir_;
  std::vector<FileRecord> records_;
};

CosmologyModel model_of(const CosmologyConfig& c) {
  return build_model(c.h0, c.omega_m, c.omega_r, c.omega_lambda, c.c, c.max_scale_factor);
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

void run_horizon(const Scenario& s, ArtifactWriter& out, bool bound) {
  const auto& cc = *s.cosmology;
  const auto model = model_of(cc);
  const auto curve = solve_scale_factor(model, cc.t_i, cc.t_f, cc.a_i, s.tolerances.grid);

  std::ostringstream curve_csv;
  write_curve_csv(curve_csv, curve);
  out.write("curve.csv", curve_csv.str());

  std::ostringstream table;
  if (!bound) {
    csv::write_header(table, {"t", "R_P", "chi", "err_est"});
    for (double t : s.times) {
      const auto h = particle_horizon(curve, t);
      csv::write_row(table, t, h.proper_radius, h.comoving_radius, h.quadrature_error_estimate);
    }
    out.write("horizon.csv", table.str());
  } else {
    csv::write_header(table, {"t", "R_P", "chi", "entropy", "area_quarter", "ratio", "satisfied"});
    for (double t : s.times) {
      const auto b = holographic_ratio(model, curve, t, s.entropy_density, s.planck_length);
      csv::write_row(table, t, b.horizon.proper_radius, b.horizon.comoving_radius, b.entropy,
                     b.area_quarter, b.ratio, b.satisfied() ? 1 : 0);
    }
    out.write("bound.csv", table.str());
  }
}

void run_branches(const Scenario& s, ArtifactWriter& out) {
  const auto& state = *s.state;
  const auto table = compress_branches(state, *s.N, s.tolerances.table_cap);
  std::ostringstream csv_out;
  for (std::size_t k = 0; k < table.K; ++k) csv_out << 'c' << (k + 1) << ',';
  csv_out << "log_multiplicity,log_prob\n";
  for (const auto& e : table.entries) {
    for (auto c : e.counts) csv_out << c << ',';
    csv::write_row(csv_out, e.log_multiplicity, e.log_probability);
  }
  out.write("ensemble.csv", csv_out.str());

  json summary{{"N", *s.N},
               {"K", table.K},
               {"table_size", table.entries.size()},
               {"total_probability_compressed", table.total_probability()}};
  const bool fits = capped_power(table.K, *s.N, s.tolerances.enumeration_cap) <= s.tolerances.enumeration_cap;
  summary["total_probability_brute_force"] =
      fits ? json(branch_probability_sum(state, *s.N, SumPath::BruteForce, s.tolerances.enumeration_cap))
           : json(nullptr);
  out.write("summary.json", json_text(summary));
}

void run_decay(const Scenario& s, ArtifactWriter& out) {
  const auto rows = collapse_decay_curve(*s.state, s.N_list);
  std::ostringstream csv_out;
  csv::write_header(csv_out, {"N", "log10_max_branch_prob", "slope"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double slope =
        i == 0 ? rows[0].log10_max_branch_probability / static_cast<double>(rows[0].N)
               : (rows[i].log10_max_branch_probability - rows[i - 1].log10_max_branch_probability) /
                     static_cast<double>(rows[i].N - rows[i - 1].N);
    csv::write_row(csv_out, rows[i].N, rows[i].log10_max_branch_probability, slope);
  }
  out.write("decay.csv", csv_out.str());
}

void run_collapse(const Scenario& s, ArtifactWriter& out) {
  RngStream rng(s.seed);
  const auto outcomes = simulate_finite_collapse(*s.state, *s.N, rng, s.mode);
  std::ostringstream csv_out;
  csv::write_header(csv_out, {"observer", "outcome"});
  for (std::size_t i = 0; i < outcomes.size(); ++i) csv::write_row(csv_out, i + 1, outcomes[i] + 1);
  out.write("outcomes.csv", csv_out.str());

  const auto counts = count_outcomes(outcomes, s.state->dimension());
  const bool constant = std::all_of(outcomes.begin(), outcomes.end(),
                                    [&](auto k) { return k == outcomes.front(); });
  json summary{{"mode", s.mode == CollapseMode::Correlated ? "correlated" : "independent"},
               {"N", *s.N},
               {"seed", s.seed},
               {"counts", counts},
               {"all_equal", constant}};
  if (s.mode == CollapseMode::Independent) {
    const auto chi = chi_square_test(counts, born_probabilities(*s.state));
    summary["chi_square"] = {{"statistic", chi.statistic},
                             {"degrees_of_freedom", chi.degrees_of_freedom},
                             {"p_value", chi.p_value}};
  }
  out.write("summary.json", json_text(summary));
}

void run_frequency(const Scenario& s, ArtifactWriter& out) {
  const auto rows = born_convergence_table(*s.state, s.N_list, s.trials, RngStream(s.seed), s.outcome);
  std::ostringstream csv_out;
  csv::write_header(csv_out, {"N", "analytic_var", "empirical_var", "trials", "seed"});
  for (const auto& r : rows) {
    csv::write_row(csv_out, r.N, r.analytic_variance, r.empirical_variance, r.trials, r.seed);
  }
  out.write("convergence.csv", csv_out.str());
}

void run_products(const Scenario& s, ArtifactWriter& out) {
  WeightSequence seq;
  switch (s.sequence->kind) {
    case SequenceKind::Constant: seq = WeightSequence::constant(s.sequence->value); break;
    case SequenceKind::InverseSquare: seq = WeightSequence::inverse_square(); break;
    case SequenceKind::Harmonic: seq = WeightSequence::harmonic(); break;
    case SequenceKind::UniformSymmetric: seq = uniform_symmetric_sequence(*s.state); break;
  }
  const auto a = infinite_product_classify(seq, *s.cutoff_J, s.tolerances.products);
  json verdict{{"verdict", std::string(to_string(a.verdict))},
               {"cutoff", a.cutoff},
               {"tail_statistic", a.tail_test_statistic},
               {"final_partial_log_product", a.final_partial_log_product()}};
  out.write("products.json", json_text(verdict));

  std::ostringstream csv_out;
  csv::write_header(csv_out, {"j", "partial_log_product"});
  for (std::size_t j = 0; j < a.partial_log_products.size(); ++j) {
    csv::write_row(csv_out, j + 1, a.partial_log_products[j]);
  }
  out.write("partial_products.csv", csv_out.str());
}

}  // namespace

ReportBundle run_scenario(const Scenario& s) {
  ArtifactWriter out(s.output_dir);
  switch (s.command) {
    case Command::Horizon: run_horizon(s, out, false); break;
    case Command::Bound: run_horizon(s, out, true); break;
    case Command::Branches: run_branches(s, out); break;
    case Command::Decay: run_decay(s, out); break;
    case Command::CollapseSim: run_collapse(s, out); break;
    case Command::Frequency: run_frequency(s, out); break;
    case Command::Products: run_products(s, out); break;
  }

  json files = json::array();
  for (const auto& f : out.records()) {
    files.push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  }
  const json manifest{{"name", s.name},
                      {"command", std::string(to_string(s.command))},
                      {"seed", s.seed},
                      {"files", files}};
  out.write("manifest.json", json_text(manifest));
  return {out.dir(), out.records(), out.dir() / "manifest.json"};
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Particle-horizon and branch-probability scenarios", "sim"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;

  for (const auto& [cmd, name] : kCommands) {
    auto* sub = app.add_subcommand(std::string(name), "run a " + std::string(name) + " scenario");
    sub->add_option("--config", config_path, "scenario file (JSON)")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_dir, "override the output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCategory::Config);
  }

  const auto command = parse_command(app.get_subcommands().front()->get_name());
  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "error[" << to_string(ErrorCode::ConfigUnreadable) << "]: cannot read " << config_path
              << "\n";
    return static_cast<int>(ExitCategory::Io);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  auto validated = validate_config(buffer.str(), command);
  if (!validated.ok()) {
    for (const auto& issue : validated.errors) {
      std::cerr << "error[" << to_string(issue.code) << "] " << (issue.path.empty() ? "<root>" : issue.path)
                << ": " << issue.message << "\n";
    }
    return static_cast<int>(ExitCategory::Config);
  }
  Scenario scenario = std::move(*validated.scenario);
  if (seed) scenario.seed = *seed;
  if (out_dir) scenario.output_dir = *out_dir;

  try {
    const auto bundle = run_scenario(scenario);
    std::cout << bundle.manifest.string() << "\n";
    return static_cast<int>(ExitCategory::Success);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.code()) << "]: " << e.what() << "\n";
    return static_cast<int>(exit_category(e.code()));
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error[" << to_string(ErrorCode::OutputUnwritable) << "]: " << e.what() << "\n";
    return static_cast<int>(ExitCategory::Io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCategory::Numeric);
  }
}

}  // namespace cosmoqm::cli
