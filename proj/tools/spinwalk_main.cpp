#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <spinwalk/spinwalk.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spinwalk;

namespace {

constexpr const char* kToolVersion = "spinwalk 0.1.0";

// Reserved RNG stream ids. Trajectory and baseline runs use their run index,
// so the reserved ids sit at the top of the space.
constexpr std::uint64_t kBathSampleStream = ~std::uint64_t{0};
constexpr std::uint64_t kCalibrationStream = ~std::uint64_t{0} - 1;
constexpr std::uint64_t kBaselineStream = ~std::uint64_t{0} - 2;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

template <class T>
T required_field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(where + " needs the field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

CalibrationCrossing parse_crossing(const std::string& name) {
  if (name == "depolarized") return CalibrationCrossing::depolarized;
  if (name == "one-over-e") return CalibrationCrossing::one_over_e;
  throw ConfigError("crossing must be 'depolarized' or 'one-over-e'");
}

// Command-line values; unset optionals fall back to the config file.
struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;

  std::string bath_file;
  std::string bath_inline;
  std::optional<int> sample_n;
  std::optional<double> sample_scale;
  std::optional<double> sample_target;
  std::optional<double> zeeman;

  std::optional<double> tau;
  std::optional<int> n_measurements;
  std::optional<long> repetitions;
  std::optional<double> readout_error;
  std::string engine;

  std::optional<double> t_start;
  std::optional<double> t_stop;
  std::optional<int> n_points;

  std::string baseline_kind;
  std::optional<double> p0;
  std::string density_file;
  bool match_bath = false;

  std::optional<int> cal_spins;
  std::optional<double> cal_target;
  std::string crossing;
  std::optional<int> cal_ensemble;

  std::string records_path;
};

// Layers the command line over the config file; everything downstream reads
// the resolved document, and the manifest embeds it for replay.
json resolve_config(const CliOptions& opt) {
  json cfg = opt.config_path.empty() ? json::object()
                                     : load_json_file(opt.config_path);
  if (!cfg.is_object()) throw ConfigError("config root must be a JSON object");

  if (opt.seed) cfg["seed"] = *opt.seed;
  if (opt.workers) cfg["workers"] = *opt.workers;
  if (opt.out_dir) cfg["out"] = *opt.out_dir;

  const bool flag_bath = !opt.bath_file.empty() || !opt.bath_inline.empty() ||
                         opt.sample_n.has_value();
  if (flag_bath) {
    json bath = json::object();
    if (!opt.bath_file.empty()) bath["file"] = opt.bath_file;
    if (!opt.bath_inline.empty()) {
      try {
        bath["inline"] = json::parse(opt.bath_inline);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("--bath-json is not valid JSON: ") + e.what());
      }
    }
    if (opt.sample_n) {
      json sample;
      sample["n_spins"] = *opt.sample_n;
      if (opt.sample_scale) sample["coupling_scale"] = *opt.sample_scale;
      if (opt.sample_target) sample["target_t2star"] = *opt.sample_target;
      if (opt.zeeman) sample["zeeman"] = *opt.zeeman;
      bath["sample"] = sample;
    }
    cfg["bath"] = bath;
  } else if (opt.zeeman && cfg.contains("bath") && cfg["bath"].contains("sample")) {
    cfg["bath"]["sample"]["zeeman"] = *opt.zeeman;
  }

  json& protocol = cfg["protocol"];
  if (!protocol.is_object()) protocol = json::object();
  if (opt.tau) protocol["tau"] = *opt.tau;
  if (opt.n_measurements) protocol["n_measurements"] = *opt.n_measurements;
  if (opt.repetitions) protocol["n_repetitions"] = *opt.repetitions;
  if (opt.readout_error) protocol["readout_error"] = *opt.readout_error;
  if (!opt.engine.empty()) protocol["engine"] = opt.engine;

  if (opt.t_start || opt.t_stop || opt.n_points) {
    json& grid = cfg["grid"];
    if (!grid.is_object()) grid = json::object();
    if (opt.t_start) grid["t_start"] = *opt.t_start;
    if (opt.t_stop) grid["t_stop"] = *opt.t_stop;
    if (opt.n_points) grid["n_points"] = *opt.n_points;
  }

  if (!opt.baseline_kind.empty() || opt.p0 || !opt.density_file.empty() ||
      opt.match_bath) {
    json& baseline = cfg["baseline"];
    if (!baseline.is_object()) baseline = json::object();
    if (!opt.baseline_kind.empty()) baseline["kind"] = opt.baseline_kind;
    if (opt.p0) baseline["p0"] = *opt.p0;
    if (!opt.density_file.empty()) baseline["density_file"] = opt.density_file;
    if (opt.match_bath) baseline["match_bath"] = true;
  }

  if (opt.cal_spins || opt.cal_target || !opt.crossing.empty() ||
      opt.cal_ensemble) {
    json& cal = cfg["calibrate"];
    if (!cal.is_object()) cal = json::object();
    if (opt.cal_spins) cal["n_spins"] = *opt.cal_spins;
    if (opt.cal_target) cal["target_t2star"] = *opt.cal_target;
    if (opt.zeeman) cal["zeeman"] = *opt.zeeman;
    if (!opt.crossing.empty()) cal["crossing"] = opt.crossing;
    if (opt.cal_ensemble) cal["n_ensemble"] = *opt.cal_ensemble;
  }

  return cfg;
}

std::optional<std::uint64_t> config_seed(const json& cfg) {
  if (!cfg.contains("seed")) return std::nullopt;
  return cfg.at("seed").get<std::uint64_t>();
}

std::uint64_t require_seed(const json& cfg, const std::string& why) {
  const auto seed = config_seed(cfg);
  if (!seed) throw ConfigError("a seed is required " + why + " (--seed or config)");
  return *seed;
}

fs::path prepare_out_dir(const json& cfg) {
  const fs::path dir = field_or<std::string>(cfg, "out", "out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
  return dir;
}

int resolve_workers(const json& cfg) {
  const int workers = field_or<int>(cfg, "workers", 1);
  if (workers < 1) throw ConfigError("workers must be >= 1");
  return workers;
}

BathSpec resolve_bath(const json& cfg) {
  if (!cfg.contains("bath"))
    throw ConfigError("this command needs a bath (file, inline, or sample)");
  const json& bath = cfg.at("bath");
  const int sources = bath.contains("file") + bath.contains("inline") +
                      bath.contains("sample");
  if (sources != 1)
    throw ConfigError("bath needs exactly one of: file, inline, sample");

  if (bath.contains("file"))
    return BathSpec::load(bath.at("file").get<std::string>());
  if (bath.contains("inline")) return BathSpec::from_json(bath.at("inline"));

  const json& sample = bath.at("sample");
  const int n_spins = required_field<int>(sample, "n_spins", "bath.sample");
  const double zeeman = field_or<double>(sample, "zeeman", 0.0);
  const bool has_scale = sample.contains("coupling_scale");
  const bool has_target = sample.contains("target_t2star");
  if (has_scale == has_target)
    throw ConfigError(
        "bath.sample needs exactly one of: coupling_scale, target_t2star");
  std::uint64_t seed;
  if (sample.contains("seed"))
    seed = sample.at("seed").get<std::uint64_t>();
  else
    seed = require_seed(cfg, "to sample a bath");

  double scale;
  if (has_scale) {
    scale = sample.at("coupling_scale").get<double>();
  } else {
    const double target = sample.at("target_t2star").get<double>();
    const auto crossing =
        parse_crossing(field_or<std::string>(sample, "crossing", "depolarized"));
    RandomStream cal_rng = make_stream(seed, kCalibrationStream);
    scale = calibrate_coupling_scale(n_spins, zeeman, target, cal_rng, crossing);
  }
  RandomStream rng = make_stream(seed, kBathSampleStream);
  return sample_bath_spec(n_spins, scale, zeeman, rng,
                          "seed=" + std::to_string(seed));
}

ProtocolConfig resolve_protocol(const json& cfg, int bath_spins,
                                bool require_tau = true) {
  const json& p = cfg.contains("protocol") ? cfg.at("protocol") : json::object();
  ProtocolConfig protocol;
  if (p.contains("tau"))
    protocol.contact_time = p.at("tau").get<double>();
  else if (require_tau)
    throw ConfigError("protocol needs tau (--tau or config protocol.tau)");
  protocol.n_measurements = field_or<int>(p, "n_measurements", 4);
  protocol.n_repetitions = field_or<long>(p, "n_repetitions", 10000);
  protocol.readout_error = field_or<double>(p, "readout_error", 0.01);

  const std::string engine = field_or<std::string>(p, "engine", "auto");
  if (engine == "exact") {
    protocol.engine = Engine::exact_enumeration;
  } else if (engine == "monte-carlo") {
    protocol.engine = Engine::monte_carlo;
  } else if (engine == "auto") {
    const bool small = bath_spins <= kMaxDensitySpins &&
                       protocol.n_measurements <= 10;
    protocol.engine = small ? Engine::exact_enumeration : Engine::monte_carlo;
  } else {
    throw ConfigError("engine must be 'exact', 'monte-carlo', or 'auto'");
  }
  return protocol;
}

struct Grid {
  std::vector<double> points;
};

Grid resolve_grid(const json& cfg) {
  if (!cfg.contains("grid"))
    throw ConfigError("this command needs a time grid (t_start, t_stop, n_points)");
  const json& g = cfg.at("grid");
  const double t_start = field_or<double>(g, "t_start", 0.0);
  const double t_stop = required_field<double>(g, "t_stop", "grid");
  const int n_points = field_or<int>(g, "n_points", 200);
  if (n_points < 1) throw ConfigError("grid n_points must be >= 1");
  if (t_start < 0.0) throw ConfigError("grid t_start must be >= 0");
  if (t_stop < t_start) throw ConfigError("grid t_stop must be >= t_start");
  Grid grid;
  grid.points.reserve(static_cast<std::size_t>(n_points));
  if (n_points == 1) {
    grid.points.push_back(t_start);
  } else {
    const double dt = (t_stop - t_start) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) grid.points.push_back(t_start + i * dt);
  }
  return grid;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const json& cfg) {
  json manifest;
  manifest["tool"] = kToolVersion;
  manifest["command"] = command;
  // Workers are omitted on purpose: results are worker-count invariant, so
  // the manifest stays byte-identical across parallel replays.
  json resolved = cfg;
  resolved.erase("workers");
  manifest["resolved_config"] = resolved;
  write_json_file(out_dir / "manifest.json", manifest);
}

void write_record_statistics(const fs::path& out_dir,
                             const std::vector<MeasurementRecord>& records) {
  const StringHistogram hist = string_histogram(records);
  write_histogram_csv((out_dir / "histogram.csv").string(), hist);
  write_hamming_csv((out_dir / "hamming.csv").string(), hamming_profile(hist));
  json purity;
  purity["n"] = hist.n;
  purity["R"] = hist.total;
  purity["distribution_purity"] = distribution_purity(hist);
  purity["shannon_entropy_bits"] = shannon_entropy(hist);
  write_json_file(out_dir / "purity.json", purity);
}

/// Draws R recorded strings from an exact distribution, one derived RNG
/// stream per run, so the output matches the trajectory path's determinism
/// contract.
std::vector<MeasurementRecord> sample_from_distribution(
    const StringDistribution& dist, long repetitions, std::uint64_t base_seed) {
  std::vector<double> cdf(dist.probabilities.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.probabilities.size(); ++i) {
    acc += dist.probabilities[i];
    cdf[i] = acc;
  }
  std::vector<MeasurementRecord> records(static_cast<std::size_t>(repetitions));
  for (long r = 0; r < repetitions; ++r) {
    RandomStream rng = make_stream(base_seed, static_cast<std::uint64_t>(r));
    const double u = rng.uniform() * acc;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const std::size_t idx = it == cdf.end()
                                ? cdf.size() - 1
                                : static_cast<std::size_t>(it - cdf.begin());
    auto& rec = records[static_cast<std::size_t>(r)];
    rec.run_index = r;
    rec.bits.resize(static_cast<std::size_t>(dist.n_bits));
    for (int j = 0; j < dist.n_bits; ++j)
      rec.bits[static_cast<std::size_t>(j)] =
          static_cast<std::uint8_t>(idx >> (dist.n_bits - 1 - j) & 1);
  }
  return records;
}

int cmd_fid(const json& cfg) {
  const fs::path out_dir = prepare_out_dir(cfg);
  const BathSpec spec = resolve_bath(cfg);
  const Grid grid = resolve_grid(cfg);
  std::vector<double> cs;
  cs.reserve(grid.points.size());
  for (double t : grid.points) cs.push_back(fid(spec, t));
  write_fid_csv((out_dir / "fid.csv").string(), grid.points, cs);
  write_json_file(out_dir / "bath.json", spec.to_json());
  write_manifest(out_dir, "fid", cfg);
  std::cout << "fid curve: " << grid.points.size() << " points -> "
            << (out_dir / "fid.csv").string() << '\n';
  return 0;
}

int cmd_strings(const json& cfg) {
  const fs::path out_dir = prepare_out_dir(cfg);
  const BathSpec spec = resolve_bath(cfg);
  ProtocolConfig protocol = resolve_protocol(cfg, spec.n_spins());
  const std::uint64_t seed = require_seed(cfg, "to sample records");
  const int workers = resolve_workers(cfg);

  std::vector<MeasurementRecord> records;
  if (protocol.engine == Engine::exact_enumeration) {
    const EnumerationResult exact = enumerate_string_distribution(spec, protocol);
    records =
        sample_from_distribution(exact.distribution, protocol.n_repetitions, seed);
  } else {
    records = sample_records(spec, protocol, seed, workers);
  }

  write_records((out_dir / "records.txt").string(), records,
                protocol.contact_time);
  write_record_statistics(out_dir, records);
  write_json_file(out_dir / "bath.json", spec.to_json());
  write_manifest(out_dir, "strings", cfg);
  std::cout << "sampled " << protocol.n_repetitions << " runs of "
            << protocol.n_measurements << " measurements -> "
            << (out_dir / "records.txt").string() << '\n';
  return 0;
}

int cmd_enumerate(const json& cfg) {
  const fs::path out_dir = prepare_out_dir(cfg);
  const BathSpec spec = resolve_bath(cfg);
  ProtocolConfig protocol = resolve_protocol(cfg, spec.n_spins());
  protocol.engine = Engine::exact_enumeration;
  protocol.validate(spec.n_spins());

  const EnumerationResult exact = enumerate_string_distribution(spec, protocol);
  exact.distribution.validate();

  const BathState rho0 = protocol.initial_bath
                             ? *protocol.initial_bath
                             : BathState::maximally_mixed(spec.n_spins());
  const BathState evolved = unconditional_bath_state(
      spec, protocol.contact_time, protocol.n_measurements, rho0);
  const double residual =
      max_abs(MatrixXcd(exact.average_conditional_state - evolved.matrix()));

  double weighted_purity = 0.0;
  for (std::size_t i = 0; i < exact.distribution.probabilities.size(); ++i)
    weighted_purity +=
        exact.distribution.probabilities[i] * exact.conditional_purities[i];

  write_distribution_csv((out_dir / "distribution.csv").string(),
                         exact.distribution, exact.conditional_purities);
  json summary;
  summary["n"] = protocol.n_measurements;
  summary["ergodicity_residual"] = residual;
  summary["distribution_purity"] = distribution_purity(exact.distribution);
  summary["shannon_entropy_bits"] = shannon_entropy(exact.distribution);
  summary["weighted_mean_conditional_purity"] = weighted_purity;
  write_json_file(out_dir / "summary.json", summary);
  write_json_file(out_dir / "bath.json", spec.to_json());
  write_manifest(out_dir, "enumerate", cfg);
  std::cout << "ergodicity residual = " << format_double(residual) << '\n'
            << "distribution purity = "
            << format_double(distribution_purity(exact.distribution)) << '\n'
            << "weighted mean conditional purity = "
            << format_double(weighted_purity) << '\n';
  return 0;
}

int cmd_analyze(const json& cfg, const std::string& records_path) {
  if (records_path.empty())
    throw ConfigError("analyze needs a records file path");
  const fs::path out_dir = prepare_out_dir(cfg);
  const RecordsFile file = read_records(records_path);
  const StringHistogram hist = string_histogram(file.records);
  write_histogram_csv((out_dir / "histogram.csv").string(), hist);
  write_hamming_csv((out_dir / "hamming.csv").string(), hamming_profile(hist));
  json summary;
  summary["n"] = hist.n;
  summary["R"] = hist.total;
  summary["tau"] = file.tau;
  summary["distribution_purity"] = distribution_purity(hist);
  summary["shannon_entropy_bits"] = shannon_entropy(hist);
  write_json_file(out_dir / "purity.json", summary);
  if (file.n_bits >= 2) {
    const RunLengthProfile profile = repeat_probability_curve(file.records);
    write_repeat_curve_csv((out_dir / "repeat_curve.csv").string(), profile);
    write_run_length_csv((out_dir / "run_lengths.csv").string(), profile);
  } else {
    std::cout << "records are single-bit runs; repeat statistics skipped\n";
  }
  write_manifest(out_dir, "analyze", cfg);
  std::cout << "analyzed " << hist.total << " runs of " << hist.n
            << " measurements from " << records_path << '\n';
  return 0;
}

int cmd_baseline(const json& cfg) {
  const fs::path out_dir = prepare_out_dir(cfg);
  if (!cfg.contains("baseline"))
    throw ConfigError("baseline needs a baseline section or --kind");
  const json& baseline = cfg.at("baseline");
  const std::string kind = required_field<std::string>(baseline, "kind", "baseline");
  ProtocolConfig protocol =
      resolve_protocol(cfg, 1, /*require_tau=*/kind == "static-field");
  const std::uint64_t seed = require_seed(cfg, "to generate baseline records");
  RandomStream rng = make_stream(seed, kBaselineStream);

  std::vector<MeasurementRecord> records;
  std::optional<SpectralDensity> density;
  if (kind == "iid") {
    const double p0 = field_or<double>(baseline, "p0", 0.5);
    records = iid_coin_records(p0, protocol.n_measurements,
                               protocol.n_repetitions, rng);
  } else if (kind == "static-field") {
    const int sources = baseline.contains("density") +
                        baseline.contains("density_file") +
                        (baseline.contains("match_bath") &&
                         baseline.at("match_bath").get<bool>());
    if (sources != 1)
      throw ConfigError(
          "static-field needs exactly one of: density, density_file, match_bath");
    if (baseline.contains("density"))
      density = SpectralDensity::from_json(baseline.at("density"));
    else if (baseline.contains("density_file"))
      density = SpectralDensity::load(baseline.at("density_file").get<std::string>());
    else
      density = matched_discrete_spectrum(resolve_bath(cfg));
    records = static_field_records(*density, protocol.contact_time,
                                   protocol.n_measurements,
                                   protocol.n_repetitions, rng);
  } else {
    throw ConfigError("baseline kind must be 'iid' or 'static-field'");
  }

  write_records((out_dir / "records.txt").string(), records,
                protocol.contact_time);
  write_record_statistics(out_dir, records);
  if (density) {
    write_json_file(out_dir / "density.json", density->to_json());
    if (cfg.contains("grid")) {
      const Grid grid = resolve_grid(cfg);
      std::vector<double> cs;
      cs.reserve(grid.points.size());
      for (double t : grid.points) cs.push_back(coherence_classical(*density, t));
      write_fid_csv((out_dir / "coherence.csv").string(), grid.points, cs);
    }
  }
  write_manifest(out_dir, "baseline", cfg);
  std::cout << "baseline '" << kind << "': " << protocol.n_repetitions
            << " runs -> " << (out_dir / "records.txt").string() << '\n';
  return 0;
}

int cmd_calibrate(const json& cfg) {
  const fs::path out_dir = prepare_out_dir(cfg);
  if (!cfg.contains("calibrate"))
    throw ConfigError("calibrate needs a calibrate section or flags");
  const json& cal = cfg.at("calibrate");
  const int n_spins = required_field<int>(cal, "n_spins", "calibrate");
  const double zeeman = field_or<double>(cal, "zeeman", 0.0);
  const double target = required_field<double>(cal, "target_t2star", "calibrate");
  const std::string crossing_name =
      field_or<std::string>(cal, "crossing", "depolarized");
  const int n_ensemble = field_or<int>(cal, "n_ensemble", 128);
  const std::uint64_t seed = require_seed(cfg, "to draw the calibration ensemble");

  RandomStream rng = make_stream(seed, kCalibrationStream);
  const double scale = calibrate_coupling_scale(
      n_spins, zeeman, target, rng, parse_crossing(crossing_name), n_ensemble);

  json result;
  result["n_spins"] = n_spins;
  result["zeeman"] = zeeman;
  result["target_t2star"] = target;
  result["crossing"] = crossing_name;
  result["n_ensemble"] = n_ensemble;
  result["seed"] = seed;
  result["coupling_scale"] = scale;
  write_json_file(out_dir / "calibration.json", result);
  write_manifest(out_dir, "calibrate", cfg);
  std::cout << "coupling_scale = " << format_double(scale) << " rad/us\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CliOptions opt;
  CLI::App app{"Central-spin bath simulator: repeated measurement statistics, "
               "exact enumeration, and classical baselines"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  app.add_option("--config", opt.config_path, "JSON config file");
  app.add_option("--seed", opt.seed, "base RNG seed (unsigned 64-bit)");
  app.add_option("--workers", opt.workers, "parallel workers for sampling");
  app.add_option("--out", opt.out_dir, "output directory (default: out)");

  auto add_bath_flags = [&](CLI::App* cmd) {
    cmd->add_option("--bath", opt.bath_file, "bath spec JSON file");
    cmd->add_option("--bath-json", opt.bath_inline, "inline bath spec JSON");
    cmd->add_option("--sample-spins", opt.sample_n, "sample a bath with this many spins");
    cmd->add_option("--sample-scale", opt.sample_scale,
                    "coupling scale for the sampled bath (rad/us)");
    cmd->add_option("--sample-target", opt.sample_target,
                    "calibrate the sampled bath to this T2* (us)");
    cmd->add_option("--zeeman", opt.zeeman, "bath Zeeman frequency (rad/us)");
  };
  auto add_protocol_flags = [&](CLI::App* cmd) {
    cmd->add_option("--tau", opt.tau, "contact time per measurement (us)");
    cmd->add_option("--measurements", opt.n_measurements, "measurements per run");
    cmd->add_option("--repetitions", opt.repetitions, "number of runs");
    cmd->add_option("--readout-error", opt.readout_error,
                    "probability of recording a flipped bit");
    cmd->add_option("--engine", opt.engine, "exact | monte-carlo | auto");
  };
  auto add_grid_flags = [&](CLI::App* cmd) {
    cmd->add_option("--t-start", opt.t_start, "grid start (us)");
    cmd->add_option("--t-stop", opt.t_stop, "grid stop (us)");
    cmd->add_option("--points", opt.n_points, "grid point count");
  };

  CLI::App* fid_cmd = app.add_subcommand("fid", "free-induction-decay curve");
  add_bath_flags(fid_cmd);
  add_grid_flags(fid_cmd);

  CLI::App* strings_cmd =
      app.add_subcommand("strings", "sample measurement records and statistics");
  add_bath_flags(strings_cmd);
  add_protocol_flags(strings_cmd);

  CLI::App* enum_cmd = app.add_subcommand(
      "enumerate", "exact string distribution with conditional purities");
  add_bath_flags(enum_cmd);
  add_protocol_flags(enum_cmd);

  CLI::App* analyze_cmd =
      app.add_subcommand("analyze", "statistics from an existing records file");
  analyze_cmd->add_option("records", opt.records_path, "records file path");

  CLI::App* baseline_cmd =
      app.add_subcommand("baseline", "classical baseline records and statistics");
  add_bath_flags(baseline_cmd);
  add_protocol_flags(baseline_cmd);
  add_grid_flags(baseline_cmd);
  baseline_cmd->add_option("--kind", opt.baseline_kind, "iid | static-field");
  baseline_cmd->add_option("--p0", opt.p0, "iid probability of recording 0");
  baseline_cmd->add_option("--density", opt.density_file,
                           "spectral density JSON file");
  baseline_cmd->add_flag("--match-bath", opt.match_bath,
                         "use the discrete spectrum matched to the bath");

  CLI::App* cal_cmd = app.add_subcommand(
      "calibrate", "find the coupling scale for a target T2*");
  cal_cmd->add_option("--spins", opt.cal_spins, "bath size for the ensemble");
  cal_cmd->add_option("--target", opt.cal_target, "target T2* (us)");
  cal_cmd->add_option("--zeeman", opt.zeeman, "bath Zeeman frequency (rad/us)");
  cal_cmd->add_option("--crossing", opt.crossing, "depolarized | one-over-e");
  cal_cmd->add_option("--ensemble", opt.cal_ensemble, "ensemble draws per evaluation");

  // global flags (--seed, --out, ...) may follow the subcommand name
  for (CLI::App* cmd : app.get_subcommands(nullptr)) cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const json cfg = resolve_config(opt);
    if (app.got_subcommand(fid_cmd)) return cmd_fid(cfg);
    if (app.got_subcommand(strings_cmd)) return cmd_strings(cfg);
    if (app.got_subcommand(enum_cmd)) return cmd_enumerate(cfg);
    if (app.got_subcommand(analyze_cmd)) return cmd_analyze(cfg, opt.records_path);
    if (app.got_subcommand(baseline_cmd)) return cmd_baseline(cfg);
    if (app.got_subcommand(cal_cmd)) return cmd_calibrate(cfg);
    throw ConfigError("no subcommand given");
  } catch (const EngineLimitError& e) {
    std::cerr << "engine limit: " << e.what() << '\n';
    return 3;
  } catch (const QuadratureError& e) {
    std::cerr << "quadrature: " << e.what() << '\n';
    return 3;
  } catch (const DataFormatError& e) {
    std::cerr << "data format: " << e.what() << '\n';
    return 4;
  } catch (const CalibrationError& e) {
    std::cerr << "calibration: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
