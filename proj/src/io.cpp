#include "pbsim/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace pbsim {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  if (std::isnan(v)) return "nan";
  std::snprintf(buf, sizeof(buf), "%.12g", v + 0.0);  // normalizes -0
  return buf;
}

std::string sanitize_status(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string header_comment(const char* kind, const FileMeta& meta) {
  std::ostringstream out;
  out << "# pbsim-" << kind << " format=" << kFormatVersion << " config_hash=" << meta.config_hash
      << " seed=" << meta.seed << "\n";
  return out.str();
}

/// Parses "# pbsim-<kind> format=N config_hash=H seed=S"; throws on a missing
/// header, wrong kind, or unknown format major.
FileMeta parse_header(const std::string& line, const char* kind) {
  const std::string prefix = std::string("# pbsim-") + kind + " format=";
  if (line.rfind(prefix, 0) != 0) {
    throw std::runtime_error(std::string("not a pbsim-") + kind + " file (bad header)");
  }
  std::istringstream rest(line.substr(prefix.size()));
  int version = -1;
  rest >> version;
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported " + std::string(kind) + " format version " +
                             std::to_string(version));
  }
  FileMeta meta;
  std::string token;
  while (rest >> token) {
    if (token.rfind("config_hash=", 0) == 0) meta.config_hash = token.substr(12);
    if (token.rfind("seed=", 0) == 0) meta.seed = std::strtoull(token.c_str() + 5, nullptr, 10);
  }
  return meta;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("trailing characters in number");
  return v;
}

// --- config parsing helpers -------------------------------------------------

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
  throw ConfigError("config error at " + where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) config_fail(where, std::string(key) + " is required");
  return obj.at(key);
}

double require_number(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) config_fail(where, std::string(key) + " must be a number");
  return v.get<double>();
}

double optional_number(const json& obj, const char* key, double fallback,
                       const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) config_fail(where, std::string(key) + " must be a number");
  return obj.at(key).get<double>();
}

RandomWalkSpec parse_walk(const json& obj, const std::string& where) {
  RandomWalkSpec walk;
  walk.step_per_sqrt_h = require_number(obj, "step_per_sqrt_hour", where);
  walk.lo = require_number(obj, "lo", where);
  walk.hi = require_number(obj, "hi", where);
  return walk;
}

ScenarioConfig parse_scenario(const json& obj) {
  const std::string where = "scenario";
  ScenarioConfig sc;
  sc.t1_base_s = require_number(obj, "t1_base_s", where);
  sc.tphi_base_s = optional_number(obj, "tphi_base_s", 2.0 * sc.t1_base_s, where);
  sc.gate_time_s = optional_number(obj, "gate_time_s", 25e-9, where);

  const json& points = require(obj, "operating_points", where);
  if (!points.is_array() || points.empty()) config_fail(where, "operating_points must be a non-empty array");
  for (const auto& pt : points) {
    OperatingPoint op;
    if (!pt.contains("label") || !pt.at("label").is_string()) {
      config_fail(where, "operating point without a label");
    }
    op.label = pt.at("label").get<std::string>();
    op.frequency_ghz = require_number(pt, "frequency_ghz", where + ".operating_points");
    sc.operating_points.push_back(std::move(op));
  }

  if (obj.contains("miscalibration")) {
    const json& mc = obj.at("miscalibration");
    const std::string mwhere = where + ".miscalibration";
    sc.miscalibration.detuning_hz = optional_number(mc, "detuning_hz", 0.0, mwhere);
    sc.miscalibration.overrotation_rad = optional_number(mc, "overrotation_rad", 0.0, mwhere);
    if (mc.contains("axis")) {
      const json& axis = mc.at("axis");
      if (!axis.is_array() || axis.size() != 3) config_fail(mwhere, "axis must have 3 components");
      for (int i = 0; i < 3; ++i) sc.miscalibration.axis[i] = axis.at(i).get<double>();
    }
  }

  if (obj.contains("tls")) {
    const json& tls = obj.at("tls");
    const std::string twhere = where + ".tls";
    TLSParams params;
    params.f_center_ghz = require_number(tls, "f_center_ghz", twhere);
    params.linewidth_ghz = require_number(tls, "linewidth_ghz", twhere);
    params.gamma_peak_per_s = optional_number(tls, "gamma_peak_per_s", 0.0, twhere);
    params.coherent_pull_hz = optional_number(tls, "coherent_pull_hz", 0.0, twhere);
    if (tls.contains("telegraph")) {
      const json& tg = tls.at("telegraph");
      params.telegraph.rate_up_per_h = optional_number(tg, "rate_up_per_h", 0.0, twhere);
      params.telegraph.rate_down_per_h = optional_number(tg, "rate_down_per_h", 0.0, twhere);
      params.telegraph.frequency_shift_ghz =
          optional_number(tg, "frequency_shift_ghz", 0.0, twhere);
    }
    sc.tls = params;
  }

  if (obj.contains("drift")) {
    const json& drift = obj.at("drift");
    const std::string dwhere = where + ".drift";
    DriftSpec spec;
    if (drift.contains("tls_center_ghz")) spec.tls_center_ghz = parse_walk(drift.at("tls_center_ghz"), dwhere);
    if (drift.contains("detuning_hz")) spec.detuning_hz = parse_walk(drift.at("detuning_hz"), dwhere);
    if (drift.contains("t1_base_s")) spec.t1_base_s = parse_walk(drift.at("t1_base_s"), dwhere);
    sc.drift = spec;
  }
  return sc;
}

ExperimentPlan parse_plan(const json& obj) {
  const std::string where = "plan";
  ExperimentPlan plan;
  if (obj.contains("m_set")) {
    const json& m_set = obj.at("m_set");
    if (!m_set.is_array() || m_set.empty()) config_fail(where, "m_set must be a non-empty array");
    plan.m_set.clear();
    for (const auto& m : m_set) plan.m_set.push_back(m.get<int>());
  }
  plan.cycles = static_cast<int>(require_number(obj, "cycles", where));
  plan.shots_per_variant =
      static_cast<int>(optional_number(obj, "shots_per_variant", 1000, where));
  plan.cycle_period_h = require_number(obj, "cycle_period_hours", where);
  if (obj.contains("t1_scan")) {
    const json& scan = obj.at("t1_scan");
    const std::string swhere = where + ".t1_scan";
    T1ScanSpec spec;
    const json& freqs = require(scan, "frequencies_ghz", swhere);
    if (!freqs.is_array() || freqs.empty()) config_fail(swhere, "frequencies_ghz must be non-empty");
    for (const auto& f : freqs) spec.frequencies_ghz.push_back(f.get<double>());
    if (scan.contains("delays_s")) {
      for (const auto& d : scan.at("delays_s")) spec.delays_s.push_back(d.get<double>());
    }
    spec.shots = static_cast<int>(optional_number(scan, "shots", 500, swhere));
    plan.t1_scan = std::move(spec);
  }
  return plan;
}

void parse_analysis(const json& obj, RunConfig* cfg) {
  const std::string where = "analysis";
  cfg->window.n = static_cast<int>(optional_number(obj, "window_cycles", 30, where));
  cfg->window.overlap_fraction = optional_number(obj, "overlap_fraction", 0.5, where);
  if (obj.contains("bias_correction")) {
    if (!obj.at("bias_correction").is_boolean()) config_fail(where, "bias_correction must be a bool");
    cfg->analysis.bias_correction = obj.at("bias_correction").get<bool>();
  }
  cfg->analysis.bootstrap_resamples =
      static_cast<int>(optional_number(obj, "bootstrap_resamples", 1000, where));
  if (cfg->analysis.bootstrap_resamples < 1) config_fail(where, "bootstrap_resamples must be >= 1");
  if (obj.contains("estimator")) {
    const std::string name = obj.at("estimator").get<std::string>();
    if (name == "offset_eliminated") {
      cfg->analysis.variant = PipelineVariant::kOffsetEliminated;
    } else if (name == "with_offset") {
      cfg->analysis.variant = PipelineVariant::kWithOffset;
    } else {
      config_fail(where, "estimator must be offset_eliminated or with_offset");
    }
  }
  if (cfg->window.n < 2) config_fail(where, "window_cycles must be >= 2");
  if (cfg->window.overlap_fraction < 0.0 || cfg->window.overlap_fraction >= 1.0) {
    config_fail(where, "overlap_fraction must be in [0, 1)");
  }
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, hash);
  return buf;
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  const int version = static_cast<int>(require_number(root, "format_version", "root"));
  if (version != kFormatVersion) {
    throw ConfigError("unsupported config format_version " + std::to_string(version));
  }
  if (!root.contains("master_seed") || !root.at("master_seed").is_number_unsigned()) {
    throw ConfigError("master_seed (unsigned integer) is required; wall-clock seeding is not supported");
  }

  RunConfig cfg;
  cfg.master_seed = root.at("master_seed").get<std::uint64_t>();
  cfg.scenario = parse_scenario(require(root, "scenario", "root"));
  cfg.scenario.seed = cfg.master_seed;
  cfg.plan = parse_plan(require(root, "plan", "root"));
  if (root.contains("analysis")) parse_analysis(root.at("analysis"), &cfg);
  cfg.config_hash = fnv1a_hex(json_text);

  if (auto err = validate_scenario(cfg.scenario); !err.empty()) config_fail("scenario", err);
  if (auto err = validate_plan(cfg.plan, cfg.scenario); !err.empty()) config_fail("plan", err);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

EstimatesRow to_estimates_row(const WindowEstimate& est) {
  EstimatesRow row;
  row.window_index = est.window_index;
  row.midpoint_h = est.midpoint_h;
  row.point_label = est.point_label;
  const ErrorBudget& b = est.budget;
  if (b.ok) {
    row.epsilon = b.epsilon;
    row.epsilon_ci_low = b.epsilon_ci.lo;
    row.epsilon_ci_high = b.epsilon_ci.hi;
    row.epsilon_inc = b.epsilon_inc;
    row.inc_ci_low = b.inc_ci.lo;
    row.inc_ci_high = b.inc_ci.hi;
    row.epsilon_coh = b.epsilon_coh;
    row.coh_ci_low = b.coh_ci.lo;
    row.coh_ci_high = b.coh_ci.hi;
    row.diamond_lower = b.diamond_lower;
    row.diamond_upper = b.diamond_upper;
    row.fit_status = b.inconsistent ? "ok;inconsistent_split" : "ok";
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.epsilon = row.epsilon_ci_low = row.epsilon_ci_high = nan;
    row.epsilon_inc = row.inc_ci_low = row.inc_ci_high = nan;
    row.epsilon_coh = row.coh_ci_low = row.coh_ci_high = nan;
    row.diamond_lower = row.diamond_upper = nan;
    row.fit_status = sanitize_status(b.status);
  }
  return row;
}

void write_records_csv(const std::filesystem::path& path,
                       std::span<const MeasurementRecord> records, const FileMeta& meta) {
  std::ostringstream out;
  out << header_comment("records", meta);
  out << "cycle,wall_time_hours,point_label,m,variant,shots,ones,sequence_id\n";
  for (const auto& rec : records) {
    out << rec.cycle << ',' << format_double(rec.wall_time_h) << ',' << rec.point_label << ','
        << rec.m << ',' << variant_name(rec.variant) << ',' << rec.shots << ',' << rec.ones << ','
        << rec.sequence_id << '\n';
  }
  atomic_write(path, out.str());
}

void write_t1_grid_csv(const std::filesystem::path& path, std::span<const T1Sample> samples,
                       const FileMeta& meta) {
  std::ostringstream out;
  out << header_comment("t1grid", meta);
  out << "cycle,wall_time_hours,frequency_ghz,t1_seconds\n";
  for (const auto& s : samples) {
    out << s.cycle << ',' << format_double(s.wall_time_h) << ',' << format_double(s.frequency_ghz)
        << ',' << (s.t1_s ? format_double(*s.t1_s) : "") << '\n';
  }
  atomic_write(path, out.str());
}

namespace {

void write_estimate_fields(std::ostringstream& out, const EstimatesRow& row) {
  out << format_double(row.midpoint_h) << ',' << row.point_label << ','
      << format_double(row.epsilon) << ',' << format_double(row.epsilon_ci_low) << ','
      << format_double(row.epsilon_ci_high) << ',' << format_double(row.epsilon_inc) << ','
      << format_double(row.inc_ci_low) << ',' << format_double(row.inc_ci_high) << ','
      << format_double(row.epsilon_coh) << ',' << format_double(row.coh_ci_low) << ','
      << format_double(row.coh_ci_high) << ',' << format_double(row.diamond_lower) << ','
      << format_double(row.diamond_upper) << ',' << row.fit_status << '\n';
}

constexpr const char* kEstimateColumns =
    "midpoint_hours,point_label,epsilon,epsilon_ci_low,epsilon_ci_high,"
    "epsilon_inc,epsilon_inc_ci_low,epsilon_inc_ci_high,"
    "epsilon_coh,epsilon_coh_ci_low,epsilon_coh_ci_high,"
    "diamond_lower,diamond_upper,fit_status";

}  // namespace

void write_estimates_csv(const std::filesystem::path& path, std::span<const EstimatesRow> rows,
                         const FileMeta& meta) {
  std::ostringstream out;
  out << header_comment("estimates", meta);
  out << "window_index," << kEstimateColumns << "\n";
  for (const auto& row : rows) {
    out << row.window_index << ',';
    write_estimate_fields(out, row);
  }
  atomic_write(path, out.str());
}

void write_series_csv(const std::filesystem::path& path, std::span<const EstimatesRow> rows,
                      const FileMeta& meta) {
  std::ostringstream out;
  out << header_comment("series", meta);
  out << kEstimateColumns << "\n";
  for (const auto& row : rows) write_estimate_fields(out, row);
  atomic_write(path, out.str());
}

void write_histograms_csv(const std::filesystem::path& path,
                          const std::map<std::string, std::map<std::string, Histogram>>& by_point,
                          const FileMeta& meta) {
  std::ostringstream out;
  out << header_comment("histograms", meta);
  out << "point_label,quantity,bin_index,bin_left,bin_right,count,normal_mu,normal_sigma,degenerate\n";
  for (const auto& [point, by_quantity] : by_point) {
    for (const auto& [quantity, hist] : by_quantity) {
      for (std::size_t b = 0; b < hist.bins.size(); ++b) {
        const auto& bin = hist.bins[b];
        out << point << ',' << quantity << ',' << b << ',' << format_double(bin.left) << ','
            << format_double(bin.right) << ',' << bin.count << ','
            << format_double(hist.normal_mu) << ',' << format_double(hist.normal_sigma) << ','
            << (hist.degenerate ? 1 : 0) << '\n';
      }
    }
  }
  atomic_write(path, out.str());
}

void write_summary_json(const std::filesystem::path& path,
                        const std::map<std::string, std::map<std::string, SummaryStats>>& by_point,
                        const std::map<std::string, std::pair<int, int>>& window_counts,
                        const FileMeta& meta) {
  json root;
  root["format_version"] = kFormatVersion;
  root["config_hash"] = meta.config_hash;
  root["seed"] = meta.seed;
  json points = json::object();
  for (const auto& [point, by_quantity] : by_point) {
    json entry = json::object();
    for (const auto& [quantity, stats] : by_quantity) {
      json s;
      s["mean"] = stats.mean;
      s["sd"] = stats.sd;
      s["median"] = stats.median;
      s["iqr"] = stats.iqr;
      if (stats.cv_defined) {
        s["cv_percent"] = stats.cv_percent;
      } else {
        s["cv_percent"] = nullptr;
      }
      entry[quantity] = std::move(s);
    }
    if (const auto it = window_counts.find(point); it != window_counts.end()) {
      entry["windows_ok"] = it->second.first;
      entry["windows_failed"] = it->second.second;
    }
    points[point] = std::move(entry);
  }
  root["points"] = std::move(points);
  atomic_write(path, root.dump(2) + "\n");
}

RecordsParse read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read records file: " + path.string());
  RecordsParse parse;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty records file");
  parse.meta = parse_header(line, "records");
  if (!std::getline(in, line)) throw std::runtime_error("records file missing column header");

  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ++parse.data_rows;
    const auto fields = split_csv(line);
    try {
      if (fields.size() != 8) throw std::invalid_argument("expected 8 fields");
      MeasurementRecord rec;
      rec.cycle = std::stoi(fields[0]);
      rec.wall_time_h = parse_double(fields[1]);
      rec.point_label = fields[2];
      rec.m = std::stoi(fields[3]);
      const auto variant = parse_variant(fields[4]);
      if (!variant) throw std::invalid_argument("unknown variant '" + fields[4] + "'");
      rec.variant = *variant;
      rec.shots = std::stoi(fields[5]);
      rec.ones = std::stoi(fields[6]);
      rec.sequence_id = std::stoll(fields[7]);
      if (rec.shots <= 0 || rec.ones < 0 || rec.ones > rec.shots || rec.cycle < 0 || rec.m < 1) {
        throw std::invalid_argument("field out of range");
      }
      parse.records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      ++parse.malformed_count;
      if (parse.malformed.size() < 50) {
        parse.malformed.push_back("line " + std::to_string(line_no) + ": " + e.what());
      } else if (parse.malformed.size() == 50) {
        parse.malformed.push_back("(further malformed rows suppressed)");
      }
    }
  }
  return parse;
}

EstimatesParse read_estimates_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read estimates file: " + path.string());
  EstimatesParse parse;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty estimates file");
  parse.meta = parse_header(line, "estimates");
  if (!std::getline(in, line)) throw std::runtime_error("estimates file missing column header");

  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 15) {
      throw std::runtime_error("estimates line " + std::to_string(line_no) + ": expected 15 fields");
    }
    EstimatesRow row;
    row.window_index = std::stoi(fields[0]);
    row.midpoint_h = parse_double(fields[1]);
    row.point_label = fields[2];
    row.epsilon = parse_double(fields[3]);
    row.epsilon_ci_low = parse_double(fields[4]);
    row.epsilon_ci_high = parse_double(fields[5]);
    row.epsilon_inc = parse_double(fields[6]);
    row.inc_ci_low = parse_double(fields[7]);
    row.inc_ci_high = parse_double(fields[8]);
    row.epsilon_coh = parse_double(fields[9]);
    row.coh_ci_low = parse_double(fields[10]);
    row.coh_ci_high = parse_double(fields[11]);
    row.diamond_lower = parse_double(fields[12]);
    row.diamond_upper = parse_double(fields[13]);
    row.fit_status = fields[14];
    parse.rows.push_back(std::move(row));
  }
  return parse;
}

T1GridParse read_t1_grid_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read t1 grid file: " + path.string());
  T1GridParse parse;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty t1 grid file");
  parse.meta = parse_header(line, "t1grid");
  if (!std::getline(in, line)) throw std::runtime_error("t1 grid file missing column header");
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 4) {
      throw std::runtime_error("t1 grid line " + std::to_string(line_no) + ": expected 4 fields");
    }
    T1Sample sample;
    sample.cycle = std::stoi(fields[0]);
    sample.wall_time_h = parse_double(fields[1]);
    sample.frequency_ghz = parse_double(fields[2]);
    if (!fields[3].empty()) sample.t1_s = parse_double(fields[3]);
    parse.samples.push_back(sample);
  }
  return parse;
}

// --- commands ----------------------------------------------------------------

int cmd_simulate(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                 int workers, std::ostream& diag) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
  } catch (const ConfigError& e) {
    diag << e.what() << "\n";
    return kExitConfigError;
  }
  try {
    std::filesystem::create_directories(out_dir);
    const RunOutput output = run_cycles(cfg.plan, cfg.scenario, workers);
    const FileMeta meta{cfg.config_hash, cfg.master_seed};
    write_records_csv(out_dir / kRecordsFile, output.records, meta);
    if (cfg.plan.t1_scan) {
      write_t1_grid_csv(out_dir / kT1GridFile, output.t1_samples, meta);
    }
    diag << "wrote " << output.records.size() << " records to "
         << (out_dir / kRecordsFile).string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    diag << "simulate failed: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

int cmd_analyze(const std::filesystem::path& records_path,
                const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                int workers, std::ostream& diag) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
  } catch (const ConfigError& e) {
    diag << e.what() << "\n";
    return kExitConfigError;
  }
  try {
    const RecordsParse parse = read_records_csv(records_path);
    if (parse.malformed_count > 0) {
      for (const auto& msg : parse.malformed) diag << "malformed record: " << msg << "\n";
      if (static_cast<double>(parse.malformed_count) > 0.001 * parse.data_rows) {
        diag << "too many malformed rows (" << parse.malformed_count << " of "
             << parse.data_rows << ")\n";
        return kExitRuntimeError;
      }
    }

    const auto series =
        window_series(parse.records, cfg.window, cfg.analysis, cfg.master_seed, workers);
    if (series.empty()) {
      diag << "insufficient cycles: records cover fewer than one " << cfg.window.n
           << "-cycle window\n";
      return kExitInsufficientCycles;
    }

    std::filesystem::create_directories(out_dir);
    const FileMeta meta{cfg.config_hash, cfg.master_seed};

    std::vector<EstimatesRow> rows;
    std::map<std::string, std::map<std::string, SummaryStats>> summaries;
    std::map<std::string, std::map<std::string, Histogram>> histograms;
    std::map<std::string, std::pair<int, int>> window_counts;
    for (const auto& [point, estimates] : series) {
      std::vector<double> eps, inc, coh;
      for (const auto& est : estimates) {
        rows.push_back(to_estimates_row(est));
        if (est.budget.ok) {
          eps.push_back(est.budget.epsilon);
          inc.push_back(est.budget.epsilon_inc);
          coh.push_back(est.budget.epsilon_coh);
          ++window_counts[point].first;
        } else {
          ++window_counts[point].second;
        }
      }
      const auto add = [&](const char* name, const std::vector<double>& values) {
        if (const auto stats = summarize(values)) summaries[point][name] = *stats;
        if (const auto hist = histogram_fit(values)) histograms[point][name] = *hist;
      };
      add("epsilon", eps);
      add("epsilon_inc", inc);
      add("epsilon_coh", coh);
    }

    write_estimates_csv(out_dir / kEstimatesFile, rows, meta);
    write_summary_json(out_dir / kSummaryFile, summaries, window_counts, meta);
    write_histograms_csv(out_dir / kHistogramsFile, histograms, meta);
    diag << "wrote " << rows.size() << " window estimates to "
         << (out_dir / kEstimatesFile).string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    diag << "analyze failed: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

int cmd_report(const std::filesystem::path& estimates_path,
               const std::optional<std::filesystem::path>& t1_grid_path,
               const std::filesystem::path& out_dir, std::ostream& diag) {
  try {
    EstimatesParse parse = read_estimates_csv(estimates_path);
    std::filesystem::create_directories(out_dir);

    std::stable_sort(parse.rows.begin(), parse.rows.end(),
                     [](const EstimatesRow& a, const EstimatesRow& b) {
                       if (a.point_label != b.point_label) return a.point_label < b.point_label;
                       return a.midpoint_h < b.midpoint_h;
                     });
    write_series_csv(out_dir / kSeriesFile, parse.rows, parse.meta);

    std::map<std::string, std::map<std::string, Histogram>> histograms;
    std::map<std::string, std::vector<EstimatesRow>> by_point;
    for (const auto& row : parse.rows) {
      if (row.fit_status.rfind("ok", 0) == 0) by_point[row.point_label].push_back(row);
    }
    for (const auto& [point, rows] : by_point) {
      std::vector<double> eps, inc, coh;
      for (const auto& row : rows) {
        eps.push_back(row.epsilon);
        inc.push_back(row.epsilon_inc);
        coh.push_back(row.epsilon_coh);
      }
      const auto add = [&](const char* name, const std::vector<double>& values) {
        if (const auto hist = histogram_fit(values)) histograms[point][name] = *hist;
      };
      add("epsilon", eps);
      add("epsilon_inc", inc);
      add("epsilon_coh", coh);
    }
    write_histograms_csv(out_dir / kHistogramsFile, histograms, parse.meta);

    if (t1_grid_path) {
      const T1GridParse t1 = read_t1_grid_csv(*t1_grid_path);
      write_t1_grid_csv(out_dir / kT1GridFile, t1.samples, t1.meta);
    }
    diag << "wrote " << parse.rows.size() << " series rows to " << (out_dir / kSeriesFile).string()
         << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    diag << "report failed: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

}  // namespace pbsim
