#include "experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <random>
#include <set>
#include <sstream>

#ifndef QTHERMO_VERSION
#define QTHERMO_VERSION "unknown"
#endif

namespace qthermo::cli {

using nlohmann::json;

namespace {

constexpr int kConfigVersion = 1;

// Typed, path-aware view of one config object.
class Section {
 public:
  Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_->is_object()) {
      throw ConfigError(path_ + " must be an object");
    }
  }

  bool has(const char* key) const { return node_ && node_->contains(key); }

  void allow(std::initializer_list<const char*> keys) const {
    if (!node_) {
      return;
    }
    for (const auto& item : node_->items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; })) {
        throw ConfigError(field(item.key().c_str()) + ": unknown key");
      }
    }
  }

  double number(const char* key, double fallback) const {
    return optional_number(key).value_or(fallback);
  }

  std::optional<double> optional_number(const char* key) const {
    if (!has(key)) {
      return std::nullopt;
    }
    const json& v = node_->at(key);
    if (!v.is_number()) {
      throw ConfigError(field(key) + " must be a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      throw ConfigError(field(key) + " must be finite");
    }
    return d;
  }

  std::int64_t integer(const char* key, std::int64_t fallback) const {
    if (!has(key)) {
      return fallback;
    }
    const json& v = node_->at(key);
    if (!v.is_number_integer()) {
      throw ConfigError(field(key) + " must be an integer");
    }
    return v.get<std::int64_t>();
  }

  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) {
      return fallback;
    }
    const json& v = node_->at(key);
    if (!v.is_string()) {
      throw ConfigError(field(key) + " must be a string");
    }
    return v.get<std::string>();
  }

  Section child(const char* key) const {
    return Section(has(key) ? &node_->at(key) : nullptr, field(key));
  }

  const json* node() const { return node_; }
  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json* node_;
  std::string path_;
};

json params_to_json(const PhysicalParams& p) {
  return json{{"mass", p.mass},
              {"omega", p.omega},
              {"hbar", p.hbar},
              {"energy_scale", p.energy_scale},
              {"length_scale", p.length_scale},
              {"localisation", p.localisation},
              {"thermal_coupling", p.thermal_coupling},
              {"occupation", p.occupation}};
}

json spec_to_json(const ProtocolEntry& e) {
  json j{{"label", e.label},
         {"kind", to_string(e.spec.kind)},
         {"duration", e.spec.duration},
         {"c1", e.spec.c1},
         {"c2", e.spec.c2},
         {"ramp_fraction", e.spec.ramp_fraction},
         {"cooling_coupling", e.spec.cooling_coupling},
         {"gap_floor", e.spec.gap_floor},
         {"steps", e.steps},
         {"stride", e.stride}};
  if (e.spec.tilt_amplitude) {
    j["tilt_amplitude"] = *e.spec.tilt_amplitude;
  }
  return j;
}

// Re-raises a library validation error under the config path of its section.
template <typename F>
void validated(const std::string& path, F&& check) {
  try {
    check();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    std::string msg = e.what();
    const auto dot = msg.find('.');
    const auto space = msg.find(' ');
    // Library messages of the form "section.field ..." keep only the field.
    if (dot != std::string::npos && dot < space) {
      msg = msg.substr(dot + 1);
      throw ConfigError(path + "." + msg);
    }
    throw ConfigError(path + ": " + msg);
  }
}

PhysicalParams parse_physical(const Section& s, const std::string& preset) {
  s.allow({"mass", "omega", "hbar", "energy_scale", "length_scale", "localisation",
           "thermal_coupling", "occupation", "inverse_temperature"});
  PhysicalParams p = preset_params(preset);
  p.mass = s.number("mass", p.mass);
  p.omega = s.number("omega", p.omega);
  p.hbar = s.number("hbar", p.hbar);
  p.energy_scale = s.number("energy_scale", p.energy_scale);
  p.length_scale = s.number("length_scale", p.length_scale);
  p.localisation = s.number("localisation", p.localisation);
  p.thermal_coupling = s.number("thermal_coupling", p.thermal_coupling);
  p.occupation = s.number("occupation", p.occupation);
  if (auto beta = s.optional_number("inverse_temperature")) {
    if (s.has("occupation")) {
      throw ConfigError(s.field("occupation") + ": give either occupation or inverse_temperature");
    }
    if (!(*beta > 0)) {
      throw ConfigError(s.field("inverse_temperature") + " must be > 0");
    }
    validated("physical", [&] { p.validate(); });
    p = p.with_inverse_temperature(*beta);
  }
  validated("physical", [&] { p.validate(); });
  return p;
}

InitialState parse_initial(const Section& schedule) {
  InitialState out;
  if (!schedule.has("initial_state")) {
    return out;
  }
  const json& node = schedule.node()->at("initial_state");
  const std::string path = schedule.field("initial_state");
  if (node.is_string()) {
    out.kind = node.get<std::string>();
  } else {
    const Section s(&node, path);
    s.allow({"kind", "theta", "phi"});
    out.kind = s.string("kind", out.kind);
    out.theta = s.number("theta", 0.0);
    out.phi = s.number("phi", 0.0);
  }
  static const std::set<std::string> kinds{"ground", "gibbs", "steady_state", "coherent", "random"};
  if (!kinds.count(out.kind)) {
    throw ConfigError(path + ": unknown initial state '" + out.kind + "'");
  }
  if (out.kind == "coherent" && !(out.theta >= 0 && out.theta <= kPi && out.phi >= 0 && out.phi < 2 * kPi)) {
    throw ConfigError(path + ": coherent state needs theta in [0, pi] and phi in [0, 2pi)");
  }
  return out;
}

PotentialSchedule parse_schedule(const Section& s) {
  s.allow({"mode", "duration", "c1", "c2", "tilt", "initial_state"});
  PotentialSchedule out;
  try {
    out.mode = schedule_mode_from_string(s.string("mode", "gaussian_to_double_well"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  out.duration = s.number("duration", 10.0);
  out.c1 = s.number("c1", -0.25);
  out.c2 = s.number("c2", 0.007);
  if (out.mode == ScheduleMode::tilt_controlled) {
    const Section tilt = s.child("tilt");
    if (!tilt.node()) {
      throw ConfigError(s.field("tilt") + " is required for tilt_controlled mode");
    }
    tilt.allow({"amplitude", "ramp"});
    validated(s.field("tilt"), [&] {
      out.tilt = TiltProfile(tilt.number("amplitude", 0.9),
                             tilt.number("ramp", 0.25 * out.duration), out.duration);
    });
  } else if (s.has("tilt")) {
    throw ConfigError(s.field("tilt") + ": only valid in tilt_controlled mode");
  }
  validated("schedule", [&] { out.validate(); });
  return out;
}

ProtocolEntry parse_protocol(const Section& s, const std::string& path, Index default_stride,
                             double dt) {
  s.allow({"label", "kind", "duration", "c1", "c2", "tilt_amplitude", "ramp_fraction",
           "cooling_coupling", "gap_floor", "steps", "stride"});
  if (!s.has("kind")) {
    throw ConfigError(s.field("kind") + " is required");
  }
  if (!s.has("duration")) {
    throw ConfigError(s.field("duration") + " is required");
  }
  ProtocolKind kind;
  try {
    kind = protocol_kind_from_string(s.string("kind", ""));
  } catch (const InvalidArgument&) {
    throw ConfigError(s.field("kind") + ": unknown protocol '" + s.string("kind", "") + "'");
  }
  const double duration = s.number("duration", 0.0);
  ProtocolSpec spec = kind == ProtocolKind::quantum_sta
                          ? ProtocolSpec::quantum_sta(duration)
                          : (kind == ProtocolKind::classical_tilt ? ProtocolSpec::classical(duration)
                                                                  : ProtocolSpec::classical_with_cooling(duration));
  spec.c1 = s.number("c1", spec.c1);
  spec.c2 = s.number("c2", spec.c2);
  if (auto a = s.optional_number("tilt_amplitude")) {
    spec.tilt_amplitude = *a;
  }
  spec.ramp_fraction = s.number("ramp_fraction", spec.ramp_fraction);
  spec.cooling_coupling = s.number("cooling_coupling", spec.cooling_coupling);
  spec.gap_floor = s.number("gap_floor", spec.gap_floor);
  validated(path, [&] { spec.validate(); });

  ProtocolEntry e;
  e.spec = spec;
  e.stride = s.integer("stride", default_stride);
  if (e.stride < 1) {
    throw ConfigError(s.field("stride") + " must be >= 1");
  }
  if (s.has("steps")) {
    e.steps = s.integer("steps", 0);
    if (e.steps < 1 || e.steps % e.stride != 0) {
      throw ConfigError(s.field("steps") + " must be >= 1 and a multiple of the stride");
    }
  } else {
    const auto blocks = static_cast<Index>(std::ceil(duration / (dt * static_cast<double>(e.stride)) - 1e-9));
    e.steps = std::max<Index>(1, blocks) * e.stride;
  }
  std::ostringstream label;
  label << to_string(kind) << "_tau" << duration;
  e.label = s.string("label", label.str());
  if (e.label.empty() || e.label.find_first_of("/\\") != std::string::npos) {
    throw ConfigError(s.field("label") + " must be a non-empty file-name-safe string");
  }
  return e;
}

}  // namespace

PhysicalParams preset_params(const std::string& preset) {
  PhysicalParams p;
  if (preset == "desk") {
    return p;
  }
  if (preset == "bath_1k") {
    p.localisation = 1e-4;
    p.thermal_coupling = 1e-3;
    p.occupation = 0.1;
    return p;
  }
  throw ConfigError("defaults.preset: unknown preset '" + preset + "'");
}

ExperimentConfig parse_config(const json& doc) {
  const Section root(&doc, "");
  root.allow({"defaults", "pipeline", "physical", "basis", "schedule", "protocols", "integrator",
              "phase_space", "output", "seed"});
  ExperimentConfig c;

  const Section defaults = root.child("defaults");
  defaults.allow({"version", "preset"});
  c.version = static_cast<int>(defaults.integer("version", kConfigVersion));
  if (c.version != kConfigVersion) {
    throw ConfigError("defaults.version: unsupported version " + std::to_string(c.version));
  }
  c.preset = defaults.string("preset", "desk");

  const std::string pipeline = root.string("pipeline", "thermodynamics");
  if (pipeline == "thermodynamics") {
    c.pipeline = Pipeline::thermodynamics;
  } else if (pipeline == "protocol_comparison") {
    c.pipeline = Pipeline::protocol_comparison;
  } else {
    throw ConfigError("pipeline: unknown pipeline '" + pipeline + "'");
  }

  c.physical = parse_physical(root.child("physical"), c.preset);

  const Section basis = root.child("basis");
  basis.allow({"dimension"});
  c.dimension = basis.integer("dimension", c.pipeline == Pipeline::thermodynamics ? 25 : 32);
  validated("basis", [&] { SpinBasis check(c.dimension); });

  const Section integrator = root.child("integrator");
  integrator.allow({"steps", "stride", "dt"});
  c.integrator.steps = integrator.integer("steps", 4000);
  c.integrator.stride = integrator.integer("stride", 4);
  c.protocol_dt = integrator.number("dt", 0.02);
  if (c.integrator.steps < 1) {
    throw ConfigError("integrator.steps must be >= 1");
  }
  if (c.integrator.stride < 1 || c.integrator.steps % c.integrator.stride != 0) {
    throw ConfigError("integrator.stride must be >= 1 and divide integrator.steps");
  }
  if (!(c.protocol_dt > 0)) {
    throw ConfigError("integrator.dt must be > 0");
  }

  const Section schedule = root.child("schedule");
  c.schedule = parse_schedule(schedule);
  c.initial = parse_initial(schedule);

  if (root.has("protocols")) {
    const json& list = doc.at("protocols");
    if (!list.is_array()) {
      throw ConfigError("protocols must be an array");
    }
    std::set<std::string> labels;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "protocols[" + std::to_string(i) + "]";
      ProtocolEntry e = parse_protocol(Section(&list[i], path), path, c.integrator.stride, c.protocol_dt);
      if (!labels.insert(e.label).second) {
        throw ConfigError(path + ".label: duplicate label '" + e.label + "'");
      }
      c.protocols.push_back(std::move(e));
    }
  }
  if (c.pipeline == Pipeline::protocol_comparison && c.protocols.empty()) {
    throw ConfigError("protocols must list at least one protocol");
  }

  const Section grid = root.child("phase_space");
  grid.allow({"n_theta", "n_phi"});
  const SpinBasis sb(c.dimension);
  c.n_theta = grid.integer("n_theta", 2 * SphereGrid::min_theta_nodes(sb));
  c.n_phi = grid.integer("n_phi", 2 * SphereGrid::min_phi_nodes(sb));
  if (c.n_theta < SphereGrid::min_theta_nodes(sb)) {
    throw ConfigError("phase_space.n_theta must be >= " + std::to_string(SphereGrid::min_theta_nodes(sb)));
  }
  if (c.n_phi < SphereGrid::min_phi_nodes(sb)) {
    throw ConfigError("phase_space.n_phi must be >= " + std::to_string(SphereGrid::min_phi_nodes(sb)));
  }

  const Section output = root.child("output");
  output.allow({"directory"});
  c.output_dir = output.string("directory", c.output_dir.string());
  if (c.output_dir.empty()) {
    throw ConfigError("output.directory must not be empty");
  }

  const std::int64_t seed = root.integer("seed", 0);
  if (seed < 0) {
    throw ConfigError("seed must be >= 0");
  }
  c.seed = static_cast<std::uint64_t>(seed);

  json protocols = json::array();
  for (const auto& e : c.protocols) {
    protocols.push_back(spec_to_json(e));
  }
  c.effective = json{
      {"defaults", {{"version", c.version}, {"preset", c.preset}}},
      {"pipeline", pipeline},
      {"physical", params_to_json(c.physical)},
      {"basis", {{"dimension", c.dimension}}},
      {"schedule",
       {{"mode", to_string(c.schedule.mode)},
        {"duration", c.schedule.duration},
        {"c1", c.schedule.c1},
        {"c2", c.schedule.c2},
        {"initial_state", {{"kind", c.initial.kind}, {"theta", c.initial.theta}, {"phi", c.initial.phi}}}}},
      {"protocols", protocols},
      {"integrator", {{"steps", c.integrator.steps}, {"stride", c.integrator.stride}, {"dt", c.protocol_dt}}},
      {"phase_space", {{"n_theta", c.n_theta}, {"n_phi", c.n_phi}}},
      {"output", {{"directory", c.output_dir.string()}}},
      {"seed", c.seed}};
  if (c.schedule.mode == ScheduleMode::tilt_controlled) {
    c.effective["schedule"]["tilt"] = {{"amplitude", c.schedule.tilt.amplitude()},
                                       {"ramp", c.schedule.tilt.ramp()}};
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("config: cannot read " + path.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(doc);
}

// --- Text formats ------------------------------------------------------------

std::string format_number(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, result.ptr);
}

namespace {

constexpr std::string_view kTimeseriesHeader = "t,S_Q,dS_U_dt,Pi_lc,Pi_th,Phi_th,residual";

double parse_field(std::string_view text) {
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw InvalidArgument("malformed number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string format_timeseries(const std::vector<EntropyRecord>& records) {
  if (records.empty()) {
    throw InvalidArgument("format_timeseries: no records");
  }
  std::string out(kTimeseriesHeader);
  out += '\n';
  for (const auto& r : records) {
    for (double v : {r.t, r.entropy, r.unitary_rate, r.pi_lc, r.pi_th, r.phi_th}) {
      out += format_number(v);
      out += ',';
    }
    out += format_number(r.residual);
    out += '\n';
  }
  return out;
}

std::vector<EntropyRecord> parse_timeseries(std::string_view text) {
  std::vector<EntropyRecord> out;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (header) {
      if (line != kTimeseriesHeader) {
        throw InvalidArgument("timeseries: unexpected header");
      }
      header = false;
      continue;
    }
    double fields[7];
    std::size_t start = 0;
    for (int k = 0; k < 7; ++k) {
      const std::size_t comma = (k < 6) ? line.find(',', start) : line.size();
      if (comma == std::string_view::npos) {
        throw InvalidArgument("timeseries: short row");
      }
      fields[k] = parse_field(line.substr(start, comma - start));
      start = comma + 1;
    }
    EntropyRecord r;
    r.t = fields[0];
    r.entropy = fields[1];
    r.unitary_rate = fields[2];
    r.pi_lc = fields[3];
    r.pi_th = fields[4];
    r.phi_th = fields[5];
    r.residual = fields[6];
    out.push_back(r);
  }
  return out;
}

std::string format_sigma_ir(const std::vector<EntropyRecord>& records) {
  std::string out = "t,Sigma_ir\n";
  double total = 0.0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (k > 0) {
      const double a = records[k - 1].pi_lc + records[k - 1].pi_th;
      const double b = records[k].pi_lc + records[k].pi_th;
      total += 0.5 * (a + b) * (records[k].t - records[k - 1].t);
    }
    out += format_number(records[k].t) + ',' + format_number(total) + '\n';
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (out) {
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw OutputError("cannot write " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw OutputError("cannot write " + path.string());
  }
}

// --- Pipelines ----------------------------------------------------------------

namespace {

Matrix initial_state(const ExperimentConfig& c, const MasterEquation& eq) {
  const Index n = c.dimension;
  const InitialState& init = c.initial;
  const Matrix h0 = eq.hamiltonian(0.0);
  if (init.kind == "ground") {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h0);
    return pure_state(solver.eigenvectors().col(0));
  }
  if (init.kind == "gibbs") {
    const double beta = c.physical.inverse_temperature();
    if (std::isinf(beta)) {
      Eigen::SelfAdjointEigenSolver<Matrix> solver(h0);
      return pure_state(solver.eigenvectors().col(0));
    }
    return gibbs_state(h0, beta);
  }
  if (init.kind == "steady_state") {
    return steady_state(eq, 0.0);
  }
  if (init.kind == "coherent") {
    return pure_state(spin_coherent_state(SpinBasis(n), init.theta, init.phi));
  }
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> normal;
  Vector psi(n);
  for (Index k = 0; k < n; ++k) {
    psi(k) = Complex(normal(rng), normal(rng));
  }
  return pure_state(psi);
}

json record_json(const EntropyRecord& r) {
  return json{{"t", r.t},         {"S_Q", r.entropy},   {"dS_Q_dt", r.entropy_rate},
              {"dS_U_dt", r.unitary_rate}, {"Pi_lc", r.pi_lc}, {"Pi_th", r.pi_th},
              {"Phi_th", r.phi_th}, {"residual", r.residual}};
}

void check_second_law(const std::vector<EntropyRecord>& records, const std::string& what,
                      std::vector<std::string>& warnings) {
  double worst = 0.0;
  double at = 0.0;
  for (const auto& r : records) {
    if (r.pi_th < worst) {
      worst = r.pi_th;
      at = r.t;
    }
  }
  if (worst < -1e-6) {
    std::ostringstream msg;
    msg << what << ": Pi_th = " << worst << " < 0 at t = " << at;
    warnings.push_back(msg.str());
  }
}

PipelineResult run_thermodynamics(const ExperimentConfig& c) {
  const SpinBasis basis(c.dimension);
  auto ops = std::make_shared<const OperatorSet>(build_operator_set(basis, c.physical));
  auto eq = make_master_equation(ops, c.physical, c.schedule);
  const Trajectory traj = evolve(initial_state(c, *eq), eq, c.integrator);
  auto space = std::make_shared<const PhaseSpace>(basis, c.n_theta, c.n_phi);
  const std::vector<EntropyRecord> records = entropy_series(traj, space);

  PipelineResult out;
  out.warnings = traj.diagnostics.warnings;
  check_second_law(records, "thermodynamics", out.warnings);

  double worst_residual = 0.0;
  for (std::size_t k = 1; k + 1 < records.size(); ++k) {
    const double scale = records[k].max_rate();
    if (scale > 0) {
      worst_residual = std::max(worst_residual, records[k].residual / scale);
    }
  }
  const EntropyRecord& last = records.back();
  const double dissipative = last.pi_lc + last.pi_th - last.phi_th;
  json summary{
      {"pipeline", "thermodynamics"},
      {"samples", records.size()},
      {"sigma_ir", records.size() > 1 ? sigma_ir(records) : 0.0},
      {"max_relative_residual", worst_residual},
      {"initial", record_json(records.front())},
      {"final", record_json(last)},
      {"final_balance",
       {{"Pi_lc_plus_Pi_th_minus_Phi_th", dissipative},
        {"relative_to_Pi_th", last.pi_th != 0.0 ? dissipative / last.pi_th : 0.0},
        {"generator_norm", max_abs(eq->rhs(traj.times.back(), traj.final_state()))}}},
      {"diagnostics",
       {{"max_trace_correction", traj.diagnostics.max_trace_correction},
        {"max_hermiticity_defect", traj.diagnostics.max_hermiticity_defect},
        {"min_eigenvalue", traj.diagnostics.min_eigenvalue},
        {"max_purity", traj.diagnostics.max_purity}}}};

  out.artifacts.push_back({"entropy_rates.csv", format_timeseries(records)});
  out.artifacts.push_back({"sigma_ir.csv", format_sigma_ir(records)});
  out.artifacts.push_back({"summary.json", summary.dump(2) + "\n"});
  return out;
}

struct ProtocolOutcome {
  GradingReport report;
  std::vector<EntropyRecord> records;
  double tilt_amplitude = 0.0;
  std::vector<std::string> warnings;
};

ProtocolOutcome run_one(const ExperimentConfig& c, const ProtocolEntry& entry,
                        const std::shared_ptr<const OperatorSet>& ops,
                        const std::shared_ptr<const PhaseSpace>& space) {
  ProtocolOptions options;
  options.evolve.steps = entry.steps;
  options.evolve.stride = entry.stride;
  const ProtocolRun run = run_protocol(entry.spec, c.physical, ops, options);
  const Matrix target = target_state(entry.spec, c.physical, ops, options.evolve);

  ProtocolOutcome out;
  out.records = entropy_series(run.trajectory, space);
  const std::string digest =
      sha256_hex(spec_to_json(entry).dump() + params_to_json(c.physical).dump() +
                 std::to_string(c.dimension));
  out.report = grade(run, out.records, target, digest);
  out.tilt_amplitude = run.tilt.amplitude();
  for (const auto& w : run.warnings) {
    out.warnings.push_back(entry.label + ": " + w);
  }
  check_second_law(out.records, entry.label, out.warnings);
  return out;
}

PipelineResult run_comparison(const ExperimentConfig& c, unsigned threads) {
  const SpinBasis basis(c.dimension);
  auto ops = std::make_shared<const OperatorSet>(build_operator_set(basis, c.physical));
  auto space = std::make_shared<const PhaseSpace>(basis, c.n_theta, c.n_phi);

  std::vector<ProtocolOutcome> outcomes(c.protocols.size());
  const std::size_t workers = std::max(1u, threads);
  for (std::size_t first = 0; first < c.protocols.size(); first += workers) {
    std::vector<std::future<ProtocolOutcome>> batch;
    const std::size_t last = std::min(first + workers, c.protocols.size());
    for (std::size_t i = first; i < last; ++i) {
      batch.push_back(std::async(std::launch::async, run_one, std::cref(c),
                                 std::cref(c.protocols[i]), ops, space));
    }
    for (std::size_t i = first; i < last; ++i) {
      outcomes[i] = batch[i - first].get();
    }
  }

  PipelineResult out;
  json reports = json::array();
  std::vector<std::size_t> order(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const ProtocolEntry& e = c.protocols[i];
    const GradingReport& r = outcomes[i].report;
    reports.push_back(json{{"label", e.label},
                           {"kind", r.kind},
                           {"tau", r.tau},
                           {"tau_qsl", r.tau_qsl},
                           {"fidelity", r.fidelity},
                           {"sigma_ir", r.sigma_ir},
                           {"g_speed", r.g_speed},
                           {"g_fidelity", r.g_fidelity},
                           {"g_thermo", r.g_thermo},
                           {"grade", r.grade},
                           {"tilt_amplitude", outcomes[i].tilt_amplitude},
                           {"digest", r.digest},
                           {"notices", r.notices}});
    out.artifacts.push_back({e.label + "_rates.csv", format_timeseries(outcomes[i].records)});
    out.artifacts.push_back({e.label + "_sigma_ir.csv", format_sigma_ir(outcomes[i].records)});
    out.warnings.insert(out.warnings.end(), outcomes[i].warnings.begin(), outcomes[i].warnings.end());
    for (const auto& n : r.notices) {
      out.warnings.push_back(e.label + ": " + n);
    }
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return outcomes[a].report.grade > outcomes[b].report.grade;
  });
  json ranking = json::array();
  for (std::size_t i : order) {
    ranking.push_back(c.protocols[i].label);
  }
  const json report{{"fidelity_convention", kFidelityConvention},
                    {"qsl_bound", kQslBound},
                    {"protocols", reports},
                    {"ranking", ranking}};
  out.artifacts.push_back({"grading_report.json", report.dump(2) + "\n"});
  return out;
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& config, unsigned threads) {
  return config.pipeline == Pipeline::thermodynamics ? run_thermodynamics(config)
                                                     : run_comparison(config, threads);
}

void emit(const ExperimentConfig& config, const PipelineResult& result, double wall_seconds) {
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec || !std::filesystem::is_directory(config.output_dir)) {
    throw OutputError("cannot create output directory " + config.output_dir.string());
  }
  json files = json::array();
  for (const auto& a : result.artifacts) {
    write_atomic(config.output_dir / a.name, a.content);
    files.push_back(json{{"name", a.name}, {"sha256", sha256_hex(a.content)}, {"bytes", a.content.size()}});
  }
  const json manifest{{"code_version", QTHERMO_VERSION},
                      {"config_digest", sha256_hex(config.effective.dump())},
                      {"config", config.effective},
                      {"wall_seconds", wall_seconds},
                      {"warnings", result.warnings},
                      {"files", files}};
  write_atomic(config.output_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace qthermo::cli
