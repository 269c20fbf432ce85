#include "iqtd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "iqtd/chaosdiag.hpp"
#include "iqtd/generator.hpp"
#include "iqtd/semigroup.hpp"

namespace iqtd::experiment {

using nlohmann::json;

namespace {

const std::set<std::string> kTopKeys = {
    "model",   "coefficients", "bounds",    "weight_s",     "trunc_n",        "tolerance",
    "experiment", "horizon",   "dt",        "u0",           "mus",            "mu_coeffs",
    "real_part", "period",     "harmonic",  "thresholds",   "window",         "display_count",
    "full_state", "pass_threshold", "rank_order", "grid_points"};

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

class Checker {
 public:
  explicit Checker(const json& root) : root_(root) {}

  void add(std::string msg) { out_.push_back(std::move(msg)); }
  std::vector<std::string> take() { return std::move(out_); }

  bool has(const char* key) const { return root_.contains(key); }

  /// Positive (or nonnegative) finite number at `key`.
  void number(const char* key, bool required, bool strictly_positive = true) {
    if (!has(key)) {
      if (required) add(std::string(key) + ": required");
      return;
    }
    const json& v = root_.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      add(std::string(key) + ": must be a finite number");
    } else if (strictly_positive ? !(v.get<double>() > 0.0) : !(v.get<double>() >= 0.0)) {
      add(std::string(key) + (strictly_positive ? ": must be positive" : ": must be >= 0"));
    }
  }

  void integer(const char* key, bool required, long long min_value) {
    if (!has(key)) {
      if (required) add(std::string(key) + ": required");
      return;
    }
    const json& v = root_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < min_value) {
      add(std::string(key) + ": must be an integer >= " + std::to_string(min_value));
    }
  }

  void pair(const char* key, bool required) {
    if (!has(key)) {
      if (required) add(std::string(key) + ": required");
      return;
    }
    const json& v = root_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      add(std::string(key) + ": must be a two-element numeric array");
    }
  }

  void complex_list(const char* key, bool required) {
    if (!has(key)) {
      if (required) add(std::string(key) + ": required");
      return;
    }
    const json& v = root_.at(key);
    if (!v.is_array()) {
      add(std::string(key) + ": must be an array of numbers or {re, im} objects");
      return;
    }
    for (const json& e : v) {
      const bool ok = e.is_number() || (e.is_object() && e.size() == 2 && e.contains("re") &&
                                        e.contains("im") && e["re"].is_number() &&
                                        e["im"].is_number());
      if (!ok) {
        add(std::string(key) + ": entries must be numbers or {re, im} objects");
        return;
      }
    }
  }

  void boolean(const char* key) {
    if (has(key) && !root_.at(key).is_boolean()) add(std::string(key) + ": must be true or false");
  }

 private:
  const json& root_;
  std::vector<std::string> out_;
};

// One coefficient-source object: {constant}, {list} or {uniform: {lo, hi, seed}}.
void check_source(const json& j, const std::string& path, Checker& c) {
  if (!j.is_object() || j.size() != 1) {
    c.add(path + ": must hold exactly one of constant, list, uniform");
    return;
  }
  const auto& [key, val] = *j.items().begin();
  if (key == "constant") {
    if (!val.is_number() || !(val.get<double>() > 0.0)) c.add(path + ".constant: must be positive");
  } else if (key == "list") {
    if (!val.is_array() || val.empty()) {
      c.add(path + ".list: must be a nonempty array");
      return;
    }
    for (const json& e : val) {
      if (!e.is_number() || !(e.get<double>() > 0.0)) {
        c.add(path + ".list: entries must be positive numbers");
        return;
      }
    }
  } else if (key == "uniform") {
    if (!val.is_object()) {
      c.add(path + ".uniform: must be an object with lo, hi, seed");
      return;
    }
    for (const auto& [k, _] : val.items()) {
      if (k != "lo" && k != "hi" && k != "seed") c.add(path + ".uniform." + k + ": unknown key");
    }
    if (!val.contains("seed")) {
      c.add(path + ".uniform.seed: required for random coefficients");
    } else if (!val["seed"].is_number_unsigned() &&
               !(val["seed"].is_number_integer() && val["seed"].get<long long>() >= 0)) {
      c.add(path + ".uniform.seed: must be a nonnegative integer");
    }
    const bool lo_ok = val.contains("lo") && val["lo"].is_number();
    const bool hi_ok = val.contains("hi") && val["hi"].is_number();
    if (!lo_ok || !hi_ok) {
      c.add(path + ".uniform: lo and hi are required numbers");
    } else if (!(val["lo"].get<double>() > 0.0 && val["lo"].get<double>() < val["hi"].get<double>())) {
      c.add(path + ".uniform: need 0 < lo < hi");
    }
  } else {
    c.add(path + "." + key + ": unknown coefficient form");
  }
}

std::vector<double> explicit_values(const json& src) {
  if (src.contains("constant")) return {src["constant"].get<double>()};
  if (src.contains("list")) return src["list"].get<std::vector<double>>();
  return {};
}

// ---------------------------------------------------------------------------
// resolved configuration
// ---------------------------------------------------------------------------

Complex parse_complex(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  return {j["re"].get<double>(), j["im"].get<double>()};
}

json complex_json(Complex z) {
  return json{{"re", z.real()}, {"im", z.imag()}};
}

std::vector<Complex> complex_list(const json& root, const char* key) {
  std::vector<Complex> out;
  if (root.contains(key)) {
    for (const json& e : root[key]) out.push_back(parse_complex(e));
  }
  return out;
}

CoefficientSource parse_source(const json& j) {
  if (j.contains("constant")) return ConstantCoefficients{j["constant"].get<double>()};
  if (j.contains("list")) return ListCoefficients{j["list"].get<std::vector<double>>()};
  const json& u = j["uniform"];
  return UniformCoefficients{u["lo"].get<double>(), u["hi"].get<double>(),
                             u["seed"].get<std::uint64_t>()};
}

Index available_length(const CoefficientSource& src) {
  if (const auto* l = std::get_if<ListCoefficients>(&src)) return Index(l->values.size());
  return std::numeric_limits<Index>::max();
}

struct Config {
  std::string experiment;
  Family model = Family::iqtd;
  std::optional<CoefficientSource> lambda;
  std::optional<CoefficientSource> alpha;
  std::optional<CoefficientSource> beta;
  double bound_lo = 0.3;
  double bound_hi = 0.4;
  double weight_s = 0.5;
  Index trunc_n = 2;
  double tolerance = 1e-9;
  double horizon = 0.0;
  double dt = 0.0;
  std::vector<Complex> u0;
  std::vector<Complex> mus;
  std::vector<Complex> mu_coeffs;
  bool real_part = false;
  double period = 0.0;
  int harmonic = 1;
  std::pair<double, double> thresholds{0.0, 0.0};
  std::pair<double, double> window{0.0, 0.0};
  Index display_count = 10;
  bool full_state = false;
  double pass_threshold = 0.0;
  Index rank_order = 0;
  Index grid_points = 8;

  json raw;  // original document, for echoing

  Index max_size() const {
    if (model == Family::iqtd) return available_length(*lambda);
    return std::min(available_length(*alpha), available_length(*beta));
  }
};

double default_pass_threshold(const std::string& experiment) {
  if (experiment == "eigen") return 1e-10;
  if (experiment == "periodic") return 1e-6;
  if (experiment == "density") return 0.05;
  if (experiment == "stability") return 0.02;
  if (experiment == "dsw-check") return 1e-10;
  return 0.0;
}

std::pair<double, double> read_pair(const json& j) {
  return {j[0].get<double>(), j[1].get<double>()};
}

Config parse(const json& root, const std::string& experiment) {
  Config c;
  c.raw = root;
  c.experiment = experiment;
  c.model = root["model"].get<std::string>() == "iqtd" ? Family::iqtd : Family::death;
  if (c.model == Family::iqtd) {
    c.lambda = parse_source(root["coefficients"]);
    if (root.contains("bounds")) {
      std::tie(c.bound_lo, c.bound_hi) = read_pair(root["bounds"]);
    } else if (const auto* u = std::get_if<UniformCoefficients>(&*c.lambda)) {
      c.bound_lo = u->lo;
      c.bound_hi = u->hi;
    }
  } else {
    c.alpha = parse_source(root["coefficients"]["alpha"]);
    c.beta = parse_source(root["coefficients"]["beta"]);
  }
  c.weight_s = root["weight_s"].get<double>();
  c.trunc_n = root["trunc_n"].get<Index>();
  c.tolerance = root["tolerance"].get<double>();

  c.horizon = root.value("horizon", 0.0);
  c.dt = root.value("dt", 0.0);
  c.u0 = complex_list(root, "u0");
  if (c.u0.empty()) c.u0 = {Complex(1.0, 0.0)};
  c.mus = complex_list(root, "mus");
  c.mu_coeffs = complex_list(root, "mu_coeffs");
  if (c.mu_coeffs.empty()) c.mu_coeffs.assign(c.mus.size(), Complex(1.0, 0.0));
  c.real_part = root.value("real_part", false);
  c.period = root.value("period", 0.0);
  c.harmonic = root.value("harmonic", 1);
  if (root.contains("thresholds")) c.thresholds = read_pair(root["thresholds"]);
  if (root.contains("window")) c.window = read_pair(root["window"]);
  c.display_count = root.value("display_count", Index(10));
  c.full_state = root.value("full_state", false);
  c.pass_threshold = root.value("pass_threshold", default_pass_threshold(experiment));
  c.grid_points = root.value("grid_points", Index(8));
  c.rank_order = root.value("rank_order", Index(0));

  if (experiment == "periodic") {
    if (!root.contains("horizon")) c.horizon = c.period;
    if (!root.contains("dt")) c.dt = c.period / 50.0;
  }
  if (experiment == "stability") {
    if (!root.contains("horizon")) c.horizon = c.window.second;
    if (!root.contains("dt")) c.dt = (c.window.second - c.window.first) / 100.0;
  }
  return c;
}

json source_json(const CoefficientSource& src) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantCoefficients>) {
          return json{{"constant", s.value}};
        } else if constexpr (std::is_same_v<T, ListCoefficients>) {
          return json{{"list", s.values}};
        } else {
          return json{{"uniform", {{"lo", s.lo}, {"hi", s.hi}, {"seed", s.seed}}}};
        }
      },
      src);
}

json complex_list_json(const std::vector<Complex>& v) {
  json out = json::array();
  for (Complex z : v) out.push_back(complex_json(z));
  return out;
}

// Fully resolved configuration: every default made explicit.
json resolved_json(const Config& c) {
  json j;
  j["experiment"] = c.experiment;
  j["model"] = to_string(c.model);
  if (c.model == Family::iqtd) {
    j["coefficients"] = source_json(*c.lambda);
    j["bounds"] = {c.bound_lo, c.bound_hi};
  } else {
    j["coefficients"] = {{"alpha", source_json(*c.alpha)}, {"beta", source_json(*c.beta)}};
  }
  j["weight_s"] = c.weight_s;
  j["trunc_n"] = c.trunc_n;
  j["tolerance"] = c.tolerance;
  j["display_count"] = c.display_count;
  j["full_state"] = c.full_state;
  j["pass_threshold"] = c.pass_threshold;
  const std::string& e = c.experiment;
  if (e == "simulate" || e == "density" || e == "periodic" || e == "stability") {
    j["horizon"] = c.horizon;
    j["dt"] = c.dt;
  }
  if (e == "simulate") j["u0"] = complex_list_json(c.u0);
  if (e == "eigen" || e == "density" || e == "stability" || e == "dsw-check") {
    j["mus"] = complex_list_json(c.mus);
  }
  if (e == "density" || e == "stability") {
    j["mu_coeffs"] = complex_list_json(c.mu_coeffs);
    j["real_part"] = c.real_part;
  }
  if (e == "periodic") {
    j["period"] = c.period;
    j["harmonic"] = c.harmonic;
  }
  if (e == "density") j["thresholds"] = {c.thresholds.first, c.thresholds.second};
  if (e == "stability") j["window"] = {c.window.first, c.window.second};
  if (e == "dsw-check") {
    j["rank_order"] = c.rank_order;
    j["grid_points"] = c.grid_points;
  }
  return j;
}

GeneratorSpec build_generator(const Config& c, Index n) {
  if (c.model == Family::iqtd) {
    return GeneratorSpec::iqtd(resolve(*c.lambda, n), c.bound_lo, c.bound_hi);
  }
  return GeneratorSpec::death(resolve(*c.alpha, n), resolve(*c.beta, n));
}

json generator_json(const GeneratorSpec& gen) {
  json j;
  j["size"] = gen.size();
  const auto to_vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  if (gen.family() == Family::iqtd) {
    j["lambda"] = to_vec(gen.decay());
  } else {
    j["alpha"] = to_vec(gen.decay());
    j["beta"] = to_vec(gen.coupling());
  }
  return j;
}

json plan_json(const EvolutionPlan& p) {
  return {{"substeps", p.substeps},
          {"order", p.order},
          {"trunc", p.trunc},
          {"window", p.window},
          {"tol", p.tol},
          {"horizon", p.horizon},
          {"mode", p.mode == Truncation::windowed ? "windowed" : "exact"},
          {"norm_bound", p.norm_bound},
          {"growth_rate", p.growth_rate},
          {"remainder_bound", p.remainder_bound}};
}

// Grows the generator until the windowed plan's dependence margin fits.
std::pair<GeneratorSpec, EvolutionPlan> sized_windowed_plan(const Config& c, Weight w,
                                                            double horizon, Index window) {
  Index size = window;
  for (int attempt = 0; attempt < 16; ++attempt) {
    GeneratorSpec gen = build_generator(c, size);
    try {
      EvolutionPlan plan = plan_evolution(gen, w, horizon, c.tolerance, window, Truncation::windowed);
      return {std::move(gen), plan};
    } catch (const CapacityError& e) {
      if (Index(e.needed()) > c.max_size()) {
        throw CapacityError(e.needed(), std::size_t(c.max_size()));
      }
      size = Index(e.needed());
    }
  }
  throw InvalidInput("could not size the generator for the requested plan");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

struct Trajectory {
  std::vector<double> times;
  std::vector<WeightedVector> states;
};

void write_trajectory(const std::filesystem::path& dir, const Config& c, const Trajectory& tr,
                      json& artifacts) {
  const Index state_len = tr.states.empty() ? 0 : tr.states.front().size();
  const Index k = std::min(c.display_count, state_len);
  std::string csv = "t,norm_s";
  for (Index i = 1; i <= k; ++i) csv += ",v" + std::to_string(i);
  csv += '\n';
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    const WeightedVector& v = tr.states[j];
    csv += format_number(tr.times[j]) + ',' + format_number(norm_s(v));
    for (Index i = 1; i <= k; ++i) csv += ',' + format_number(v(i).real());
    csv += '\n';
  }
  write_text(dir / "trajectory.csv", csv);
  artifacts.push_back("trajectory.csv");

  if (c.full_state) {
    std::string full = "t";
    for (Index i = 1; i <= state_len; ++i) full += ",v" + std::to_string(i);
    full += '\n';
    for (std::size_t j = 0; j < tr.times.size(); ++j) {
      full += format_number(tr.times[j]);
      for (Index i = 1; i <= state_len; ++i) full += ',' + format_number(tr.states[j](i).real());
      full += '\n';
    }
    write_text(dir / "state.csv", full);
    artifacts.push_back("state.csv");
  }
}

WeightedVector spectral_vector(const Config& c, const GeneratorSpec& gen, Weight w, Index n,
                               SubspaceKind kind = SubspaceKind::any()) {
  std::vector<Complex> mus = c.mus;
  std::vector<Complex> coeffs = c.mu_coeffs;
  if (c.real_part) {
    // 2 Re(sum c h_mu) = sum c h_mu + conj(c) h_conj(mu)
    for (std::size_t i = 0; i < c.mus.size(); ++i) {
      mus.push_back(std::conj(c.mus[i]));
      coeffs.push_back(std::conj(c.mu_coeffs[i]));
    }
  }
  return subspace_sample(gen, mus, coeffs, w, n, kind);
}

// ---------------------------------------------------------------------------
// experiments
// ---------------------------------------------------------------------------

struct Result {
  json results;
  bool pass = false;
  json generator;
};

Result run_simulate(const Config& c, Weight w, const std::filesystem::path& dir, json& artifacts) {
  const GeneratorSpec gen = build_generator(c, c.trunc_n);
  Coeffs<Complex> u = Coeffs<Complex>::Zero(c.trunc_n);
  for (std::size_t i = 0; i < c.u0.size(); ++i) u[Index(i)] = c.u0[i];
  const WeightedVector u0(std::move(u), w);
  const EvolutionPlan plan = plan_evolution(gen, w, c.horizon, c.tolerance, c.trunc_n,
                                            Truncation::exact);
  Trajectory tr{sample_times(c.horizon, c.dt), {}};
  tr.states = orbit(gen, u0, tr.times, plan);
  write_trajectory(dir, c, tr, artifacts);

  Result r;
  r.generator = generator_json(gen);
  r.results = {{"plan", plan_json(plan)},
               {"initial_norm_s", norm_s(u0)},
               {"final_norm_s", norm_s(tr.states.back())},
               {"samples", tr.times.size()}};
  r.pass = plan.remainder_bound <= c.tolerance;
  return r;
}

Result run_eigen(const Config& c, Weight w) {
  const GeneratorSpec gen = build_generator(c, c.trunc_n);
  Result r;
  r.generator = generator_json(gen);
  r.pass = true;
  json fields = json::array();
  double worst = 0.0;
  for (Complex mu : c.mus) {
    const EigenField ef = make_eigenvector(gen, mu, c.trunc_n, w);
    json head = json::array();
    for (Index i = 1; i <= std::min(c.display_count, ef.vector.size()); ++i) {
      head.push_back(complex_json(ef.vector(i)));
    }
    fields.push_back({{"mu", complex_json(mu)},
                      {"residual", ef.residual},
                      {"norm_s", norm_s(ef.vector)},
                      {"admissible", ef.admissible},
                      {"head", head}});
    worst = std::max(worst, ef.residual);
    r.pass = r.pass && ef.residual < c.pass_threshold;
  }
  r.results = {{"epsilon_max", admissible_radius(gen, w)},
               {"max_residual", worst},
               {"eigenfields", fields}};
  return r;
}

Result run_periodic(const Config& c, Weight w, const std::filesystem::path& dir, json& artifacts) {
  // rejects inadmissible periods before any sizing work
  make_periodic_point(build_generator(c, c.trunc_n), c.period, c.harmonic, w, 1);

  auto [gen, plan] = sized_windowed_plan(c, w, c.horizon, c.trunc_n);
  const WeightedVector x = make_periodic_point(gen, c.period, c.harmonic, w, plan.trunc);
  const double residual = verify_periodicity(gen, x, c.period, plan);

  Trajectory tr{sample_times(c.horizon, c.dt), {}};
  tr.states = orbit(gen, x, tr.times, plan);
  write_trajectory(dir, c, tr, artifacts);

  Result r;
  r.generator = generator_json(gen);
  r.results = {{"plan", plan_json(plan)},
               {"omega", 2.0 * std::numbers::pi * c.harmonic / c.period},
               {"epsilon_max", admissible_radius(gen, w)},
               {"periodicity_residual", residual}};
  r.pass = residual < c.pass_threshold;
  return r;
}

Result run_density(const Config& c, Weight w, const std::filesystem::path& dir, json& artifacts) {
  const GeneratorSpec gen = build_generator(c, c.trunc_n);
  const WeightedVector diff = spectral_vector(c, gen, w, c.trunc_n);
  const EvolutionPlan plan = plan_evolution(gen, w, c.horizon, c.tolerance, c.trunc_n,
                                            Truncation::exact);
  Trajectory tr{sample_times(c.horizon, c.dt), {}};
  tr.states = orbit(gen, diff, tr.times, plan);
  write_trajectory(dir, c, tr, artifacts);

  std::vector<double> d(tr.states.size());
  std::transform(tr.states.begin(), tr.states.end(), d.begin(),
                 [](const WeightedVector& v) { return norm_s(v); });
  const DensityReport rep = distance_densities(d, c.dt, c.thresholds.first, c.thresholds.second);

  Result r;
  r.generator = generator_json(gen);
  r.results = {{"plan", plan_json(plan)},
               {"delta_far", rep.delta_far},
               {"eps_close", rep.eps_close},
               {"density_far", rep.density_far},
               {"density_near", rep.density_near},
               {"horizon", rep.horizon},
               {"sample_step", rep.sample_step}};
  r.pass = rep.density_far >= 1.0 - c.pass_threshold;
  return r;
}

Result run_stability(const Config& c, Weight w, const std::filesystem::path& dir,
                     json& artifacts) {
  auto [gen, plan] = sized_windowed_plan(c, w, c.horizon, c.trunc_n);
  const WeightedVector y = spectral_vector(c, gen, w, plan.trunc);
  Trajectory tr{window_times(c.window, c.dt), {}};
  tr.states = orbit(gen, y, tr.times, plan);
  write_trajectory(dir, c, tr, artifacts);

  std::vector<double> norms(tr.states.size());
  std::transform(tr.states.begin(), tr.states.end(), norms.begin(),
                 [](const WeightedVector& v) { return norm_s(v); });
  const StabilityReport rep = fit_stability(tr.times, norms, c.mus);

  Result r;
  r.generator = generator_json(gen);
  r.results = {{"plan", plan_json(plan)},
               {"fitted_rate", rep.fitted_rate},
               {"predicted_rate", rep.predicted_rate},
               {"window", {rep.window.first, rep.window.second}},
               {"fit_residual", rep.residual},
               {"window_shortened", rep.window_shortened}};
  r.pass = rep.predicted_rate != 0.0
               ? std::abs(rep.fitted_rate - rep.predicted_rate) <=
                     c.pass_threshold * std::abs(rep.predicted_rate)
               : std::abs(rep.fitted_rate) <= 1e-6;
  return r;
}

Result run_dsw(const Config& c, Weight w) {
  GeneratorSpec gen = build_generator(c, c.trunc_n);
  DiskGrid grid;
  grid.epsilon = admissible_radius(gen, w);
  if (c.mus.empty()) {
    if (!(grid.epsilon > 0.0)) {
      throw InvalidInput("admissible radius is zero; no disk grid exists");
    }
    grid = make_disk_grid(0.95 * grid.epsilon, c.grid_points);
    grid.epsilon = admissible_radius(gen, w);
  } else {
    grid.points = c.mus;
  }
  const Index n = c.rank_order > 0 ? c.rank_order
                                   : std::min<Index>(Index(grid.points.size()), 8);
  if (n > gen.size()) gen = build_generator(c, n);
  const DswReport rep = dsw_condition_report(gen, grid.points, w, n, c.trunc_n);
  const auto grid_issues = grid.violations();

  Result r;
  r.generator = generator_json(gen);
  r.results = {{"epsilon_max", grid.epsilon},
               {"grid", complex_list_json(grid.points)},
               {"grid_violations", grid_issues},
               {"cond1", rep.cond1},
               {"cond2_max_residual", rep.cond2_max_residual},
               {"cond3_min_singular_value", rep.cond3_min_singular_value},
               {"rank_order", rep.rank_order},
               {"residual_length", rep.residual_length}};
  r.pass = rep.cond1 && rep.cond2_max_residual < c.pass_threshold &&
           rep.cond3_min_singular_value > 1e-8 && grid_issues.empty();
  return r;
}

Result run_hypotheses(const Config& c, Weight w) {
  const GeneratorSpec gen = build_generator(c, c.trunc_n);
  const HypothesisReport rep = check_chaos_hypotheses(gen, w);
  Result r;
  r.generator = generator_json(gen);
  r.results = {{"pass", rep.pass},
               {"violations", rep.violations},
               {"notes", rep.notes},
               {"epsilon_max", rep.epsilon_max}};
  r.pass = rep.pass;
  return r;
}

RunOutcome failure(int code, const std::string& kind, const std::string& message,
                   const std::filesystem::path& dir, json extra = json::object()) {
  json err = {{"error", {{"kind", kind}, {"message", message}}}};
  for (auto& [k, v] : extra.items()) err["error"][k] = v;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!ec) {
    try {
      write_text(dir / "error.json", err.dump(2) + "\n");
    } catch (const std::exception&) {
      // the document is still returned to the caller
    }
  }
  return {code, err};
}

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> validate(const json& config, std::optional<std::string_view> experiment) {
  if (!config.is_object()) return {"config: must be a JSON object"};
  Checker c(config);

  for (const auto& [key, _] : config.items()) {
    if (!kTopKeys.contains(key)) c.add(key + ": unknown key");
  }

  std::string exp;
  if (config.contains("experiment")) {
    if (!config["experiment"].is_string()) {
      c.add("experiment: must be a string");
    } else {
      exp = config["experiment"].get<std::string>();
      if (experiment && exp != *experiment) {
        c.add("experiment: config names '" + exp + "' but the subcommand is '" +
              std::string(*experiment) + "'");
      }
    }
  } else if (experiment) {
    exp = std::string(*experiment);
  }
  if (exp.empty()) {
    c.add("experiment: required (config key or subcommand)");
  } else if (std::find(kExperiments.begin(), kExperiments.end(), exp) == kExperiments.end()) {
    c.add("experiment: unknown experiment '" + exp + "'");
  }

  // model and coefficients
  std::string model;
  if (!config.contains("model")) {
    c.add("model: required");
  } else if (!config["model"].is_string() ||
             (config["model"] != "iqtd" && config["model"] != "death")) {
    c.add("model: must be \"iqtd\" or \"death\"");
  } else {
    model = config["model"].get<std::string>();
  }
  if (!config.contains("coefficients")) {
    c.add("coefficients: required");
  } else if (model == "iqtd") {
    const json& src = config["coefficients"];
    check_source(src, "coefficients", c);
    double lo = 0.3, hi = 0.4;
    if (config.contains("bounds")) {
      c.pair("bounds", false);
      if (config["bounds"].is_array() && config["bounds"].size() == 2 &&
          config["bounds"][0].is_number() && config["bounds"][1].is_number()) {
        lo = config["bounds"][0].get<double>();
        hi = config["bounds"][1].get<double>();
        if (!(lo > 0.0 && lo < hi)) c.add("bounds: need 0 < lo < hi");
      }
    } else if (src.is_object() && src.contains("uniform") && src["uniform"].is_object() &&
               src["uniform"].contains("lo") && src["uniform"].contains("hi") &&
               src["uniform"]["lo"].is_number() && src["uniform"]["hi"].is_number()) {
      lo = src["uniform"]["lo"].get<double>();
      hi = src["uniform"]["hi"].get<double>();
    }
    if (src.is_object() && src.size() == 1 && (src.contains("constant") || src.contains("list"))) {
      try {
        for (double v : explicit_values(src)) {
          if (v < lo || v > hi) {
            c.add("coefficients: value " + format_number(v) + " outside bounds [" +
                  format_number(lo) + ", " + format_number(hi) + "]");
            break;
          }
        }
      } catch (const json::exception&) {
        // already reported by check_source
      }
    }
  } else if (model == "death") {
    const json& src = config["coefficients"];
    if (!src.is_object() || !src.contains("alpha") || !src.contains("beta") || src.size() != 2) {
      c.add("coefficients: death model needs exactly {alpha, beta}");
    } else {
      check_source(src["alpha"], "coefficients.alpha", c);
      check_source(src["beta"], "coefficients.beta", c);
    }
    if (config.contains("bounds")) c.add("bounds: only meaningful for the iqtd model");
  }

  // numeric core
  if (!config.contains("weight_s")) {
    c.add("weight_s: required");
  } else if (!config["weight_s"].is_number() || !(config["weight_s"].get<double>() > 0.0) ||
             !(config["weight_s"].get<double>() <= 1.0)) {
    c.add("weight_s: must lie in (0, 1]");
  }
  c.integer("trunc_n", true, 2);
  c.number("tolerance", true);
  c.integer("display_count", false, 0);
  c.boolean("full_state");
  c.boolean("real_part");
  c.number("pass_threshold", false);
  c.integer("grid_points", false, 1);
  c.integer("rank_order", false, 1);
  c.integer("harmonic", false, 0);
  c.complex_list("u0", false);
  c.complex_list("mus", false);
  c.complex_list("mu_coeffs", false);

  if (config.contains("u0") && config["u0"].is_array() && config.contains("trunc_n") &&
      config["trunc_n"].is_number_integer() &&
      config["u0"].size() > config["trunc_n"].get<std::size_t>()) {
    c.add("u0: longer than trunc_n");
  }
  if (config.contains("mu_coeffs") && config["mu_coeffs"].is_array() &&
      (!config.contains("mus") || !config["mus"].is_array() ||
       config["mus"].size() != config["mu_coeffs"].size())) {
    c.add("mu_coeffs: must have the same length as mus");
  }

  if (exp == "simulate") {
    c.number("horizon", true, false);
    c.number("dt", true);
  } else if (exp == "eigen") {
    c.complex_list("mus", true);
  } else if (exp == "periodic") {
    c.number("period", true);
    c.number("horizon", false, false);
    c.number("dt", false);
    if (config.contains("horizon") && config.contains("period") && config["horizon"].is_number() &&
        config["period"].is_number() &&
        config["horizon"].get<double>() < config["period"].get<double>()) {
      c.add("horizon: must be at least the period");
    }
  } else if (exp == "density") {
    c.complex_list("mus", true);
    c.number("horizon", true);
    c.number("dt", true);
    c.pair("thresholds", true);
    if (config.contains("thresholds") && config["thresholds"].is_array() &&
        config["thresholds"].size() == 2 && config["thresholds"][0].is_number() &&
        config["thresholds"][1].is_number()) {
      const double far = config["thresholds"][0].get<double>();
      const double close = config["thresholds"][1].get<double>();
      if (!(far > close && close > 0.0)) c.add("thresholds: need delta_far > eps_close > 0");
    }
    if (config.contains("horizon") && config.contains("dt") && config["horizon"].is_number() &&
        config["dt"].is_number() &&
        10.0 * config["dt"].get<double>() > config["horizon"].get<double>()) {
      c.add("dt: horizon must cover at least 10 samples");
    }
  } else if (exp == "stability") {
    c.complex_list("mus", true);
    c.pair("window", true);
    c.number("horizon", false);
    c.number("dt", false);
    if (config.contains("window") && config["window"].is_array() && config["window"].size() == 2 &&
        config["window"][0].is_number() && config["window"][1].is_number()) {
      const double a = config["window"][0].get<double>();
      const double b = config["window"][1].get<double>();
      if (!(a > 0.0 && b > a)) c.add("window: need 0 < start < end");
      if (config.contains("horizon") && config["horizon"].is_number() &&
          config["horizon"].get<double>() < b) {
        c.add("horizon: must reach the end of the window");
      }
    }
    if (config.contains("mus") && config["mus"].is_array() && config["mus"].empty()) {
      c.add("mus: stability needs at least one eigenvalue");
    }
  }
  return c.take();
}

json with_seed(json config, std::uint64_t seed) {
  auto patch = [seed](json& src) {
    if (src.is_object() && src.contains("uniform") && src["uniform"].is_object()) {
      src["uniform"]["seed"] = seed;
    }
  };
  if (config.is_object() && config.contains("coefficients")) {
    json& coeffs = config["coefficients"];
    patch(coeffs);
    if (coeffs.is_object()) {
      if (coeffs.contains("alpha")) patch(coeffs["alpha"]);
      if (coeffs.contains("beta")) patch(coeffs["beta"]);
    }
  }
  return config;
}

RunOutcome run(const json& config, std::optional<std::string_view> experiment,
               const std::filesystem::path& out_dir) {
  const auto violations = validate(config, experiment);
  if (!violations.empty()) {
    return failure(2, "usage", "invalid configuration", out_dir, {{"violations", violations}});
  }
  const std::string exp =
      experiment ? std::string(*experiment) : config["experiment"].get<std::string>();

  try {
    const Config c = parse(config, exp);
    const Weight w(c.weight_s);
    std::filesystem::create_directories(out_dir);
    json artifacts = json::array();

    Result r;
    if (exp == "simulate") {
      r = run_simulate(c, w, out_dir, artifacts);
    } else if (exp == "eigen") {
      r = run_eigen(c, w);
    } else if (exp == "periodic") {
      r = run_periodic(c, w, out_dir, artifacts);
    } else if (exp == "density") {
      r = run_density(c, w, out_dir, artifacts);
    } else if (exp == "stability") {
      r = run_stability(c, w, out_dir, artifacts);
    } else if (exp == "dsw-check") {
      r = run_dsw(c, w);
    } else {
      r = run_hypotheses(c, w);
    }

    artifacts.push_back("summary.json");
    json summary = {{"experiment", exp},
                    {"config", resolved_json(c)},
                    {"resolved_generator", r.generator},
                    {"results", r.results},
                    {"pass", r.pass},
                    {"artifacts", artifacts}};
    write_text(out_dir / "summary.json", summary.dump(2) + "\n");
    return {0, summary};
  } catch (const InadmissiblePeriod& e) {
    return failure(3, "inadmissible_period", e.what(), out_dir,
                   {{"requested_period", e.requested_period()},
                    {"minimal_period", e.minimal_period()}});
  } catch (const CapacityError& e) {
    return failure(3, "capacity", e.what(), out_dir,
                   {{"needed_size", e.needed()}, {"available_size", e.available()}});
  } catch (const InvalidInput& e) {
    return failure(3, "invalid_input", e.what(), out_dir);
  }
}

}  // namespace iqtd::experiment
