#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "iqtd/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace iqtd::experiment;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("iqtd_test_experiment_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

json base_config() {
  return json{{"model", "iqtd"},
              {"coefficients", {{"constant", 0.35}}},
              {"bounds", {0.3, 0.4}},
              {"weight_s", 0.5},
              {"trunc_n", 40},
              {"tolerance", 1e-10}};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("validate") {
  json c = base_config();
  CHECK(validate(c, "hypotheses").empty());

  json bad_s = c;
  bad_s["weight_s"] = 1.5;
  const auto v1 = validate(bad_s, "hypotheses");
  REQUIRE(v1.size() == 1);
  CHECK(mentions(v1, "weight_s"));

  json no_seed = c;
  no_seed["coefficients"] = {{"uniform", {{"lo", 0.3}, {"hi", 0.4}}}};
  const auto v2 = validate(no_seed, "hypotheses");
  REQUIRE(v2.size() == 1);
  CHECK(mentions(v2, "seed"));

  json unknown = c;
  unknown["trunc"] = 3;
  CHECK(mentions(validate(unknown, "hypotheses"), "trunc: unknown key"));

  CHECK(mentions(validate(c), "experiment"));
  json named = c;
  named["experiment"] = "eigen";
  CHECK(mentions(validate(named, "simulate"), "subcommand"));

  json outside = c;
  outside["coefficients"] = {{"list", {0.35, 0.45}}};
  CHECK(mentions(validate(outside, "hypotheses"), "outside bounds"));

  CHECK(mentions(validate(c, "simulate"), "horizon"));
  CHECK(mentions(validate(c, "density"), "thresholds"));
  CHECK(validate(json::array(), "eigen").size() == 1);
}

TEST_CASE("with_seed rewrites every uniform source") {
  json c = base_config();
  c["coefficients"] = {{"uniform", {{"lo", 0.3}, {"hi", 0.4}, {"seed", 1}}}};
  CHECK(with_seed(c, 9)["coefficients"]["uniform"]["seed"] == 9);
  json d = {{"model", "death"},
            {"coefficients",
             {{"alpha", {{"uniform", {{"lo", 0.5}, {"hi", 1.0}, {"seed", 1}}}}},
              {"beta", {{"constant", 2.0}}}}}};
  const json e = with_seed(d, 4);
  CHECK(e["coefficients"]["alpha"]["uniform"]["seed"] == 4);
  CHECK(e["coefficients"]["beta"] == d["coefficients"]["beta"]);
}

TEST_CASE("format_number") {
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_number(M_PI)) == M_PI);
}

TEST_CASE("hypotheses run") {
  const fs::path dir = scratch("hyp");
  const RunOutcome out = run(base_config(), "hypotheses", dir);
  REQUIRE(out.exit_code == 0);
  CHECK(out.document["pass"] == true);
  CHECK(out.document["results"]["epsilon_max"].get<double>() == doctest::Approx(0.2));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(json::parse(slurp(dir / "summary.json")) == out.document);
  CHECK(out.document["config"]["display_count"] == 10);

  json bad = base_config();
  bad["weight_s"] = 0.8;
  const RunOutcome fail = run(bad, "hypotheses", scratch("hyp_fail"));
  CHECK(fail.exit_code == 0);
  CHECK(fail.document["pass"] == false);
}

TEST_CASE("simulate trajectory matches the closed form") {
  json c = base_config();
  c["coefficients"] = {{"list", std::vector<double>(40, 0.3)}};
  c["u0"] = {1.0};
  c["horizon"] = 1.0;
  c["dt"] = 0.25;
  const fs::path dir = scratch("sim");
  const RunOutcome out = run(c, "simulate", dir);
  REQUIRE(out.exit_code == 0);
  CHECK(out.document["pass"] == true);

  std::istringstream csv(slurp(dir / "trajectory.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line.rfind("t,norm_s,v1,v2", 0) == 0);
  int rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string t, norm, v1;
    std::getline(row, t, ',');
    std::getline(row, norm, ',');
    std::getline(row, v1, ',');
    CHECK(std::abs(std::stod(v1) - std::exp(-0.3 * std::stod(t))) < 1e-9);
    CHECK(std::stod(norm) == doctest::Approx(0.5 * std::exp(-0.3 * std::stod(t))));
    ++rows;
  }
  CHECK(rows == 5);
}

TEST_CASE("runs are deterministic") {
  json c = base_config();
  c["coefficients"] = {{"uniform", {{"lo", 0.3}, {"hi", 0.4}, {"seed", 77}}}};
  c["u0"] = {1.0, json{{"re", 0.5}, {"im", -1.0}}, 2.0};
  c["horizon"] = 5.0;
  c["dt"] = 0.5;
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  REQUIRE(run(c, "simulate", a).exit_code == 0);
  REQUIRE(run(c, "simulate", b).exit_code == 0);
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));

  const fs::path other = scratch("det_c");
  REQUIRE(run(with_seed(c, 78), "simulate", other).exit_code == 0);
  CHECK(slurp(a / "trajectory.csv") != slurp(other / "trajectory.csv"));
}

TEST_CASE("errors are reported as documents") {
  json c = base_config();
  c["period"] = 10.0;
  const fs::path dir = scratch("periodic_bad");
  const RunOutcome out = run(c, "periodic", dir);
  CHECK(out.exit_code == 3);
  CHECK(out.document["error"]["kind"] == "inadmissible_period");
  CHECK(out.document["error"]["minimal_period"].get<double>() ==
        doctest::Approx(31.41592653589793));
  CHECK(json::parse(slurp(dir / "error.json")) == out.document);

  json bad = base_config();
  bad["weight_s"] = 2.0;
  const RunOutcome usage = run(bad, "eigen", scratch("usage"));
  CHECK(usage.exit_code == 2);
  CHECK(usage.document["error"]["kind"] == "usage");

  json small = base_config();
  small["coefficients"] = {{"list", std::vector<double>(40, 0.35)}};
  small["period"] = 50.0;
  const RunOutcome cap = run(small, "periodic", scratch("capacity"));
  CHECK(cap.exit_code == 3);
  CHECK(cap.document["error"]["kind"] == "capacity");
  CHECK(cap.document["error"]["available_size"] == 40);
}

TEST_CASE("periodic, eigen and dsw runs") {
  json c = base_config();
  c["period"] = 50.0;
  c["trunc_n"] = 20;
  const RunOutcome p = run(c, "periodic", scratch("periodic"));
  REQUIRE(p.exit_code == 0);
  CHECK(p.document["pass"] == true);
  CHECK(p.document["results"]["periodicity_residual"].get<double>() < 1e-6);
  CHECK(p.document["config"]["dt"].get<double>() == doctest::Approx(1.0));

  json e = base_config();
  e["mus"] = {0.1, json{{"re", 0.0}, {"im", 0.15}}};
  const RunOutcome eig = run(e, "eigen", scratch("eigen"));
  REQUIRE(eig.exit_code == 0);
  CHECK(eig.document["pass"] == true);
  CHECK(eig.document["results"]["eigenfields"].size() == 2);

  const RunOutcome dsw = run(base_config(), "dsw-check", scratch("dsw"));
  REQUIRE(dsw.exit_code == 0);
  CHECK(dsw.document["pass"] == true);
  CHECK(dsw.document["results"]["grid"].size() == 8);
}

TEST_CASE("stability and density runs") {
  json s = base_config();
  s["coefficients"] = {{"uniform", {{"lo", 0.3}, {"hi", 0.4}, {"seed", 5}}}};
  s["trunc_n"] = 20;
  s["mus"] = {-0.1};
  s["window"] = {5.0, 30.0};
  const RunOutcome st = run(s, "stability", scratch("stability"));
  REQUIRE(st.exit_code == 0);
  CHECK(st.document["pass"] == true);
  CHECK(st.document["results"]["fitted_rate"].get<double>() == doctest::Approx(-0.1).epsilon(1e-6));

  json d = base_config();
  d["trunc_n"] = 300;
  d["mus"] = {json{{"re", 0.05}, {"im", 0.1}}};
  d["real_part"] = true;
  d["horizon"] = 100.0;
  d["dt"] = 0.5;
  d["thresholds"] = {0.1, 0.01};
  const RunOutcome den = run(d, "density", scratch("density"));
  REQUIRE(den.exit_code == 0);
  CHECK(den.document["results"]["density_far"].get<double>() >= 0.95);
}
