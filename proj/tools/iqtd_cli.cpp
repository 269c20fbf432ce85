// Command-line front end: one subcommand per experiment.
//
//   iqtd <experiment> --config cfg.json --out results/ [--seed N]
//   iqtd validate --config cfg.json

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "iqtd/experiment.hpp"

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Options& opt, bool with_out) {
  sub->add_option("--config", opt.config, "experiment config (JSON)")->required();
  if (with_out) sub->add_option("--out", opt.out, "output directory")->capture_default_str();
  sub->add_option("--seed", opt.seed, "override the seed of random coefficients");
}

int usage_error(const std::string& message) {
  nlohmann::json err = {{"error", {{"kind", "usage"}, {"message", message}}}};
  std::cerr << err.dump(2) << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear dynamics laboratory for the infinite quick-thinking-driver model"};
  app.require_subcommand(1);

  Options opt;
  for (std::string_view name : iqtd::experiment::kExperiments) {
    add_common(app.add_subcommand(std::string(name), "run the " + std::string(name) + " experiment"),
               opt, true);
  }
  add_common(app.add_subcommand("validate", "check a config without running it"), opt, false);

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  nlohmann::json config;
  {
    std::ifstream in(opt.config);
    if (!in) return usage_error("cannot open config " + opt.config);
    try {
      config = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      return usage_error(std::string("config is not valid JSON: ") + e.what());
    }
  }
  if (opt.seed) config = iqtd::experiment::with_seed(std::move(config), *opt.seed);

  if (command == "validate") {
    const auto violations = iqtd::experiment::validate(config);
    nlohmann::json report = {{"valid", violations.empty()}, {"violations", violations}};
    std::cout << report.dump(2) << '\n';
    return violations.empty() ? 0 : 2;
  }

  const auto outcome = iqtd::experiment::run(config, command, opt.out);
  if (outcome.exit_code == 0) {
    std::cout << outcome.document["results"].dump(2) << '\n'
              << "pass: " << (outcome.document["pass"].get<bool>() ? "true" : "false") << '\n';
  } else {
    std::cerr << outcome.document.dump(2) << '\n';
  }
  return outcome.exit_code;
}
