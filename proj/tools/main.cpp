// abcpet command-line front end. Builds a JSON config from --config and the
// flags, then hands it to the library through the C API.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "abcpet/abcpet.h"

using Json = nlohmann::ordered_json;

namespace {

struct Options {
  std::optional<std::uint64_t> seed;
  std::string config_file;
  std::string out = "abcpet-out";
  std::optional<std::string> scale;
  std::optional<std::string> activation;
  std::optional<int> noise_level;
  std::optional<std::string> reference;

  std::optional<std::string> obs, cache, posterior, truth;
  std::optional<std::size_t> n, k, library_size, steps, chains, realisations, mcmc_steps;
  std::optional<std::string> summary, eps, box, library_file;
  std::vector<std::string> summaries, methods;
  std::vector<std::string> schedule;
  std::optional<double> variance_scale, step_fraction;
  bool nonneg = false;
  bool no_noise = false;
};

// A number, or "inf" for an unbounded tolerance.
Json tolerance(const std::string& flag, const std::string& text) {
  if (text == "inf" || text == "infinity") return "inf";
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError(flag + " must be a number or inf");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CLI::ValidationError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

template <class T>
void set(Json& j, std::initializer_list<const char*> keys, const std::optional<T>& v) {
  if (!v) return;
  Json* node = &j;
  for (const char* k : keys) node = &(*node)[k];
  *node = *v;
}

Json build_config(const Options& o, const std::string& command) {
  Json c = Json::object();
  if (!o.config_file.empty()) {
    try {
      c = Json::parse(slurp(o.config_file));
    } catch (const Json::exception& e) {
      throw CLI::ValidationError(std::string("--config: ") + e.what());
    }
  }
  set(c, {"seed"}, o.seed);
  set(c, {"scale"}, o.scale);
  set(c, {"scenario", "activation"}, o.activation);
  set(c, {"scenario", "noise_level"}, o.noise_level);
  set(c, {"reference", "file"}, o.reference);
  set(c, {"inputs", "obs"}, o.obs);
  set(c, {"inputs", "cache"}, o.cache);
  set(c, {"inputs", "posterior"}, o.posterior);
  set(c, {"inputs", "truth_tac"}, o.truth);
  set(c, {command == "narrow" ? "narrow" : "abc", "cache_size"}, o.n);
  set(c, {command == "narrow" ? "narrow" : "abc", "summary"}, o.summary);
  set(c, {"abc", "k"}, o.k);
  set(c, {"wls", "library_size"}, o.library_size);
  set(c, {"wls", "library_file"}, o.library_file);
  set(c, {"mcmc", "steps"}, o.steps);
  set(c, {"mcmc", "chains"}, o.chains);
  set(c, {"mcmc", "variance_scale"}, o.variance_scale);
  set(c, {"mcmc", "step_fraction"}, o.step_fraction);
  set(c, {"batch", "realisations"}, o.realisations);
  set(c, {"batch", "mcmc_steps"}, o.mcmc_steps);
  if (o.eps) c["abc"]["epsilon"] = tolerance("--eps", *o.eps);
  if (o.box) {
    if (*o.box == "reference" || *o.box == "priors") {
      c["box"] = *o.box;
    } else {
      try {
        c["box"] = Json::parse(slurp(*o.box));
      } catch (const Json::exception& e) {
        throw CLI::ValidationError(std::string("--box: ") + e.what());
      }
    }
  }
  if (!o.summaries.empty()) c["abc"]["summaries"] = o.summaries;
  if (!o.methods.empty()) c["batch"]["methods"] = o.methods;
  if (!o.schedule.empty()) {
    c["narrow"]["schedule"] = Json::array();
    for (const auto& e : o.schedule) c["narrow"]["schedule"].push_back(tolerance("--schedule", e));
  }
  if (o.nonneg) c["wls"]["nonneg"] = true;
  if (o.no_noise) c["ppc"]["noise"] = false;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cached rejection ABC for PET kinetic models"};
  app.set_version_flag("--version", std::string(abcpet_version()));
  app.require_subcommand(1);
  Options o;

  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--config", o.config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "Output directory")->capture_default_str();
  app.add_option("--scale", o.scale, "Default sizes")->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--activation", o.activation, "Scenario preset")
      ->check(CLI::IsMember({"100%", "200%", "100", "200"}));
  app.add_option("--noise-level", o.noise_level, "0 (none) or 1-4, highest to lowest noise")
      ->check(CLI::Range(0, 4));
  app.add_option("--reference", o.reference, "Reference-region curve file")
      ->check(CLI::ExistingFile);

  const auto obs = [&](CLI::App* sub) {
    sub->add_option("--obs", o.obs, "Observed TAC CSV")->check(CLI::ExistingFile);
  };
  const auto summary = [&](CLI::App* sub) {
    sub->add_option("--summary", o.summary, "S1, S2, S3 or S4");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Write clean and noisy scenario TACs");

  CLI::App* cache = app.add_subcommand("cache", "Build a simulation cache");
  cache->add_option("-n,--n", o.n, "Cache size");
  cache->add_option("--summaries", o.summaries, "Summaries stored with the cache");
  cache->add_option("--box", o.box, "reference, priors or a box JSON file");

  CLI::App* abc = app.add_subcommand("abc", "Rejection ABC on a cached simulation set");
  obs(abc);
  summary(abc);
  abc->add_option("--cache", o.cache, "Cache file")->check(CLI::ExistingFile);
  abc->add_option("-n,--n", o.n, "Cache size when building");
  abc->add_option("-k,--k", o.k, "Keep the k closest draws");
  abc->add_option("--eps", o.eps, "Tolerance (number or inf); overrides -k");
  abc->add_option("--box", o.box, "reference, priors or a box JSON file");

  CLI::App* wls = app.add_subcommand("wls", "Weighted least squares basis-function fit");
  obs(wls);
  wls->add_option("--library-size", o.library_size, "Number of basis timings");
  wls->add_option("--library-file", o.library_file, "Reuse or store the basis library here");
  wls->add_flag("--nonneg", o.nonneg, "Clamp negative estimates");

  CLI::App* mcmc = app.add_subcommand("mcmc", "Random-walk Metropolis baseline");
  obs(mcmc);
  mcmc->add_option("--steps", o.steps, "Chain length");
  mcmc->add_option("--chains", o.chains, "Independent chains");
  mcmc->add_option("--variance-scale", o.variance_scale, "Gaussian variance per unit activity");
  mcmc->add_option("--step-fraction", o.step_fraction, "Proposal SD as a fraction of box width");
  mcmc->add_option("--box", o.box, "reference, priors or a box JSON file");

  CLI::App* narrow = app.add_subcommand("narrow", "Sequential narrowing of the sampling box");
  obs(narrow);
  summary(narrow);
  narrow->add_option("--schedule", o.schedule, "Tolerances, largest first");
  narrow->add_option("-n,--n", o.n, "Cache size per step");

  CLI::App* ppc = app.add_subcommand("ppc", "Posterior predictive bands");
  obs(ppc);
  summary(ppc);
  ppc->add_option("--posterior", o.posterior, "Posterior JSONL")->check(CLI::ExistingFile);
  ppc->add_option("--truth", o.truth, "True TAC CSV for coverage")->check(CLI::ExistingFile);
  ppc->add_option("--cache", o.cache, "Cache file")->check(CLI::ExistingFile);
  ppc->add_option("-n,--n", o.n, "Cache size when building");
  ppc->add_option("-k,--k", o.k, "Keep the k closest draws");
  ppc->add_option("--eps", o.eps, "Tolerance (number or inf)");
  ppc->add_flag("--no-noise", o.no_noise, "Noise-free predictive draws");

  CLI::App* batch = app.add_subcommand("batch-compare", "ABC vs WLS (vs MCMC) over realisations");
  batch->add_option("--realisations", o.realisations, "Noise realisations");
  batch->add_option("--methods", o.methods, "ABC, WLS, MCMC");
  batch->add_option("--mcmc-steps", o.mcmc_steps, "Chain length per realisation");
  batch->add_option("--cache", o.cache, "Cache file")->check(CLI::ExistingFile);
  batch->add_option("-n,--n", o.n, "Cache size when building");
  batch->add_option("-k,--k", o.k, "Keep the k closest draws");
  batch->add_option("--box", o.box, "reference, priors or a box JSON file");
  (void)simulate;

  std::string config_text;
  std::string command;
  try {
    app.parse(argc, argv);
    command = app.get_subcommands().front()->get_name();
    config_text = build_config(o, command).dump();
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const abcpet_status st = abcpet_run_command(command.c_str(), config_text.c_str(), o.out.c_str());
  if (st != ABCPET_OK) {
    std::fprintf(stderr, "abcpet %s: %s: %s\n", command.c_str(), abcpet_status_name(st),
                 abcpet_last_error_message());
    return abcpet_exit_code(st);
  }
  std::printf("%s: wrote %s\n", command.c_str(), o.out.c_str());
  return 0;
}
