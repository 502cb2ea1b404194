#include "abcpet/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <system_error>

#include <Eigen/Core>

#include "abcpet/io.hpp"
#include "abcpet/parallel.hpp"
#include "abcpet/rng.hpp"

namespace abcpet {

namespace fs = std::filesystem;

namespace {


// Config access with InvalidArgument instead of json exceptions.
template <class T>
T cfg(const Json& root, std::initializer_list<const char*> keys) {
  std::string where;
  const Json* node = &root;
  try {
    for (const char* k : keys) {
      where += where.empty() ? k : std::string(".") + k;
      node = &node->at(k);
    }
    return node->get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::InvalidArgument, "config " + where + ": " + e.what());
  }
}

const Json* cfg_optional(const Json& root, std::initializer_list<const char*> keys) {
  const Json* node = &root;
  for (const char* k : keys) {
    if (!node->is_object() || !node->contains(k)) return nullptr;
    node = &(*node)[k];
  }
  return node->is_null() ? nullptr : node;
}

std::optional<std::string> cfg_path(const Json& root, std::initializer_list<const char*> keys) {
  const Json* node = cfg_optional(root, keys);
  if (!node) return std::nullopt;
  if (!node->is_string()) fail(ErrorCode::InvalidArgument, "config path entries must be strings");
  return node->get<std::string>();
}

class Artifacts {
 public:
  Artifacts(std::string command, Json resolved, fs::path dir)
      : command_(std::move(command)), resolved_(std::move(resolved)), dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(ErrorCode::IOError, "cannot create output directory " + dir_.string());
  }

  fs::path path(const std::string& name) {
    names_.push_back(name);
    return dir_ / name;
  }
  void text(const std::string& name, const std::string& content) {
    write_text_file(path(name), content);
  }
  void json(const std::string& name, const Json& j) { text(name, j.dump(2) + "\n"); }

  std::vector<std::string> finish() {
    Json m = Json::object();
    m["command"] = command_;
    m["config"] = resolved_;
    m["config_hash"] = hex64(fnv1a64(resolved_.dump()));
    m["seed"] = resolved_.at("seed");
    m["versions"] = {{"abcpet", std::string(kVersion)},
                     {"cache_format", kCacheFormatVersion},
                     {"library_format", kLibraryFormatVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)}};
    m["outputs"] = names_;
    write_text_file(dir_ / "manifest.json", m.dump(2) + "\n");
    std::vector<std::string> out = names_;
    out.push_back("manifest.json");
    return out;
  }

 private:
  std::string command_;
  Json resolved_;
  fs::path dir_;
  std::vector<std::string> names_;
};

InputCurve make_reference(const Json& c) {
  if (auto file = cfg_path(c, {"reference", "file"})) return reference_input_from_file(*file);
  ReferenceShape s;
  s.amplitude = cfg<double>(c, {"reference", "amplitude"});
  s.power = cfg<double>(c, {"reference", "power"});
  s.fast_rate = cfg<double>(c, {"reference", "fast_rate"});
  s.slow_weight = cfg<double>(c, {"reference", "slow_weight"});
  s.slow_rate = cfg<double>(c, {"reference", "slow_rate"});
  return reference_input(s);
}

UniformBox priors_of(const Json& c) {
  const Json* p = cfg_optional(c, {"priors"});
  if (!p) fail(ErrorCode::InvalidArgument, "config priors missing");
  try {
    return box_from_json(*p);
  } catch (const Error& e) {
    fail(ErrorCode::InvalidArgument, std::string("config priors: ") + e.what());
  }
}

// "reference", "priors" or an explicit box object.
UniformBox sampling_box(const Json& c) {
  const Json* b = cfg_optional(c, {"box"});
  if (!b || (b->is_string() && b->get<std::string>() == "reference"))
    return narrowed_reference_box();
  if (b->is_string() && b->get<std::string>() == "priors") return priors_of(c);
  if (b->is_object()) {
    try {
      return box_from_json(*b);
    } catch (const Error& e) {
      fail(ErrorCode::InvalidArgument, std::string("config box: ") + e.what());
    }
  }
  fail(ErrorCode::InvalidArgument, "config box must be \"reference\", \"priors\" or a box object");
}

Tac observed_tac(const Json& c, const Scenario& sc) {
  if (auto file = cfg_path(c, {"inputs", "obs"})) return read_tac_csv(*file, sc.grid->sub_step());
  return sc.noisy(0);
}

std::optional<Tac> truth_tac(const Json& c, const Scenario& sc) {
  if (auto file = cfg_path(c, {"inputs", "truth_tac"})) return read_tac_csv(*file, sc.grid->sub_step());
  if (cfg_optional(c, {"inputs", "obs"})) return std::nullopt;
  return sc.clean();
}

double s3_hint(const Json& c, const Scenario& sc) {
  if (const Json* h = cfg_optional(c, {"abc", "s3_scale_hint"})) return h->get<double>();
  return sc.noise.noiseless() ? 1.0 : sc.noise.scale;
}

std::vector<SummaryKind> cache_kinds(const Json& c) {
  std::vector<SummaryKind> kinds;
  for (const auto& k : cfg<std::vector<std::string>>(c, {"abc", "summaries"}))
    kinds.push_back(parse_summary_kind(k));
  kinds.push_back(parse_summary_kind(cfg<std::string>(c, {"abc", "summary"})));
  return kinds;
}

SimCache obtain_cache(const Json& c, const Scenario& sc, const GridPtr& grid) {
  if (auto file = cfg_path(c, {"inputs", "cache"})) {
    SimCache cache = load_cache(*file);
    if (cache.provenance().reference_id != sc.reference.id())
      fail(ErrorCode::FormatError, "cache was built for reference " +
                                       cache.provenance().reference_id + ", not " +
                                       sc.reference.id());
    if (!cache.grid().same_frames(*grid))
      fail(ErrorCode::GridMismatch, "cache frames differ from the observed TAC");
    return cache;
  }
  return build_cache(cfg<std::size_t>(c, {"abc", "cache_size"}), sampling_box(c), sc.reference,
                     grid, cache_kinds(c), stream_seed(sc.seed, Stream::Cache));
}

struct AbcSetup {
  SummaryKind kind;
  ObservedSummary observed;
};

AbcSetup observe(const Json& c, const Scenario& sc, const Tac& obs) {
  const SummaryKind kind = parse_summary_kind(cfg<std::string>(c, {"abc", "summary"}));
  SummaryContext ctx = SummaryContext::for_grid(obs.grid_ptr(), sc.reference);
  ctx.s3_scale_hint = s3_hint(c, sc);
  return {kind, ObservedSummary::from_tac(obs, kind, ctx)};
}

PosteriorSet estimate(const Json& c, const SimCache& cache, const ObservedSummary& obs) {
  if (const Json* e = cfg_optional(c, {"abc", "epsilon"})) return abc_reject(cache, obs, tolerance_from_json(*e));
  return abc_best_k(cache, obs, cfg<std::size_t>(c, {"abc", "k"}));
}

Json posterior_summary(const PosteriorSet& post) {
  Json j = Json::object();
  j["kind"] = std::string(to_string(post.kind));
  j["epsilon"] = tolerance_to_json(post.epsilon);
  j["accepted"] = post.samples.size();
  if (!post.empty()) j["mean"] = params_to_json(LpNtPetParams::from_array(post.mean()));
  if (!post.warning.empty()) j["warning"] = post.warning;
  return j;
}

std::vector<ResponseTiming> timing_library(const Json& c, const Scenario& sc) {
  return sample_timing_library(cfg<std::size_t>(c, {"wls", "library_size"}), priors_of(c),
                               stream_seed(sc.seed, Stream::Library));
}

StepSizes mcmc_steps(const Json& c, const UniformBox& box) {
  const double frac = cfg<double>(c, {"mcmc", "step_fraction"});
  if (!(frac >= 0.0)) fail(ErrorCode::InvalidArgument, "config mcmc.step_fraction must be >= 0");
  StepSizes s = default_step_sizes(box);
  for (double& v : s) v *= frac / 0.05;
  return s;
}

LpNtPetParams mcmc_init(const Json& c, const Scenario& sc) {
  const Json* init = cfg_optional(c, {"mcmc", "init"});
  if (!init || (init->is_string() && init->get<std::string>() == "truth")) return sc.truth;
  if (init->is_object()) return params_from_json(*init);
  fail(ErrorCode::InvalidArgument, "config mcmc.init must be \"truth\" or a parameter object");
}

std::string method_name(std::string m) {
  std::transform(m.begin(), m.end(), m.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  if (m != "ABC" && m != "WLS" && m != "MCMC")
    fail(ErrorCode::InvalidArgument, "unknown batch method '" + m + "'");
  return m;
}

// Recursive overlay; unlike merge_patch a null value is kept, so a resolved
// config resolves to itself.
void overlay(Json& base, const Json& user) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
      overlay(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

}  // namespace

Json default_config(std::string_view scale) {
  const bool paper = scale == "paper";
  if (!paper && scale != "desk")
    fail(ErrorCode::InvalidArgument, "scale must be desk or paper");
  const ReferenceShape shape;
  Json c = Json::object();
  c["scale"] = std::string(scale);
  c["seed"] = 1;
  c["scenario"] = {{"activation", "200%"}, {"noise_level", 3},  {"n_frames", 60},
                   {"frame_minutes", 1.0}, {"sub_step", 0.1},   {"truth", nullptr}};
  c["noise_scales"] = NoiseConfig{}.scales;
  c["reference"] = {{"file", nullptr},
                    {"amplitude", shape.amplitude},
                    {"power", shape.power},
                    {"fast_rate", shape.fast_rate},
                    {"slow_weight", shape.slow_weight},
                    {"slow_rate", shape.slow_rate}};
  c["priors"] = box_to_json(default_priors());
  c["box"] = "reference";
  c["inputs"] = {{"obs", nullptr}, {"truth_tac", nullptr}, {"cache", nullptr},
                 {"posterior", nullptr}};
  c["abc"] = {{"cache_size", paper ? 1000000 : 100000},
              {"summaries", Json::array({"S1"})},
              {"summary", "S1"},
              {"k", paper ? 1000 : 500},
              {"epsilon", nullptr},
              {"s3_scale_hint", nullptr}};
  c["wls"] = {{"library_size", paper ? 100000 : 3000}, {"nonneg", false}, {"library_file", nullptr}};
  c["mcmc"] = {{"steps", 100000}, {"variance_scale", 1.0}, {"step_fraction", 0.05},
               {"chains", 1},     {"init", "truth"}};
  c["narrow"] = {{"schedule", Json::array({200.0, 50.0, 10.0})},
                 {"cache_size", paper ? 1000000 : 100000},
                 {"summary", "S1"}};
  c["ppc"] = {{"noise", true}};
  c["batch"] = {{"realisations", paper ? 100 : 20},
                {"methods", Json::array({"ABC", "WLS"})},
                {"mcmc_steps", 10000}};
  return c;
}

Json resolve_config(const Json& user) {
  if (!user.is_null() && !user.is_object())
    fail(ErrorCode::InvalidArgument, "config must be a JSON object");
  std::string scale = "desk";
  if (user.is_object() && user.contains("scale")) {
    if (!user["scale"].is_string()) fail(ErrorCode::InvalidArgument, "scale must be a string");
    scale = user["scale"].get<std::string>();
  }
  Json c = default_config(scale);
  if (user.is_object()) overlay(c, user);
  return c;
}

LpNtPetParams activation_preset(std::string_view activation) {
  LpNtPetParams p{1.0, 0.2, 0.05, 0.05, {20.0, 25.0, 2.0}};
  if (activation == "100%" || activation == "100") return p;
  if (activation == "200%" || activation == "200") {
    p.gamma = 0.1;
    return p;
  }
  fail(ErrorCode::InvalidArgument, "activation must be 100% or 200%");
}

Tac Scenario::clean() const { return lp_ntpet_forward(truth, reference, grid); }

Tac Scenario::noisy(std::size_t realisation) const {
  const Tac c = clean();
  if (noise.noiseless()) return c;
  return apply_poisson(c, noise, derive_seed(stream_seed(seed, Stream::Noise), realisation));
}

Scenario make_scenario(const Json& c) {
  GridPtr grid = make_grid(TimeGrid::uniform(cfg<std::size_t>(c, {"scenario", "n_frames"}),
                                             cfg<double>(c, {"scenario", "frame_minutes"}),
                                             cfg<double>(c, {"scenario", "sub_step"})));
  LpNtPetParams truth = activation_preset(cfg<std::string>(c, {"scenario", "activation"}));
  if (const Json* t = cfg_optional(c, {"scenario", "truth"})) {
    Json merged = params_to_json(truth);
    merged.merge_patch(*t);
    truth = params_from_json(merged);
  }
  truth.validate();
  NoiseConfig nc;
  nc.scales = cfg<std::array<double, 4>>(c, {"noise_scales"});
  nc.validate();
  const NoiseLevel level = nc.level(cfg<int>(c, {"scenario", "noise_level"}));
  return Scenario{std::move(grid), make_reference(c), truth, nc, level,
                  cfg<std::uint64_t>(c, {"seed"})};
}

std::vector<std::string> cmd_simulate(const Json& user, const fs::path& out) {
  const Json c = resolve_config(user);
  const Scenario sc = make_scenario(c);
  Artifacts a("simulate", c, out);
  a.text("clean.csv", tac_csv(sc.clean()));
  a.text("noisy.csv", tac_csv(sc.noisy(0)));
  a.json("truth.json", Json{{"truth", params_to_json(sc.truth)},
                            {"noise_level", sc.noise.level},
                            {"reference_id", sc.reference.id()},
                            {"grid_id", sc.grid->id()}});
  return a.finish();
}

std::vector<std::string> cmd_cache(const Json& user, const fs::path& out) {
  const Json c = resolve_config(user);
  const Scenario sc = make_scenario(c);
  const SimCache cache = build_cache(cfg<std::size_t>(c, {"abc", "cache_size"}), sampling_box(c),
                                     sc.reference, sc.grid, cache_kinds(c),
                                     stream_seed(sc.seed, Stream::Cache));
  Artifacts a("cache", c, out);
  save_cache(cache, a.path("cache.bin"));
  return a.finish();
}

std::vector<std::string> cmd_abc(const Json& user, const fs::path& out) {
  const Json c = resolve_config(user);
  const Scenario sc = make_scenario(c);
  const Tac obs = observed_tac(c, sc);
  const SimCache cache = obtain_cache(c, sc, obs.grid_ptr());
  const AbcSetup setup = observe(c, sc, obs);
  const PosteriorSet post = estimate(c, cache, setup.observed);
  Artifacts a("abc", c, out);
  a.text("posterior.jsonl", posterior_jsonl(post));
  a.json("abc.json", posterior_summary(post));
  return a.finish();
}

std::vector<std::string> cmd_wls(const Json& user, const fs::path& out) {
  const Json c = resolve_config(user);
  const Scenario sc = make_scenario(c);
  const Tac obs = observed_tac(c, sc);
  const LibraryKey key{sc.reference.id(), hex64(fnv1a64(tac_csv(obs))),
                       stream_seed(sc.seed, Stream::Library),
                       cfg<std::size_t>(c, {"wls", "library_size"})};
  const ReferenceColumns ref(sc.reference, obs.grid_ptr());
  std::optional<BasisLibrary> lib;
  const auto lib_file = cfg_path(c, {"wls", "library_file"});
  if (lib_file && fs::exists(*lib_file)) lib = load_basis_library(*lib_file, key);
  if (!lib) lib = build_basis_library(ref, obs, timing_library(c, sc));
  const WlsFit fit = wls_fit_grid(obs, *lib, cfg<bool>(c, {"wls", "nonneg"}));
  Artifacts a("wls", c, out);
  a.json("wls.json", wls_fit_to_json(fit));
  save_basis_library(*lib, key, a.path("library.bin"));
  if (lib_file && !fs::exists(*lib_file)) save_basis_library(*lib, key, *lib_file);
  return a.finish();
}

std::vector<std::string> cmd_mcmc(const Json& user, const fs::path& out) {
  const Json c = resolve_config(user);
  const Scenario sc = make_scenario(c);
  const Tac obs = observed_tac(c, sc);
  const UniformBox box = sampling_box(c);
  const GaussianErrorModel em{cfg<double>(c, {"mcmc", "variance_scale"})};
  const auto chains = rw_metropolis_chains(
      obs, sc.reference, em, box, mcmc_init(c, sc), cfg<std::size_t>(c, {"mcmc", "steps"}),
      mcmc_steps(c, box), cfg<std::size_t>(c, {"mcmc", "chains"}),
      stream_seed(sc.seed, Stream::Mcmc));
  Artifacts a("mcmc", c, out);
  Json traces = Json::array();
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const std::string name =
        chains.size() == 1 ? "chain.jsonl" : "chain_" + std::to_string(i) + ".jsonl";
    a.text(name, chain_jsonl(chains[i]));
    traces.push_back(chain_trace(chains[i]));
  }
  a.json("trace.json", Json{{"chains", traces}});
  return a.finish();
}

std::vector<std::string> cmd_narrow(const Json& user, const fs::path& out) {
  const Json c = resolve_config(user);
  const Scenario sc = make_scenario(c);
  const Tac obs = observed_tac(c, sc);
  const Json sched = cfg<Json>(c, {"narrow", "schedule"});
  if (!sched.is_array() || sched.empty())
    fail(ErrorCode::InvalidArgument, "config narrow.schedule must be a non-empty array");
  std::vector<double> schedule;
  for (const Json& e : sched) schedule.push_back(tolerance_from_json(e));
  const SummaryKind kind = parse_summary_kind(cfg<std::string>(c, {"narrow", "summary"}));
  const auto steps = narrow_schedule(obs, kind, priors_of(c), schedule,
                                     cfg<std::size_t>(c, {"narrow", "cache_size"}),
                                     sc.reference, stream_seed(sc.seed, Stream::Cache),
                                     s3_hint(c, sc));
  Artifacts a("narrow", c, out);
  Json j = narrowing_to_json(steps);
  j["schedule"] = sched;
  j["summary"] = std::string(to_string(kind));
  a.json("narrowing.json", j);
  auto names = a.finish();
  if (!steps.empty() && steps.back().accepted == 0)
    fail(ErrorCode::EmptyPosterior, "no draws accepted at epsilon = " +
                                        format_double(steps.back().epsilon) +
                                        "; partial schedule written");
  return names;
}

std::vector<std::string> cmd_ppc(const Json& user, const fs::path& out) {
  const Json c = resolve_config(user);
  const Scenario sc = make_scenario(c);
  const Tac obs = observed_tac(c, sc);
  std::vector<LpNtPetParams> thetas;
  if (auto file = cfg_path(c, {"inputs", "posterior"})) {
    for (const auto& s : parse_posterior_jsonl(read_text_file(*file))) thetas.push_back(s.theta);
  } else {
    const SimCache cache = obtain_cache(c, sc, obs.grid_ptr());
    const PosteriorSet post = estimate(c, cache, observe(c, sc, obs).observed);
    for (const auto& s : post.samples) thetas.push_back(s.theta);
  }
  std::optional<NoiseLevel> noise;
  if (cfg<bool>(c, {"ppc", "noise"}) && !sc.noise.noiseless()) noise = sc.noise;
  const PredictiveBands bands = predictive_bands(thetas, sc.reference, obs.grid_ptr(), noise,
                                                 stream_seed(sc.seed, Stream::Predictive));
  Json summary = Json::object();
  summary["n_draws"] = bands.n_draws;
  summary["posterior_size"] = thetas.size();
  summary["noise_level"] = noise ? noise->level : 0;
  if (auto truth = truth_tac(c, sc)) summary["coverage"] = coverage(bands, *truth);
  Artifacts a("ppc", c, out);
  a.text("bands.csv", bands_csv(bands));
  a.json("ppc.json", summary);
  return a.finish();
}

std::vector<std::string> cmd_batch_compare(const Json& user, const fs::path& out) {
  const Json c = resolve_config(user);
  const Scenario sc = make_scenario(c);
  const auto n_real = cfg<std::size_t>(c, {"batch", "realisations"});
  if (n_real < 2) fail(ErrorCode::InvalidArgument, "batch.realisations must be >= 2");
  std::vector<std::string> methods;
  for (const auto& m : cfg<std::vector<std::string>>(c, {"batch", "methods"}))
    methods.push_back(method_name(m));
  if (methods.empty()) fail(ErrorCode::InvalidArgument, "batch.methods is empty");
  const auto has = [&](const char* m) {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
  };

  const Tac clean = sc.clean();
  std::optional<SimCache> cache;
  if (has("ABC")) cache = obtain_cache(c, sc, sc.grid);
  std::vector<ResponseTiming> timings;
  std::optional<ReferenceColumns> ref;
  if (has("WLS")) {
    timings = timing_library(c, sc);
    ref.emplace(sc.reference, sc.grid);
  }
  const UniformBox box = sampling_box(c);
  const GaussianErrorModel em{cfg<double>(c, {"mcmc", "variance_scale"})};
  const auto mcmc_len = cfg<std::size_t>(c, {"batch", "mcmc_steps"});
  const StepSizes steps = mcmc_steps(c, box);
  const LpNtPetParams init = mcmc_init(c, sc);
  const bool nonneg = cfg<bool>(c, {"wls", "nonneg"});

  using Estimate = std::optional<std::array<double, LpNtPetParams::kSize>>;
  struct Cell {
    Estimate value;
    std::string flag;
  };
  // cells[m][r]
  std::vector<std::vector<Cell>> cells(methods.size(), std::vector<Cell>(n_real));
  parallel_for(n_real, [&](std::size_t r) {
    const Tac noisy = sc.noise.noiseless()
                          ? clean
                          : apply_poisson(clean, sc.noise,
                                          derive_seed(stream_seed(sc.seed, Stream::Noise), r));
    for (std::size_t m = 0; m < methods.size(); ++m) {
      Cell& cell = cells[m][r];
      try {
        if (methods[m] == "ABC") {
          const PosteriorSet post = estimate(c, *cache, observe(c, sc, noisy).observed);
          if (post.empty()) fail(ErrorCode::EmptyPosterior, "empty posterior");
          cell.value = post.mean();
        } else if (methods[m] == "WLS") {
          const BasisLibrary lib = build_basis_library(*ref, noisy, timings);
          cell.value = wls_fit_grid(noisy, lib, nonneg).params().to_array();
        } else {
          const McmcChain chain =
              rw_metropolis(noisy, sc.reference, em, box, init, mcmc_len, steps,
                            derive_seed(stream_seed(sc.seed, Stream::Mcmc), r));
          cell.value = chain.mean();
        }
      } catch (const Error& e) {
        cell.flag = std::string(to_string(e.code()));
      }
    }
  });

  const auto truth = sc.truth.to_array();
  std::string csv = "kind,method,parameter,realisation,value,flag\n";
  for (std::size_t j = 0; j < truth.size(); ++j)
    csv += "truth,," + std::string(LpNtPetParams::kNames[j]) + ",," + format_double(truth[j]) + ",\n";
  for (std::size_t m = 0; m < methods.size(); ++m)
    for (std::size_t r = 0; r < n_real; ++r)
      for (std::size_t j = 0; j < truth.size(); ++j) {
        const Cell& cell = cells[m][r];
        csv += "estimate," + methods[m] + "," + std::string(LpNtPetParams::kNames[j]) + "," +
               std::to_string(r) + "," + (cell.value ? format_double((*cell.value)[j]) : "") +
               "," + cell.flag + "\n";
      }
  for (std::size_t m = 0; m < methods.size(); ++m)
    for (std::size_t j = 0; j < truth.size(); ++j) {
      std::vector<double> v;
      for (const Cell& cell : cells[m])
        if (cell.value) v.push_back((*cell.value)[j]);
      const std::string prefix = "," + methods[m] + "," + std::string(LpNtPetParams::kNames[j]) + ",,";
      std::string flag;
      if (v.size() < n_real) flag = "partial:" + std::to_string(v.size()) + "/" + std::to_string(n_real);
      if (v.empty()) {
        for (const char* kind : {"mean", "bias", "variance"}) csv += kind + prefix + "," + flag + "\n";
        continue;
      }
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      const std::string var_text =
          v.size() > 1 ? format_double(var / static_cast<double>(v.size() - 1)) : "";
      csv += "mean" + prefix + format_double(mean) + "," + flag + "\n";
      csv += "bias" + prefix + format_double(mean - truth[j]) + "," + flag + "\n";
      csv += "variance" + prefix + var_text + "," + flag + "\n";
    }

  Artifacts a("batch-compare", c, out);
  a.text("report.csv", csv);
  return a.finish();
}

std::vector<std::string> run_command(std::string_view command, const Json& user,
                                     const fs::path& out) {
  if (command == "simulate") return cmd_simulate(user, out);
  if (command == "cache") return cmd_cache(user, out);
  if (command == "abc") return cmd_abc(user, out);
  if (command == "wls") return cmd_wls(user, out);
  if (command == "mcmc") return cmd_mcmc(user, out);
  if (command == "narrow") return cmd_narrow(user, out);
  if (command == "ppc") return cmd_ppc(user, out);
  if (command == "batch-compare") return cmd_batch_compare(user, out);
  fail(ErrorCode::InvalidArgument, "unknown command '" + std::string(command) + "'");
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return 0;
    case ErrorCode::InvalidArgument: return 2;
    case ErrorCode::FormatError:
    case ErrorCode::IOError:
    case ErrorCode::NegativeActivity:
    case ErrorCode::KindMismatch:
    case ErrorCode::MissingContext:
    case ErrorCode::GridMismatch: return 3;
    case ErrorCode::SingularStep:
    case ErrorCode::DegenerateFit:
    case ErrorCode::RankDeficient:
    case ErrorCode::NoValidFit:
    case ErrorCode::EmptyPosterior: return 4;
  }
  return 4;
}

}  // namespace abcpet
