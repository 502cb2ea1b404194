#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "abcpet/commands.hpp"
#include "abcpet/error.hpp"
#include "abcpet/io.hpp"
#include "abcpet/priors.hpp"
#include "abcpet/serialize.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace abcpet;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Ok;
}

// Runs the CLI binary and returns its exit status.
int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(ABCPET_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

Json read_json(const fs::path& p) { return Json::parse(read_text_file(p)); }

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("simulate writes 60 frames") {
  const auto dir = oracle::scratch_dir("cli-simulate");
  const auto names = cmd_simulate(Json::object(), dir);
  CHECK(names == std::vector<std::string>{"clean.csv", "noisy.csv", "truth.json", "manifest.json"});
  for (const char* f : {"clean.csv", "noisy.csv"}) {
    const auto rows = lines_of(read_text_file(dir / f));
    REQUIRE(rows.size() == 61);
    CHECK(rows[0] == "t_start,t_end,value");
    const Tac tac = read_tac_csv(dir / f, 0.1);
    for (std::size_t i = 0; i < 60; ++i) {
      CHECK(tac.grid().frame_start(i) == static_cast<double>(i));
      CHECK(tac.grid().frame_end(i) == static_cast<double>(i + 1));
      CHECK(tac[i] >= 0.0);
    }
  }
  const Json truth = read_json(dir / "truth.json");
  CHECK(params_from_json(truth["truth"]) == activation_preset("200%"));
  CHECK(truth["noise_level"] == 3);
}

TEST_CASE("scenario noise is unbiased across realisations") {
  const Scenario sc = make_scenario(resolve_config(Json::object()));
  const Tac clean = sc.clean();
  std::vector<double> sum(60, 0.0);
  for (std::size_t r = 0; r < 100; ++r) {
    const Tac n = sc.noisy(r);
    for (std::size_t i = 0; i < 60; ++i) sum[i] += n[i];
  }
  for (std::size_t i = 0; i < 60; ++i) {
    const double se = std::sqrt(clean[i] / sc.noise.scale / 100.0);
    INFO("frame " << i);
    CHECK(std::abs(sum[i] / 100.0 - clean[i]) <= 4.0 * se + 1e-12);
  }
  CHECK(sc.noisy(0)[30] != sc.noisy(1)[30]);
}

TEST_CASE("configuration") {
  const Json desk = default_config("desk");
  const Json paper = default_config("paper");
  CHECK(paper["abc"]["cache_size"] == 1000000);
  CHECK(paper["abc"]["k"] == 1000);
  CHECK(paper["wls"]["library_size"] == 100000);
  CHECK(paper["batch"]["realisations"] == 100);
  CHECK(paper["mcmc"]["steps"] == 100000);
  CHECK(paper["narrow"]["schedule"] == Json::array({200.0, 50.0, 10.0}));
  CHECK(desk["abc"]["cache_size"] == 100000);
  CHECK(desk["scenario"]["noise_level"] == 3);
  CHECK(desk["noise_scales"] == Json::array({0.25, 1.0, 4.0, 16.0}));

  const Json r = resolve_config(Json{{"scale", "paper"}, {"abc", {{"k", 7}}}});
  CHECK(r["abc"]["k"] == 7);
  CHECK(r["abc"]["cache_size"] == 1000000);
  CHECK(resolve_config(r) == r);
  CHECK(resolve_config(r).dump() == r.dump());
  CHECK(code_of([] { resolve_config(Json{{"scale", "huge"}}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { resolve_config(Json::array()); }) == ErrorCode::InvalidArgument);

  CHECK(activation_preset("100%").gamma == 0.05);
  CHECK(activation_preset("200%").gamma == 0.1);
  CHECK(code_of([] { activation_preset("300%"); }) == ErrorCode::InvalidArgument);

  Json bad = resolve_config(Json::object());
  bad["scenario"]["noise_level"] = 7;
  CHECK(code_of([&] { make_scenario(bad); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("serialization round trips") {
  const LpNtPetParams p{1.25, 0.3, 0.07, 0.11, {19.5, 27.25, 3.5}};
  CHECK(params_from_json(params_to_json(p)) == p);
  const UniformBox b = narrowed_reference_box();
  const UniformBox back = box_from_json(box_to_json(b));
  CHECK(back.ranges == b.ranges);
  CHECK(back.tp_offset == b.tp_offset);
  CHECK(back.tp_max == b.tp_max);
  const auto g = make_grid(TimeGrid({0, 1, 3}, {1, 3, 7}, 0.1));
  CHECK(grid_from_json(grid_to_json(*g))->same_frames(*g));
  CHECK(code_of([] { params_from_json(Json{{"R1", 1.0}}); }) != ErrorCode::Ok);

  const auto grid = make_grid(TimeGrid::uniform(5, 1.0, 0.1));
  const Tac t(grid, {0.0, 1.5, 1e-300, 3.14159265358979, 12345.678});
  const Tac t2 = parse_tac_csv(tac_csv(t), 0.1);
  for (std::size_t i = 0; i < 5; ++i) CHECK(t2[i] == t[i]);
  CHECK(code_of([] { parse_tac_csv("t_start,t_end,value\n0,1,1\n2,3,1\n1,2,1\n", 0.1); }) ==
        ErrorCode::FormatError);
  CHECK(code_of([] { parse_tac_csv("t_start,t_end,value\n0,1,1\n0.5,2,1\n", 0.1); }) == ErrorCode::FormatError);
  CHECK(code_of([] { parse_tac_csv("t_start,t_end,value\n1,1,1\n", 0.1); }) == ErrorCode::FormatError);
  CHECK(code_of([] { parse_tac_csv("a,b\n1,2\n", 0.1); }) == ErrorCode::FormatError);
}

TEST_CASE("abc with infinite tolerance keeps the whole cache") {
  const auto dir = oracle::scratch_dir("cli-abc");
  cmd_abc(Json{{"abc", {{"cache_size", 300}, {"epsilon", "inf"}}}}, dir);
  CHECK(line_count(read_text_file(dir / "posterior.jsonl")) == 300);
  const Json s = read_json(dir / "abc.json");
  CHECK(s["accepted"] == 300);
  CHECK(s["epsilon"] == "inf");

  cmd_abc(Json{{"abc", {{"cache_size", 300}, {"k", 25}}}}, dir / "k");
  CHECK(line_count(read_text_file(dir / "k" / "posterior.jsonl")) == 25);

  cmd_cache(Json{{"abc", {{"cache_size", 300}}}}, dir / "cache");
  cmd_abc(Json{{"abc", {{"k", 25}}}, {"inputs", {{"cache", (dir / "cache" / "cache.bin").string()}}}},
          dir / "reuse");
  CHECK(read_text_file(dir / "reuse" / "posterior.jsonl") == read_text_file(dir / "k" / "posterior.jsonl"));
}

TEST_CASE("narrow writes nested boxes") {
  const auto dir = oracle::scratch_dir("cli-narrow");
  cmd_narrow(Json{{"box", "priors"}, {"narrow", {{"cache_size", 3000}, {"schedule", {1e9, 1500.0, 700.0}}}}}, dir);
  const Json j = read_json(dir / "narrowing.json");
  REQUIRE(j["steps"].size() == 3);
  UniformBox outer = default_priors();
  for (const auto& s : j["steps"]) {
    const UniformBox sampling = box_from_json(s["sampling_box"]);
    const UniformBox narrowed = box_from_json(s["narrowed_box"]);
    CHECK(s["accepted"].get<std::size_t>() > 0);
    CHECK(sampling.within(outer));
    CHECK(narrowed.within(sampling));
    outer = narrowed;
  }
}

TEST_CASE("narrow accepts an unbounded first tolerance") {
  const auto dir = oracle::scratch_dir("cli-narrow-inf");
  cmd_narrow(Json{{"narrow", {{"cache_size", 200}, {"schedule", {"inf", 1e9}}}}}, dir);
  const Json j = read_json(dir / "narrowing.json");
  REQUIRE(j["steps"].size() == 2);
  CHECK(j["steps"][0]["epsilon"] == "inf");
  CHECK(j["steps"][0]["accepted"] == 200);
  CHECK(j["schedule"][0] == "inf");
  CHECK_THROWS_AS(cmd_narrow(Json{{"narrow", {{"schedule", {"wide"}}}}}, dir), Error);
  CHECK_THROWS_AS(cmd_narrow(Json{{"narrow", {{"schedule", Json::array()}}}}, dir), Error);
}

TEST_CASE("ppc on a single-sample posterior is degenerate") {
  const auto dir = oracle::scratch_dir("cli-ppc");
  PosteriorSet p;
  p.samples.push_back({activation_preset("200%"), 0.0, 0});
  write_text_file(dir / "post.jsonl", posterior_jsonl(p));
  cmd_ppc(Json{{"inputs", {{"posterior", (dir / "post.jsonl").string()}}}, {"ppc", {{"noise", false}}}}, dir / "out");
  const Json s = read_json(dir / "out" / "ppc.json");
  CHECK(s["n_draws"] == 100);
  CHECK(s["posterior_size"] == 1);
  CHECK(s["coverage"] == 1.0);
  const auto scenario = make_scenario(resolve_config(Json::object()));
  const PredictiveBands b = parse_bands_csv(read_text_file(dir / "out" / "bands.csv"), scenario.grid);
  for (std::size_t i = 0; i < 60; ++i) {
    CHECK(b.lo[i] == b.hi[i]);
    CHECK(b.mean[i] == doctest::Approx(b.lo[i]).epsilon(1e-13));
  }
}

TEST_CASE("batch-compare without noise") {
  const auto dir = oracle::scratch_dir("cli-batch");
  const Json user{{"scenario", {{"noise_level", 0}}},
                  {"abc", {{"cache_size", 400}, {"k", 20}}},
                  {"wls", {{"library_size", 200}}},
                  {"batch", {{"realisations", 2}}}};
  cmd_batch_compare(user, dir);
  const auto rows = lines_of(read_text_file(dir / "report.csv"));
  CHECK(rows[0] == "kind,method,parameter,realisation,value,flag");
  std::map<std::string, std::string> est;
  int truth_rows = 0;
  for (const auto& r : rows) {
    if (r.rfind("truth,", 0) == 0) ++truth_rows;
    if (r.rfind("estimate,", 0) != 0) continue;
    std::vector<std::string> f;
    std::istringstream in(r);
    for (std::string x; std::getline(in, x, ',');) f.push_back(x);
    REQUIRE(f.size() >= 5);
    CHECK_FALSE(f[4].empty());
    const std::string key = f[1] + "/" + f[2];
    if (est.count(key)) CHECK(est[key] == f[4]);
    else est[key] = f[4];
  }
  CHECK(truth_rows == 7);
  CHECK(est.size() == 14);
  CHECK(code_of([&] {
          Json one = user;
          one["batch"]["realisations"] = 1;
          cmd_batch_compare(one, dir / "one");
        }) == ErrorCode::InvalidArgument);
}

TEST_CASE("manifest") {
  const auto dir = oracle::scratch_dir("cli-manifest");
  cmd_simulate(Json{{"seed", 42}}, dir);
  const Json m = read_json(dir / "manifest.json");
  CHECK(m["command"] == "simulate");
  CHECK(m["seed"] == 42);
  CHECK(m["config"]["seed"] == 42);
  CHECK(m["config_hash"].get<std::string>().size() == 16);
  CHECK(m["versions"]["abcpet"] == std::string(kVersion));
  CHECK(m["versions"].contains("eigen"));
  CHECK(m["outputs"] == Json::array({"clean.csv", "noisy.csv", "truth.json"}));
}

TEST_CASE("command-line front end") {
  const auto dir = oracle::scratch_dir("cli-binary");
  const auto log = dir / "log.txt";

  SUBCASE("byte-identical per seed") {
    REQUIRE(cli("--seed 9 --out " + (dir / "a").string() + " simulate", log) == 0);
    REQUIRE(cli("--seed 9 --out " + (dir / "b").string() + " simulate", log) == 0);
    REQUIRE(cli("--seed 10 --out " + (dir / "c").string() + " simulate", log) == 0);
    for (const char* f : {"clean.csv", "noisy.csv", "truth.json", "manifest.json"})
      CHECK(read_text_file(dir / "a" / f) == read_text_file(dir / "b" / f));
    CHECK(read_text_file(dir / "a" / "clean.csv") == read_text_file(dir / "c" / "clean.csv"));
    CHECK(read_text_file(dir / "a" / "noisy.csv") != read_text_file(dir / "c" / "noisy.csv"));
  }
  SUBCASE("rerun from a manifest") {
    REQUIRE(cli("--seed 5 --noise-level 2 --out " + (dir / "first").string() + " abc -n 200 -k 10", log) == 0);
    write_text_file(dir / "config.json", read_json(dir / "first" / "manifest.json")["config"].dump());
    REQUIRE(cli("--config " + (dir / "config.json").string() + " --out " + (dir / "again").string() + " abc", log) ==
            0);
    for (const char* f : {"posterior.jsonl", "abc.json", "manifest.json"})
      CHECK(read_text_file(dir / "first" / f) == read_text_file(dir / "again" / f));
  }
  SUBCASE("exit codes") {
    CHECK(cli("--out " + dir.string() + " simulate", log) == 0);
    CHECK(cli("--bogus simulate", log) == 2);
    CHECK(cli("", log) == 2);
    CHECK(cli("--noise-level 9 simulate", log) == 2);
    CHECK(cli("--out " + (dir / "x").string() + " abc --obs /nonexistent/file.csv", log) == 2);
    CHECK(cli("--out " + (dir / "x").string() + " abc --summary S9 -n 10", log) == 2);
    write_text_file(dir / "bad.csv", "t_start,t_end,value\n0,1,1\n0,1,2\n");
    CHECK(cli("--out " + (dir / "x").string() + " abc -n 10 --obs " + (dir / "bad.csv").string(), log) == 3);
    write_text_file(dir / "neg.csv", "t_start,t_end,value\n0,1,abc\n");
    CHECK(cli("--out " + (dir / "x").string() + " wls --obs " + (dir / "neg.csv").string(), log) == 3);
    CHECK(cli("--out " + (dir / "y").string() + " narrow -n 50 --summary S2 --schedule 1e9 1e-9", log) == 4);
    CHECK(fs::exists(dir / "y" / "narrowing.json"));
    CHECK(cli("--out " + (dir / "z").string() + " narrow -n 50 --schedule inf 1e9", log) == 0);
    CHECK(cli("--out " + (dir / "z").string() + " narrow -n 50 --schedule 1e9 wide", log) == 2);
    CHECK(cli("--out " + (dir / "z").string() + " abc -n 50 --eps 1x", log) == 2);
    CHECK(cli("--version", log) == 0);
    CHECK(read_text_file(log).find(std::string(kVersion)) != std::string::npos);
  }
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(ErrorCode::Ok) == 0);
  CHECK(exit_code_for(ErrorCode::InvalidArgument) == 2);
  for (ErrorCode c : {ErrorCode::FormatError, ErrorCode::IOError, ErrorCode::NegativeActivity,
                      ErrorCode::KindMismatch, ErrorCode::MissingContext, ErrorCode::GridMismatch})
    CHECK(exit_code_for(c) == 3);
  for (ErrorCode c : {ErrorCode::SingularStep, ErrorCode::DegenerateFit, ErrorCode::RankDeficient,
                      ErrorCode::NoValidFit, ErrorCode::EmptyPosterior})
    CHECK(exit_code_for(c) == 4);
  CHECK(code_of([] { run_command("nope", Json::object(), "unused"); }) == ErrorCode::InvalidArgument);
}
