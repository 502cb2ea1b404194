#pragma once

// Pipeline commands behind the CLI. Each command takes a user config
// (any subset of the defaults), resolves it, writes its artifacts plus a
// manifest.json into the output directory and returns the written names.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "abcpet/error.hpp"
#include "abcpet/serialize.hpp"

namespace abcpet {

inline constexpr std::string_view kVersion = "0.1.0";

// Desk or paper defaults for every option.
Json default_config(std::string_view scale);

// Defaults for user["scale"] (desk when absent) with `user` merge-patched
// on top. Throws InvalidArgument on an unknown scale.
Json resolve_config(const Json& user);

// Preset truth for "100%" / "200%" activation; the two differ only in gamma.
LpNtPetParams activation_preset(std::string_view activation);

struct Scenario {
  GridPtr grid;
  InputCurve reference;
  LpNtPetParams truth;
  NoiseConfig noise_config;
  NoiseLevel noise;
  std::uint64_t seed = 0;

  Tac clean() const;
  // Realisation r: Poisson noise seeded by derive_seed(stream_seed(seed, Noise), r).
  Tac noisy(std::size_t realisation) const;
};

Scenario make_scenario(const Json& resolved);

std::vector<std::string> cmd_simulate(const Json& user, const std::filesystem::path& out);
std::vector<std::string> cmd_cache(const Json& user, const std::filesystem::path& out);
std::vector<std::string> cmd_abc(const Json& user, const std::filesystem::path& out);
std::vector<std::string> cmd_wls(const Json& user, const std::filesystem::path& out);
std::vector<std::string> cmd_mcmc(const Json& user, const std::filesystem::path& out);
std::vector<std::string> cmd_narrow(const Json& user, const std::filesystem::path& out);
std::vector<std::string> cmd_ppc(const Json& user, const std::filesystem::path& out);
std::vector<std::string> cmd_batch_compare(const Json& user, const std::filesystem::path& out);

std::vector<std::string> run_command(std::string_view command, const Json& user,
                                     const std::filesystem::path& out);

// 2 usage, 3 data, 4 numeric.
int exit_code_for(ErrorCode code) noexcept;

}  // namespace abcpet
