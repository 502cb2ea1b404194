#pragma once

// On-disk formats. Caches and basis libraries are a magic line, one JSON
// header line and little-endian binary doubles; everything else is text
// (JSON, JSONL, CSV) with round-trip double formatting.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "abcpet/abc.hpp"
#include "abcpet/mcmc.hpp"
#include "abcpet/ppc.hpp"
#include "abcpet/wls.hpp"

namespace abcpet {

using Json = nlohmann::ordered_json;

inline constexpr int kCacheFormatVersion = 1;
inline constexpr int kLibraryFormatVersion = 1;

Json params_to_json(const LpNtPetParams& p);
LpNtPetParams params_from_json(const Json& j);

// {"R1":[lo,hi], ..., "tP_fraction":[lo,hi], "alpha":[lo,hi], "tp_offset", "tp_max"}
Json box_to_json(const UniformBox& box);
UniformBox box_from_json(const Json& j);

Json grid_to_json(const TimeGrid& grid);
GridPtr grid_from_json(const Json& j);

void save_cache(const SimCache& cache, const std::filesystem::path& path);
SimCache load_cache(const std::filesystem::path& path);

struct LibraryKey {
  std::string reference_id;
  std::string obs_id;
  std::uint64_t seed = 0;
  std::size_t size = 0;
  bool operator==(const LibraryKey&) const = default;
};

void save_basis_library(const BasisLibrary& lib, const LibraryKey& key,
                        const std::filesystem::path& path);
// Throws FormatError when the stored key differs from `expected`.
BasisLibrary load_basis_library(const std::filesystem::path& path, const LibraryKey& expected);

// One {"theta":{...},"distance":d,"cache_index":i} per line; an infinite
// distance is written as null.
std::string posterior_jsonl(const PosteriorSet& posterior);
std::vector<PosteriorSample> parse_posterior_jsonl(const std::string& text);

// `t_mid,mean,lo,hi`.
std::string bands_csv(const PredictiveBands& bands);
PredictiveBands parse_bands_csv(const std::string& text, const GridPtr& grid);

std::string chain_jsonl(const McmcChain& chain);
Json chain_trace(const McmcChain& chain);

Json wls_fit_to_json(const WlsFit& fit);

// Tolerances are numbers or the string "inf".
Json tolerance_to_json(double eps);
double tolerance_from_json(const Json& j);

Json narrowing_to_json(const std::vector<NarrowingStep>& steps);

}  // namespace abcpet
