#include "abcpet/serialize.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "abcpet/error.hpp"
#include "abcpet/io.hpp"

namespace abcpet {

namespace {

constexpr std::string_view kCacheMagic = "ABCPET-CACHE";
constexpr std::string_view kLibraryMagic = "ABCPET-LIBRARY";

void put_doubles(std::string& out, std::span<const double> values) {
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
}

class ByteReader {
 public:
  ByteReader(const std::string& data, std::size_t pos) : data_(data), pos_(pos) {}

  void get_doubles(std::span<double> out) {
    if (data_.size() - pos_ < out.size() * 8)
      fail(ErrorCode::FormatError, "binary payload is truncated");
    for (double& v : out) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + b])) << (8 * b);
      v = std::bit_cast<double>(bits);
      pos_ += 8;
    }
  }
  bool at_end() const noexcept { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::size_t pos_;
};

// Splits "<magic>\n<json>\n<binary>" and returns the header and payload offset.
std::pair<Json, std::size_t> split_hybrid(const std::string& data, std::string_view magic) {
  const std::size_t nl1 = data.find('\n');
  if (nl1 == std::string::npos || std::string_view(data).substr(0, nl1) != magic)
    fail(ErrorCode::FormatError, "missing " + std::string(magic) + " signature");
  const std::size_t nl2 = data.find('\n', nl1 + 1);
  if (nl2 == std::string::npos) fail(ErrorCode::FormatError, "missing header line");
  Json header;
  try {
    header = Json::parse(data.substr(nl1 + 1, nl2 - nl1 - 1));
  } catch (const Json::exception& e) {
    fail(ErrorCode::FormatError, std::string("bad header: ") + e.what());
  }
  return {std::move(header), nl2 + 1};
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    fail(ErrorCode::FormatError, std::string("malformed JSON: ") + e.what());
  }
}

Json distance_json(double d) { return std::isfinite(d) ? Json(d) : Json(nullptr); }

}  // namespace

Json params_to_json(const LpNtPetParams& p) {
  Json j = Json::object();
  const auto a = p.to_array();
  for (std::size_t i = 0; i < a.size(); ++i) j[std::string(LpNtPetParams::kNames[i])] = a[i];
  return j;
}

LpNtPetParams params_from_json(const Json& j) {
  return guarded([&] {
    std::array<double, LpNtPetParams::kSize> a{};
    for (std::size_t i = 0; i < a.size(); ++i)
      a[i] = j.at(std::string(LpNtPetParams::kNames[i])).get<double>();
    return LpNtPetParams::from_array(a);
  });
}

Json box_to_json(const UniformBox& box) {
  Json j = Json::object();
  for (std::size_t i = 0; i < LpNtPetParams::kSize; ++i) {
    const std::string name =
        i == UniformBox::kTp ? "tP_fraction" : std::string(LpNtPetParams::kNames[i]);
    j[name] = Json::array({box.ranges[i].lo, box.ranges[i].hi});
  }
  j["tp_offset"] = box.tp_offset;
  j["tp_max"] = box.tp_max;
  return j;
}

UniformBox box_from_json(const Json& j) {
  UniformBox box = guarded([&] {
    UniformBox b;
    for (std::size_t i = 0; i < LpNtPetParams::kSize; ++i) {
      const std::string name =
          i == UniformBox::kTp ? "tP_fraction" : std::string(LpNtPetParams::kNames[i]);
      const Json& r = j.at(name);
      if (!r.is_array() || r.size() != 2)
        fail(ErrorCode::FormatError, "range '" + name + "' must be [lo, hi]");
      b.ranges[i] = {r[0].get<double>(), r[1].get<double>()};
    }
    b.tp_offset = j.value("tp_offset", 1.0);
    b.tp_max = j.value("tp_max", 35.0);
    return b;
  });
  box.validate();
  return box;
}

Json grid_to_json(const TimeGrid& grid) {
  Json j = Json::object();
  j["t_start"] = std::vector<double>(grid.frame_starts().begin(), grid.frame_starts().end());
  j["t_end"] = std::vector<double>(grid.frame_ends().begin(), grid.frame_ends().end());
  j["sub_step"] = grid.sub_step();
  return j;
}

GridPtr grid_from_json(const Json& j) {
  return guarded([&] {
    return make_grid(TimeGrid(j.at("t_start").get<std::vector<double>>(),
                              j.at("t_end").get<std::vector<double>>(),
                              j.at("sub_step").get<double>()));
  });
}

void save_cache(const SimCache& cache, const std::filesystem::path& path) {
  const CacheProvenance& prov = cache.provenance();
  Json header = Json::object();
  header["format_version"] = kCacheFormatVersion;
  header["provenance"] = {{"seed", prov.seed},
                          {"box", box_to_json(prov.box)},
                          {"reference_id", prov.reference_id},
                          {"grid_id", prov.grid_id}};
  header["grid"] = grid_to_json(cache.grid());
  header["count"] = cache.size();
  Json kinds = Json::array();
  for (SummaryKind k : cache.kinds()) kinds.push_back(std::string(to_string(k)));
  header["kinds"] = kinds;
  header["resample_count"] = cache.resample_count();

  std::string out(kCacheMagic);
  out += '\n';
  out += header.dump();
  out += '\n';
  const std::size_t n = cache.size();
  for (std::size_t i = 0; i < n; ++i) put_doubles(out, cache.theta_array(i));
  for (std::size_t i = 0; i < n; ++i) put_doubles(out, cache.tac(i));
  for (SummaryKind k : {SummaryKind::S1Spline, SummaryKind::S4Wls}) {
    if (!cache.has_kind(k)) continue;
    for (std::size_t i = 0; i < n; ++i) put_doubles(out, cache.summary(i, k));
  }
  write_text_file(path, out);
}

SimCache load_cache(const std::filesystem::path& path) {
  const std::string data = read_text_file(path);
  auto [header, offset] = split_hybrid(data, kCacheMagic);
  return guarded([&, &header = header, offset = offset] {
    if (header.at("format_version").get<int>() != kCacheFormatVersion)
      fail(ErrorCode::FormatError, "unsupported cache format version");
    const Json& p = header.at("provenance");
    CacheProvenance prov{p.at("seed").get<std::uint64_t>(), box_from_json(p.at("box")),
                         p.at("reference_id").get<std::string>(),
                         p.at("grid_id").get<std::string>()};
    GridPtr grid = grid_from_json(header.at("grid"));
    if (grid->id() != prov.grid_id) fail(ErrorCode::FormatError, "cache grid id mismatch");
    std::vector<SummaryKind> kinds;
    for (const auto& k : header.at("kinds")) kinds.push_back(parse_summary_kind(k.get<std::string>()));
    const auto n = header.at("count").get<std::size_t>();
    SimCache cache(grid, std::move(prov), std::move(kinds), n);
    cache.set_resample_count(header.value("resample_count", std::uint64_t{0}));

    ByteReader in(data, offset);
    const std::size_t f = grid->frame_count();
    std::vector<std::array<double, LpNtPetParams::kSize>> thetas(n);
    for (auto& t : thetas) in.get_doubles(t);
    std::vector<double> tac(f);
    for (std::size_t i = 0; i < n; ++i) {
      in.get_doubles(tac);
      cache.set_entry(i, LpNtPetParams::from_array(thetas[i]), tac);
    }
    for (SummaryKind k : {SummaryKind::S1Spline, SummaryKind::S4Wls}) {
      if (!cache.has_kind(k)) continue;
      for (std::size_t i = 0; i < n; ++i) in.get_doubles(cache.summary_slot(i, k));
    }
    if (!in.at_end()) fail(ErrorCode::FormatError, "trailing bytes after cache payload");
    return cache;
  });
}

void save_basis_library(const BasisLibrary& lib, const LibraryKey& key,
                        const std::filesystem::path& path) {
  Json header = Json::object();
  header["format_version"] = kLibraryFormatVersion;
  header["key"] = {{"reference_id", key.reference_id},
                   {"obs_id", key.obs_id},
                   {"seed", key.seed},
                   {"size", key.size}};
  header["reference_id"] = lib.reference_id;
  header["grid_id"] = lib.grid_id;
  header["frames"] = lib.fixed.rows();
  header["timings"] = lib.timings.size();

  std::string out(kLibraryMagic);
  out += '\n';
  out += header.dump();
  out += '\n';
  for (const auto& t : lib.timings) {
    const double v[3] = {t.tD, t.tP, t.alpha};
    put_doubles(out, v);
  }
  put_doubles(out, {lib.fixed.data(), static_cast<std::size_t>(lib.fixed.size())});
  put_doubles(out, {lib.columns.data(), static_cast<std::size_t>(lib.columns.size())});
  write_text_file(path, out);
}

BasisLibrary load_basis_library(const std::filesystem::path& path, const LibraryKey& expected) {
  const std::string data = read_text_file(path);
  auto [header, offset] = split_hybrid(data, kLibraryMagic);
  return guarded([&, &header = header, offset = offset] {
    if (header.at("format_version").get<int>() != kLibraryFormatVersion)
      fail(ErrorCode::FormatError, "unsupported library format version");
    const Json& k = header.at("key");
    const LibraryKey key{k.at("reference_id").get<std::string>(),
                         k.at("obs_id").get<std::string>(), k.at("seed").get<std::uint64_t>(),
                         k.at("size").get<std::size_t>()};
    if (!(key == expected)) fail(ErrorCode::FormatError, "basis library key does not match");
    BasisLibrary lib;
    lib.reference_id = header.at("reference_id").get<std::string>();
    lib.grid_id = header.at("grid_id").get<std::string>();
    const auto frames = header.at("frames").get<Eigen::Index>();
    const auto n = header.at("timings").get<std::size_t>();
    ByteReader in(data, offset);
    lib.timings.resize(n);
    for (auto& t : lib.timings) {
      double v[3];
      in.get_doubles(v);
      t = {v[0], v[1], v[2]};
    }
    lib.fixed.resize(frames, 3);
    lib.columns.resize(frames, static_cast<Eigen::Index>(n));
    in.get_doubles({lib.fixed.data(), static_cast<std::size_t>(lib.fixed.size())});
    in.get_doubles({lib.columns.data(), static_cast<std::size_t>(lib.columns.size())});
    if (!in.at_end()) fail(ErrorCode::FormatError, "trailing bytes after library payload");
    return lib;
  });
}

std::string posterior_jsonl(const PosteriorSet& posterior) {
  std::string out;
  for (const auto& s : posterior.samples) {
    Json j = Json::object();
    j["theta"] = params_to_json(s.theta);
    j["distance"] = distance_json(s.distance);
    j["cache_index"] = s.cache_index;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<PosteriorSample> parse_posterior_jsonl(const std::string& text) {
  std::vector<PosteriorSample> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(guarded([&] {
      const Json j = Json::parse(line);
      const Json& d = j.at("distance");
      return PosteriorSample{params_from_json(j.at("theta")),
                             d.is_null() ? std::numeric_limits<double>::infinity()
                                         : d.get<double>(),
                             j.value("cache_index", std::size_t{0})};
    }));
  }
  return out;
}

std::string bands_csv(const PredictiveBands& bands) {
  std::string out = "t_mid,mean,lo,hi\n";
  for (std::size_t t = 0; t < bands.mean.size(); ++t) {
    out += format_double(bands.grid->midpoint(t));
    out += ',' + format_double(bands.mean[t]);
    out += ',' + format_double(bands.lo[t]);
    out += ',' + format_double(bands.hi[t]);
    out += '\n';
  }
  return out;
}

PredictiveBands parse_bands_csv(const std::string& text, const GridPtr& grid) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "t_mid,mean,lo,hi")
    fail(ErrorCode::FormatError, "bands CSV must start with 't_mid,mean,lo,hi'");
  PredictiveBands bands;
  bands.grid = grid;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double v[4];
    std::istringstream fields(line);
    std::string cell;
    for (double& x : v) {
      if (!std::getline(fields, cell, ',')) fail(ErrorCode::FormatError, "short bands row");
      char* end = nullptr;
      x = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') fail(ErrorCode::FormatError, "bad number in bands CSV");
    }
    if (row >= grid->frame_count() || v[0] != grid->midpoint(row))
      fail(ErrorCode::GridMismatch, "bands rows do not match the grid");
    bands.mean.push_back(v[1]);
    bands.lo.push_back(v[2]);
    bands.hi.push_back(v[3]);
    ++row;
  }
  if (row != grid->frame_count()) fail(ErrorCode::GridMismatch, "bands rows do not match the grid");
  bands.n_draws = 0;
  return bands;
}

std::string chain_jsonl(const McmcChain& chain) {
  std::string out;
  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    Json j = Json::object();
    j["step"] = i + 1;
    j["theta"] = params_to_json(chain.states[i]);
    j["log_posterior"] = distance_json(chain.log_posterior[i]);
    out += j.dump();
    out += '\n';
  }
  return out;
}

Json chain_trace(const McmcChain& chain) {
  Json j = Json::object();
  j["steps"] = chain.states.size();
  j["accepted"] = chain.accepted;
  j["acceptance_rate"] = chain.acceptance_rate();
  if (!chain.states.empty()) {
    j["mean"] = params_to_json(LpNtPetParams::from_array(chain.mean()));
    j["sd"] = params_to_json(LpNtPetParams::from_array(chain.sd()));
  }
  return j;
}

Json wls_fit_to_json(const WlsFit& fit) {
  Json j = Json::object();
  j["estimate"] = params_to_json(fit.params());
  j["weighted_rss"] = fit.weighted_rss;
  j["library_index"] = fit.library_index;
  return j;
}

Json tolerance_to_json(double eps) { return std::isinf(eps) && eps > 0 ? Json("inf") : Json(eps); }

double tolerance_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "infinity"))
    return std::numeric_limits<double>::infinity();
  fail(ErrorCode::InvalidArgument, "tolerance must be a number or \"inf\"");
}

Json narrowing_to_json(const std::vector<NarrowingStep>& steps) {
  Json arr = Json::array();
  for (const auto& s : steps) {
    Json j = Json::object();
    j["epsilon"] = tolerance_to_json(s.epsilon);
    j["cache_size"] = s.cache_size;
    j["accepted"] = s.accepted;
    j["sampling_box"] = box_to_json(s.sampling_box);
    j["narrowed_box"] = box_to_json(s.narrowed_box);
    arr.push_back(std::move(j));
  }
  return Json{{"steps", std::move(arr)}};
}

}  // namespace abcpet
