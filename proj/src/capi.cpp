#include "abcpet/abcpet.h"

#include <cmath>
#include <cstring>
#include <new>
#include <string>

#include "abcpet/commands.hpp"
#include "abcpet/io.hpp"

using namespace abcpet;

struct abcpet_grid {
  GridPtr grid;
};
struct abcpet_input {
  InputCurve curve;
};
struct abcpet_tac {
  Tac tac;
};
struct abcpet_cache {
  SimCache cache;
};
struct abcpet_posterior {
  PosteriorSet set;
};

namespace {

thread_local std::string g_last_error;

template <class F>
abcpet_status guard(F&& f) noexcept {
  try {
    f();
    g_last_error.clear();
    return ABCPET_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<abcpet_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ABCPET_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ABCPET_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ABCPET_INTERNAL;
  }
}

template <class T>
const T& need(const T* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " is null");
  return *p;
}

template <class T>
T** need_out(T** out) {
  if (!out) fail(ErrorCode::InvalidArgument, "output pointer is null");
  *out = nullptr;
  return out;
}

LpNtPetParams from_c(const abcpet_params& p) {
  return {p.R1, p.k2, p.k2a, p.gamma, {p.tD, p.tP, p.alpha}};
}

abcpet_params to_c(const LpNtPetParams& p) {
  return {p.R1, p.k2, p.k2a, p.gamma, p.timing.tD, p.timing.tP, p.timing.alpha};
}

UniformBox from_c(const abcpet_box& b) {
  UniformBox box;
  for (std::size_t i = 0; i < 7; ++i) box.ranges[i] = {b.lo[i], b.hi[i]};
  box.tp_offset = b.tp_offset;
  box.tp_max = b.tp_max;
  return box;
}

void to_c(const UniformBox& box, abcpet_box* out) {
  for (std::size_t i = 0; i < 7; ++i) {
    out->lo[i] = box.ranges[i].lo;
    out->hi[i] = box.ranges[i].hi;
  }
  out->tp_offset = box.tp_offset;
  out->tp_max = box.tp_max;
}

SummaryKind kind_from_c(abcpet_summary k) {
  if (k < ABCPET_S1_SPLINE || k > ABCPET_S4_WLS)
    fail(ErrorCode::InvalidArgument, "unknown summary kind");
  return static_cast<SummaryKind>(k);
}

Json parse_config(const char* text) {
  if (!text || !*text) return Json::object();
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
}

ObservedSummary observed(const abcpet_cache* cache, const abcpet_tac* obs,
                         const abcpet_input* cr, abcpet_summary kind, double hint) {
  const SimCache& c = need(cache, "cache").cache;
  const Tac& o = need(obs, "obs").tac;
  const InputCurve& in = need(cr, "input").curve;
  if (!c.grid().same_frames(o.grid()))
    fail(ErrorCode::GridMismatch, "cache frames differ from the observed TAC");
  SummaryContext ctx = SummaryContext::for_grid(o.grid_ptr(), in);
  ctx.s3_scale_hint = hint;
  return ObservedSummary::from_tac(o, kind_from_c(kind), ctx);
}

}  // namespace

extern "C" {

const char* abcpet_version(void) { return kVersion.data(); }

const char* abcpet_last_error_message(void) { return g_last_error.c_str(); }

const char* abcpet_status_name(abcpet_status status) {
  if (status == ABCPET_INTERNAL) return "Internal";
  if (status < ABCPET_OK || status > ABCPET_INTERNAL) return "Unknown";
  return to_string(static_cast<ErrorCode>(status));
}

int abcpet_exit_code(abcpet_status status) {
  if (status == ABCPET_INTERNAL) return 4;
  if (status < ABCPET_OK || status > ABCPET_INTERNAL) return 4;
  return exit_code_for(static_cast<ErrorCode>(status));
}

abcpet_status abcpet_grid_uniform(size_t n_frames, double frame_minutes, double sub_step,
                                  abcpet_grid** out) {
  return guard([&] {
    need_out(out);
    *out = new abcpet_grid{make_grid(TimeGrid::uniform(n_frames, frame_minutes, sub_step))};
  });
}

abcpet_status abcpet_grid_create(const double* t_start, const double* t_end, size_t n_frames,
                                 double sub_step, abcpet_grid** out) {
  return guard([&] {
    need_out(out);
    if ((!t_start || !t_end) && n_frames > 0)
      fail(ErrorCode::InvalidArgument, "frame arrays are null");
    std::vector<double> s(t_start, t_start + n_frames), e(t_end, t_end + n_frames);
    *out = new abcpet_grid{make_grid(TimeGrid(std::move(s), std::move(e), sub_step))};
  });
}

size_t abcpet_grid_frame_count(const abcpet_grid* grid) {
  return grid ? grid->grid->frame_count() : 0;
}

void abcpet_grid_free(abcpet_grid* grid) { delete grid; }

abcpet_status abcpet_input_reference(double amplitude, double power, double fast_rate,
                                     double slow_weight, double slow_rate, abcpet_input** out) {
  return guard([&] {
    need_out(out);
    *out = new abcpet_input{
        reference_input(ReferenceShape{amplitude, power, fast_rate, slow_weight, slow_rate})};
  });
}

abcpet_status abcpet_input_from_file(const char* path, abcpet_input** out) {
  return guard([&] {
    need_out(out);
    need(path, "path");
    *out = new abcpet_input{reference_input_from_file(path)};
  });
}

abcpet_status abcpet_input_exponential(double rate, abcpet_input** out) {
  return guard([&] {
    need_out(out);
    *out = new abcpet_input{InputCurve::exponential(rate)};
  });
}

double abcpet_input_eval(const abcpet_input* input, double t) {
  return input ? input->curve(t) : std::nan("");
}

void abcpet_input_free(abcpet_input* input) { delete input; }

abcpet_status abcpet_tac_create(const abcpet_grid* grid, const double* values, size_t n,
                                abcpet_tac** out) {
  return guard([&] {
    need_out(out);
    const GridPtr& g = need(grid, "grid").grid;
    if (!values && n > 0) fail(ErrorCode::InvalidArgument, "values is null");
    *out = new abcpet_tac{Tac(g, std::vector<double>(values, values + n))};
  });
}

abcpet_status abcpet_tac_read_csv(const char* path, double sub_step, abcpet_tac** out) {
  return guard([&] {
    need_out(out);
    need(path, "path");
    *out = new abcpet_tac{read_tac_csv(path, sub_step)};
  });
}

abcpet_status abcpet_tac_write_csv(const abcpet_tac* tac, const char* path) {
  return guard([&] {
    need(path, "path");
    write_tac_csv(path, need(tac, "tac").tac);
  });
}

size_t abcpet_tac_frame_count(const abcpet_tac* tac) {
  return tac ? tac->tac.values().size() : 0;
}

abcpet_status abcpet_tac_values(const abcpet_tac* tac, double* out, size_t n) {
  return guard([&] {
    const auto v = need(tac, "tac").tac.values();
    if (!out || n < v.size()) fail(ErrorCode::InvalidArgument, "output buffer too small");
    std::memcpy(out, v.data(), v.size() * sizeof(double));
  });
}

void abcpet_tac_free(abcpet_tac* tac) { delete tac; }

abcpet_status abcpet_forward(const abcpet_params* theta, const abcpet_input* cr,
                             const abcpet_grid* grid, abcpet_tac** out) {
  return guard([&] {
    need_out(out);
    const LpNtPetParams p = from_c(need(theta, "theta"));
    *out = new abcpet_tac{lp_ntpet_forward(p, need(cr, "input").curve, need(grid, "grid").grid)};
  });
}

abcpet_status abcpet_one_tissue_forward(double K1, double k2, const abcpet_input* ca,
                                        const abcpet_grid* grid, abcpet_tac** out) {
  return guard([&] {
    need_out(out);
    *out = new abcpet_tac{one_tissue_forward(OneTissueParams{K1, k2}, need(ca, "input").curve,
                                             need(grid, "grid").grid)};
  });
}

abcpet_status abcpet_poisson(const abcpet_tac* tac, double scale, uint64_t seed,
                             abcpet_tac** out) {
  return guard([&] {
    need_out(out);
    if (!(scale > 0.0)) fail(ErrorCode::InvalidArgument, "noise scale must be positive");
    *out = new abcpet_tac{apply_poisson(need(tac, "tac").tac, NoiseLevel{1, scale}, seed)};
  });
}

uint64_t abcpet_forward_count(void) { return forward_simulation_count(); }

void abcpet_box_default_priors(abcpet_box* out) {
  if (out) to_c(default_priors(), out);
}

void abcpet_box_reference(abcpet_box* out) {
  if (out) to_c(narrowed_reference_box(), out);
}

abcpet_status abcpet_cache_build(size_t n, const abcpet_box* box, const abcpet_input* cr,
                                 const abcpet_grid* grid, const abcpet_summary* kinds,
                                 size_t n_kinds, uint64_t seed, abcpet_cache** out) {
  return guard([&] {
    need_out(out);
    if (!kinds && n_kinds > 0) fail(ErrorCode::InvalidArgument, "kinds is null");
    std::vector<SummaryKind> k;
    for (size_t i = 0; i < n_kinds; ++i) k.push_back(kind_from_c(kinds[i]));
    *out = new abcpet_cache{build_cache(n, from_c(need(box, "box")), need(cr, "input").curve,
                                        need(grid, "grid").grid, std::move(k), seed)};
  });
}

abcpet_status abcpet_cache_save(const abcpet_cache* cache, const char* path) {
  return guard([&] {
    need(path, "path");
    save_cache(need(cache, "cache").cache, path);
  });
}

abcpet_status abcpet_cache_load(const char* path, abcpet_cache** out) {
  return guard([&] {
    need_out(out);
    need(path, "path");
    *out = new abcpet_cache{load_cache(path)};
  });
}

size_t abcpet_cache_size(const abcpet_cache* cache) { return cache ? cache->cache.size() : 0; }

abcpet_status abcpet_cache_theta(const abcpet_cache* cache, size_t i, abcpet_params* out) {
  return guard([&] {
    const SimCache& c = need(cache, "cache").cache;
    if (!out || i >= c.size()) fail(ErrorCode::InvalidArgument, "cache index out of range");
    *out = to_c(c.theta(i));
  });
}

void abcpet_cache_free(abcpet_cache* cache) { delete cache; }

abcpet_status abcpet_abc_best_k(const abcpet_cache* cache, const abcpet_tac* obs,
                                const abcpet_input* cr, abcpet_summary kind,
                                double s3_scale_hint, size_t k, abcpet_posterior** out) {
  return guard([&] {
    need_out(out);
    const ObservedSummary o = observed(cache, obs, cr, kind, s3_scale_hint);
    *out = new abcpet_posterior{abc_best_k(cache->cache, o, k)};
  });
}

abcpet_status abcpet_abc_reject(const abcpet_cache* cache, const abcpet_tac* obs,
                                const abcpet_input* cr, abcpet_summary kind,
                                double s3_scale_hint, double epsilon, abcpet_posterior** out) {
  return guard([&] {
    need_out(out);
    const ObservedSummary o = observed(cache, obs, cr, kind, s3_scale_hint);
    *out = new abcpet_posterior{abc_reject(cache->cache, o, epsilon)};
  });
}

size_t abcpet_posterior_size(const abcpet_posterior* posterior) {
  return posterior ? posterior->set.samples.size() : 0;
}

abcpet_status abcpet_posterior_sample(const abcpet_posterior* posterior, size_t i,
                                      abcpet_params* theta, double* distance) {
  return guard([&] {
    const PosteriorSet& p = need(posterior, "posterior").set;
    if (i >= p.samples.size()) fail(ErrorCode::InvalidArgument, "posterior index out of range");
    if (theta) *theta = to_c(p.samples[i].theta);
    if (distance) *distance = p.samples[i].distance;
  });
}

abcpet_status abcpet_posterior_mean(const abcpet_posterior* posterior, abcpet_params* out) {
  return guard([&] {
    const PosteriorSet& p = need(posterior, "posterior").set;
    if (!out) fail(ErrorCode::InvalidArgument, "output pointer is null");
    *out = to_c(LpNtPetParams::from_array(p.mean()));
  });
}

abcpet_status abcpet_posterior_write_jsonl(const abcpet_posterior* posterior, const char* path) {
  return guard([&] {
    need(path, "path");
    write_text_file(path, posterior_jsonl(need(posterior, "posterior").set));
  });
}

void abcpet_posterior_free(abcpet_posterior* posterior) { delete posterior; }

abcpet_status abcpet_wls_fit(const abcpet_tac* obs, const abcpet_input* cr, size_t library_size,
                             uint64_t seed, int nonneg, abcpet_params* out) {
  return guard([&] {
    if (!out) fail(ErrorCode::InvalidArgument, "output pointer is null");
    const Tac& o = need(obs, "obs").tac;
    const ReferenceColumns ref(need(cr, "input").curve, o.grid_ptr());
    const BasisLibrary lib =
        build_basis_library(ref, o, sample_timing_library(library_size, default_priors(), seed));
    *out = to_c(wls_fit_grid(o, lib, nonneg != 0).params());
  });
}

abcpet_status abcpet_run_command(const char* command, const char* config_json,
                                 const char* out_dir) {
  return guard([&] {
    need(command, "command");
    need(out_dir, "out_dir");
    run_command(command, parse_config(config_json), out_dir);
  });
}

abcpet_status abcpet_resolve_config(const char* config_json, char** out) {
  return guard([&] {
    need_out(out);
    const std::string text = resolve_config(parse_config(config_json)).dump(2);
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

void abcpet_string_free(char* s) { delete[] s; }

}  // extern "C"
