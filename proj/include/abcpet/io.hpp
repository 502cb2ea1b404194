#pragma once

// CSV readers and writers for TACs and sampled input curves.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "abcpet/signal.hpp"

namespace abcpet {

// Full round-trip precision for every double written to text.
std::string format_double(double v);

// `t_start,t_end,value`, one frame per row, minutes and activity units.
// Rejects missing header, malformed rows and non-monotone frame times.
Tac read_tac_csv(const std::filesystem::path& path, double sub_step);
Tac parse_tac_csv(const std::string& text, double sub_step);
void write_tac_csv(const std::filesystem::path& path, const Tac& tac);
std::string tac_csv(const Tac& tac);

struct SampledCurve {
  std::vector<double> times;
  std::vector<double> values;
  std::string digest;  // FNV-1a of the file bytes
};

// Either `t,value` samples or TAC layout (sampled at frame midpoints).
SampledCurve read_sampled_curve_csv(const std::filesystem::path& path);
SampledCurve parse_sampled_curve_csv(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::uint64_t fnv1a64(const std::string& bytes) noexcept;
std::string hex64(std::uint64_t v);

}  // namespace abcpet
