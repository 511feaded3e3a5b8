#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cqt {

/// Shortest round-trip decimal (at most 17 significant digits), locale
/// independent (std::to_chars).
std::string format_number(double value);

/// Parses a decimal real; the whole string must be consumed.
std::optional<double> parse_real(std::string_view text);

/// Parses `a+bi`, `a-bi`, `bi`, `a` (decimal reals, no spaces).
std::optional<std::complex<double>> parse_complex(std::string_view text);

std::string format_complex(std::complex<double> z);

/// 64-bit FNV-1a, used to tag outputs with the config that produced them.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace cqt
