#include "cqt/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace cqt {

std::string format_number(double value) {
  if (value == 0) value = 0;  // drop the sign of -0
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general);
  return std::string(buf.data(), res.ptr);
}

std::optional<double> parse_real(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<std::complex<double>> parse_complex(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.back() != 'i') {
    auto re = parse_real(text);
    if (!re) return std::nullopt;
    return std::complex<double>(*re, 0);
  }
  text.remove_suffix(1);
  // Split at the last sign that is not a leading sign or an exponent sign.
  size_t split = std::string_view::npos;
  for (size_t k = text.size(); k-- > 1;) {
    if ((text[k] == '+' || text[k] == '-') && text[k - 1] != 'e' && text[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto imag_part = [](std::string_view s) -> std::optional<double> {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return parse_real(s);
  };
  if (split == std::string_view::npos) {
    auto im = imag_part(text);
    if (!im) return std::nullopt;
    return std::complex<double>(0, *im);
  }
  auto re = parse_real(text.substr(0, split));
  auto im = imag_part(text.substr(split));
  if (!re || !im) return std::nullopt;
  return std::complex<double>(*re, *im);
}

std::string format_complex(std::complex<double> z) {
  std::string im = format_number(z.imag());
  if (im.front() != '-') im.insert(im.begin(), '+');
  return format_number(z.real()) + im + "i";
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace cqt
