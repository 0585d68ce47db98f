#include "tailsim/units.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <utility>

#include "tailsim/errors.hpp"
#include "tailsim/geometry.hpp"

namespace tailsim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::pair<double, std::string_view> split_quantity(std::string_view raw) {
  const std::string_view text = trim(raw);
  std::size_t pos = 0;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
  while (pos < text.size() &&
         (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.' ||
          text[pos] == 'e' || text[pos] == 'E' ||
          ((text[pos] == '-' || text[pos] == '+') && pos > 0 &&
           (text[pos - 1] == 'e' || text[pos - 1] == 'E')))) {
    // stop at a unit that starts with 'e' only if what follows is not numeric
    if ((text[pos] == 'e' || text[pos] == 'E') &&
        (pos + 1 >= text.size() ||
         !(std::isdigit(static_cast<unsigned char>(text[pos + 1])) || text[pos + 1] == '-' ||
           text[pos + 1] == '+'))) {
      break;
    }
    ++pos;
  }
  std::string_view number = text.substr(0, pos);
  if (!number.empty() && number.front() == '+') number.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
  if (number.empty() || ec != std::errc{} || end != number.data() + number.size() ||
      !std::isfinite(value)) {
    throw ParseError("invalid quantity '" + std::string(raw) + "'");
  }
  const std::string_view unit = trim(text.substr(pos));
  if (unit.empty()) {
    throw ParseError("quantity '" + std::string(raw) + "' needs a unit suffix");
  }
  return {value, unit};
}

}  // namespace

double parse_length(std::string_view text) {
  const auto [value, unit] = split_quantity(text);
  if (unit == "mm") return value / 1000.0;
  if (unit == "cm") return value / 100.0;
  if (unit == "m") return value;
  throw ParseError("unknown length unit '" + std::string(unit) + "' in '" + std::string(text) + "'");
}

double parse_force(std::string_view text) {
  const auto [value, unit] = split_quantity(text);
  if (unit == "N") return value;
  throw ParseError("unknown force unit '" + std::string(unit) + "' in '" + std::string(text) + "'");
}

double parse_angle(std::string_view text) {
  const auto [value, unit] = split_quantity(text);
  if (unit == "deg") return deg_to_rad(value);
  if (unit == "rad") return value;
  throw ParseError("unknown angle unit '" + std::string(unit) + "' in '" + std::string(text) + "'");
}

}  // namespace tailsim
