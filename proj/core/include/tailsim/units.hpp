#pragma once

#include <string_view>

namespace tailsim {

// Quantities on the command line always carry a unit suffix. Each parser
// returns SI and throws ParseError for bare numbers or unknown suffixes.
double parse_length(std::string_view text);  // mm, cm, m -> metres
double parse_force(std::string_view text);   // N -> newtons
double parse_angle(std::string_view text);   // deg, rad -> radians

}  // namespace tailsim
