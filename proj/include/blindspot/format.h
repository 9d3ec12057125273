#pragma once

#include <string>

namespace blindspot {

// Shortest decimal text that parses back to exactly `value`.
std::string format_shortest(double value);

// Fixed-point with `decimals` digits. The conversion is exact-decimal, so
// ties round half to even.
std::string format_fixed(double value, int decimals);

// Strict full-string parse of a real; returns false on any trailing garbage.
bool parse_double(const std::string& text, double& out);

}  // namespace blindspot
