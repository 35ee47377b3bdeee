#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "arc/error.hpp"

namespace arc {

/// 17 significant digits, so a write/read cycle is lossless.
inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << v;
  return os.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    require(pos == s.size(), ErrorCode::kParse, "trailing characters in number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kParse, "not a number: '" + s + "'");
  }
}

inline std::size_t parse_index(const std::string& s) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    require(pos == s.size() && v >= 0, ErrorCode::kParse, "not a non-negative integer: '" + s + "'");
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kParse, "not an integer: '" + s + "'");
  }
}

/// Exact rational such as 8/255, used for every externally visible eps.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
  bool operator==(const Fraction&) const = default;
};

inline Fraction parse_fraction(const std::string& s) {
  const auto slash = s.find('/');
  try {
    std::size_t p1 = 0, p2 = 0;
    Fraction f;
    if (slash == std::string::npos) {
      f.num = std::stoll(s, &p1);
      require(p1 == s.size(), ErrorCode::kParse, "bad fraction '" + s + "'");
      return f;
    }
    const std::string a = s.substr(0, slash), b = s.substr(slash + 1);
    f.num = std::stoll(a, &p1);
    f.den = std::stoll(b, &p2);
    require(p1 == a.size() && p2 == b.size(), ErrorCode::kParse, "bad fraction '" + s + "'");
    require(f.den > 0 && f.num >= 0, ErrorCode::kInvalidArgument, "fraction must be N/D with N >= 0, D > 0");
    return f;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kParse, "bad fraction '" + s + "'");
  }
}

}  // namespace arc
