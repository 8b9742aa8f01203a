#include "s2a/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace s2a {

namespace {

using boost::multiprecision::cpp_int;

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

cpp_int pow10(int n) {
  cpp_int r = 1;
  for (int i = 0; i < n; ++i) r *= 10;
  return r;
}

}  // namespace

Rational::Rational(long long num, long long den) {
  if (den == 0) throw std::domain_error("zero denominator");
  value_ = Value(num, den);
}

std::optional<Rational> Rational::parse(std::string_view text) {
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  if (text.empty()) return std::nullopt;

  Value v;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = text.substr(0, slash);
    auto den = text.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) return std::nullopt;
    cpp_int d{std::string(den)};
    if (d == 0) return std::nullopt;
    v = Value(cpp_int{std::string(num)}, d);
  } else {
    auto dot = text.find('.');
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (whole.empty() && frac.empty()) return std::nullopt;
    if (!whole.empty() && !all_digits(whole)) return std::nullopt;
    if (dot != std::string_view::npos && !all_digits(frac)) return std::nullopt;
    cpp_int w = whole.empty() ? cpp_int(0) : cpp_int(std::string(whole));
    if (frac.empty()) {
      v = Value(w);
    } else {
      const int places = static_cast<int>(frac.size());
      v = Value(w * pow10(places) + cpp_int(std::string(frac)), pow10(places));
    }
  }
  if (negative) v = -v;
  return Rational(std::move(v));
}

std::string Rational::str() const {
  const cpp_int num = boost::multiprecision::numerator(value_);
  const cpp_int den = boost::multiprecision::denominator(value_);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

std::string Rational::to_decimal(int places) const {
  const cpp_int num = boost::multiprecision::numerator(value_);
  const cpp_int den = boost::multiprecision::denominator(value_);
  const bool negative = num < 0;
  const cpp_int scaled = (negative ? cpp_int(-num) : num) * pow10(places);
  // Round half away from zero.
  cpp_int q = (2 * scaled + den) / (2 * den);
  std::string digits = q.str();
  if (places > 0) {
    if (digits.size() <= static_cast<std::size_t>(places)) {
      digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
  }
  if (negative && q != 0) digits.insert(0, "-");
  return digits;
}

double Rational::to_double() const { return value_.convert_to<double>(); }

bool Rational::is_integer() const { return boost::multiprecision::denominator(value_) == 1; }

Rational abs(const Rational& r) { return r < Rational(0) ? -r : r; }

}  // namespace s2a
