#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace s2a {

/// Exact rational number. Gold math answers, judge scores and aggregated means
/// are all carried in this type so no float rounding enters a comparison.
class Rational {
 public:
  using Value = boost::multiprecision::cpp_rational;

  Rational() = default;
  Rational(long long v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  Rational(long long num, long long den);
  explicit Rational(Value v) : value_(std::move(v)) {}

  /// Accepts "12", "-3.25", ".5", "7/8". No exponents, no separators.
  static std::optional<Rational> parse(std::string_view text);

  /// Canonical exact form: "5", "-23/5".
  std::string str() const;

  /// Fixed-point rendering rounded half away from zero, e.g. to_decimal(2) of 2/3 is "0.67".
  std::string to_decimal(int places) const;

  double to_double() const;

  bool is_integer() const;

  const Value& value() const noexcept { return value_; }

  friend Rational operator+(const Rational& a, const Rational& b) { return Rational(Value(a.value_ + b.value_)); }
  friend Rational operator-(const Rational& a, const Rational& b) { return Rational(Value(a.value_ - b.value_)); }
  friend Rational operator*(const Rational& a, const Rational& b) { return Rational(Value(a.value_ * b.value_)); }
  friend Rational operator/(const Rational& a, const Rational& b) { return Rational(Value(a.value_ / b.value_)); }
  Rational operator-() const { return Rational(Value(-value_)); }
  Rational& operator+=(const Rational& o) {
    value_ += o.value_;
    return *this;
  }

  friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (a.value_ > b.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  Value value_{0};
};

Rational abs(const Rational& r);

}  // namespace s2a
