#pragma once

#include <cstdint>
#include <string>

namespace hypertest {

/// Exact fraction in lowest terms with a positive denominator.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);
  friend Rational operator+(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend bool operator==(const Rational&, const Rational&) = default;
  std::string str() const;
  /// Decimal expansion, exact when it terminates within `max_digits`.
  std::string decimal(unsigned max_digits = 12) const;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

}  // namespace hypertest
