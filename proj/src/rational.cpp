#include "hypertest/rational.hpp"

#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace hypertest {

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw std::invalid_argument("zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  std::int64_t g = std::gcd(n < 0 ? -n : n, d);
  if (g == 0) g = 1;
  num = n / g;
  den = d / g;
}

namespace {

Rational reduce128(__int128 n, __int128 d) {
  auto abs128 = [](__int128 x) { return x < 0 ? -x : x; };
  __int128 a = abs128(n), b = d;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a == 0) a = 1;
  n /= a;
  d /= a;
  if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX) throw std::overflow_error("rational overflow");
  return Rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
}

}  // namespace

Rational operator+(Rational a, Rational b) {
  return reduce128(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                   static_cast<__int128>(a.den) * b.den);
}

Rational operator*(Rational a, Rational b) {
  return reduce128(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
}

std::string Rational::str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

std::string Rational::decimal(unsigned max_digits) const {
  std::int64_t n = num < 0 ? -num : num;
  std::string s = (num < 0 ? "-" : "") + std::to_string(n / den);
  std::int64_t r = n % den;
  if (r == 0) return s;
  s += '.';
  for (unsigned k = 0; k < max_digits && r != 0; ++k) {
    r *= 10;
    s += static_cast<char>('0' + r / den);
    r %= den;
  }
  return s;
}

}  // namespace hypertest
