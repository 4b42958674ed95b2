#include "tsnr/rational.hpp"

#include <limits>
#include <stdexcept>

namespace tsnr {

mpz_class floor_z(const Rational& x) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

mpz_class ceil_z(const Rational& x) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

std::int64_t to_i64(const mpz_class& z) {
  if (!z.fits_slong_p()) throw std::overflow_error("integer does not fit in 64 bits");
  return static_cast<std::int64_t>(z.get_si());
}

std::int64_t ceil_i64(const Rational& x) { return to_i64(ceil_z(x)); }
std::int64_t floor_i64(const Rational& x) { return to_i64(floor_z(x)); }

Nanos ceil_ns(const Rational& seconds) { return ceil_i64(seconds * rat(kNanosPerSecond)); }

double to_double(const Rational& x) { return x.get_d(); }

std::string to_decimal(const Rational& x, int digits) {
  mpz_class scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  Rational scaled = abs(x) * Rational(scale);
  mpz_class q;
  mpz_tdiv_q(q.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  std::string s = q.get_str();
  if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits + 1 - static_cast<int>(s.size())), '0');
  if (digits > 0) s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  if (sgn(x) < 0 && q != 0) s.insert(0, "-");
  return s;
}

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty number");
  auto dot = text.find('.');
  if (dot == std::string::npos) {
    Rational r;
    if (r.set_str(text, 10) != 0) throw std::invalid_argument("bad number: " + text);
    if (r.get_den() == 0) throw std::invalid_argument("zero denominator: " + text);
    r.canonicalize();
    return r;
  }
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  mpz_class num;
  if (digits.empty() || digits == "-" || num.set_str(digits, 10) != 0)
    throw std::invalid_argument("bad number: " + text);
  mpz_class den = 1;
  for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
  Rational r(num, den);
  r.canonicalize();
  return r;
}

}  // namespace tsnr
