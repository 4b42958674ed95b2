#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

namespace tsnr {

// Exact arithmetic for every analytical quantity: seconds, bits, bits per second.
using Rational = mpq_class;

// Simulator and configuration granularity.
using Nanos = std::int64_t;
using Bits = std::int64_t;

inline constexpr Nanos kNanosPerSecond = 1'000'000'000;

inline Rational rat(std::int64_t v) { return Rational(mpz_class(static_cast<long>(v))); }

inline Rational rat(std::int64_t num, std::int64_t den) {
  Rational r(mpz_class(static_cast<long>(num)), mpz_class(static_cast<long>(den)));
  r.canonicalize();
  return r;
}

inline Rational seconds_from_ns(Nanos ns) { return rat(ns, kNanosPerSecond); }
inline Rational seconds_from_us(std::int64_t us) { return rat(us, 1'000'000); }

mpz_class floor_z(const Rational& x);
mpz_class ceil_z(const Rational& x);

std::int64_t to_i64(const mpz_class& z);  // throws std::overflow_error
std::int64_t ceil_i64(const Rational& x);
std::int64_t floor_i64(const Rational& x);

// Rounds seconds up to whole nanoseconds.
Nanos ceil_ns(const Rational& seconds);

double to_double(const Rational& x);

// Fixed-point decimal, truncated toward zero. Deterministic across platforms.
std::string to_decimal(const Rational& x, int digits);

// Parses "12", "-3/4" or "0.125" exactly.
Rational parse_rational(const std::string& text);

}  // namespace tsnr
