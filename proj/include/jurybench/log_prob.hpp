// Copyright 2026 The jurybench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <gmpxx.h>

#include <cmath>
#include <compare>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace jurybench {

/// Natural log of a non-negative big integer, accurate far beyond double range.
inline double log_of(const mpz_class& z) {
  if (sgn(z) <= 0) return -std::numeric_limits<double>::infinity();
  long exp2 = 0;
  const double mantissa = mpz_get_d_2exp(&exp2, z.get_mpz_t());
  return std::log(mantissa) + static_cast<double>(exp2) * std::numbers::ln2;
}

/// Natural log of a positive rational with relative error near machine
/// epsilon, including q close to 1 (log1p path) and q far below 1e-300.
inline double log_of(const mpq_class& q) {
  if (sgn(q) <= 0) return -std::numeric_limits<double>::infinity();
  if (q >= mpq_class(1, 2)) {
    const mpq_class gap = 1 - q;
    return std::log1p(-gap.get_d());
  }
  if (q >= mpq_class(1, mpz_class("1" + std::string(300, '0')))) return std::log(q.get_d());
  return log_of(q.get_num()) - log_of(q.get_den());
}

/// Formats a double with 12 significant digits in scientific notation, the
/// fixed float format of every CSV this project writes.
inline std::string format_sci(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

/// A probability carried in the natural-log domain, optionally with the exact
/// rational it was computed from. Values as small as 1e-100000 stay
/// representable; the exact form makes equality checks bit-for-bit.
class LogProb {
 public:
  /// Probability 0.
  LogProb() : exact_(mpq_class(0)) {}

  static LogProb zero() { return from_rational(mpq_class(0)); }
  static LogProb one() { return from_rational(mpq_class(1)); }

  static LogProb from_rational(mpq_class q) {
    q.canonicalize();
    if (sgn(q) < 0 || q > 1) {
      throw std::invalid_argument("probability must lie in [0, 1], got " + q.get_str());
    }
    LogProb p(Tag{});
    p.log_value_ = log_of(q);
    p.exact_ = std::move(q);
    return p;
  }

  static LogProb from_log(double log_value) {
    if (std::isnan(log_value) || log_value > 0.0) {
      throw std::invalid_argument("log-probability must be <= 0");
    }
    LogProb p(Tag{});
    p.log_value_ = log_value;
    return p;
  }

  double log() const { return log_value_; }
  double log10() const { return log_value_ / std::numbers::ln10; }
  /// Plain double; underflows to 0 below ~1e-308.
  double value() const { return std::exp(log_value_); }
  bool is_zero() const { return std::isinf(log_value_); }
  bool has_exact() const { return exact_.has_value(); }
  const std::optional<mpq_class>& exact() const { return exact_; }

  /// "numerator/denominator", or empty when no exact form exists.
  std::string rational_string() const {
    if (!exact_) return {};
    return exact_->get_num().get_str() + "/" + exact_->get_den().get_str();
  }

  /// Decimal rendering with `digits` significant digits, e.g. "2.97553142692e-21".
  /// Uses the exact rational when present so the exponent is never clamped.
  std::string scientific(int digits = 12) const {
    if (is_zero()) return "0";
    std::string mant;
    long exp10 = 0;
    if (exact_) {
      mpf_class f(*exact_, 64 + 4 * static_cast<unsigned>(digits));
      mp_exp_t e = 0;
      mant = f.get_str(e, 10, static_cast<std::size_t>(digits));
      exp10 = static_cast<long>(e) - 1;
    } else {
      const double l10 = log10();
      exp10 = static_cast<long>(std::floor(l10));
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.*f", digits - 1, std::pow(10.0, l10 - static_cast<double>(exp10)));
      std::string s = buf;
      if (s.starts_with("10")) {  // rounding carried into a new digit
        ++exp10;
        s = "1." + std::string(static_cast<std::size_t>(digits - 1), '0');
      }
      mant.reserve(s.size());
      for (char c : s) {
        if (c != '.') mant.push_back(c);
      }
    }
    mant.resize(static_cast<std::size_t>(digits), '0');
    char ebuf[32];
    std::snprintf(ebuf, sizeof ebuf, "e%c%02ld", exp10 < 0 ? '-' : '+', exp10 < 0 ? -exp10 : exp10);
    std::string out(1, mant[0]);
    if (digits > 1) out += "." + mant.substr(1);
    return out + ebuf;
  }

  friend bool operator==(const LogProb& a, const LogProb& b) {
    if (a.exact_ && b.exact_) return *a.exact_ == *b.exact_;
    return a.log_value_ == b.log_value_;
  }

  friend std::partial_ordering operator<=>(const LogProb& a, const LogProb& b) {
    if (a.exact_ && b.exact_) {
      const int c = cmp(*a.exact_, *b.exact_);
      return c < 0 ? std::partial_ordering::less
                   : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
    }
    return a.log_value_ <=> b.log_value_;
  }

 private:
  struct Tag {};
  explicit LogProb(Tag) {}

  double log_value_ = -std::numeric_limits<double>::infinity();
  std::optional<mpq_class> exact_;
};

/// Exact ratio of two non-negative big integers as a probability.
inline LogProb ratio(const mpz_class& num, const mpz_class& den) {
  if (sgn(den) <= 0) throw std::invalid_argument("probability denominator must be positive");
  return LogProb::from_rational(mpq_class(num, den));
}

}  // namespace jurybench
