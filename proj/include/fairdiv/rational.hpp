#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fairdiv {

class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Exact rational with arbitrary-precision numerator/denominator.
///
/// Thin value wrapper over GMP's mpq_class. Always canonical (reduced,
/// positive denominator), no expression templates leak into client code,
/// and parsing accepts both "p/q" fractions and finite decimals.
class Rat {
public:
  Rat() : q_(0) {}
  Rat(int n) : q_(n) {}
  Rat(long n) : q_(static_cast<signed long>(n)) {}
  Rat(long n, long d) : q_(n, d) {
    if (d == 0) throw std::domain_error("Rat: zero denominator");
    q_.canonicalize();
  }
  explicit Rat(const mpz_class& z) : q_(z) {}
  Rat(const mpz_class& n, const mpz_class& d) : q_(n, d) {
    if (d == 0) throw std::domain_error("Rat: zero denominator");
    q_.canonicalize();
  }
  explicit Rat(const mpq_class& q) : q_(q) { q_.canonicalize(); }

  /// Accepts "p/q", integers ("-3"), and finite decimals ("0.25", "1e-3" is
  /// not supported). Throws ParseError on anything else.
  static Rat parse(std::string_view s);

  const mpz_class& num() const { return q_.get_num(); }
  const mpz_class& den() const { return q_.get_den(); }

  Rat operator-() const { return Rat(mpq_class(-q_)); }
  Rat& operator+=(const Rat& o) { q_ += o.q_; return *this; }
  Rat& operator-=(const Rat& o) { q_ -= o.q_; return *this; }
  Rat& operator*=(const Rat& o) { q_ *= o.q_; return *this; }
  Rat& operator/=(const Rat& o) {
    if (o.q_ == 0) throw std::domain_error("Rat: division by zero");
    q_ /= o.q_;
    return *this;
  }

  friend Rat operator+(Rat a, const Rat& b) { return a += b; }
  friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
  friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
  friend Rat operator/(Rat a, const Rat& b) { return a /= b; }

  friend bool operator==(const Rat& a, const Rat& b) { return mpq_equal(a.q_.get_mpq_t(), b.q_.get_mpq_t()) != 0; }
  friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
    const int c = mpq_cmp(a.q_.get_mpq_t(), b.q_.get_mpq_t());
    return c < 0 ? std::strong_ordering::less
         : c > 0 ? std::strong_ordering::greater
                 : std::strong_ordering::equal;
  }

  int sign() const { return mpq_sgn(q_.get_mpq_t()); }
  bool is_integer() const { return q_.get_den() == 1; }
  bool is_zero() const { return sign() == 0; }

  double to_double() const { return q_.get_d(); }

  /// "p/q" when the denominator is not 1, plain "p" otherwise.
  std::string str() const {
    if (is_integer()) return q_.get_num().get_str();
    return q_.get_num().get_str() + "/" + q_.get_den().get_str();
  }

  /// Fixed-point decimal with `digits` places, rounded toward zero.
  std::string str_decimal(int digits) const;

  friend std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

  const mpq_class& raw() const { return q_; }

private:
  mpq_class q_;
};

inline Rat abs(const Rat& r) { return r.sign() < 0 ? -r : r; }

inline mpz_class floor_int(const Rat& r) {
  mpz_class out;
  mpz_fdiv_q(out.get_mpz_t(), r.num().get_mpz_t(), r.den().get_mpz_t());
  return out;
}

inline mpz_class ceil_int(const Rat& r) {
  mpz_class out;
  mpz_cdiv_q(out.get_mpz_t(), r.num().get_mpz_t(), r.den().get_mpz_t());
  return out;
}

inline Rat floor_rat(const Rat& r) { return Rat(floor_int(r)); }
inline Rat ceil_rat(const Rat& r) { return Rat(ceil_int(r)); }

inline Rat min(const Rat& a, const Rat& b) { return a <= b ? a : b; }
inline Rat max(const Rat& a, const Rat& b) { return a >= b ? a : b; }

/// Compares a (rational) against sqrt(s) for s >= 0, exactly: -1, 0, +1.
inline int cmp_sqrt(const Rat& a, const Rat& s) {
  if (s.sign() < 0) throw std::domain_error("cmp_sqrt: negative radicand");
  if (a.sign() < 0) return -1;
  const Rat a2 = a * a;
  return a2 < s ? -1 : a2 == s ? 0 : 1;
}

/// Rational approximation of sqrt(s) with denominator 10^digits, from below.
inline Rat sqrt_approx(long s, int digits) {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  mpz_class target = scale * scale * s;
  mpz_class root;
  mpz_sqrt(root.get_mpz_t(), target.get_mpz_t());
  return Rat(root, scale);
}

inline Rat Rat::parse(std::string_view s) {
  auto fail = [&] { throw ParseError("not a rational: \"" + std::string(s) + "\""); };
  if (s.empty()) fail();
  const auto slash = s.find('/');
  if (slash != std::string_view::npos) {
    mpz_class n, d;
    if (n.set_str(std::string(s.substr(0, slash)), 10) != 0) fail();
    if (d.set_str(std::string(s.substr(slash + 1)), 10) != 0) fail();
    if (d == 0) fail();
    return Rat(n, d);
  }
  const auto dot = s.find('.');
  if (dot == std::string_view::npos) {
    mpz_class n;
    if (n.set_str(std::string(s), 10) != 0) fail();
    return Rat(n);
  }
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = s.substr(dot + 1);
  if (frac.empty()) fail();
  bool neg = false;
  if (!whole.empty() && (whole.front() == '-' || whole.front() == '+')) {
    neg = whole.front() == '-';
    whole.remove_prefix(1);
  }
  std::string digits = std::string(whole) + std::string(frac);
  if (digits.empty()) fail();
  mpz_class n;
  if (n.set_str(digits, 10) != 0 || n < 0) fail();
  mpz_class d;
  mpz_ui_pow_ui(d.get_mpz_t(), 10, static_cast<unsigned long>(frac.size()));
  Rat out{n, d};
  return neg ? -out : out;
}

inline std::string Rat::str_decimal(int digits) const {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  mpz_class scaled;
  mpz_tdiv_q(scaled.get_mpz_t(), mpz_class(num() * scale).get_mpz_t(), den().get_mpz_t());
  const bool neg = scaled < 0;
  mpz_class mag = neg ? mpz_class(-scaled) : scaled;
  std::string s = mag.get_str();
  if (static_cast<int>(s.size()) <= digits) s.insert(0, digits + 1 - s.size(), '0');
  s.insert(s.size() - digits, ".");
  return (neg ? "-" : "") + s;
}

}  // namespace fairdiv
