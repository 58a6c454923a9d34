#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace assouad {

using Rational = mpq_class;
using Poly = std::vector<Rational>;  // low degree first

struct precondition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Rational parse_rational(std::string s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) throw precondition_error("empty rational");
  s = s.substr(b, e - b + 1);
  if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    std::size_t frac = s.size() - dot - 1;
    if (digits.empty() || digits == "-" || digits == "+")
      throw precondition_error("bad decimal: " + s);
    if (digits[0] == '+') digits.erase(0, 1);
    mpz_class num, den;
    if (num.set_str(digits, 10) != 0) throw precondition_error("bad decimal: " + s);
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac);
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
  if (!s.empty() && s[0] == '+') s.erase(0, 1);
  Rational q;
  if (q.set_str(s, 10) != 0) throw precondition_error("bad rational: " + s);
  if (q.get_den() == 0) throw precondition_error("zero denominator: " + s);
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double log_abs(const mpz_class& z) {
  long e = 0;
  double m = mpz_get_d_2exp(&e, z.get_mpz_t());
  return std::log(std::fabs(m)) + static_cast<double>(e) * std::log(2.0);
}

// natural log of |q|, accurate for rationals far outside double range
inline double log_rational(const Rational& q) {
  if (q == 0) return -HUGE_VAL;
  return log_abs(q.get_num()) - log_abs(q.get_den());
}

inline Rational pow_rational(const Rational& q, unsigned e) {
  Rational r(1), b = q;
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

namespace poly {

inline void trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

inline int degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

inline Rational eval(const Poly& p, const Rational& x) {
  Rational acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline Poly derivative(const Poly& p) {
  Poly d;
  for (std::size_t k = 1; k < p.size(); ++k) d.push_back(p[k] * static_cast<long>(k));
  trim(d);
  return d;
}

inline Poly sub(Poly a, const Poly& b) {
  if (a.size() < b.size()) a.resize(b.size(), 0);
  for (std::size_t k = 0; k < b.size(); ++k) a[k] -= b[k];
  trim(a);
  return a;
}

inline Poly mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly c(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  }
  trim(c);
  return c;
}

// quotient and remainder; b nonzero
inline std::pair<Poly, Poly> divmod(Poly a, const Poly& b) {
  trim(a);
  if (b.empty()) throw std::domain_error("polynomial division by zero");
  int db = degree(b);
  Poly q;
  if (degree(a) >= db) q.assign(a.size() - b.size() + 1, 0);
  while (!a.empty() && degree(a) >= db) {
    int shift = degree(a) - db;
    Rational c = a.back() / b.back();
    q[shift] = c;
    for (int k = 0; k <= db; ++k) a[shift + k] -= c * b[k];
    a.pop_back();
    trim(a);
  }
  trim(q);
  return {q, a};
}

inline Poly rem(const Poly& a, const Poly& b) { return divmod(a, b).second; }

inline Poly monic(Poly p) {
  trim(p);
  if (p.empty()) return p;
  Rational lc = p.back();
  for (auto& c : p) c /= lc;
  return p;
}

inline Poly gcd(Poly a, Poly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = rem(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return monic(a);
}

inline int sign_changes(const std::vector<Rational>& vals) {
  int changes = 0, last = 0;
  for (const auto& v : vals) {
    int s = sgn(v);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

// distinct real roots in (lo, hi]
inline int sturm_count(const Poly& p, const Rational& lo, const Rational& hi) {
  std::vector<Poly> seq{p, derivative(p)};
  while (!seq.back().empty() && degree(seq.back()) > 0) {
    Poly r = rem(seq[seq.size() - 2], seq.back());
    for (auto& c : r) c = -c;
    if (r.empty()) break;
    seq.push_back(r);
  }
  std::vector<Rational> at_lo, at_hi;
  for (const auto& s : seq) {
    at_lo.push_back(eval(s, lo));
    at_hi.push_back(eval(s, hi));
  }
  return sign_changes(at_lo) - sign_changes(at_hi);
}

}  // namespace poly

class NumberField {
 public:
  struct Data {
    Poly min_poly;
    Rational lo, hi;  // refined isolating interval
    Rational orig_lo, orig_hi;
    std::vector<long> int_coeffs;
    double approx = 0;
  };

  NumberField() : NumberField(rationals()) {}

  NumberField(const std::vector<long>& min_poly, Rational lo, Rational hi) {
    if (min_poly.size() < 2) throw precondition_error("min_poly must have degree >= 1");
    if (min_poly.back() != 1) throw precondition_error("min_poly must be monic");
    if (lo > hi) throw precondition_error("isolating interval reversed");
    auto d = std::make_shared<Data>();
    d->int_coeffs = min_poly;
    for (long c : min_poly) d->min_poly.emplace_back(c);
    Poly g = poly::gcd(d->min_poly, poly::derivative(d->min_poly));
    if (poly::degree(g) > 0) throw precondition_error("min_poly is not squarefree");
    d->orig_lo = lo;
    d->orig_hi = hi;
    const Poly& p = d->min_poly;
    if (lo == hi) {
      if (poly::eval(p, lo) != 0) throw precondition_error("degenerate interval is not a root");
    } else {
      Rational plo = poly::eval(p, lo), phi = poly::eval(p, hi);
      if (plo == 0 || phi == 0) throw precondition_error("root on isolating interval endpoint");
      if (poly::sturm_count(p, lo, hi) != 1)
        throw precondition_error("isolating interval does not contain exactly one root");
      if (sgn(plo) == sgn(phi)) throw precondition_error("no sign change on isolating interval");
      Rational eps(1);
      eps /= mpz_class(1) << 80;
      while (hi - lo > eps) {
        Rational mid = (lo + hi) / 2;
        Rational pm = poly::eval(p, mid);
        if (pm == 0) {
          lo = hi = mid;
          break;
        }
        if (sgn(pm) == sgn(plo)) lo = mid;
        else hi = mid;
      }
    }
    d->lo = lo;
    d->hi = hi;
    d->approx = Rational((lo + hi) / 2).get_d();
    data_ = std::move(d);
  }

  static NumberField rationals() {
    static const NumberField q(std::vector<long>{0, 1}, 0, 0);
    return q;
  }
  static NumberField golden() { return NumberField(std::vector<long>{-1, -1, 1}, 1, 2); }

  int degree() const { return static_cast<int>(data_->min_poly.size()) - 1; }
  const Poly& min_poly() const { return data_->min_poly; }
  const std::vector<long>& int_coeffs() const { return data_->int_coeffs; }
  const Rational& lo() const { return data_->lo; }
  const Rational& hi() const { return data_->hi; }
  double approx() const { return data_->approx; }
  std::pair<Rational, Rational> isolating_interval() const { return {data_->orig_lo, data_->orig_hi}; }
  const Data* id() const { return data_.get(); }
  bool same(const NumberField& o) const {
    return data_ == o.data_ || data_->min_poly == o.data_->min_poly;
  }

 private:
  std::shared_ptr<const Data> data_;
};

class FieldElement {
 public:
  FieldElement() : field_(NumberField::rationals()), c_(1, 0) {}
  FieldElement(const NumberField& f, Rational q) : field_(f), c_(f.degree(), 0) { c_[0] = std::move(q); }
  FieldElement(const NumberField& f, Poly coeffs) : field_(f) {
    poly::trim(coeffs);
    c_ = poly::rem(coeffs, f.min_poly());
    c_.resize(f.degree(), 0);
  }

  static FieldElement root(const NumberField& f) {
    Poly x{0, 1};
    return FieldElement(f, x);
  }

  const NumberField& field() const { return field_; }
  const Poly& coeffs() const { return c_; }
  bool is_zero() const {
    for (const auto& c : c_)
      if (c != 0) return false;
    return true;
  }
  bool is_rational() const {
    for (std::size_t k = 1; k < c_.size(); ++k)
      if (c_[k] != 0) return false;
    return true;
  }
  Rational rational_value() const {
    if (!is_rational()) throw std::logic_error("element is not rational");
    return c_[0];
  }

  FieldElement operator+(const FieldElement& o) const {
    check(o);
    FieldElement r = *this;
    for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] += o.c_[k];
    return r;
  }
  FieldElement operator-(const FieldElement& o) const {
    check(o);
    FieldElement r = *this;
    for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] -= o.c_[k];
    return r;
  }
  FieldElement operator-() const {
    FieldElement r = *this;
    for (auto& c : r.c_) c = -c;
    return r;
  }
  FieldElement operator*(const FieldElement& o) const {
    check(o);
    if (c_.size() == 1) return FieldElement(field_, c_[0] * o.c_[0]);
    return FieldElement(field_, poly::mul(c_, o.c_));
  }
  FieldElement operator*(const Rational& q) const {
    FieldElement r = *this;
    for (auto& c : r.c_) c *= q;
    return r;
  }
  FieldElement inverse() const {
    if (is_zero()) throw std::domain_error("division by zero in number field");
    if (c_.size() == 1) return FieldElement(field_, Rational(1) / c_[0]);
    // extended Euclid: s*a + t*p = g
    Poly a = c_, p = field_.min_poly();
    poly::trim(a);
    Poly r0 = p, r1 = a, s0{}, s1{1};
    while (!r1.empty()) {
      auto [q, r] = poly::divmod(r0, r1);
      Poly s = poly::sub(s0, poly::mul(q, s1));
      r0 = std::move(r1);
      r1 = std::move(r);
      s0 = std::move(s1);
      s1 = std::move(s);
    }
    if (poly::degree(r0) != 0) throw std::domain_error("element not invertible: min_poly is reducible");
    Rational g = r0[0];
    for (auto& c : s0) c /= g;
    return FieldElement(field_, s0);
  }
  FieldElement operator/(const FieldElement& o) const { return *this * o.inverse(); }
  FieldElement& operator+=(const FieldElement& o) { return *this = *this + o; }
  FieldElement& operator-=(const FieldElement& o) { return *this = *this - o; }
  FieldElement& operator*=(const FieldElement& o) { return *this = *this * o; }

  FieldElement pow(unsigned e) const {
    FieldElement r(field_, Rational(1)), b = *this;
    while (e) {
      if (e & 1) r = r * b;
      b = b * b;
      e >>= 1;
    }
    return r;
  }

  bool operator==(const FieldElement& o) const { return c_ == o.c_; }
  bool operator!=(const FieldElement& o) const { return !(*this == o); }

  std::string str() const {
    if (c_.size() == 1) return c_[0].get_str();
    std::string s;
    for (std::size_t k = 0; k < c_.size(); ++k) {
      if (k) s += ",";
      s += c_[k].get_str();
    }
    return s;
  }

  std::size_t hash() const {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (const auto& c : c_)
      h ^= std::hash<std::string>{}(c.get_str()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }

 private:
  void check(const FieldElement& o) const {
    if (c_.size() != o.c_.size() || !field_.same(o.field_))
      throw std::logic_error("mixing elements of different fields");
  }

  NumberField field_;
  Poly c_;
};

namespace detail {

struct RInterval {
  Rational lo, hi;
};

inline RInterval imul(const RInterval& a, const RInterval& b) {
  Rational p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  RInterval r{p[0], p[0]};
  for (auto& v : p) {
    if (v < r.lo) r.lo = v;
    if (v > r.hi) r.hi = v;
  }
  return r;
}

inline RInterval horner(const Poly& c, const Rational& lo, const Rational& hi) {
  RInterval acc{0, 0}, x{lo, hi};
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    acc = imul(acc, x);
    acc.lo += *it;
    acc.hi += *it;
  }
  return acc;
}

}  // namespace detail

inline int fe_sign(const FieldElement& a) {
  if (a.is_zero()) return 0;
  if (a.is_rational()) return sgn(a.coeffs()[0]);
  const auto& f = a.field();
  {
    // floating filter with a generous rounding bound
    double x = f.approx(), v = 0, mag = 0, xp = 1;
    bool ok = true;
    for (const auto& c : a.coeffs()) {
      double cd = c.get_d();
      double ac = std::fabs(cd);
      if (ac != 0 && (ac > 1e280 || ac < 1e-280)) ok = false;
      v += cd * xp;
      mag += ac * std::fabs(xp);
      xp *= x;
    }
    double bound = mag * 1e-12 + 1e-280;
    if (ok && std::isfinite(v) && std::fabs(v) > bound) return v > 0 ? 1 : -1;
  }
  Rational lo = f.lo(), hi = f.hi();
  const Poly& p = f.min_poly();
  int plo = sgn(poly::eval(p, lo));
  for (int round = 0;; ++round) {
    auto v = detail::horner(a.coeffs(), lo, hi);
    if (v.lo > 0) return 1;
    if (v.hi < 0) return -1;
    if (round == 64) {
      Poly g = poly::gcd(a.coeffs(), p);
      if (poly::degree(g) > 0 && (lo == hi ? poly::eval(g, lo) == 0 : poly::sturm_count(g, lo, hi) > 0))
        throw std::domain_error("nonzero element vanishes at root: min_poly is reducible");
    }
    if (lo == hi) return sgn(poly::eval(a.coeffs(), lo));
    Rational mid = (lo + hi) / 2;
    int pm = sgn(poly::eval(p, mid));
    if (pm == 0) {
      lo = hi = mid;
    } else if (pm == plo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
}

inline int fe_cmp(const FieldElement& a, const FieldElement& b) { return fe_sign(a - b); }
inline bool operator<(const FieldElement& a, const FieldElement& b) { return fe_cmp(a, b) < 0; }
inline bool operator>(const FieldElement& a, const FieldElement& b) { return fe_cmp(a, b) > 0; }
inline bool operator<=(const FieldElement& a, const FieldElement& b) { return fe_cmp(a, b) <= 0; }
inline bool operator>=(const FieldElement& a, const FieldElement& b) { return fe_cmp(a, b) >= 0; }
inline FieldElement fe_abs(const FieldElement& a) { return fe_sign(a) < 0 ? -a : a; }
inline const FieldElement& fe_min(const FieldElement& a, const FieldElement& b) { return b < a ? b : a; }
inline const FieldElement& fe_max(const FieldElement& a, const FieldElement& b) { return a < b ? b : a; }

enum class FieldOp { add, sub, mul, div };

inline FieldElement fe_arith(const FieldElement& a, const FieldElement& b, FieldOp op) {
  switch (op) {
    case FieldOp::add: return a + b;
    case FieldOp::sub: return a - b;
    case FieldOp::mul: return a * b;
    case FieldOp::div: return a / b;
  }
  throw std::logic_error("unknown op");
}

// value at the refined interval midpoint; error below 2^-80 times the local slope
inline double to_double(const FieldElement& a) {
  const auto& f = a.field();
  Rational mid = (f.lo() + f.hi()) / 2;
  return poly::eval(a.coeffs(), mid).get_d();
}

inline FieldElement parse_element(const NumberField& f, const std::string& s) {
  Poly c;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) c.push_back(parse_rational(tok));
  if (static_cast<int>(c.size()) > f.degree())
    throw precondition_error("too many coefficients for field of degree " + std::to_string(f.degree()));
  return FieldElement(f, c);
}

struct FieldElementHash {
  std::size_t operator()(const FieldElement& a) const { return a.hash(); }
};

}  // namespace assouad
