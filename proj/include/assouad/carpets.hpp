#pragma once

#include "alg_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace assouad {

struct BMCarpet {
  int m = 2, n = 3;
  std::vector<std::pair<int, int>> digits;
  std::vector<Rational> probs;
  bool vss = false;

  BMCarpet(int m_, int n_, std::vector<std::pair<int, int>> dg, std::vector<Rational> p)
      : m(m_), n(n_), digits(std::move(dg)), probs(std::move(p)) {
    if (!(2 <= m && m < n)) throw precondition_error("need 2 <= m < n");
    if (digits.empty() || digits.size() != probs.size()) throw precondition_error("digits and probabilities differ in length");
    std::set<std::pair<int, int>> seen;
    Rational total = 0;
    for (std::size_t i = 0; i < digits.size(); ++i) {
      probs[i].canonicalize();
      auto [a, b] = digits[i];
      if (a < 0 || a >= m || b < 0 || b >= n) throw precondition_error("digit out of range");
      if (!seen.insert(digits[i]).second) throw precondition_error("digit pairs must be distinct");
      if (probs[i] <= 0) throw precondition_error("probabilities must be positive");
      total += probs[i];
    }
    if (total != 1) throw precondition_error("probabilities must sum to 1");
    vss = check_vss();
  }

  std::size_t size() const { return digits.size(); }

  // f_i([-eps, 1+eps]^2) pairwise disjoint with eps = 1/(4 max(m,n))
  bool check_vss() const {
    Rational eps(1, 4 * std::max(m, n));
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) {
        auto [a1, b1] = digits[i];
        auto [a2, b2] = digits[j];
        Rational x1lo = (a1 - eps) / m, x1hi = (a1 + 1 + eps) / m;
        Rational x2lo = (a2 - eps) / m, x2hi = (a2 + 1 + eps) / m;
        Rational y1lo = (b1 - eps) / n, y1hi = (b1 + 1 + eps) / n;
        Rational y2lo = (b2 - eps) / n, y2hi = (b2 + 1 + eps) / n;
        bool xs = x1hi < x2lo || x2hi < x1lo;
        bool ys = y1hi < y2lo || y2hi < y1lo;
        if (!xs && !ys) return false;
      }
    return true;
  }

  Rational column_mass(int a) const {
    Rational s = 0;
    for (std::size_t j = 0; j < size(); ++j)
      if (digits[j].first == a) s += probs[j];
    return s;
  }
};

inline Rational p_col(const BMCarpet& c, std::size_t i) {
  if (i >= c.size()) throw std::out_of_range("map index");
  return c.column_mass(c.digits[i].first);
}

// m^-k1 <= R < m^(-k1+1), n^-k2 <= R < n^(-k2+1)
inline std::pair<int, int> k1_k2(const Rational& R, int m, int n) {
  if (!(R > 0 && R < 1)) throw precondition_error("scale must lie in (0,1)");
  auto k = [&](int base) {
    int e = 0;
    Rational p = 1;
    while (p > R) {
      p /= base;
      ++e;
    }
    return e;
  };
  return {k(m), k(n)};
}

// k2 of the scale m^-e: least k with n^k >= m^e
inline int k2_of_level(const BMCarpet& c, int e) {
  mpz_class me, nk = 1;
  mpz_ui_pow_ui(me.get_mpz_t(), c.m, e);
  int k = 0;
  while (nk < me) {
    nk *= c.n;
    ++k;
  }
  return k;
}

enum class VssPolicy { require, report };

struct BMDimension {
  double value = 0, term1 = 0, term2 = 0;
  bool vss_certified = false;
  std::string note;
};

inline BMDimension dimL_bm(const BMCarpet& c, VssPolicy policy = VssPolicy::require) {
  if (!c.vss && policy == VssPolicy::require)
    throw precondition_error("very strong separation fails; use the approximate-square estimate instead");
  BMDimension r;
  r.term1 = std::numeric_limits<double>::infinity();
  r.term2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i) {
    Rational pc = p_col(c, i);
    r.term1 = std::min(r.term1, -log_rational(pc) / std::log(double(c.m)));
    r.term2 = std::min(r.term2, log_rational(pc / c.probs[i]) / std::log(double(c.n)));
  }
  r.value = r.term1 + r.term2;
  r.vss_certified = c.vss;
  r.note = c.vss ? "lower spectrum flat for small t; quasi-lower equals lower"
                 : "separation not certified; formula value reported but not guaranteed";
  return r;
}

struct SquareExponent {
  double value = std::numeric_limits<double>::infinity();
  int coarse_level = 0, fine_level = 0;  // R = m^-a, r = m^-b
  int pairs = 0;
};

// minimal ratio mu(Q_R)/mu(Q_r) over nested approximate squares with R = m^-a, r = m^-b,
// in the regime k2(R) < k2(r) < k1(R) < k1(r) and k2(r) - k2(R) = depth
inline SquareExponent approximate_square_exponent(const BMCarpet& c, int depth,
                                                  VssPolicy policy = VssPolicy::require) {
  if (depth < 4) throw precondition_error("depth must be at least 4");
  if (!c.vss && policy == VssPolicy::require)
    throw precondition_error("very strong separation fails; approximate squares do not model balls");
  Rational worst_fine = -1, worst_col = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    Rational pc = p_col(c, i);
    Rational q = pc / c.probs[i];
    if (worst_fine < 0 || q < worst_fine) worst_fine = q;
  }
  for (int a = 0; a < c.m; ++a) {
    Rational pc = c.column_mass(a);
    if (pc > worst_col) worst_col = pc;
  }
  SquareExponent out;
  double lm = std::log(double(c.m));
  auto k2_of = [&](int e) { return k2_of_level(c, e); };
  int a_max = 16 * depth;
  for (int a = 1; a <= a_max; ++a) {
    int k2R = k2_of(a);
    for (int b = a + 1;; ++b) {
      int k2r = k2_of(b);
      if (k2r - k2R > depth || k2r >= a) break;
      if (k2r - k2R != depth || k2r <= k2R) continue;
      // positions k2(R)+1..k2(r) contribute p_col/p; positions a+1..b contribute 1/p_col
      double lr = depth * log_rational(worst_fine) - (b - a) * log_rational(worst_col);
      double ex = lr / ((b - a) * lm);
      ++out.pairs;
      if (ex < out.value) {
        out.value = ex;
        out.coarse_level = a;
        out.fine_level = b;
      }
    }
  }
  if (out.pairs == 0) throw precondition_error("no scale pair in the approximate-square regime");
  return out;
}

// exact measure of the approximate square of scale m^-e containing the word x (length >= k1)
inline Rational approximate_square_mass(const BMCarpet& c, const std::vector<int>& x, int e) {
  int k1 = e;
  int k2 = k2_of_level(c, e);
  if (static_cast<int>(x.size()) < k1) throw precondition_error("word shorter than k1");
  Rational mass = 1;
  for (int i = 0; i < k1; ++i) mass *= i < k2 ? c.probs[x[i]] : p_col(c, x[i]);
  return mass;
}

}  // namespace assouad
