#pragma once

#include "finite_type.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace assouad {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// counter-based uniform in [0,1); the same (seed, a, b) always gives the same value
inline double hash_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
  return double(h >> 11) * 0x1.0p-53;
}

inline Rational rational_from_double(double v) {
  Rational q(v);
  q.canonicalize();
  return q;
}

inline Rational rational_pow(Rational b, long e) {
  Rational r = 1;
  if (e < 0) {
    b = 1 / b;
    e = -e;
  }
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t t = std::min<std::size_t>(threads, n);
  for (std::size_t w = 0; w < t; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += t) body(i);
    });
  for (auto& th : pool) th.join();
}

struct MassBracket {
  Rational lo, hi;
  bool exact() const { return lo == hi; }
};

class MeasureOracle {
 public:
  virtual ~MeasureOracle() = default;
  virtual MassBracket ball_mass(const Rational& x, const Rational& r) const = 0;
  virtual std::vector<Rational> sample_support(std::uint64_t seed, int count) const = 0;
  virtual Rational min_radius() const = 0;
  virtual bool exact() const = 0;
  virtual std::string name() const = 0;
  virtual Rational support_diameter() const { return 1; }
  // geometric ratio of the oracle's natural scale ladder
  virtual Rational natural_ratio() const = 0;

  bool in_support(const Rational& x) const { return ball_mass(x, min_radius()).hi > 0; }
};

using OraclePtr = std::shared_ptr<const MeasureOracle>;

// measure on [0,1] defined by splitting b-adic cells; weights may depend on a small state carried down the tree
class CylinderOracle : public MeasureOracle {
 public:
  using Split = std::function<std::vector<Rational>(int depth, int state)>;
  using Next = std::function<int(int state, int digit)>;

  CylinderOracle(std::string name, int base, int depth_cap, Split split, Next next, int start_state = 0)
      : name_(std::move(name)), base_(base), cap_(depth_cap), split_(std::move(split)), next_(std::move(next)),
        start_(start_state) {
    if (base_ < 2) throw precondition_error("base must be at least 2");
    if (cap_ < 1) throw precondition_error("depth cap must be positive");
  }

  int base() const { return base_; }
  int depth_cap() const { return cap_; }

  Rational cylinder_mass(const std::vector<int>& word) const {
    Rational m = 1;
    int s = start_;
    for (std::size_t k = 0; k < word.size(); ++k) {
      if (word[k] < 0 || word[k] >= base_) throw precondition_error("digit out of range");
      m *= split_(static_cast<int>(k), s)[word[k]];
      s = next_(s, word[k]);
    }
    return m;
  }

  // F(y) = mu([0,y]) bracketed at the depth cap; exact when y is a cell endpoint
  std::pair<Rational, Rational> cdf(const Rational& y) const {
    if (y <= 0) return {0, 0};
    if (y >= 1) return {1, 1};
    Rational c = 0, width = 1, acc = 0, mass = 1;
    int s = start_;
    for (int k = 0; k < cap_; ++k) {
      width /= base_;
      Rational q = (y - c) / width;
      mpz_class d;
      mpz_fdiv_q(d.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
      int digit = std::min<int>(static_cast<int>(d.get_si()), base_ - 1);
      auto w = split_(k, s);
      for (int j = 0; j < digit; ++j) acc += mass * w[j];
      c += digit * width;
      mass *= w[digit];
      s = next_(s, digit);
      if (y == c || mass == 0) return {acc, acc};
    }
    return {acc, acc + mass};
  }

  MassBracket ball_mass(const Rational& x, const Rational& r) const override {
    if (r <= 0) throw precondition_error("radius must be positive");
    if (r < min_radius()) throw precondition_error("radius below the oracle's depth cap");
    auto hi = cdf(x + r), lo = cdf(x - r);
    Rational a = hi.first - lo.second, b = hi.second - lo.first;
    if (a < 0) a = 0;
    return {a, b};
  }

  std::vector<Rational> sample_support(std::uint64_t seed, int count) const override {
    if (count <= 0) return {};
    struct Cell {
      Rational left;
      int state;
    };
    std::vector<Cell> cells{{0, start_}};
    int depth = 0;
    Rational width = 1;
    while (static_cast<int>(cells.size()) < count && depth < cap_) {
      std::vector<Cell> next;
      width /= base_;
      for (const auto& c : cells) {
        auto w = split_(depth, c.state);
        for (int d = 0; d < base_; ++d)
          if (w[d] > 0) next.push_back({c.left + d * width, next_(c.state, d)});
      }
      cells = std::move(next);
      ++depth;
    }
    std::vector<Rational> pts;
    for (int i = 0; i < count; ++i) {
      std::size_t idx = (static_cast<std::size_t>(i) * cells.size()) / count;
      Cell c = cells[idx];
      Rational wd = width;
      for (int k = depth; k < cap_; ++k) {
        auto w = split_(k, c.state);
        std::vector<int> ok;
        for (int d = 0; d < base_; ++d)
          if (w[d] > 0) ok.push_back(d);
        int d = ok[static_cast<std::size_t>(hash_uniform(seed, i, k) * ok.size())];
        wd /= base_;
        c.left += d * wd;
        c.state = next_(c.state, d);
      }
      pts.push_back(c.left);
    }
    return pts;
  }

  Rational min_radius() const override { return rational_pow(Rational(1, base_), cap_); }
  bool exact() const override { return true; }
  std::string name() const override { return name_; }
  Rational natural_ratio() const override { return Rational(1, base_); }

 private:
  std::string name_;
  int base_, cap_;
  Split split_;
  Next next_;
  int start_;
};

struct CascadeParams {
  std::vector<long> n;       // n_1, n_2, ...
  std::vector<Rational> q;   // q_1, q_2, ...

  Rational t(std::size_t j) const { return rational_pow(q.at(j), -n.at(j)) * rational_pow(Rational(1, 2), 1 + n.at(j)); }

  void validate() const {
    if (n.empty() || n.size() != q.size()) throw precondition_error("schedules must be nonempty and of equal length");
    if (n[0] < 1) throw precondition_error("n_1 must be positive");
    for (std::size_t j = 0; j < n.size(); ++j) {
      if (j > 0 && n[j] < 3 * n[j - 1]) throw precondition_error("need n_{j+1} >= 3 n_j");
      if (q[j] < Rational(1, 2) || q[j] >= 1) throw precondition_error("need 1/2 <= q_j < 1");
      if (j > 0 && q[j] < q[j - 1]) throw precondition_error("q_j must be nondecreasing");
      Rational tj = t(j);
      if (tj <= 0 || tj >= 1) throw precondition_error("t_j must lie in (0,1)");
    }
  }

  // n_j = 3^j, q_j = 1 - 1/(j+2)
  static CascadeParams shipped(int J = 4) {
    CascadeParams p;
    long nj = 1;
    for (int j = 1; j <= J; ++j) {
      nj *= 3;
      p.n.push_back(nj);
      p.q.push_back(1 - Rational(1, j + 2));
    }
    return p;
  }

  // n_j = 3^j, q_j = 1 - 2^-(j+1)
  static CascadeParams steep(int J = 4) {
    CascadeParams p;
    long nj = 1;
    for (int j = 1; j <= J; ++j) {
      nj *= 3;
      p.n.push_back(nj);
      p.q.push_back(1 - rational_pow(Rational(1, 2), j + 1));
    }
    return p;
  }
};

inline std::shared_ptr<const CylinderOracle> cascade_oracle(const CascadeParams& params) {
  params.validate();
  auto P = std::make_shared<CascadeParams>(params);
  auto split = [P](int depth, int state) -> std::vector<Rational> {
    Rational half(1, 2);
    if (state == 1) {
      long lev = depth + 1;
      for (std::size_t j = 0; j < P->n.size(); ++j) {
        if (lev == P->n[j]) {
          Rational tj = P->t(j);
          return {tj, 1 - tj};
        }
        if (lev > P->n[j] && lev <= 2 * P->n[j]) return {P->q[j], 1 - P->q[j]};
      }
    }
    return {half, half};
  };
  auto next = [](int state, int digit) { return state == 1 && digit == 0 ? 1 : 0; };
  return std::make_shared<CylinderOracle>("cascade", 2, static_cast<int>(3 * params.n.back()), split, next, 1);
}

// mu(B(0,2^-n_j)) / mu(B(0,2^-2n_j))
inline Rational cascade_ratio(const CylinderOracle& o, const CascadeParams& p, std::size_t j) {
  Rational R = rational_pow(Rational(1, 2), p.n.at(j)), r = rational_pow(Rational(1, 2), 2 * p.n.at(j));
  auto a = o.ball_mass(0, R), b = o.ball_mass(0, r);
  if (!a.exact() || !b.exact()) throw std::logic_error("cascade ball at the origin should be exact");
  return a.lo / b.lo;
}

inline std::shared_ptr<const CylinderOracle> triadic_oracle(int depth_cap = 120) {
  auto split = [](int k, int state) -> std::vector<Rational> {
    Rational third(1, 3);
    if (state != 1) return {third, third, third};
    Rational den = 3 * (Rational(k) + Rational(3, 2));
    Rational side = Rational(k + 1) / den;
    return {side, (Rational(k) + Rational(5, 2)) / den, side};
  };
  auto next = [](int state, int digit) { return state == 1 && digit == 1 ? 1 : 0; };
  return std::make_shared<CylinderOracle>("triadic", 3, depth_cap, split, next, 1);
}

// mass before normalizing by mu([0,1]) = 3/2
inline Rational triadic_premass(const CylinderOracle& o, const std::vector<int>& word) {
  return Rational(3, 2) * o.cylinder_mass(word);
}

inline std::shared_ptr<const CylinderOracle> ssc_oracle(int base, std::vector<int> digits, std::vector<Rational> probs,
                                                         int depth_cap = 40) {
  if (digits.empty() || digits.size() != probs.size()) throw precondition_error("digits and probabilities differ");
  std::vector<Rational> w(base, Rational(0));
  Rational total = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] < 0 || digits[i] >= base) throw precondition_error("digit out of range");
    if (w[digits[i]] != 0) throw precondition_error("repeated digit");
    if (probs[i] <= 0) throw precondition_error("probabilities must be positive");
    w[digits[i]] = probs[i];
    total += probs[i];
  }
  if (total != 1) throw precondition_error("probabilities must sum to 1");
  auto split = [w](int, int) { return w; };
  auto next = [](int, int) { return 0; };
  return std::make_shared<CylinderOracle>("ssc", base, depth_cap, split, next, 0);
}

inline std::shared_ptr<const CylinderOracle> cantor_oracle(int depth_cap = 40, Rational p0 = Rational(1, 2)) {
  return ssc_oracle(3, {0, 2}, {p0, 1 - p0}, depth_cap);
}

enum class SalemMode { set_example, measure_example };

struct SalemParams {
  SalemMode mode = SalemMode::measure_example;
  std::uint64_t seed = 0;
  std::vector<long> n;  // n_j for j = first_block, first_block + 1, ...
  int first_block = 2;

  static SalemParams desk(std::uint64_t seed, SalemMode mode = SalemMode::measure_example) {
    SalemParams p;
    p.mode = mode;
    p.seed = seed;
    p.n = {4, 16, 64, 256};
    return p;
  }
};

class SalemOracle : public MeasureOracle {
 public:
  explicit SalemOracle(SalemParams p) : P_(std::move(p)) {
    if (P_.n.empty()) throw precondition_error("empty schedule");
    if (P_.first_block < 2) throw precondition_error("blocks start at j = 2");
    for (std::size_t i = 0; i < P_.n.size(); ++i) {
      if (P_.n[i] < 2) throw precondition_error("n_j must be at least 2");
      if (i > 0 && P_.n[i] < 4 * P_.n[i - 1]) throw precondition_error("need n_{j+1} >= 4 n_j");
    }
    long last = P_.n.back();
    cap_ = static_cast<int>(P_.mode == SalemMode::measure_example ? 2 * last : last + block_len(last)) + 8;
    xi_.resize(cap_ + 1);
    len_.resize(cap_ + 1);
    ilen_.resize(cap_ + 1);
    p_.resize(cap_ + 1);
    mpz_ui_pow_ui(unit_.get_mpz_t(), 2, static_cast<unsigned long>(kBits) * cap_);
    len_[0] = 1;
    ilen_[0] = unit_;
    std::vector<long> num(cap_ + 1, 0);
    for (int k = 1; k <= cap_; ++k) {
      auto [a, b] = bounds(k);
      double u = hash_uniform(P_.seed, k);
      num[k] = std::lround(std::ldexp(a + (b - a) * u, kBits));
      xi_[k] = Rational(num[k], 1L << kBits);
      xi_[k].canonicalize();
      len_[k] = len_[k - 1] * xi_[k];
      p_[k] = weight(k);
    }
    // integer lengths in units of 2^(-kBits * cap)
    for (int k = 1; k <= cap_; ++k) {
      mpz_class v = unit_;
      for (int i = 1; i <= k; ++i) {
        v *= num[i];
        v >>= kBits;
      }
      ilen_[k] = v;
    }
  }

  const SalemParams& params() const { return P_; }
  int depth_cap() const { return cap_; }
  const Rational& xi(int k) const { return xi_.at(k); }
  const Rational& length(int k) const { return len_.at(k); }
  const Rational& left_weight(int k) const { return p_.at(k); }

  long block_len(long nj) const {
    double ll = std::log(std::log(double(nj)));
    return std::max<long>(1, std::lround(nj * std::log(3.0) / std::max(ll, 0.5)));
  }

  std::pair<double, double> bounds(int k) const {
    double lk = std::log(double(k));
    double inv = lk > 0 ? 1.0 / lk : std::numeric_limits<double>::infinity();
    if (P_.mode == SalemMode::measure_example) return {0.25, std::min(0.25 + inv, 1.0 / 3.0)};
    bool in_block = false;
    for (long nj : P_.n)
      if (k >= nj && k <= nj + block_len(nj)) in_block = true;
    if (in_block) return {std::min(inv, 0.4), std::min(2 * inv, 0.45)};
    return {std::min(1.0 / 3 + inv, 0.4), std::min(1.0 / 3 + 2 * inv, 0.45)};
  }

  Rational weight(int k) const {
    if (P_.mode == SalemMode::measure_example)
      for (std::size_t i = 0; i < P_.n.size(); ++i)
        if (k > P_.n[i] && k <= 2 * P_.n[i]) return Rational(1, P_.first_block + static_cast<int>(i));
    return Rational(1, 2);
  }

  std::pair<Rational, Rational> cdf(const Rational& y) const {
    if (y <= 0) return {0, 0};
    if (y >= 1) return {1, 1};
    // y = (Y + frac) units, frac in [0,1); exact when frac == 0
    Rational scaled = y * Rational(unit_);
    mpz_class Y;
    mpz_fdiv_q(Y.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
    bool on_grid = scaled.get_den() == 1;
    auto eq = [&](const mpz_class& P) { return on_grid && Y == P; };
    auto le = [&](const mpz_class& P) { return Y < P || eq(P); };
    auto lt = [&](const mpz_class& P) { return Y < P; };
    mpz_class c = 0;
    Rational acc = 0, mass = 1;
    for (int k = 1; k <= cap_; ++k) {
      if (eq(c)) return {acc, acc};
      mpz_class le_end = c + ilen_[k];
      if (le(le_end)) {
        mass *= p_[k];
        if (eq(le_end)) return {acc + mass, acc + mass};
        continue;
      }
      mpz_class rs = c + ilen_[k - 1] - ilen_[k];
      if (lt(rs)) return {acc + mass * p_[k], acc + mass * p_[k]};
      acc += mass * p_[k];
      mass *= 1 - p_[k];
      c = rs;
    }
    if (eq(c)) return {acc, acc};
    return {acc, acc + mass};
  }

  MassBracket ball_mass(const Rational& x, const Rational& r) const override {
    if (r <= 0) throw precondition_error("radius must be positive");
    if (r < min_radius()) throw precondition_error("radius below the oracle's depth cap");
    auto hi = cdf(x + r), lo = cdf(x - r);
    Rational a = hi.first - lo.second, b = hi.second - lo.first;
    if (a < 0) a = 0;
    return {a, b};
  }

  std::vector<Rational> sample_support(std::uint64_t seed, int count) const override {
    std::vector<Rational> pts;
    if (count <= 0) return pts;
    int s = 0;
    while ((1 << s) < count && s < 20) ++s;
    for (int i = 0; i < count; ++i) {
      long cell = (static_cast<long>(i) << s) / count;
      mpz_class c = 0;
      for (int k = 1; k <= cap_; ++k) {
        int d = k <= s ? int((cell >> (s - k)) & 1) : (hash_uniform(seed, i, k) < 0.5 ? 0 : 1);
        if (d) c += ilen_[k - 1] - ilen_[k];
      }
      Rational q(c, unit_);
      q.canonicalize();
      pts.push_back(q);
    }
    return pts;
  }

  // R = step n_j length, r = step 2n_j length, x = right end of the leftmost step n_j interval
  struct PairedScale {
    Rational x, R, r, predicted;
  };
  PairedScale paired_scale(std::size_t i) const {
    long nj = P_.n.at(i);
    if (P_.mode != SalemMode::measure_example) throw precondition_error("paired scales belong to the measure example");
    int j = P_.first_block + static_cast<int>(i);
    return {len_[nj], len_[nj], len_[2 * nj], rational_pow(1 - Rational(1, j), -nj)};
  }

  double fourier_abs(long freq) const {
    long double acc = 1;
    long double ell = 1;
    for (int k = 1; k <= cap_; ++k) {
      long double x = xi_[k].get_d();
      long double phase = 2 * M_PIl * std::fmod(static_cast<long double>(freq) * ell * (1 - x), 1.0L);
      long double p = p_[k].get_d();
      long double m2 = p * p + (1 - p) * (1 - p) + 2 * p * (1 - p) * std::cos(phase);
      acc *= std::sqrt(std::max<long double>(m2, 0));
      ell *= x;
      if (std::fabs(static_cast<long double>(freq)) * ell < 1e-9L) break;
    }
    return static_cast<double>(acc);
  }

  double fourier_partial_sum(double s, long N) const {
    double sum = 1;
    for (long n = 1; n <= N; ++n) sum += 2 * std::pow(fourier_abs(n), s);
    return sum;
  }

  Rational min_radius() const override { return len_[cap_]; }
  bool exact() const override { return true; }
  std::string name() const override {
    return P_.mode == SalemMode::measure_example ? "salem-measure" : "salem-set";
  }
  Rational natural_ratio() const override { return Rational(1, 4); }

 private:
  static constexpr int kBits = 20;
  SalemParams P_;
  int cap_ = 0;
  mpz_class unit_;
  std::vector<Rational> xi_, len_, p_;
  std::vector<mpz_class> ilen_;
};

inline std::shared_ptr<const SalemOracle> salem_oracle(const SalemParams& p) {
  return std::make_shared<SalemOracle>(p);
}

class FiniteTypeOracle : public MeasureOracle {
 public:
  FiniteTypeOracle(TransitionGraph g, int depth_cap = 40) : g_(std::move(g)), cap_(depth_cap) {
    if (cap_ < 1) throw precondition_error("depth cap must be positive");
    lambda_ = to_double(g_.lambda);
    if (!g_.ssc) solve_type_masses();
  }

  // v[node][i] = mu(S_i^-1 of the net interval), as the limit of v <- sum_e T_e v[child] from Lebesgue data
  const std::vector<std::vector<double>>& type_masses() const { return v_; }

  MassBracket ball_mass(const Rational& x, const Rational& r) const override {
    if (r <= 0) throw precondition_error("radius must be positive");
    if (r < min_radius()) throw precondition_error("radius below the oracle's depth cap");
    const auto& f = g_.lambda.field();
    FieldElement lo(f, x - r), hi(f, x + r);
    int level = cap_;
    MassBracket out{0, 0};
    std::vector<FieldElement> scale{FieldElement(f, Rational(1))};
    for (int k = 1; k <= level; ++k) scale.push_back(scale.back() * g_.lambda);
    std::function<void(int, const FieldElement&, int, const std::vector<Rational>&)> rec =
        [&](int v, const FieldElement& a, int lev, const std::vector<Rational>& row) {
          FieldElement b = a + g_.nodes[v].length * scale[lev];
          if (b < lo || a > hi) return;
          Rational m = 0;
          if (g_.ssc) {
            for (const auto& e : row) m += e;
          } else {
            double acc = 0;
            for (std::size_t i = 0; i < row.size(); ++i) acc += row[i].get_d() * v_[v][i];
            m = rational_from_double(acc);
          }
          if (!(a < lo) && !(b > hi)) {
            out.lo += m;
            out.hi += m;
            return;
          }
          if (lev == level) {
            out.hi += m;
            return;
          }
          for (int ei : g_.out[v]) {
            const auto& e = g_.edges[ei];
            std::vector<Rational> nr(e.T[0].size(), Rational(0));
            for (std::size_t i = 0; i < row.size(); ++i)
              for (std::size_t j = 0; j < nr.size(); ++j) nr[j] += row[i] * e.T[i][j];
            rec(e.to, a + scale[lev] * e.h, lev + 1, nr);
          }
        };
    rec(g_.root(), FieldElement(f, Rational(0)), 0, {Rational(1)});
    return out;
  }

  std::vector<Rational> sample_support(std::uint64_t seed, int count) const override {
    std::vector<Rational> pts;
    const auto& f = g_.lambda.field();
    int depth = std::min(cap_, 30);
    for (int i = 0; i < count; ++i) {
      int v = g_.root();
      FieldElement a(f, Rational(0)), sc(f, Rational(1));
      for (int k = 0; k < depth; ++k) {
        const auto& o = g_.out[v];
        const auto& e = g_.edges[o[static_cast<std::size_t>(hash_uniform(seed, i, k) * o.size())]];
        a = a + sc * e.h;
        sc = sc * g_.lambda;
        v = e.to;
      }
      pts.push_back(a.is_rational() ? a.rational_value() : rational_from_double(to_double(a)));
    }
    return pts;
  }

  Rational min_radius() const override { return rational_from_double(std::pow(lambda_, cap_)); }
  bool exact() const override { return g_.ssc; }
  std::string name() const override { return "finite-type"; }
  Rational natural_ratio() const override {
    return g_.lambda.is_rational() ? g_.lambda.rational_value() : rational_from_double(lambda_);
  }
  const TransitionGraph& graph() const { return g_; }

 private:
  void solve_type_masses() {
    std::size_t n = g_.nodes.size();
    v_.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
      double ell = std::fabs(to_double(g_.nodes[u].length));
      for (const auto& nb : g_.nodes[u].nbrs) v_[u].push_back(ell / std::fabs(to_double(nb.L)));
    }
    std::vector<std::vector<std::vector<double>>> T(g_.edges.size());
    for (std::size_t e = 0; e < g_.edges.size(); ++e) T[e] = detail::to_double(g_.edges[e].T);
    for (int it = 0; it < 5000; ++it) {
      std::vector<std::vector<double>> w(n);
      double change = 0;
      for (std::size_t u = 0; u < n; ++u) {
        w[u].assign(v_[u].size(), 0.0);
        for (int ei : g_.out[u]) {
          const auto& e = g_.edges[ei];
          for (std::size_t i = 0; i < w[u].size(); ++i)
            for (std::size_t j = 0; j < v_[e.to].size(); ++j) w[u][i] += T[ei][i][j] * v_[e.to][j];
        }
        for (std::size_t i = 0; i < w[u].size(); ++i) change = std::max(change, std::fabs(w[u][i] - v_[u][i]));
      }
      v_ = std::move(w);
      if (change < 1e-15) break;
    }
  }

  TransitionGraph g_;
  int cap_;
  double lambda_ = 0.5;
  std::vector<std::vector<double>> v_;
};

inline std::shared_ptr<const FiniteTypeOracle> finite_type_oracle(TransitionGraph g, int depth_cap = 40) {
  return std::make_shared<FiniteTypeOracle>(std::move(g), depth_cap);
}

// ---- estimation ----

enum class Mode { upper, lower };
inline std::string mode_str(Mode m) { return m == Mode::upper ? "upper" : "lower"; }

struct Grid {
  std::vector<Rational> points;
  std::vector<Rational> radii;
  int threads = 1;
  std::uint64_t seed = 0;
  double spectrum_tol = 0.05;  // relative tolerance on log r / log R against 1/theta
};

// radii ratio^i for i in [i0, i1)
inline std::vector<Rational> scale_ladder(const Rational& ratio, int i0, int i1) {
  std::vector<Rational> out;
  Rational r = rational_pow(ratio, i0);
  for (int i = i0; i < i1; ++i) {
    out.push_back(r);
    r *= ratio;
  }
  return out;
}

inline Grid default_grid(const MeasureOracle& o, int points, int levels, std::uint64_t seed = 0) {
  Grid g;
  g.seed = seed;
  g.points = o.sample_support(seed, points);
  Rational q = o.natural_ratio();
  Rational r = 1;
  for (int i = 0; i < levels; ++i) {
    r *= q;
    if (r < o.min_radius()) break;
    g.radii.push_back(r);
  }
  return g;
}

struct SpectrumEstimate {
  double param = 0;  // theta or delta
  Mode mode = Mode::lower;
  double value = 0;  // central estimate
  double value_lower = 0, value_upper = 0;
  Rational witness_x, witness_R, witness_r;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double scale_min = 0, scale_max = 0;
  bool exact = true;
};

namespace detail {

struct MassTable {
  std::vector<std::vector<MassBracket>> m;  // [point][radius]
  std::vector<double> log_r;
  bool exact = true;
};

inline MassTable mass_table(const MeasureOracle& o, const Grid& g) {
  MassTable t;
  t.m.assign(g.points.size(), std::vector<MassBracket>(g.radii.size()));
  for (const auto& r : g.radii) t.log_r.push_back(log_rational(r));
  parallel_for(g.points.size(), g.threads, [&](std::size_t i) {
    for (std::size_t k = 0; k < g.radii.size(); ++k) t.m[i][k] = o.ball_mass(g.points[i], g.radii[k]);
  });
  for (const auto& row : t.m)
    for (const auto& b : row)
      if (!b.exact()) t.exact = false;
  return t;
}

inline double safe_log(const Rational& q) {
  return q > 0 ? log_rational(q) : -std::numeric_limits<double>::infinity();
}

// pairs (k, l) of radius indices with R = radii[k] > r = radii[l]
template <class Admit>
SpectrumEstimate extremal_ratio(const MeasureOracle& o, const Grid& g, Mode mode, double param, Admit admit) {
  for (const auto& r : g.radii)
    if (r > 1 || r < o.min_radius()) throw precondition_error("grid scale outside (depth cap, 1]");
  auto t = mass_table(o, g);
  SpectrumEstimate e;
  e.param = param;
  e.mode = mode;
  e.seed = g.seed;
  e.exact = t.exact;
  double inf = std::numeric_limits<double>::infinity();
  e.value = mode == Mode::upper ? -inf : inf;
  e.value_lower = e.value_upper = e.value;
  e.scale_min = inf;
  e.scale_max = -inf;
  auto better = [&](double a, double b) { return mode == Mode::upper ? a > b : a < b; };
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    for (std::size_t k = 0; k < g.radii.size(); ++k) {
      for (std::size_t l = 0; l < g.radii.size(); ++l) {
        double lR = t.log_r[k], lr = t.log_r[l];
        if (!(lr < lR) || !admit(lR, lr)) continue;
        const auto& MR = t.m[i][k];
        const auto& Mr = t.m[i][l];
        if (MR.hi <= 0) continue;
        double span = lR - lr;
        double c_hi = safe_log(MR.hi) - safe_log(Mr.lo);
        double c_lo = safe_log(MR.lo) - safe_log(Mr.hi);
        Rational mid_R = (MR.lo + MR.hi) / 2, mid_r = (Mr.lo + Mr.hi) / 2;
        double c = safe_log(mid_R) - safe_log(mid_r);
        double v = c / span, vl = c_lo / span, vu = c_hi / span;
        ++e.samples;
        e.scale_min = std::min(e.scale_min, std::exp(lr));
        e.scale_max = std::max(e.scale_max, std::exp(lR));
        if (better(v, e.value)) {
          e.value = v;
          e.witness_x = g.points[i];
          e.witness_R = g.radii[k];
          e.witness_r = g.radii[l];
        }
        if (better(vl, e.value_lower)) e.value_lower = vl;
        if (better(vu, e.value_upper)) e.value_upper = vu;
      }
    }
  }
  if (e.samples == 0) throw precondition_error("empty admissible grid");
  if (e.value_lower > e.value_upper) std::swap(e.value_lower, e.value_upper);
  return e;
}

}  // namespace detail

// delta-restricted extremal exponent: pairs with r <= R^(1+delta)
inline SpectrumEstimate empirical_H(const MeasureOracle& o, double delta, Mode mode, const Grid& g) {
  if (!(delta >= 0)) throw precondition_error("delta must be nonnegative");
  return detail::extremal_ratio(o, g, mode, delta, [&](double lR, double lr) {
    return lr <= (1 + delta) * lR + 1e-9 * std::fabs(lR);
  });
}

// pairs r = R^(1/theta) up to the grid tolerance
inline SpectrumEstimate spectrum_point(const MeasureOracle& o, double theta, Mode mode, const Grid& g) {
  if (!(theta > 0 && theta < 1)) throw precondition_error("theta must lie in (0,1)");
  return detail::extremal_ratio(o, g, mode, theta, [&](double lR, double lr) {
    double target = lR / theta;
    return std::fabs(lr - target) <= g.spectrum_tol * std::fabs(target);
  });
}

// pairs r <= R^(1/theta)
inline SpectrumEstimate spectrum_le(const MeasureOracle& o, double theta, Mode mode, const Grid& g) {
  if (!(theta > 0 && theta < 1)) throw precondition_error("theta must lie in (0,1)");
  auto e = empirical_H(o, 1 / theta - 1, mode, g);
  e.param = theta;
  return e;
}

struct Sequence {
  std::vector<double> params;
  std::vector<SpectrumEstimate> estimates;
  double extrapolated = 0;  // linear through the last two points, evaluated at the limit parameter
};

inline double extrapolate_last_two(const std::vector<double>& x, const std::vector<double>& y, double at) {
  std::size_t n = x.size();
  if (n == 0) throw precondition_error("empty sequence");
  if (n == 1 || x[n - 1] == x[n - 2]) return y.back();
  double s = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
  return y[n - 1] + s * (at - x[n - 1]);
}

inline Sequence quasi_sequence(const MeasureOracle& o, Mode mode, const Grid& g,
                               std::vector<double> deltas = {0.5, 0.25, 0.1, 0.05}) {
  Sequence s;
  std::vector<double> ys;
  for (double d : deltas) {
    s.params.push_back(d);
    s.estimates.push_back(empirical_H(o, d, mode, g));
    ys.push_back(s.estimates.back().value);
  }
  s.extrapolated = extrapolate_last_two(s.params, ys, 0.0);
  return s;
}

inline Sequence spectrum_sequence(const MeasureOracle& o, Mode mode, const Grid& g,
                                  std::vector<double> thetas = {0.5, 0.75, 0.9, 0.95}) {
  Sequence s;
  std::vector<double> ys;
  for (double t : thetas) {
    s.params.push_back(t);
    s.estimates.push_back(spectrum_point(o, t, mode, g));
    ys.push_back(s.estimates.back().value);
  }
  s.extrapolated = extrapolate_last_two(s.params, ys, 1.0);
  return s;
}

struct LocalDim {
  double liminf_est = 0, limsup_est = 0;
  std::vector<double> slopes;
};

// slopes log mu(B(x,r))/log r along the ladder; estimates from the finer half
inline LocalDim local_dim_estimate(const MeasureOracle& o, const Rational& x, const std::vector<Rational>& scales) {
  if (scales.size() < 2) throw precondition_error("need at least two scales");
  if (!o.in_support(x)) throw precondition_error("point is off the support");
  LocalDim d;
  std::vector<double> lo_s, hi_s;
  for (const auto& r : scales) {
    if (r >= 1) throw precondition_error("scales must be below 1");
    auto m = o.ball_mass(x, r);
    double lr = log_rational(r);
    double from_hi = detail::safe_log(m.hi) / lr;
    double from_lo = m.lo > 0 ? log_rational(m.lo) / lr : std::numeric_limits<double>::infinity();
    Rational mid = (m.lo + m.hi) / 2;
    d.slopes.push_back(detail::safe_log(mid) / lr);
    hi_s.push_back(from_hi);
    lo_s.push_back(from_lo);
  }
  std::size_t start = scales.size() / 2;
  d.liminf_est = *std::min_element(hi_s.begin() + start, hi_s.end());
  d.limsup_est = *std::max_element(lo_s.begin() + start, lo_s.end());
  return d;
}

// ---- finite point sets ----

struct Point {
  double x = 0, y = 0;
};
using PointSet = std::vector<Point>;

inline double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline PointSet ball_slice(const PointSet& E, const Point& x, double R) {
  PointSet out;
  for (const auto& p : E)
    if (dist(p, x) <= R) out.push_back(p);
  return out;
}

inline bool is_one_dimensional(const PointSet& F) {
  return std::all_of(F.begin(), F.end(), [](const Point& p) { return p.y == 0; });
}

// least number of sets of diameter <= r covering F
inline int covering_count_set(const PointSet& F, double r, int dim = 2) {
  if (F.empty()) return 0;
  if (dim < 1 || dim > 2) throw precondition_error("only dimensions 1 and 2 are supported");
  if (dim == 1 || is_one_dimensional(F)) {
    std::vector<double> xs;
    for (const auto& p : F) xs.push_back(p.x);
    std::sort(xs.begin(), xs.end());
    int n = 0;
    double end = -std::numeric_limits<double>::infinity();
    for (double v : xs)
      if (v > end) {
        ++n;
        end = v + r;
      }
    return n;
  }
  std::size_t n = F.size();
  if (n > 12) throw precondition_error("planar covering is exact only up to 12 points");
  std::size_t full = (std::size_t(1) << n) - 1;
  std::vector<char> ok(full + 1, 0);
  ok[0] = 1;
  for (std::size_t S = 1; S <= full; ++S) {
    int hi = 63 - __builtin_clzll(S);
    std::size_t rest = S & ~(std::size_t(1) << hi);
    if (!ok[rest]) continue;
    bool fine = true;
    for (std::size_t j = 0; j < n && fine; ++j)
      if ((rest >> j) & 1) fine = dist(F[hi], F[j]) <= r;
    ok[S] = fine;
  }
  std::vector<int> dp(full + 1, 1 << 20);
  dp[0] = 0;
  for (std::size_t S = 1; S <= full; ++S) {
    std::size_t low = S & (~S + 1);
    std::size_t others = S & ~low;
    for (std::size_t T = others;; T = (T - 1) & others) {
      std::size_t part = T | low;
      if (ok[part]) dp[S] = std::min(dp[S], dp[S & ~part] + 1);
      if (T == 0) break;
    }
  }
  return dp[full];
}

inline int covering_count(const PointSet& E, const Point& x, double R, double r, int dim = 2) {
  if (!(r > 0) || r > R) throw precondition_error("need 0 < r <= R");
  return covering_count_set(ball_slice(E, x, R), r, dim);
}

// largest number of pairwise disjoint closed r-balls centred in F
inline int packing_count_set(const PointSet& F, double r) {
  std::size_t n = F.size();
  if (n == 0) return 0;
  auto clash = [&](std::size_t i, std::size_t j) { return dist(F[i], F[j]) <= 2 * r; };
  if (n > 12) {
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < n; ++i)
      if (std::none_of(chosen.begin(), chosen.end(), [&](std::size_t c) { return clash(i, c); })) chosen.push_back(i);
    return static_cast<int>(chosen.size());
  }
  std::vector<std::size_t> adj(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && clash(i, j)) adj[i] |= std::size_t(1) << j;
  int best = 0;
  for (std::size_t S = 1; S < (std::size_t(1) << n); ++S) {
    bool indep = true;
    for (std::size_t i = 0; i < n && indep; ++i)
      if (((S >> i) & 1) && (adj[i] & S)) indep = false;
    if (indep) best = std::max(best, __builtin_popcountll(S));
  }
  return best;
}

inline int packing_count(const PointSet& E, const Point& x, double R, double r) {
  if (!(r > 0)) throw precondition_error("radius must be positive");
  return packing_count_set(ball_slice(E, x, R), r);
}

// ---- lattice search ----

struct NumTheoResult {
  long m = 0, n = 0;
  double gap = 0;  // 1/theta_i - 1/(theta^n beta^m)
  double lower = 0, upper = 0;
  bool rational_warning = false;
};

inline bool log_ratio_looks_rational(double theta, double beta, long max_den = 1000000) {
  double x = std::log(theta) / std::log(beta);
  double h0 = 0, h1 = 1, k0 = 1, k1 = 0, v = x;
  for (int it = 0; it < 60; ++it) {
    double a = std::floor(v);
    double h2 = a * h1 + h0, k2 = a * k1 + k0;
    if (k2 > max_den) break;
    if (std::fabs(x * k2 - h2) < 1e-9) return true;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    double frac = v - a;
    if (frac < 1e-15) return true;
    v = 1 / frac;
  }
  return false;
}

inline NumTheoResult numtheo_find_mn(double theta, double beta, double theta_i, double eta, long bound = 1000000) {
  if (!(0 < beta && beta < theta && theta < 1)) throw precondition_error("need 0 < beta < theta < 1");
  if (!(eta > 0 && eta < 0.25)) throw precondition_error("eta must lie in (0, 1/4)");
  if (!(theta_i > 0 && theta_i < 1)) throw precondition_error("theta_i must lie in (0,1)");
  NumTheoResult res;
  res.rational_warning = log_ratio_looks_rational(theta, beta);
  res.lower = eta / (2 * theta_i);
  res.upper = 4 * eta / theta_i;
  double lt = std::log(theta), lb = std::log(beta), li = std::log(theta_i);
  auto check = [&](long m, long n, double& gap) {
    double inv_u = std::exp(-(m * lb + n * lt));
    gap = 1 / theta_i - inv_u;
    double slack = 1e-12 * std::max(1.0, 1 / theta_i);
    return gap >= res.lower - slack && gap <= res.upper + slack;
  };
  // preferred window e^eta < u/theta_i < e^(2 eta), then the full admissible window
  std::vector<std::pair<double, double>> windows{{li + eta, li + 2 * eta},
                                                 {li - std::log1p(-eta / 2), li - std::log1p(-4 * eta)}};
  for (auto [wl, wh] : windows) {
    for (long m = 1; m <= bound; ++m) {
      double base = m * lb;
      if (base + lt < wl - 1e-12) break;
      long n_lo = std::max(1L, static_cast<long>(std::ceil((wh - base) / lt - 1e-9)));
      long n_hi = std::min(bound, static_cast<long>(std::floor((wl - base) / lt + 1e-9)));
      for (long n = n_lo; n <= n_hi; ++n) {
        double gap;
        if (check(m, n, gap)) {
          res.m = m;
          res.n = n;
          res.gap = gap;
          return res;
        }
      }
    }
  }
  throw precondition_error("theta_i not small enough");
}

// the largest `count` values of m log beta + n log theta (m, n >= 1), descending
inline std::vector<double> sorted_lattice(double theta, double beta, std::size_t count) {
  double lt = std::log(theta), lb = std::log(beta);
  double T = lt + lb;
  std::vector<double> ys;
  for (;;) {
    ys.clear();
    for (long m = 1; m * lb + lt >= T; ++m)
      for (long n = 1; m * lb + n * lt >= T; ++n) ys.push_back(m * lb + n * lt);
    if (ys.size() >= count) break;
    T *= 1.5;
  }
  std::sort(ys.begin(), ys.end(), std::greater<>());
  ys.resize(count);
  return ys;
}

inline std::vector<double> lattice_gaps(double theta, double beta, std::size_t count) {
  auto ys = sorted_lattice(theta, beta, count + 1);
  std::vector<double> g;
  for (std::size_t j = 0; j + 1 < ys.size(); ++j) g.push_back(ys[j] - ys[j + 1]);
  return g;
}

}  // namespace assouad
