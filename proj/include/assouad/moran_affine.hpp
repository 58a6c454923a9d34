#pragma once

#include "alg_field.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace assouad {

using Word = std::vector<int>;

inline std::string word_str(const Word& w) {
  if (w.empty()) return "()";
  std::string s;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (k) s += ".";
    s += std::to_string(w[k] + 1);
  }
  return s;
}

inline double uniformly_perfect_bound(double c, double gamma) {
  if (!(c > 0 && c < 1) || !(gamma > 0 && gamma < 1)) throw precondition_error("need 0 < c < 1 and 0 < gamma < 1");
  return std::log(1 - gamma) / std::log(c);
}

inline double moran_lower_bound(double C1, double C3) {
  if (!(C1 > 0 && C1 < 1) || !(C3 > 0 && C3 < 1)) throw precondition_error("need C1, C3 in (0,1)");
  return std::log(1 - C3) / std::log(C1);
}

struct SetDescriptor {
  double diam = 0;
  std::vector<double> lo, hi;  // bounding box
  std::optional<std::vector<double>> center;
  double radius = 0;  // valid when center is set
};

struct MoranStructure {
  int N = 2;
  std::function<SetDescriptor(const Word&)> node;
  std::function<Rational(const Word&)> weight;
  // optional exact nesting test M_{vj} subset of M_v; bounding boxes are used otherwise
  std::function<bool(const Word&, int)> nested;
  std::optional<double> C1, C2, C3;
};

namespace detail {

inline double box_distance(const SetDescriptor& a, const SetDescriptor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.lo.size(); ++i) {
    double g = std::max({0.0, b.lo[i] - a.hi[i], a.lo[i] - b.hi[i]});
    s += g * g;
  }
  return std::sqrt(s);
}

// lower bound for the distance between the two sets
inline double set_distance_lb(const SetDescriptor& a, const SetDescriptor& b) {
  double d = box_distance(a, b);
  if (a.center && b.center) {
    double s = 0;
    for (std::size_t i = 0; i < a.center->size(); ++i) {
      double t = (*a.center)[i] - (*b.center)[i];
      s += t * t;
    }
    d = std::max(d, std::sqrt(s) - a.radius - b.radius);
  }
  return d;
}

inline bool box_inside(const SetDescriptor& in, const SetDescriptor& out, double tol = 1e-12) {
  for (std::size_t i = 0; i < in.lo.size(); ++i)
    if (in.lo[i] < out.lo[i] - tol || in.hi[i] > out.hi[i] + tol) return false;
  return true;
}

}  // namespace detail

struct ConditionResult {
  std::string name;
  bool pass = true;
  std::string witness;
  std::string detail;
};

struct MoranReport {
  std::vector<ConditionResult> conditions;
  double C1_hat = std::numeric_limits<double>::infinity();
  double C2_hat = std::numeric_limits<double>::infinity();
  Rational C3_hat = 0;
  std::vector<double> max_diam_by_depth;
  bool all_pass() const {
    for (const auto& c : conditions)
      if (!c.pass) return false;
    return true;
  }
  const ConditionResult& get(const std::string& n) const {
    for (const auto& c : conditions)
      if (c.name == n) return c;
    throw std::out_of_range("no condition " + n);
  }
};

inline MoranReport verify_moran(const MoranStructure& S, int depth) {
  if (depth < 1) throw precondition_error("depth must be at least 1");
  MoranReport rep;
  ConditionResult a{"a"}, b{"b"}, c{"c"}, d{"d"}, A{"A"}, B{"B"}, C{"C"};
  std::string c1_w, c2_w, c3_w;
  Rational m0 = S.weight({});
  if (m0 != 1) {
    A.pass = false;
    A.witness = "()";
    A.detail = "m(root) = " + m0.get_str();
  }
  std::vector<Word> level{{}};
  rep.max_diam_by_depth.push_back(S.node({}).diam);
  for (int k = 0; k < depth; ++k) {
    std::vector<Word> next;
    double maxd = 0;
    for (const auto& v : level) {
      auto Mv = S.node(v);
      Rational mv = S.weight(v), sum = 0;
      std::vector<SetDescriptor> kids;
      for (int j = 0; j < S.N; ++j) {
        Word w = v;
        w.push_back(j);
        auto Mw = S.node(w);
        Rational mw = S.weight(w);
        sum += mw;
        bool inside = S.nested ? S.nested(v, j) : detail::box_inside(Mw, Mv);
        if (!inside && a.pass) {
          a.pass = false;
          a.witness = word_str(w);
        }
        if (Mv.diam > 0) {
          double ratio = Mw.diam / Mv.diam;
          if (ratio < rep.C1_hat) {
            rep.C1_hat = ratio;
            c1_w = word_str(w);
          }
        }
        if (mv > 0) {
          Rational q = mw / mv;
          if (q > rep.C3_hat) {
            rep.C3_hat = q;
            c3_w = word_str(w);
          }
        }
        maxd = std::max(maxd, Mw.diam);
        kids.push_back(std::move(Mw));
        next.push_back(std::move(w));
      }
      if (sum != mv && B.pass) {
        B.pass = false;
        B.witness = word_str(v);
        B.detail = "children sum " + sum.get_str() + " vs " + mv.get_str();
      }
      if (Mv.diam > 0) {
        double best = 0;
        for (int i = 0; i < S.N; ++i)
          for (int j = i + 1; j < S.N; ++j) best = std::max(best, detail::set_distance_lb(kids[i], kids[j]));
        double r = best / Mv.diam;
        if (r < rep.C2_hat) {
          rep.C2_hat = r;
          c2_w = word_str(v);
        }
      }
    }
    rep.max_diam_by_depth.push_back(maxd);
    level = std::move(next);
  }
  for (std::size_t k = 1; k < rep.max_diam_by_depth.size(); ++k)
    if (!(rep.max_diam_by_depth[k] < rep.max_diam_by_depth[k - 1]) && b.pass) {
      b.pass = false;
      b.witness = "depth " + std::to_string(k);
    }
  c.witness = c1_w;
  c.pass = rep.C1_hat > 0 && (!S.C1 || rep.C1_hat >= *S.C1 * (1 - 1e-9));
  d.witness = c2_w;
  d.pass = rep.C2_hat > 0 && (!S.C2 || rep.C2_hat >= *S.C2 * (1 - 1e-9));
  C.witness = c3_w;
  C.pass = rep.C3_hat < 1 && (!S.C3 || rep.C3_hat.get_d() <= *S.C3 * (1 + 1e-12));
  c.detail = "C1_hat=" + std::to_string(rep.C1_hat);
  d.detail = "C2_hat=" + std::to_string(rep.C2_hat);
  C.detail = "C3_hat=" + rep.C3_hat.get_str();
  rep.conditions = {a, b, c, d, A, B, C};
  return rep;
}

// target: finite union of closed intervals on the line
using IntervalSet = std::vector<std::pair<double, double>>;

struct SectionBracket {
  Rational lower, upper;
  std::vector<Word> section;  // words of the chosen section meeting the target
};

inline SectionBracket section_outer_measure(const MoranStructure& S, const IntervalSet& target, int depth) {
  if (depth < 1) throw precondition_error("depth must be at least 1");
  auto meets = [&](const SetDescriptor& M) {
    for (auto [a, b] : target)
      if (M.lo[0] <= b && M.hi[0] >= a) return true;
    return false;
  };
  auto inside = [&](const SetDescriptor& M) {
    for (auto [a, b] : target)
      if (M.lo[0] >= a && M.hi[0] <= b) return true;
    return false;
  };
  struct Best {
    Rational mass, straddle;
    std::vector<Word> words;
  };
  std::function<Best(const Word&)> rec = [&](const Word& v) -> Best {
    auto M = S.node(v);
    if (!meets(M)) return {Rational(0), Rational(0), {}};
    Rational m = S.weight(v);
    Best self{m, inside(M) ? Rational(0) : m, {v}};
    if (static_cast<int>(v.size()) >= depth) return self;
    Best kids{Rational(0), Rational(0), {}};
    for (int j = 0; j < S.N; ++j) {
      Word w = v;
      w.push_back(j);
      auto b = rec(w);
      kids.mass += b.mass;
      kids.straddle += b.straddle;
      kids.words.insert(kids.words.end(), b.words.begin(), b.words.end());
    }
    if (kids.mass < self.mass || (kids.mass == self.mass && kids.straddle < self.straddle)) return kids;
    return self;
  };
  auto b = rec({});
  return {b.mass - b.straddle, b.mass, b.words};
}

// a Moran structure from a similarity IFS on the line: M_v = S_v([0,1]), m = p_v
inline MoranStructure similarity_moran(std::vector<Rational> r, std::vector<Rational> d, std::vector<Rational> p) {
  MoranStructure S;
  S.N = static_cast<int>(r.size());
  auto affine = [r, d](const Word& w) {
    Rational a = 1, b = 0;
    for (int j : w) {
      b += a * d[j];
      a *= r[j];
    }
    return std::pair<Rational, Rational>{a, b};
  };
  S.node = [affine](const Word& w) {
    auto [a, b] = affine(w);
    Rational x = b, y = a + b;
    if (y < x) std::swap(x, y);
    SetDescriptor s;
    s.lo = {x.get_d()};
    s.hi = {y.get_d()};
    s.diam = Rational(y - x).get_d();
    return s;
  };
  S.weight = [p](const Word& w) {
    Rational m = 1;
    for (int j : w) m *= p[j];
    return m;
  };
  S.nested = [affine](const Word& v, int j) {
    Word w = v;
    w.push_back(j);
    auto [a, b] = affine(v);
    auto [c, e] = affine(w);
    Rational lo1 = std::min(b, Rational(a + b)), hi1 = std::max(b, Rational(a + b));
    Rational lo2 = std::min(e, Rational(c + e)), hi2 = std::max(e, Rational(c + e));
    return lo2 >= lo1 && hi2 <= hi1;
  };
  return S;
}

using Mat = Eigen::MatrixXd;
using Vecd = Eigen::VectorXd;

inline double operator_norm(const Mat& M, double tol = 1e-12) {
  Mat G = M.transpose() * M;
  Vecd x = Vecd::Ones(G.cols());
  for (int i = 0; i < G.cols(); ++i) x(i) += 0.1 * (i + 1);  // avoid symmetric starts
  x.normalize();
  double est = 0;
  for (int it = 0; it < 100000; ++it) {
    Vecd y = G * x;
    double ny = y.norm();
    if (ny == 0) return 0;
    double nxt = x.dot(y);
    x = y / ny;
    if (std::fabs(nxt - est) <= tol * std::fabs(nxt)) {
      est = nxt;
      break;
    }
    est = nxt;
  }
  return std::sqrt((G * x).dot(x));
}

inline double matrix_alpha(const Mat& A) {
  if (A.rows() != A.cols() || A.rows() == 0) throw precondition_error("matrix must be square");
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible()) throw precondition_error("matrix is singular");
  Mat inv = lu.inverse();
  double ni = operator_norm(inv), na = operator_norm(A);
  if (!(na * ni < 1e12)) throw precondition_error("matrix is numerically singular");
  return 1.0 / (static_cast<double>(A.rows()) * ni);
}

struct AffineIFS {
  std::vector<Mat> A;
  std::vector<Vecd> t;
  int dim() const { return static_cast<int>(A.at(0).rows()); }
};

struct AffinizeResult {
  MoranStructure structure;
  int K = 0;
  double R = 0;
  double alpha_Y = 0;
  double C1 = 0, C2 = 0, C3 = 0;
  double C2_stated = 0;  // alpha_Y / (3R)
  Vecd origin;           // attractor point moved to the origin
  std::vector<Vecd> Y;   // basis points relative to origin
};

inline AffinizeResult affinize(const AffineIFS& ifs, const std::vector<Rational>& mass, int sample_depth = 8) {
  std::size_t N = ifs.A.size();
  if (N < 2 || ifs.t.size() != N || mass.size() != N) throw precondition_error("need at least two maps with masses");
  int d = ifs.dim();
  Rational total = 0;
  for (const auto& q : mass) {
    if (q <= 0) throw precondition_error("masses must be positive");
    total += q;
  }
  if (total != 1) throw precondition_error("masses must sum to 1");
  double amax = 0;
  for (const auto& A : ifs.A) {
    if (A.rows() != d || A.cols() != d) throw precondition_error("matrix dimension mismatch");
    Eigen::FullPivLU<Mat> lu(A);
    if (!lu.isInvertible()) throw precondition_error("affine maps must be invertible");
    double n = operator_norm(A);
    if (!(n < 1)) throw precondition_error("affine maps must be contractions");
    amax = std::max(amax, n);
  }
  std::vector<Vecd> fixed;
  for (std::size_t i = 0; i < N; ++i) fixed.push_back((Mat::Identity(d, d) - ifs.A[i]).fullPivLu().solve(ifs.t[i]));
  bool singleton = true;
  for (std::size_t i = 1; i < N; ++i) singleton = singleton && (fixed[i] - fixed[0]).norm() < 1e-12;
  if (singleton) throw precondition_error("attractor is a singleton");

  AffinizeResult res;
  res.origin = fixed[0];
  // conjugate by the translation x -> x - origin so that 0 lies in the attractor
  std::vector<Vecd> t2;
  for (std::size_t i = 0; i < N; ++i) t2.push_back(ifs.t[i] + ifs.A[i] * res.origin - res.origin);

  // candidate attractor points: images of fixed points under words up to sample_depth
  std::vector<Vecd> pts;
  std::function<void(const Mat&, const Vecd&, int)> walk = [&](const Mat& M, const Vecd& c, int k) {
    for (std::size_t i = 0; i < N; ++i) pts.push_back(M * (fixed[i] - res.origin) + c);
    if (k == 0 || pts.size() > 20000) return;
    for (std::size_t i = 0; i < N; ++i) walk(M * ifs.A[i], M * t2[i] + c, k - 1);
  };
  walk(Mat::Identity(d, d), Vecd::Zero(d), sample_depth);
  std::vector<Vecd> basis, ortho;
  for (int k = 0; k < d; ++k) {
    double best = 0;
    int arg = -1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      Vecd r = pts[i];
      for (const auto& q : ortho) r -= r.dot(q) * q;
      if (r.norm() > best) {
        best = r.norm();
        arg = static_cast<int>(i);
      }
    }
    if (arg < 0 || best < 1e-9) throw precondition_error("attractor lies in a proper subspace; no basis of attractor points");
    Vecd r = pts[arg];
    for (const auto& q : ortho) r -= r.dot(q) * q;
    ortho.push_back(r.normalized());
    basis.push_back(pts[arg]);
  }
  Mat Y(d, d);
  for (int k = 0; k < d; ++k) Y.col(k) = basis[k];
  res.Y = basis;
  res.alpha_Y = matrix_alpha(Y);

  double R = 1.0 / 1024;
  auto fits = [&](double R) {
    for (std::size_t i = 0; i < N; ++i)
      if (operator_norm(ifs.A[i]) * R + t2[i].norm() > R) return false;
    return true;
  };
  while (!fits(R)) {
    R *= 2;
    if (R > 1e12) throw precondition_error("no invariant ball found");
  }
  res.R = R;
  int K = 1;
  while (!(std::pow(amax, K) < res.alpha_Y / (6 * R))) {
    ++K;
    if (K > 64) throw precondition_error("block length overflow (K > 64)");
  }
  res.K = K;

  std::size_t letters = 1;
  for (int k = 0; k < K; ++k) {
    letters *= N;
    if (letters > (1u << 20)) throw precondition_error("block alphabet too large");
  }
  std::vector<Mat> blockA(letters);
  std::vector<Vecd> blockt(letters);
  std::vector<Rational> blockm(letters);
  double c1 = std::numeric_limits<double>::infinity();
  Rational mmax = 0;
  for (std::size_t b = 0; b < letters; ++b) {
    Mat M = Mat::Identity(d, d);
    Vecd c = Vecd::Zero(d);
    Rational m = 1;
    std::size_t x = b;
    std::vector<int> digits(K);
    for (int k = K - 1; k >= 0; --k) {
      digits[k] = static_cast<int>(x % N);
      x /= N;
    }
    for (int k = 0; k < K; ++k) {
      c = c + M * t2[digits[k]];
      M = M * ifs.A[digits[k]];
      m *= mass[digits[k]];
    }
    blockA[b] = M;
    blockt[b] = c;
    blockm[b] = m;
    c1 = std::min(c1, 1.0 / operator_norm(M.inverse()));
    mmax = std::max(mmax, m);
  }
  res.C1 = c1;
  res.C2 = res.alpha_Y / (6 * R);
  res.C2_stated = res.alpha_Y / (3 * R);
  res.C3 = mmax.get_d();

  auto compose = [blockA, blockt, d](const Word& w) {
    Mat M = Mat::Identity(d, d);
    Vecd c = Vecd::Zero(d);
    for (int b : w) {
      c = c + M * blockt[b];
      M = M * blockA[b];
    }
    return std::pair<Mat, Vecd>{M, c};
  };
  MoranStructure S;
  S.N = static_cast<int>(letters);
  S.node = [compose, R, d](const Word& w) {
    auto [M, c] = compose(w);
    SetDescriptor s;
    double nm = operator_norm(M);
    s.diam = 2 * R * nm;
    s.center = std::vector<double>(c.data(), c.data() + d);
    s.radius = R * nm;
    for (int i = 0; i < d; ++i) {
      double hw = R * M.row(i).norm();
      s.lo.push_back(c(i) - hw);
      s.hi.push_back(c(i) + hw);
    }
    return s;
  };
  S.weight = [blockm](const Word& w) {
    Rational m = 1;
    for (int b : w) m *= blockm[b];
    return m;
  };
  S.nested = [blockA, blockt, R](const Word&, int j) {
    return operator_norm(blockA[j]) * R + blockt[j].norm() <= R * (1 + 1e-12);
  };
  S.C1 = res.C1;
  S.C2 = res.C2;
  S.C3 = res.C3;
  res.structure = std::move(S);
  return res;
}

}  // namespace assouad
