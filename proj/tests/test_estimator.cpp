#include <assouad/estimator.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace assouad;

namespace {

const double kCantorDim = std::log(2.0) / std::log(3.0);

Rational pow3(int k) { return rational_pow(Rational(3), k); }

void check_monotone(const MeasureOracle& o, int queries, std::uint64_t seed) {
  auto pts = o.sample_support(seed, 50);
  std::mt19937_64 rng(seed);
  double lmin = -log_rational(o.min_radius());
  std::uniform_real_distribution<double> u(0, 1);
  for (int q = 0; q < queries; ++q) {
    Rational x = pts[rng() % pts.size()];
    if (q % 3 == 0) x += rational_from_double(u(rng) * 1e-3);
    double a = u(rng) * std::min(lmin, 60.0), b = u(rng) * std::min(lmin, 60.0);
    if (a > b) std::swap(a, b);
    Rational r2 = rational_from_double(std::exp(-a)), r1 = rational_from_double(std::exp(-b));
    if (r1 < o.min_radius()) r1 = o.min_radius();
    if (r2 < r1) r2 = r1;
    auto m1 = o.ball_mass(x, r1), m2 = o.ball_mass(x, r2);
    ASSERT_LE(m1.lo, m2.lo) << o.name();
    ASSERT_LE(m1.hi, m2.hi) << o.name();
    ASSERT_LE(m1.lo, m1.hi);
  }
}

// partition into groups of diameter <= r, by trying every labelling
int brute_cover(const PointSet& F, double r) {
  std::size_t n = F.size();
  if (n == 0) return 0;
  for (std::size_t k = 1; k <= n; ++k) {
    std::vector<std::size_t> lab(n, 0);
    for (;;) {
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i)
        for (std::size_t j = i + 1; j < n && ok; ++j)
          if (lab[i] == lab[j] && dist(F[i], F[j]) > r) ok = false;
      if (ok) return static_cast<int>(k);
      std::size_t p = 0;
      while (p < n && ++lab[p] == k) lab[p++] = 0;
      if (p == n) break;
    }
  }
  return static_cast<int>(n);
}

}  // namespace

TEST(Rng, CounterBasedAndDeterministic) {
  EXPECT_EQ(hash_uniform(7, 3, 4), hash_uniform(7, 3, 4));
  EXPECT_NE(hash_uniform(7, 3, 4), hash_uniform(7, 4, 3));
  double s = 0;
  for (int i = 0; i < 10000; ++i) {
    double v = hash_uniform(1, i);
    ASSERT_GE(v, 0);
    ASSERT_LT(v, 1);
    s += v;
  }
  EXPECT_NEAR(s / 10000, 0.5, 0.02);
  EXPECT_EQ(rational_pow(Rational(2, 3), -2), Rational(9, 4));
}

TEST(Cascade, ExactRatioIdentity) {
  auto p = CascadeParams::shipped(4);
  auto o = cascade_oracle(p);
  for (std::size_t j = 0; j < 3; ++j) {
    Rational ratio = cascade_ratio(*o, p, j);
    EXPECT_EQ(ratio, rational_pow(p.q[j], -p.n[j])) << j;
    double t = log_rational(ratio) / (p.n[j] * std::log(2.0));
    EXPECT_NEAR(t, -std::log(p.q[j].get_d()) / std::log(2.0), 1e-12);
  }
  auto whole = o->ball_mass(Rational(1, 2), Rational(1, 2));
  EXPECT_EQ(whole.lo, 1);
  EXPECT_EQ(whole.hi, 1);
}

TEST(Cascade, ChainWeights) {
  auto p = CascadeParams::shipped(2);
  auto o = cascade_oracle(p);
  // the leftmost interval at level n_j carries t_j of its parent
  for (std::size_t j = 0; j < p.n.size(); ++j) {
    std::vector<int> w(p.n[j], 0);
    std::vector<int> parent(p.n[j] - 1, 0);
    EXPECT_EQ(o->cylinder_mass(w) / o->cylinder_mass(parent), p.t(j));
  }
  EXPECT_EQ(o->cylinder_mass({1, 0, 1}), Rational(1, 8));
  EXPECT_EQ(o->cylinder_mass({0, 0, 1}), Rational(1, 4) * (1 - p.t(0)));
  EXPECT_EQ(o->cylinder_mass({0, 0, 0, 0}), Rational(1, 4) * p.t(0) * p.q[0]);
}

TEST(Cascade, Validation) {
  CascadeParams p;
  p.n = {3, 5};
  p.q = {Rational(2, 3), Rational(3, 4)};
  EXPECT_THROW(p.validate(), precondition_error);
  p.n = {3, 9};
  p.q = {Rational(3, 4), Rational(2, 3)};
  EXPECT_THROW(p.validate(), precondition_error);
  p.q = {Rational(1, 3), Rational(2, 3)};
  EXPECT_THROW(p.validate(), precondition_error);
  EXPECT_NO_THROW(CascadeParams::shipped(4).validate());
  EXPECT_NO_THROW(CascadeParams::steep(4).validate());
  auto o = cascade_oracle(CascadeParams::shipped(2));
  EXPECT_THROW(o->ball_mass(0, rational_pow(Rational(1, 2), 28)), precondition_error);
}

TEST(Cascade, LowerHAtPairedScales) {
  auto p = CascadeParams::steep(4);
  auto o = cascade_oracle(p);
  Grid g;
  g.points = {0};
  for (long nj : p.n) {
    g.radii.push_back(rational_pow(Rational(1, 2), nj));
    g.radii.push_back(rational_pow(Rational(1, 2), 2 * nj));
  }
  auto e = empirical_H(*o, 0.5, Mode::lower, g);
  EXPECT_LE(e.value, 0.05);
  EXPECT_EQ(e.witness_x, 0);
  EXPECT_EQ(e.witness_r, e.witness_R * e.witness_R);
  EXPECT_TRUE(e.exact);
}

TEST(Cascade, LocalDimAtOrigin) {
  auto o = cascade_oracle(CascadeParams::shipped(4));
  auto d = local_dim_estimate(*o, 0, scale_ladder(Rational(1, 2), 1, o->depth_cap() + 1));
  EXPECT_GE(d.liminf_est, 0.8);
  EXPECT_LE(d.liminf_est, d.limsup_est);
}

TEST(Triadic, CylinderIdentities) {
  auto o = triadic_oracle(40);
  for (int k = 0; k <= 20; ++k) {
    std::vector<int> ones(k, 1);
    EXPECT_EQ(triadic_premass(*o, ones), (Rational(3, 2) + k) / pow3(k)) << k;
    for (int j : {0, 2}) {
      auto w = ones;
      w.push_back(j);
      EXPECT_EQ(triadic_premass(*o, w), Rational(k + 1) / pow3(k + 1));
      for (int l = 1; l <= 3; ++l)
        for (int t = 0; t < 5; ++t) {
          auto v = w;
          for (int i = 0; i < l; ++i) v.push_back((t * 7 + i * 5) % 3);
          EXPECT_EQ(triadic_premass(*o, v), Rational(k + 1) / pow3(k + 1 + l));
        }
    }
  }
  EXPECT_EQ(triadic_premass(*o, {1, 1, 1}), Rational(1, 6));
}

TEST(Triadic, SandwichInequalities) {
  auto o = triadic_oracle(40);
  for (int k = 0; k <= 20; ++k) {
    std::vector<int> v(k, 1);
    for (int l = 1; l <= 4; ++l) {
      Rational lo = Rational(k + 1) / pow3(k + l), hi = (Rational(3, 2) + k + l) / pow3(k + l);
      int total = 1;
      for (int i = 0; i < l; ++i) total *= 3;
      for (int c = 0; c < total; ++c) {
        auto vw = v;
        for (int i = 0, cc = c; i < l; ++i, cc /= 3) vw.push_back(cc % 3);
        Rational m = triadic_premass(*o, vw);
        ASSERT_LE(lo, m);
        ASSERT_LE(m, hi);
      }
    }
    if (k >= 1)
      for (int j : {0, 2}) {
        std::vector<int> nb(k - 1, 1);
        nb.push_back(j);
        Rational q = triadic_premass(*o, v) / triadic_premass(*o, nb);
        EXPECT_EQ(q, (Rational(3, 2) + k) / k);
        EXPECT_LE(q, Rational(5, 2));
      }
  }
}

TEST(Triadic, CentralBallUnbounded) {
  auto o = triadic_oracle(40);
  Rational prev = 0;
  for (int k = 1; k <= 20; ++k) {
    auto m = o->ball_mass(Rational(1, 2), 1 / (2 * pow3(k)));
    ASSERT_TRUE(m.exact());
    Rational scaled = Rational(3, 2) * m.lo * pow3(k);
    EXPECT_EQ(scaled, Rational(3, 2) + k);
    EXPECT_GT(scaled, prev);
    prev = scaled;
  }
}

TEST(Triadic, LocalSlopeAtCentre) {
  auto o = triadic_oracle(60);
  std::vector<Rational> sc;
  for (int k = 1; k <= 50; ++k) sc.push_back(1 / (2 * pow3(k)));
  auto d = local_dim_estimate(*o, Rational(1, 2), sc);
  for (int k = 1; k <= 50; ++k) {
    double mass = std::log((1.5 + k) / 1.5) - k * std::log(3.0);
    double expect = mass / (-k * std::log(3.0) - std::log(2.0));
    EXPECT_NEAR(d.slopes[k - 1], expect, 1e-9);
  }
  // slopes increase towards 1, so the tail minimum sits at the start of the finer half
  EXPECT_DOUBLE_EQ(d.liminf_est, d.slopes[25]);
  EXPECT_LT(d.slopes[49], 1);
  EXPECT_GT(d.slopes[49], d.slopes[25]);
}

TEST(Oracle, Monotone) {
  check_monotone(*cantor_oracle(30), 1000, 1);
  check_monotone(*cantor_oracle(30, Rational(1, 4)), 1000, 2);
  check_monotone(*cascade_oracle(CascadeParams::shipped(3)), 1000, 3);
  check_monotone(*triadic_oracle(40), 1000, 4);
  check_monotone(*salem_oracle(SalemParams::desk(5)), 1000, 5);
  check_monotone(*salem_oracle(SalemParams::desk(6, SalemMode::set_example)), 1000, 6);
  check_monotone(*finite_type_oracle(build_transition_graph(golden_bernoulli_ifs()), 20), 300, 7);
}

TEST(Oracle, FullBallIsOne) {
  std::vector<OraclePtr> os{cantor_oracle(30), cascade_oracle(CascadeParams::shipped(3)), triadic_oracle(40),
                            salem_oracle(SalemParams::desk(1)),
                            finite_type_oracle(build_transition_graph(cantor_ifs()), 20)};
  for (const auto& o : os)
    for (const auto& x : o->sample_support(3, 10)) {
      auto m = o->ball_mass(x, o->support_diameter());
      EXPECT_EQ(m.lo, 1) << o->name();
      EXPECT_EQ(m.hi, 1) << o->name();
      EXPECT_TRUE(o->in_support(x));
    }
}

TEST(Oracle, SampledPointsAreStratified) {
  auto o = cantor_oracle(30);
  auto pts = o->sample_support(0, 8);
  for (int i = 0; i < 8; ++i) {
    // one point in each level-3 cylinder, in order
    Rational lo = 0, w = 1;
    for (int k = 0, c = i; k < 3; ++k) {
      w /= 3;
      lo += 2 * ((c >> (2 - k)) & 1) * w;
    }
    EXPECT_GE(pts[i], lo);
    EXPECT_LE(pts[i], lo + w);
  }
  EXPECT_EQ(o->sample_support(0, 8), pts);
  EXPECT_NE(o->sample_support(1, 8), pts);
}

TEST(FiniteTypeOracle, SscMatchesCylinderOracle) {
  auto fo = finite_type_oracle(build_transition_graph(cantor_ifs()), 12);
  auto co = cantor_oracle(12);
  EXPECT_TRUE(fo->exact());
  for (const auto& x : co->sample_support(4, 12))
    for (int k = 1; k <= 8; ++k) {
      Rational r = 1 / pow3(k);
      auto a = fo->ball_mass(x, r), b = co->ball_mass(x, r);
      EXPECT_LE(a.lo, b.hi);
      EXPECT_GE(a.hi, b.lo);
      if (a.exact() && b.exact()) EXPECT_EQ(a.lo, b.lo);
    }
  EXPECT_EQ(fo->ball_mass(0, Rational(1, 27)).lo, Rational(1, 8));
}

TEST(FiniteTypeOracle, GoldenFlaggedInexact) {
  auto fo = finite_type_oracle(build_transition_graph(golden_bernoulli_ifs()), 20);
  EXPECT_FALSE(fo->exact());
  auto m = fo->ball_mass(Rational(1, 2), Rational(1, 100));
  EXPECT_LT(m.lo, m.hi);
  EXPECT_NEAR(fo->ball_mass(Rational(1, 2), Rational(1)).lo.get_d(), 1.0, 1e-12);
  EXPECT_NEAR(fo->type_masses()[0][0], 1.0, 1e-15);
}

TEST(FiniteTypeOracle, GoldenAgainstHutchinsonIterate) {
  auto fo = finite_type_oracle(build_transition_graph(golden_bernoulli_ifs()), 30);
  double lam = (std::sqrt(5.0) - 1) / 2;
  const int K = 18;
  // K-fold image of Lebesgue measure on [0,1]
  auto ref = [&](double a, double b) {
    double s = 0;
    for (long w = 0; w < (1L << K); ++w) {
      double d = 0, r = 1;
      for (int i = 0; i < K; ++i) {
        if ((w >> i) & 1) d += r * (1 - lam);
        r *= lam;
      }
      double lo = std::max(a, d), hi = std::min(b, d + r);
      if (hi > lo) s += (hi - lo) / r;
    }
    return s / (1L << K);
  };
  for (auto [x, r] : std::vector<std::pair<double, double>>{{0.5, 0.01}, {0.3, 0.1}, {0.1, 0.05}}) {
    auto m = fo->ball_mass(rational_from_double(x), rational_from_double(r));
    EXPECT_NEAR((m.lo.get_d() + m.hi.get_d()) / 2, ref(x - r, x + r), 5e-5) << x;
  }
}

TEST(Salem, RatioIdentityPerBlock) {
  for (std::uint64_t seed : {0u, 3u, 11u}) {
    auto o = salem_oracle(SalemParams::desk(seed));
    for (std::size_t i = 0; i < 4; ++i) {
      auto ps = o->paired_scale(i);
      auto a = o->ball_mass(ps.x, ps.R), b = o->ball_mass(ps.x, ps.r);
      ASSERT_TRUE(a.exact() && b.exact());
      EXPECT_EQ(a.lo / b.lo, ps.predicted) << "seed " << seed << " block " << i;
    }
  }
}

TEST(Salem, ConstructionBounds) {
  auto o = salem_oracle(SalemParams::desk(2));
  for (int k = 1; k <= o->depth_cap(); ++k) {
    EXPECT_GE(o->xi(k), Rational(1, 4) - Rational(1, 1 << 20));
    EXPECT_LE(o->xi(k), Rational(1, 3) + Rational(1, 1 << 20));
  }
  EXPECT_EQ(o->left_weight(5), Rational(1, 2));
  EXPECT_EQ(o->left_weight(8), Rational(1, 2));
  EXPECT_EQ(o->left_weight(17), Rational(1, 3));
  EXPECT_EQ(o->left_weight(4), Rational(1, 2));
  auto s = salem_oracle(SalemParams::desk(2, SalemMode::set_example));
  EXPECT_EQ(s->left_weight(7), Rational(1, 2));
  EXPECT_THROW(s->paired_scale(0), precondition_error);
  SalemParams bad = SalemParams::desk(0);
  bad.n = {4, 8};
  EXPECT_THROW(SalemOracle{bad}, precondition_error);
}

TEST(Salem, FourierPartialSumsTrend) {
  // increments of sum |mu^(n)|^2 over dyadic ranges of n should not grow
  int growing = 0;
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    auto o = salem_oracle(SalemParams::desk(seed));
    EXPECT_EQ(o->fourier_abs(0), 1);
    double s1 = o->fourier_partial_sum(2, 128), s2 = o->fourier_partial_sum(2, 256), s3 = o->fourier_partial_sum(2, 512);
    EXPECT_LE(s1, s2);
    EXPECT_LE(s2, s3);
    if (s3 - s2 > 2 * (s2 - s1)) ++growing;
  }
  EXPECT_LE(growing, 4);
}

TEST(Salem, LocalDimsPositive) {
  auto o = salem_oracle(SalemParams::desk(9));
  std::vector<Rational> sc;
  for (int k = 4; k <= o->depth_cap(); k += 4) sc.push_back(o->length(k));
  for (const auto& x : o->sample_support(9, 10)) EXPECT_GT(local_dim_estimate(*o, x, sc).liminf_est, 0.2);
}

TEST(Estimate, CantorBothModes) {
  auto o = cantor_oracle(30);
  auto g = default_grid(*o, 20, 30);
  for (double d : {0.0, 0.25, 1.0}) {
    auto up = empirical_H(*o, d, Mode::upper, g), lo = empirical_H(*o, d, Mode::lower, g);
    EXPECT_NEAR(up.value, kCantorDim, 0.02) << d;
    EXPECT_NEAR(lo.value, kCantorDim, 0.02) << d;
    EXPECT_LE(lo.value_lower, lo.value_upper);
    EXPECT_TRUE(up.exact);
    EXPECT_GT(up.samples, 0);
  }
}

TEST(Estimate, LowerMonotoneInDelta) {
  for (OraclePtr o : {OraclePtr(cantor_oracle(30, Rational(1, 4))), OraclePtr(cascade_oracle(CascadeParams::shipped(3))),
                      OraclePtr(triadic_oracle(40))}) {
    auto g = default_grid(*o, 15, 36);
    double prev = -1;
    for (double d : {0.0, 0.1, 0.25, 0.5, 1.0}) {
      double v = empirical_H(*o, d, Mode::lower, g).value;
      EXPECT_GE(v, prev - 0.01) << o->name() << " " << d;
      prev = v;
    }
  }
}

TEST(Estimate, EmptyGridRejected) {
  auto o = cantor_oracle(30);
  Grid g;
  g.points = {0};
  g.radii = {Rational(1, 3)};
  EXPECT_THROW(empirical_H(*o, 0, Mode::upper, g), precondition_error);
  EXPECT_THROW(spectrum_point(*o, 1.5, Mode::upper, default_grid(*o, 4, 20)), precondition_error);
}

TEST(Estimate, SpectrumSandwich) {
  std::vector<double> thetas{0.5, 0.6, 0.75, 0.9};
  for (OraclePtr o : {OraclePtr(cantor_oracle(30)), OraclePtr(cantor_oracle(30, Rational(1, 4))),
                      OraclePtr(triadic_oracle(40))}) {
    auto g = default_grid(*o, 12, 36);
    double quasi = quasi_sequence(*o, Mode::lower, g).estimates.back().value;
    for (double th : thetas) {
      double le = spectrum_le(*o, th, Mode::lower, g).value;
      EXPECT_GE(le, quasi - 0.02) << o->name() << " " << th;
      for (double psi : thetas)
        if (psi <= th) EXPECT_LE(le, spectrum_point(*o, psi, Mode::lower, g).value + 0.02) << o->name() << " " << th;
    }
  }
}

TEST(Estimate, SequencesAndExtrapolation) {
  EXPECT_NEAR(extrapolate_last_two({0.5, 0.25}, {1.0, 0.5}, 0), 0, 1e-15);
  auto o = cantor_oracle(30);
  auto g = default_grid(*o, 12, 30);
  auto q = quasi_sequence(*o, Mode::lower, g);
  ASSERT_EQ(q.estimates.size(), 4u);
  EXPECT_NEAR(q.extrapolated, kCantorDim, 0.02);
  auto s = spectrum_sequence(*o, Mode::lower, g);
  EXPECT_NEAR(s.extrapolated, q.extrapolated, 0.05);
}

TEST(LocalDim, CantorPoints) {
  auto o = cantor_oracle(30);
  auto sc = scale_ladder(Rational(1, 3), 1, 30);
  for (const auto& x : o->sample_support(2, 10)) {
    auto d = local_dim_estimate(*o, x, sc);
    EXPECT_NEAR(d.liminf_est, kCantorDim, 0.05);
    EXPECT_NEAR(d.limsup_est, kCantorDim, 0.05);
  }
  EXPECT_THROW(local_dim_estimate(*o, Rational(1, 2), sc), precondition_error);
}

TEST(Counting, CoveringExamples) {
  PointSet line{{0, 0}, {0.5, 0}, {1, 0}};
  EXPECT_EQ(covering_count(line, {0.5, 0}, 1, 0.4, 1), 3);
  EXPECT_EQ(brute_cover(line, 0.4), 3);
  EXPECT_EQ(covering_count(line, {0.5, 0}, 1, 0.5, 1), 2);
  EXPECT_EQ(covering_count({{0.2, 0.3}}, {0, 0}, 1, 1e-6), 1);
  EXPECT_EQ(covering_count(line, {0.5, 0}, 1, 1), 1);
  EXPECT_EQ(covering_count(line, {5, 5}, 1, 0.5), 0);
  EXPECT_THROW(covering_count(line, {0, 0}, 1, 0.5, 3), precondition_error);
  EXPECT_THROW(covering_count(line, {0, 0}, 0.1, 0.5), precondition_error);
}

TEST(Counting, CoveringMatchesBruteForce) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    int n = 1 + t % 6;
    PointSet F(n);
    for (auto& p : F) p = {u(rng), t % 2 ? u(rng) : 0};
    double r = 0.05 + 0.5 * u(rng);
    EXPECT_EQ(covering_count_set(F, r), brute_cover(F, r)) << t;
  }
}

TEST(Counting, PackingExamples) {
  PointSet sq{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  EXPECT_EQ(packing_count_set(sq, 0.49), 4);
  EXPECT_EQ(packing_count_set(sq, 0.5), 1 + 1);
  EXPECT_EQ(packing_count_set(sq, 0.8), 1);
  EXPECT_EQ(packing_count(sq, {9, 9}, 1, 0.1), 0);
}

TEST(Counting, ChainOnRandomSets) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    PointSet F(2 + t % 9);
    for (auto& p : F) p = {u(rng), u(rng)};
    double r = 0.01 + 0.1 * u(rng);
    int N16 = covering_count_set(F, 16 * r), M4 = packing_count_set(F, 4 * r), N4 = covering_count_set(F, 4 * r),
        M1 = packing_count_set(F, r), N1 = covering_count_set(F, r);
    EXPECT_LE(N16, M4);
    EXPECT_LE(M4, N4);
    EXPECT_LE(N4, M1);
    EXPECT_LE(M1, N1);
  }
}

TEST(NumTheo, FindsWindowedPair) {
  double eta = 0.05;
  for (int i : {15, 20, 25}) {
    double ti = std::ldexp(1.0, -i);
    auto r = numtheo_find_mn(0.5, 1.0 / 3, ti, eta);
    ASSERT_GE(r.m, 1);
    ASSERT_GE(r.n, 1);
    double gap = 1 / ti - 1 / (std::pow(0.5, r.n) * std::pow(1.0 / 3, r.m));
    double slack = 1e-12 / ti;
    EXPECT_GE(gap, eta / (2 * ti) - slack);
    EXPECT_LE(gap, 4 * eta / ti + slack);
    EXPECT_FALSE(r.rational_warning);
  }
  EXPECT_THROW(numtheo_find_mn(0.5, 1.0 / 3, 0.3, eta), precondition_error);
  EXPECT_THROW(numtheo_find_mn(0.3, 0.5, 0.01, eta), precondition_error);
  EXPECT_TRUE(log_ratio_looks_rational(0.5, 0.25));
  EXPECT_FALSE(log_ratio_looks_rational(0.5, 1.0 / 3));
}

TEST(NumTheo, LatticeGapsShrink) {
  auto ys = sorted_lattice(0.5, 1.0 / 3, 2000);
  for (std::size_t j = 0; j + 1 < ys.size(); ++j) ASSERT_GE(ys[j], ys[j + 1]);
  EXPECT_NEAR(ys[0], std::log(1.0 / 6), 1e-15);
  auto g = lattice_gaps(0.5, 1.0 / 3, 2000);
  double head = 0, tail = 0;
  for (int i = 0; i < 200; ++i) {
    head += g[i];
    tail += g[1800 + i];
  }
  EXPECT_LT(tail, head / 2);
}
