#include <assouad/carpets.hpp>
#include <assouad/estimator.hpp>
#include <assouad/finite_type.hpp>
#include <assouad/moran_affine.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace assouad;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string f(double v, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

Outcome ssc_exactness() {
  auto t0 = std::chrono::steady_clock::now();
  auto g = build_transition_graph(cantor_ifs());
  auto b = local_dim_bounds(g, 30);
  double secs = seconds_since(t0);
  double target = std::log(2.0) / std::log(3.0);
  double formula = std::min(std::log(0.5) / std::log(1.0 / 3), std::log(0.5) / std::log(1.0 / 3));
  bool ok = b.lower <= target + 1e-12 && target <= b.upper + 1e-12 && b.upper - b.lower < 1e-9 &&
            std::fabs(formula - target) < 1e-15 && secs < 10;
  return {ok, "bracket [" + f(b.lower, 12) + ", " + f(b.upper, 12) + "] width " + f(b.upper - b.lower, 3) + " in " +
                  f(secs, 3) + " s"};
}

Outcome biased_ssc() {
  auto g = build_transition_graph(cantor_ifs(Rational(1, 4)));
  auto b = local_dim_bounds(g, 40);
  double target = std::log(4.0 / 3) / std::log(3.0);
  bool ok = b.lower <= target + 1e-12 && target <= b.upper + 1e-12 && target - b.lower <= 1e-3 &&
            b.upper - target <= 1e-3;
  return {ok, "bracket [" + f(b.lower, 9) + ", " + f(b.upper, 9) + "] target " + f(target, 9)};
}

Outcome finite_type_closure() {
  Budget b30, b60;
  b30.max_level = 30;
  b60.max_level = 60;
  auto g = build_transition_graph(golden_bernoulli_ifs(), b30);
  auto h = build_transition_graph(golden_bernoulli_ifs(), b60);
  bool cols = true;
  for (const auto& e : g.edges) cols = cols && columns_nonzero(e.T);
  bool ok = g.certified_depth > 0 && g.certified_depth <= 30 && g.nodes.size() == h.nodes.size() &&
            g.edges.size() == h.edges.size() && g.nodes.size() == 7 && g.edges.size() == 13 && cols;
  return {ok, std::to_string(g.nodes.size()) + " nodes, " + std::to_string(g.edges.size()) + " edges, closed at level " +
                  std::to_string(g.certified_depth) + "; at max_level 60: " + std::to_string(h.nodes.size()) + "/" +
                  std::to_string(h.edges.size()) + "; columns nonzero " + (cols ? "yes" : "no")};
}

Outcome carpets() {
  Rational q(1, 4);
  BMCarpet uniform(2, 3, {{0, 0}, {0, 2}, {1, 0}, {1, 1}}, {q, q, q, q});
  BMCarpet single(2, 3, {{0, 0}, {1, 2}}, {Rational(1, 2), Rational(1, 2)});
  auto t0 = std::chrono::steady_clock::now();
  auto fu = dimL_bm(uniform, VssPolicy::report);
  auto eu = approximate_square_exponent(uniform, 12, VssPolicy::report);
  double su = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  auto fs = dimL_bm(single);
  auto es = approximate_square_exponent(single, 12);
  double ss = seconds_since(t0);
  bool ok = std::fabs(fu.value - eu.value) <= 0.05 && std::fabs(fs.value - es.value) <= 0.05 &&
            std::fabs(fu.value - 1.63093) < 1e-4 && std::fabs(fs.value - 1) < 1e-12 && su < 60 && ss < 60;
  return {ok, "uniform " + f(fu.value) + " vs " + f(eu.value) + " (" + f(su, 2) + " s), singleton " + f(fs.value) +
                  " vs " + f(es.value) + " (" + f(ss, 2) + " s)"};
}

Outcome cascade() {
  auto shipped = CascadeParams::shipped(4);
  auto so = cascade_oracle(shipped);
  bool ident = true;
  for (std::size_t j = 0; j < 3; ++j) ident = ident && cascade_ratio(*so, shipped, j) == rational_pow(shipped.q[j], -shipped.n[j]);

  auto paired = [](const CascadeParams& p) {
    Grid g;
    g.points = {0};
    for (long nj : p.n) {
      g.radii.push_back(rational_pow(Rational(1, 2), nj));
      g.radii.push_back(rational_pow(Rational(1, 2), 2 * nj));
    }
    return g;
  };
  auto steep = CascadeParams::steep(4);
  auto co = cascade_oracle(steep);
  auto h = empirical_H(*co, 0.5, Mode::lower, paired(steep));
  auto hs = empirical_H(*so, 0.5, Mode::lower, paired(shipped));

  auto ladder = scale_ladder(Rational(1, 2), 1, co->depth_cap() + 1);
  double min_liminf = std::numeric_limits<double>::infinity();
  for (const auto& x : co->sample_support(0, 20)) min_liminf = std::min(min_liminf, local_dim_estimate(*co, x, ladder).liminf_est);

  bool ok = ident && h.value <= 0.05 && h.witness_x == 0 && min_liminf >= 0.8;
  return {ok, std::string("identities j<=3 ") + (ident ? "exact" : "FAILED") + "; lower H(1/2) = " + f(h.value, 4) +
                  " at x=0 (q_j = 1-2^-(j+1); shipped schedule gives " + f(hs.value, 4) + "); min liminf over 20 points " +
                  f(min_liminf, 4)};
}

Outcome triadic() {
  auto o = triadic_oracle(120);
  auto pow3 = [](int k) { return rational_pow(Rational(3), k); };
  bool exact = true;
  for (int k = 0; k <= 20 && exact; ++k) {
    std::vector<int> ones(k, 1);
    exact = exact && triadic_premass(*o, ones) == (Rational(3, 2) + k) / pow3(k);
    for (int j : {0, 2}) {
      auto w = ones;
      w.push_back(j);
      exact = exact && triadic_premass(*o, w) == Rational(k + 1) / pow3(k + 1);
      for (int l = 1; l <= 3; ++l) {
        int total = 1;
        for (int i = 0; i < l; ++i) total *= 3;
        for (int c = 0; c < total; ++c) {
          auto v = w;
          auto u = ones;
          for (int i = 0, cc = c; i < l; ++i, cc /= 3) {
            v.push_back(cc % 3);
            u.push_back(cc % 3);
          }
          exact = exact && triadic_premass(*o, v) == Rational(k + 1) / pow3(k + 1 + l);
          Rational m = triadic_premass(*o, u);
          exact = exact && Rational(k + 1) / pow3(k + l) <= m && m <= (Rational(3, 2) + k + l) / pow3(k + l);
        }
      }
      if (k >= 1) {
        std::vector<int> nb(k - 1, 1);
        nb.push_back(j);
        Rational q = triadic_premass(*o, ones) / triadic_premass(*o, nb);
        exact = exact && q == (Rational(3, 2) + k) / k && q <= Rational(5, 2);
      }
    }
  }
  bool unbounded = true;
  Rational prev = 0;
  for (int k = 1; k <= 20; ++k) {
    auto m = o->ball_mass(Rational(1, 2), 1 / pow3(k));
    Rational s = m.lo * pow3(k);
    unbounded = unbounded && (m.hi - m.lo) * pow3(k) < Rational(1, 1000000000) && s > prev;
    prev = s;
  }
  unbounded = unbounded && prev > 10;

  Grid g;
  g.points = o->sample_support(1, 20);
  g.points.push_back(Rational(1, 2));
  g.radii = scale_ladder(Rational(1, 3), 20, 110);
  auto admit = [](double lR, double lr) {
    double i = -lR / std::log(3.0), l = -lr / std::log(3.0) - i;
    return i < 39.5 && l > 19.5 && l < 69.5;
  };
  auto up = detail::extremal_ratio(*o, g, Mode::upper, 0, admit);
  auto lo = detail::extremal_ratio(*o, g, Mode::lower, 0, admit);
  bool ok = exact && unbounded && std::fabs(up.value - 1) <= 0.05 && std::fabs(lo.value - 1) <= 0.05 && up.samples >= 1000;
  return {ok, std::string("identities k<=20 ") + (exact ? "exact" : "FAILED") + "; upper " + f(up.value, 4) + ", lower " +
                  f(lo.value, 4) + " over " + std::to_string(up.samples) + " pairs; mu(B(1/2,3^-20))*3^20 = " +
                  f(prev.get_d(), 5)};
}

Outcome spectrum() {
  auto o = cantor_oracle(40);
  auto g = default_grid(*o, 20, 40);
  std::vector<double> psi{0.25, 0.4, 0.5, 0.6, 0.75, 0.9};
  double worst = 0;
  for (double th : {0.5, 0.75, 0.9}) {
    double le = spectrum_le(*o, th, Mode::lower, g).value;
    double best = std::numeric_limits<double>::infinity();
    for (double p : psi)
      if (p <= th) best = std::min(best, spectrum_point(*o, p, Mode::lower, g).value);
    worst = std::max(worst, std::fabs(le - best));
  }
  auto seq = spectrum_sequence(*o, Mode::lower, g);
  auto quasi = quasi_sequence(*o, Mode::lower, g);
  double gap = std::fabs(seq.extrapolated - quasi.extrapolated);
  bool ok = worst <= 0.05 && gap <= 0.05;
  return {ok, "max |le - min eq| = " + f(worst, 3) + "; theta->1 " + f(seq.extrapolated) + " vs quasi " +
                  f(quasi.extrapolated)};
}

Outcome matrix_bound() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss;
  int violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 10000; ++t) {
    int d = 2 + t % 3;
    Mat A(d, d), B(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        A(i, j) = gauss(rng);
        B(i, j) = gauss(rng);
      }
    Eigen::JacobiSVD<Mat> sa(A), sb(B);
    double inv_norm = 1 / sa.singularValues()(d - 1);
    double bound = sb.singularValues()(0) / (d * inv_norm);
    Mat Q = Eigen::HouseholderQR<Mat>(Mat::NullaryExpr(d, d, [&] { return gauss(rng); })).householderQ();
    for (const Mat& E : {Mat(Mat::Identity(d, d)), Q}) {
      double best = 0;
      for (int k = 0; k < d; ++k) best = std::max(best, (B * A * E.col(k)).norm());
      if (best < bound - 1e-9) ++violations;
      worst = std::min(worst, best - bound);
      if (std::fabs(matrix_alpha(A) * operator_norm(B) - bound) > 1e-9 * std::max(1.0, bound)) ++violations;
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in 10^4 pairs (two bases each); min slack " + f(worst, 3)};
}

Outcome counting() {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  int chain_bad = 0, product_bad = 0, checks = 0;
  for (int t = 0; t < 500; ++t) {
    PointSet E(1 + rng() % 10);
    for (auto& p : E) p = {u(rng), u(rng)};
    Point x = E[rng() % E.size()];
    double R = 0.3 + 0.7 * u(rng);
    double r1 = R * (0.1 + 0.6 * u(rng));
    double r = r1 * (0.05 + 0.5 * u(rng));
    auto F = ball_slice(E, x, R);
    for (double s : {r, r1, R}) {
      ++checks;
      int N16 = covering_count_set(F, 16 * s), M4 = packing_count_set(F, 4 * s), N4 = covering_count_set(F, 4 * s),
          M1 = packing_count_set(F, s), N1 = covering_count_set(F, s);
      if (!(N16 <= M4 && M4 <= N4 && N4 <= M1 && M1 <= N1)) ++chain_bad;
    }
    int lhs = packing_count(E, x, R, r);
    int first = packing_count(E, x, R - r1, r1);
    int inf = std::numeric_limits<int>::max();
    for (const auto& y : E) inf = std::min(inf, packing_count(E, y, r1 - r, r));
    if (lhs < first * inf) ++product_bad;
  }
  return {chain_bad == 0 && product_bad == 0, std::to_string(checks) + " chain checks, " + std::to_string(chain_bad) +
                                                 " failures; packing product inequality failures " +
                                                 std::to_string(product_bad) + "/500"};
}

Outcome numtheo() {
  Rational eta(1, 20);
  bool ok = true;
  std::string pairs;
  for (int i = 15; i <= 25; ++i) {
    auto res = numtheo_find_mn(0.5, 1.0 / 3, std::ldexp(1.0, -i), eta.get_d());
    // 1 - theta_i / (theta^n beta^m) = 1 - 2^(n-i) 3^m, exactly
    Rational scaled = 1 - rational_pow(Rational(2), res.n - i) * rational_pow(Rational(3), res.m);
    Rational slack = rational_from_double(1e-12);
    ok = ok && res.m >= 1 && res.n >= 1 && scaled >= eta / 2 - slack && scaled <= 4 * eta + slack;
    pairs += (pairs.empty() ? "" : " ") + std::to_string(res.m) + "," + std::to_string(res.n);
  }
  auto gaps = lattice_gaps(0.5, 1.0 / 3, 10000);
  bool trend = true;
  double prev_mean = std::numeric_limits<double>::infinity(), prev_max = prev_mean, mean = 0;
  for (int b = 0; b < 10; ++b) {
    double mx = 0, sum = 0;
    for (int i = b * 1000; i < (b + 1) * 1000; ++i) {
      mx = std::max(mx, gaps[i]);
      sum += gaps[i];
    }
    mean = sum / 1000;
    trend = trend && mean < prev_mean && mx <= prev_max;
    prev_mean = mean;
    prev_max = mx;
  }
  trend = trend && mean < 0.01;
  return {ok && trend, "(m,n) for i=15..25: " + pairs + "; gap block means decreasing " + (trend ? "yes" : "no") +
                           ", last block mean " + f(mean, 3)};
}

Outcome salem() {
  auto o = salem_oracle(SalemParams::desk(0));
  bool ident = true;
  for (std::size_t i = 0; i < 2; ++i) {
    auto ps = o->paired_scale(i);
    auto a = o->ball_mass(ps.x, ps.R), b = o->ball_mass(ps.x, ps.r);
    ident = ident && a.exact() && b.exact() && a.lo / b.lo == ps.predicted;
  }
  Grid g;
  for (std::size_t i = 0; i < o->params().n.size(); ++i) {
    auto ps = o->paired_scale(i);
    g.points.push_back(ps.x);
    g.radii.push_back(ps.R);
    g.radii.push_back(ps.r);
  }
  std::sort(g.radii.begin(), g.radii.end(), std::greater<>());
  auto q = quasi_sequence(*o, Mode::lower, g);
  double quasi = q.estimates.back().value;

  std::vector<Rational> sc;
  for (int k = 4; k <= o->depth_cap(); k += 4) sc.push_back(o->length(k));
  double min_local = std::numeric_limits<double>::infinity();
  for (const auto& x : o->sample_support(1, 10)) min_local = std::min(min_local, local_dim_estimate(*o, x, sc).liminf_est);

  int bounded = 0;
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    auto s = salem_oracle(SalemParams::desk(seed));
    double a = s->fourier_partial_sum(2, 128), b = s->fourier_partial_sum(2, 256), c = s->fourier_partial_sum(2, 512);
    if (c - b <= 2 * (b - a)) ++bounded;
  }
  bool ok = ident && quasi <= 0.05 && min_local > 0.2;
  return {ok, std::string("ratio identity j<=3 ") + (ident ? "exact" : "FAILED") + "; quasi-lower at paired scales " +
                  f(quasi, 4) + " (extrapolated " + f(q.extrapolated, 4) + "); min local dim " + f(min_local, 4) +
                  "; Fourier partial sums non-accelerating for " + std::to_string(bounded) + "/32 seeds"};
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"ssc-exactness", ssc_exactness}, {"biased-ssc", biased_ssc},     {"finite-type-closure", finite_type_closure},
      {"bedford-mcmullen", carpets},    {"cascade", cascade},           {"triadic", triadic},
      {"spectrum", spectrum},           {"matrix-bound", matrix_bound}, {"point-set-counting", counting},
      {"lattice-search", numtheo},      {"salem-measure", salem}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
