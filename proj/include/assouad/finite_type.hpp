#pragma once

#include "alg_field.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

namespace assouad {

using RMatrix = std::vector<std::vector<Rational>>;

struct SimilarityIFS {
  NumberField field;
  std::vector<FieldElement> r, d;
  std::vector<Rational> probs;

  SimilarityIFS(NumberField f, std::vector<FieldElement> r_, std::vector<FieldElement> d_, std::vector<Rational> p)
      : field(std::move(f)), r(std::move(r_)), d(std::move(d_)), probs(std::move(p)) {
    std::size_t n = r.size();
    if (n < 2) throw precondition_error("need at least two maps");
    if (d.size() != n || probs.size() != n) throw precondition_error("maps and probabilities differ in length");
    Rational total = 0;
    for (const auto& q : probs) {
      if (q <= 0) throw precondition_error("probabilities must be positive");
      total += q;
    }
    if (total != 1) throw precondition_error("probabilities must sum to 1");
    FieldElement one(field, Rational(1)), zero(field, Rational(0));
    for (std::size_t j = 0; j < n; ++j) {
      int s = fe_sign(r[j]);
      if (s == 0 || fe_abs(r[j]) >= one) throw precondition_error("contraction ratio must satisfy 0 < |r| < 1");
    }
    FieldElement lo = image(0).first, hi = image(0).second;
    for (std::size_t j = 1; j < n; ++j) {
      auto [a, b] = image(j);
      lo = fe_min(lo, a);
      hi = fe_max(hi, b);
    }
    if (lo != zero || hi != one) throw precondition_error("convex hull of the attractor must be [0,1]");
    lambda = fe_abs(r[0]);
    for (std::size_t j = 1; j < n; ++j) lambda = fe_min(lambda, fe_abs(r[j]));
  }

  std::size_t size() const { return r.size(); }

  // sorted endpoints of S_j([0,1])
  std::pair<FieldElement, FieldElement> image(std::size_t j) const {
    FieldElement a = d[j], b = r[j] + d[j];
    if (b < a) std::swap(a, b);
    return {a, b};
  }

  bool strong_separation() const {
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) {
        auto [a, b] = image(i);
        auto [c, e] = image(j);
        if (!(b < c || e < a)) return false;
      }
    return true;
  }

  FieldElement lambda;
};

inline SimilarityIFS cantor_ifs(Rational p0 = Rational(1, 2)) {
  auto q = NumberField::rationals();
  FieldElement third(q, Rational(1, 3));
  return SimilarityIFS(q, {third, third}, {FieldElement(q, Rational(0)), FieldElement(q, Rational(2, 3))},
                       {p0, 1 - p0});
}

inline SimilarityIFS golden_bernoulli_ifs() {
  auto f = NumberField::golden();
  auto rho = FieldElement::root(f);
  auto inv = rho.inverse();
  FieldElement one(f, Rational(1));
  return SimilarityIFS(f, {inv, inv}, {FieldElement(f, Rational(0)), one - inv}, {Rational(1, 2), Rational(1, 2)});
}

struct GenerationWord {
  std::vector<int> letters;
  FieldElement r_v, d_v;
  Rational p_v;
};

inline std::vector<GenerationWord> generate_lambda_n(const SimilarityIFS& ifs, int n) {
  if (n < 0) throw precondition_error("level must be nonnegative");
  std::vector<GenerationWord> out;
  const auto& f = ifs.field;
  if (n == 0) {
    for (std::size_t j = 0; j < ifs.size(); ++j)
      out.push_back({{static_cast<int>(j)}, ifs.r[j], ifs.d[j], ifs.probs[j]});
    return out;
  }
  FieldElement bound = ifs.lambda.pow(n);
  GenerationWord w{{}, FieldElement(f, Rational(1)), FieldElement(f, Rational(0)), Rational(1)};
  std::function<void(const GenerationWord&)> rec = [&](const GenerationWord& cur) {
    for (std::size_t k = 0; k < ifs.size(); ++k) {
      GenerationWord nx{cur.letters, cur.r_v * ifs.r[k], cur.d_v + cur.r_v * ifs.d[k], cur.p_v * ifs.probs[k]};
      nx.letters.push_back(static_cast<int>(k));
      if (fe_abs(nx.r_v) <= bound) out.push_back(std::move(nx));
      else rec(nx);
    }
  };
  rec(w);
  return out;
}

// does the attractor meet the open interval (lo, hi)?
inline bool meets_attractor(const SimilarityIFS& ifs, FieldElement lo, FieldElement hi, int depth = 0) {
  const auto& f = ifs.field;
  FieldElement zero(f, Rational(0)), one(f, Rational(1));
  if (hi <= zero || lo >= one) return false;
  if ((lo < zero && zero < hi) || (lo < one && one < hi)) return true;
  if (depth > 200) throw std::runtime_error("attractor intersection test did not resolve");
  for (std::size_t j = 0; j < ifs.size(); ++j) {
    auto [a, b] = ifs.image(j);
    if (b <= lo || a >= hi) continue;
    if ((lo < a && a < hi) || (lo < b && b < hi)) return true;
    auto inv = ifs.r[j].inverse();
    FieldElement u = (lo - ifs.d[j]) * inv, v = (hi - ifs.d[j]) * inv;
    if (v < u) std::swap(u, v);
    if (meets_attractor(ifs, u, v, depth + 1)) return true;
  }
  return false;
}

struct Neighbour {
  FieldElement a, L;
  bool operator==(const Neighbour& o) const { return a == o.a && L == o.L; }
};

struct CharacteristicVector {
  FieldElement length;
  std::vector<Neighbour> nbrs;
  int t = 1;

  std::string shape_key() const {
    std::string k = length.str() + "|";
    for (const auto& n : nbrs) k += "(" + n.a.str() + ";" + n.L.str() + ")";
    return k;
  }
  std::string key() const { return shape_key() + "|" + std::to_string(t); }
  bool operator==(const CharacteristicVector& o) const { return key() == o.key(); }
};

struct ChildInterval {
  FieldElement h, h_end;  // parent-local coordinates
  CharacteristicVector cv;
  RMatrix T;  // parent neighbours x child neighbours
};

inline bool neighbour_less(const Neighbour& x, const Neighbour& y) {
  int c = fe_cmp(x.a, y.a);
  if (c != 0) return c < 0;
  return fe_cmp(x.L, y.L) < 0;
}

// children of a net interval given its normalized length and neighbour set
inline std::vector<ChildInterval> compute_children(const SimilarityIFS& ifs, const FieldElement& ell,
                                                   const std::vector<Neighbour>& V) {
  const auto& f = ifs.field;
  const FieldElement& lam = ifs.lambda;
  struct ChildMap {
    std::size_t parent;
    FieldElement A, B, lo, hi;
    Rational p;
  };
  std::vector<ChildMap> maps;
  for (std::size_t j = 0; j < V.size(); ++j) {
    const auto& nb = V[j];
    std::function<void(const FieldElement&, const FieldElement&, const Rational&)> rec =
        [&](const FieldElement& rw, const FieldElement& dw, const Rational& pw) {
          for (std::size_t k = 0; k < ifs.size(); ++k) {
            FieldElement r2 = rw * ifs.r[k], d2 = dw + rw * ifs.d[k];
            Rational p2 = pw * ifs.probs[k];
            FieldElement A = nb.L * r2;
            if (fe_abs(A) <= lam) {
              FieldElement B = nb.L * d2 - nb.a;
              FieldElement e1 = B, e2 = A + B;
              if (e2 < e1) std::swap(e1, e2);
              maps.push_back({j, A, B, e1, e2, p2});
            } else {
              rec(r2, d2, p2);
            }
          }
        };
    rec(FieldElement(f, Rational(1)), FieldElement(f, Rational(0)), Rational(1));
  }
  FieldElement zero(f, Rational(0));
  std::vector<FieldElement> pts{zero, ell};
  for (const auto& m : maps)
    for (const auto* e : {&m.lo, &m.hi})
      if (zero < *e && *e < ell) pts.push_back(*e);
  std::sort(pts.begin(), pts.end(), [](const FieldElement& x, const FieldElement& y) { return x < y; });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::vector<ChildInterval> out;
  std::map<std::string, int> seen;
  auto lam_inv = lam.inverse();
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const auto &h = pts[k], &h2 = pts[k + 1];
    std::vector<const ChildMap*> cover;
    for (const auto& m : maps)
      if (m.lo <= h && m.hi >= h2) cover.push_back(&m);
    bool hit = false;
    for (const auto* m : cover) {
      auto inv = m->A.inverse();
      FieldElement u = (h - m->B) * inv, v = (h2 - m->B) * inv;
      if (v < u) std::swap(u, v);
      if (meets_attractor(ifs, u, v)) {
        hit = true;
        break;
      }
    }
    if (!hit) continue;
    ChildInterval c{h, h2, {}, {}};
    c.cv.length = (h2 - h) * lam_inv;
    std::vector<Neighbour> nb;
    for (const auto* m : cover) {
      Neighbour n{(h - m->B) * lam_inv, m->A * lam_inv};
      if (std::find(nb.begin(), nb.end(), n) == nb.end()) nb.push_back(n);
    }
    std::sort(nb.begin(), nb.end(), neighbour_less);
    c.T.assign(V.size(), std::vector<Rational>(nb.size(), Rational(0)));
    for (const auto* m : cover) {
      Neighbour n{(h - m->B) * lam_inv, m->A * lam_inv};
      auto i = std::find(nb.begin(), nb.end(), n) - nb.begin();
      c.T[m->parent][i] += m->p;
    }
    c.cv.nbrs = std::move(nb);
    c.cv.t = ++seen[c.cv.shape_key()];
    out.push_back(std::move(c));
  }
  return out;
}

inline CharacteristicVector root_cv(const SimilarityIFS& ifs) {
  const auto& f = ifs.field;
  FieldElement one(f, Rational(1)), zero(f, Rational(0));
  return {one, {{zero, one}}, 1};
}

struct NetInterval {
  int level = 0;
  FieldElement a, b;
  CharacteristicVector cv;
};

inline std::vector<NetInterval> net_intervals(const SimilarityIFS& ifs, int n) {
  if (n < 0) throw precondition_error("level must be nonnegative");
  const auto& f = ifs.field;
  std::vector<NetInterval> cur{{0, FieldElement(f, Rational(0)), FieldElement(f, Rational(1)), root_cv(ifs)}};
  std::unordered_map<std::string, std::vector<ChildInterval>> cache;
  FieldElement scale(f, Rational(1));
  for (int lev = 1; lev <= n; ++lev) {
    std::vector<NetInterval> next;
    for (const auto& iv : cur) {
      auto key = iv.cv.shape_key();
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, compute_children(ifs, iv.cv.length, iv.cv.nbrs)).first;
      for (const auto& c : it->second)
        next.push_back({lev, iv.a + scale * c.h, iv.a + scale * c.h_end, c.cv});
    }
    scale = scale * ifs.lambda;
    cur = std::move(next);
  }
  return cur;
}

inline const ChildInterval& find_child(const std::vector<ChildInterval>& kids, const SimilarityIFS& ifs,
                                       const NetInterval& delta, const NetInterval& parent) {
  if (delta.level != parent.level + 1) throw std::logic_error("child must be one level below its parent");
  FieldElement h = (delta.a - parent.a) * ifs.lambda.pow(parent.level).inverse();
  for (const auto& c : kids)
    if (c.h == h) return c;
  throw std::logic_error("interval is not a child of the given parent");
}

inline CharacteristicVector characteristic_vector(const SimilarityIFS& ifs, const NetInterval& delta,
                                                  const NetInterval& parent) {
  auto kids = compute_children(ifs, parent.cv.length, parent.cv.nbrs);
  return find_child(kids, ifs, delta, parent).cv;
}

inline RMatrix primitive_transition_matrix(const SimilarityIFS& ifs, const NetInterval& parent,
                                           const NetInterval& delta) {
  auto kids = compute_children(ifs, parent.cv.length, parent.cv.nbrs);
  const auto& c = find_child(kids, ifs, delta, parent);
  if (c.T.size() != parent.cv.nbrs.size()) throw std::logic_error("transition matrix does not match neighbour set");
  return c.T;
}

inline bool columns_nonzero(const RMatrix& T) {
  if (T.empty()) return false;
  for (std::size_t i = 0; i < T[0].size(); ++i) {
    bool any = false;
    for (const auto& row : T) any = any || row[i] > 0;
    if (!any) return false;
  }
  return true;
}

struct GraphEdge {
  int from, to;
  RMatrix T;
  FieldElement h;  // child offset in parent-local coordinates
};

struct Budget {
  int max_level = 30;
  int max_cvs = 5000;
};

struct finite_type_error : precondition_error {
  finite_type_error(const std::string& m, std::vector<int> counts)
      : precondition_error(m), new_by_level(std::move(counts)) {}
  std::vector<int> new_by_level;  // CVs first seen at each explored level
};

struct TransitionGraph {
  std::vector<CharacteristicVector> nodes;  // node 0 is the root [0,1]
  std::vector<int> node_level;              // level of first discovery
  std::vector<GraphEdge> edges;
  std::vector<std::vector<int>> out;  // edge indices, left to right
  std::vector<int> scc;
  std::vector<char> scc_loop, scc_maximal;
  int scc_count = 0;
  std::vector<int> new_by_level;
  int certified_depth = 0;
  FieldElement lambda;
  double log_lambda = 0;
  bool ssc = false;
  Rational min_prob;

  int root() const { return 0; }
  bool in_loop_class(int v) const { return scc_loop[scc[v]]; }
  std::vector<int> loop_class_ids() const {
    std::vector<int> ids;
    for (int c = 0; c < scc_count; ++c)
      if (scc_loop[c]) ids.push_back(c);
    return ids;
  }
  int edge_between(int u, int v) const {
    for (int e : out[u])
      if (edges[e].to == v) return e;
    return -1;
  }
};

namespace detail {

inline void tarjan(TransitionGraph& g) {
  int n = static_cast<int>(g.nodes.size());
  std::vector<int> idx(n, -1), low(n, 0), stack;
  std::vector<char> on(n, 0);
  g.scc.assign(n, -1);
  int counter = 0, comp = 0;
  std::function<void(int)> visit = [&](int v) {
    idx[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = 1;
    for (int e : g.out[v]) {
      int w = g.edges[e].to;
      if (idx[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], idx[w]);
      }
    }
    if (low[v] == idx[v]) {
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = 0;
        g.scc[w] = comp;
      } while (w != v);
      ++comp;
    }
  };
  for (int v = 0; v < n; ++v)
    if (idx[v] < 0) visit(v);
  g.scc_count = comp;
  g.scc_loop.assign(comp, 0);
  for (const auto& e : g.edges)
    if (g.scc[e.from] == g.scc[e.to]) g.scc_loop[g.scc[e.from]] = 1;
  // maximal: no other loop class reachable
  std::vector<std::vector<int>> cadj(comp);
  for (const auto& e : g.edges)
    if (g.scc[e.from] != g.scc[e.to]) cadj[g.scc[e.from]].push_back(g.scc[e.to]);
  g.scc_maximal.assign(comp, 0);
  for (int c = 0; c < comp; ++c) {
    if (!g.scc_loop[c]) continue;
    std::vector<char> seen(comp, 0);
    std::vector<int> st{c};
    seen[c] = 1;
    bool other = false;
    while (!st.empty() && !other) {
      int x = st.back();
      st.pop_back();
      for (int y : cadj[x]) {
        if (seen[y]) continue;
        seen[y] = 1;
        if (g.scc_loop[y]) other = true;
        st.push_back(y);
      }
    }
    g.scc_maximal[c] = !other;
  }
}

}  // namespace detail

inline TransitionGraph build_transition_graph(const SimilarityIFS& ifs, Budget budget = {}) {
  if (budget.max_level < 1 || budget.max_cvs < 1) throw precondition_error("budget must be positive");
  TransitionGraph g;
  g.lambda = ifs.lambda;
  g.log_lambda = std::log(to_double(ifs.lambda));
  g.ssc = ifs.strong_separation();
  g.min_prob = *std::min_element(ifs.probs.begin(), ifs.probs.end());
  std::unordered_map<std::string, int> id;
  g.nodes.push_back(root_cv(ifs));
  g.node_level.push_back(0);
  g.out.emplace_back();
  std::unordered_map<std::string, std::vector<ChildInterval>> cache;
  std::vector<int> frontier{0};
  int level = 0;
  while (!frontier.empty()) {
    if (level >= budget.max_level) throw finite_type_error("finite type not detected within budget", g.new_by_level);
    ++level;
    std::vector<int> next;
    for (int v : frontier) {
      const auto& cv = g.nodes[v];
      auto sk = cv.shape_key();
      auto it = cache.find(sk);
      if (it == cache.end()) it = cache.emplace(sk, compute_children(ifs, cv.length, cv.nbrs)).first;
      for (const auto& c : it->second) {
        auto k = c.cv.key();
        auto f = id.find(k);
        int w;
        if (f == id.end()) {
          w = static_cast<int>(g.nodes.size());
          if (w > budget.max_cvs) throw finite_type_error("finite type not detected within budget", g.new_by_level);
          id.emplace(k, w);
          g.nodes.push_back(c.cv);
          g.node_level.push_back(level);
          g.out.emplace_back();
          next.push_back(w);
        } else {
          w = f->second;
        }
        g.out[v].push_back(static_cast<int>(g.edges.size()));
        g.edges.push_back({v, w, c.T, c.h});
      }
    }
    g.new_by_level.push_back(static_cast<int>(next.size()));
    frontier = std::move(next);
  }
  g.certified_depth = level;
  detail::tarjan(g);
  return g;
}

inline RMatrix mat_mul(const RMatrix& A, const RMatrix& B) {
  std::size_t n = A.size(), k = B.size(), m = B.empty() ? 0 : B[0].size();
  if (!A.empty() && A[0].size() != k) throw std::logic_error("matrix dimension mismatch");
  RMatrix C(n, std::vector<Rational>(m, Rational(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      if (A[i][l] == 0) continue;
      for (std::size_t j = 0; j < m; ++j) C[i][j] += A[i][l] * B[l][j];
    }
  return C;
}

inline Rational mat_norm(const RMatrix& A) {
  Rational s = 0;
  for (const auto& row : A)
    for (const auto& x : row) s += abs(x);
  return s;
}

inline RMatrix path_product(const TransitionGraph& g, const std::vector<int>& path) {
  if (path.size() < 2) return {};
  RMatrix P;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    int e = g.edge_between(path[k], path[k + 1]);
    if (e < 0) throw precondition_error("path uses a non-adjacent pair of characteristic vectors");
    P = k == 0 ? g.edges[e].T : mat_mul(P, g.edges[e].T);
  }
  return P;
}

inline Rational path_norm(const TransitionGraph& g, const std::vector<int>& path) {
  if (path.size() < 2) return Rational(1);
  return mat_norm(path_product(g, path));
}

inline double path_matrix_norm(const TransitionGraph& g, const std::vector<int>& path) {
  if (path.size() < 2) return 0.0;
  return log_rational(path_norm(g, path));
}

struct MeasureBracket {
  Rational norm;
  bool exact = false;
};

// path from the root through edge choices; exact when the IFS is strongly separated
inline MeasureBracket net_interval_measure(const TransitionGraph& g, const std::vector<int>& path) {
  if (path.empty() || path[0] != g.root()) throw precondition_error("path must start at the root");
  return {path_norm(g, path), g.ssc};
}

namespace detail {

// lower bound for the spectral radius of a nonnegative square matrix
inline double spectral_radius_lower(const std::vector<std::vector<double>>& M) {
  std::size_t n = M.size();
  double best = 0;
  for (std::size_t i = 0; i < n; ++i) best = std::max(best, M[i][i]);
  std::vector<double> x(n, 1.0), y(n);
  for (int it = 0; it < 10000; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = 0;
      for (std::size_t j = 0; j < n; ++j) y[i] += M[i][j] * x[j];
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0, mx = 0;
    bool positive = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] <= 0) {
        positive = false;
        break;
      }
      lo = std::min(lo, y[i] / x[i]);
      hi = std::max(hi, y[i] / x[i]);
    }
    for (double v : y) mx = std::max(mx, v);
    if (mx == 0) return best;
    if (positive) {
      best = std::max(best, lo);
      if (hi - lo <= 1e-12 * hi) return best;
    }
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / mx;
  }
  // diagonal of powers: rho >= (M^k)_ii^(1/k)
  std::vector<std::vector<double>> P = M;
  for (int k = 2; k <= 64; ++k) {
    std::vector<std::vector<double>> Q(n, std::vector<double>(n, 0));
    double mx = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t j = 0; j < n; ++j) Q[i][j] += P[i][l] * M[l][j];
    for (auto& row : Q)
      for (double v : row) mx = std::max(mx, v);
    if (mx == 0) break;
    for (std::size_t i = 0; i < n; ++i)
      if (Q[i][i] > 0) best = std::max(best, std::pow(Q[i][i], 1.0 / k));
    P = std::move(Q);
  }
  return best;
}

inline std::vector<std::vector<double>> to_double(const RMatrix& A) {
  std::vector<std::vector<double>> D(A.size());
  for (std::size_t i = 0; i < A.size(); ++i)
    for (const auto& v : A[i]) D[i].push_back(v.get_d());
  return D;
}

}  // namespace detail

struct LocalDimBounds {
  double lower = 0, upper = 0;
  std::vector<int> witness_cycle;
  int cycles_examined = 0;
  bool cycle_cap_hit = false;
};

inline LocalDimBounds local_dim_bounds(const TransitionGraph& g, int L, int max_cycle_len = 12,
                                       std::size_t max_cycles = 200000, std::size_t pareto_cap = 4096) {
  if (L < 1) throw precondition_error("path length must be at least 1");
  if (g.certified_depth == 0) throw precondition_error("transition graph is not closed");
  LocalDimBounds res;
  double ll = g.log_lambda;
  res.upper = std::numeric_limits<double>::infinity();
  int n = static_cast<int>(g.nodes.size());

  // closed walks within loop classes, each rooted at its smallest node
  std::vector<int> path;
  std::function<void(int, int)> dfs = [&](int start, int v) {
    if (res.cycle_cap_hit) return;
    for (int e : g.out[v]) {
      int w = g.edges[e].to;
      if (g.scc[w] != g.scc[start] || w < start) continue;
      if (w == start) {
        path.push_back(start);
        RMatrix P = path_product(g, path);
        path.pop_back();
        double rho = detail::spectral_radius_lower(detail::to_double(P));
        ++res.cycles_examined;
        if (rho > 0) {
          double ex = std::log(rho) / ((double)path.size() * ll);
          if (ex < res.upper - 1e-15) {
            res.upper = ex;
            res.witness_cycle = path;
          }
        }
        if (res.cycles_examined >= (int)max_cycles) res.cycle_cap_hit = true;
        continue;
      }
      if ((int)path.size() >= max_cycle_len) continue;
      path.push_back(w);
      dfs(start, w);
      path.pop_back();
    }
  };
  for (int s = 0; s < n; ++s) {
    if (!g.in_loop_class(s)) continue;
    path = {s};
    dfs(s, s);
  }

  // largest path norm of length L inside a loop class, via Pareto frontiers of row vectors
  using Vec = std::vector<double>;
  double best_log = -std::numeric_limits<double>::infinity();
  double max_edge_log = -std::numeric_limits<double>::infinity();
  for (const auto& e : g.edges)
    if (g.scc[e.from] == g.scc[e.to]) max_edge_log = std::max(max_edge_log, log_rational(mat_norm(e.T)));
  auto dominated = [](const Vec& a, const Vec& b) {  // a <= b componentwise
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] > b[i]) return false;
    return true;
  };
  for (int c : g.loop_class_ids()) {
    std::vector<std::vector<Vec>> front(n);
    for (int v = 0; v < n; ++v)
      if (g.scc[v] == c) front[v].push_back(Vec(g.nodes[v].nbrs.size(), 1.0));
    double scale_log = 0;
    for (int step = 0; step < L; ++step) {
      std::vector<std::vector<Vec>> nx(n);
      double mx = 0;
      for (int v = 0; v < n; ++v) {
        if (front[v].empty()) continue;
        for (int e : g.out[v]) {
          int w = g.edges[e].to;
          if (g.scc[w] != c) continue;
          auto T = detail::to_double(g.edges[e].T);
          for (const auto& u : front[v]) {
            Vec y(T[0].size(), 0.0);
            for (std::size_t i = 0; i < u.size(); ++i)
              for (std::size_t j = 0; j < y.size(); ++j) y[j] += u[i] * T[i][j];
            for (double q : y) mx = std::max(mx, q);
            nx[w].push_back(std::move(y));
          }
        }
      }
      if (mx == 0) break;
      scale_log += std::log(mx);
      for (int w = 0; w < n; ++w) {
        auto& F = nx[w];
        for (auto& y : F)
          for (auto& q : y) q /= mx;
        std::vector<Vec> keep;
        std::sort(F.begin(), F.end(), [](const Vec& a, const Vec& b) {
          double sa = 0, sb = 0;
          for (double q : a) sa += q;
          for (double q : b) sb += q;
          return sa > sb;
        });
        for (auto& y : F) {
          bool dom = false;
          for (const auto& k : keep)
            if (dominated(y, k)) {
              dom = true;
              break;
            }
          if (!dom) keep.push_back(std::move(y));
        }
        if (keep.size() > pareto_cap) {
          Vec env(keep[0].size(), 0.0);
          for (const auto& k : keep)
            for (std::size_t i = 0; i < env.size(); ++i) env[i] = std::max(env[i], k[i]);
          keep = {env};
        }
        F = std::move(keep);
      }
      front = std::move(nx);
    }
    for (int v = 0; v < n; ++v)
      for (const auto& u : front[v]) {
        double s = 0;
        for (double q : u) s += q;
        if (s > 0) best_log = std::max(best_log, scale_log + std::log(s));
      }
  }
  double lower = best_log / (L * ll);
  double correction = std::max(0.0, max_edge_log) / (L * std::fabs(ll));
  lower -= correction;
  res.lower = std::min(lower, res.upper);
  return res;
}

// min over segments (depth N to depth n) of ||T|| / lambda^((d+eps)(n-N)), scanning paths from the root
inline double bdd_nets_ratio(const TransitionGraph& g, int N, int n, double d, double eps,
                             std::size_t max_paths = 200000) {
  if (N < 0 || n <= N) throw precondition_error("need 0 <= N < n");
  std::vector<int> at_N;
  {
    std::vector<char> cur(g.nodes.size(), 0);
    cur[g.root()] = 1;
    for (int k = 0; k < N; ++k) {
      std::vector<char> nx(g.nodes.size(), 0);
      for (std::size_t v = 0; v < cur.size(); ++v)
        if (cur[v])
          for (int e : g.out[v]) nx[g.edges[e].to] = 1;
      cur = std::move(nx);
    }
    for (std::size_t v = 0; v < cur.size(); ++v)
      if (cur[v]) at_N.push_back(static_cast<int>(v));
  }
  double best = std::numeric_limits<double>::infinity();
  double denom = (d + eps) * (n - N) * g.log_lambda;
  std::size_t count = 0;
  std::vector<int> path;
  std::function<void(int)> rec = [&](int v) {
    if (count >= max_paths) return;
    if ((int)path.size() == n - N + 1) {
      ++count;
      best = std::min(best, log_rational(path_norm(g, path)) - denom);
      return;
    }
    for (int e : g.out[v]) {
      path.push_back(g.edges[e].to);
      rec(g.edges[e].to);
      path.pop_back();
    }
  };
  for (int s : at_N) {
    path = {s};
    rec(s);
  }
  return std::exp(best);
}

}  // namespace assouad
