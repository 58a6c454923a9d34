#pragma once

#include "carpets.hpp"
#include "estimator.hpp"
#include "finite_type.hpp"
#include "moran_affine.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace assouad::cli {

using nlohmann::json;

// malformed input, reported as file:line: message
struct config_error : precondition_error {
  using precondition_error::precondition_error;
};

struct ConfigFile {
  std::string path, text;
  json data;

  int line_of(const std::string& key) const {
    auto pos = text.find("\"" + key + "\"");
    if (pos == std::string::npos) return 1;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
  }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw config_error(path + ":" + std::to_string(line_of(key)) + ": " + msg);
  }
  const json& need(const json& obj, const std::string& key) const {
    if (!obj.is_object() || !obj.contains(key)) fail(key, "missing key \"" + key + "\"");
    return obj.at(key);
  }
  std::string str(const json& obj, const std::string& key) const {
    const auto& v = need(obj, key);
    if (!v.is_string()) fail(key, "\"" + key + "\" must be a string");
    return v.get<std::string>();
  }
  long integer(const json& obj, const std::string& key) const {
    const auto& v = need(obj, key);
    if (!v.is_number_integer()) fail(key, "\"" + key + "\" must be an integer");
    return v.get<long>();
  }
  long integer_or(const json& obj, const std::string& key, long dflt) const {
    return obj.contains(key) ? integer(obj, key) : dflt;
  }
  Rational rational(const json& v, const std::string& key) const {
    try {
      if (v.is_string()) return parse_rational(v.get<std::string>());
      if (v.is_number_integer()) return Rational(v.get<long>());
    } catch (const precondition_error& e) {
      fail(key, e.what());
    }
    fail(key, "\"" + key + "\" entries must be rational strings \"p/q\"");
  }
  std::vector<Rational> rationals(const json& obj, const std::string& key) const {
    const auto& v = need(obj, key);
    if (!v.is_array()) fail(key, "\"" + key + "\" must be an array");
    std::vector<Rational> out;
    for (const auto& e : v) out.push_back(rational(e, key));
    return out;
  }
  std::vector<double> doubles_or(const json& obj, const std::string& key, std::vector<double> dflt) const {
    if (!obj.contains(key)) return dflt;
    const auto& v = obj.at(key);
    if (!v.is_array()) fail(key, "\"" + key + "\" must be an array");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(rational(e, key).get_d());
    return out;
  }
};

inline ConfigFile load_config(const std::string& path) {
  ConfigFile c;
  c.path = path;
  std::ifstream in(path);
  if (!in) throw config_error(path + ":1: cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  c.text = ss.str();
  try {
    c.data = json::parse(c.text);
  } catch (const json::parse_error& e) {
    std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, c.text.size());
    int line = 1 + static_cast<int>(std::count(c.text.begin(), c.text.begin() + static_cast<long>(upto), '\n'));
    std::string what = e.what();
    throw config_error(path + ":" + std::to_string(line) + ": malformed JSON (" + what + ")");
  }
  if (!c.data.is_object()) throw config_error(path + ":1: config must be a JSON object");
  return c;
}

// FNV-1a over the canonical serialization
inline std::string hash_hex(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

// ---- config readers ----

inline NumberField read_field(const ConfigFile& c, const json& root) {
  if (!root.contains("field")) return NumberField::rationals();
  const auto& f = root.at("field");
  const auto& mp = c.need(f, "min_poly");
  if (!mp.is_array()) c.fail("min_poly", "\"min_poly\" must be an integer array");
  std::vector<long> coeffs;
  for (const auto& v : mp) {
    if (!v.is_number_integer()) c.fail("min_poly", "\"min_poly\" must be an integer array");
    coeffs.push_back(v.get<long>());
  }
  auto iv = c.rationals(f, "root_interval");
  if (iv.size() != 2) c.fail("root_interval", "\"root_interval\" needs two endpoints");
  return NumberField(coeffs, iv[0], iv[1]);
}

inline SimilarityIFS read_ifs(const ConfigFile& c, const json& root) {
  auto f = read_field(c, root);
  const auto& maps = c.need(root, "maps");
  if (!maps.is_array()) c.fail("maps", "\"maps\" must be an array");
  std::vector<FieldElement> r, d;
  for (const auto& m : maps) {
    try {
      r.push_back(parse_element(f, c.str(m, "r")));
      d.push_back(parse_element(f, c.str(m, "d")));
    } catch (const config_error&) {
      throw;
    } catch (const precondition_error& e) {
      c.fail("maps", e.what());
    }
  }
  return SimilarityIFS(f, r, d, c.rationals(root, "probs"));
}

inline BMCarpet read_carpet(const ConfigFile& c, const json& root) {
  const auto& dg = c.need(root, "digits");
  if (!dg.is_array()) c.fail("digits", "\"digits\" must be an array of pairs");
  std::vector<std::pair<int, int>> digits;
  for (const auto& p : dg) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
      c.fail("digits", "\"digits\" entries must be integer pairs");
    digits.push_back({p[0].get<int>(), p[1].get<int>()});
  }
  return BMCarpet(static_cast<int>(c.integer(root, "m")), static_cast<int>(c.integer(root, "n")), digits,
                  c.rationals(root, "probs"));
}

inline AffineIFS read_affine(const ConfigFile& c, const json& root) {
  AffineIFS ifs;
  const auto& ms = c.need(root, "matrices");
  const auto& ts = c.need(root, "translations");
  if (!ms.is_array() || !ts.is_array() || ms.size() != ts.size() || ms.empty())
    c.fail("matrices", "\"matrices\" and \"translations\" must be nonempty arrays of equal length");
  for (std::size_t k = 0; k < ms.size(); ++k) {
    const auto& M = ms[k];
    if (!M.is_array() || M.empty()) c.fail("matrices", "matrix must be a row-major array of rows");
    long d = static_cast<long>(M.size());
    Mat A(d, d);
    for (long i = 0; i < d; ++i) {
      if (!M[i].is_array() || static_cast<long>(M[i].size()) != d) c.fail("matrices", "matrix must be square");
      for (long j = 0; j < d; ++j) A(i, j) = c.rational(M[i][j], "matrices").get_d();
    }
    if (!ts[k].is_array() || static_cast<long>(ts[k].size()) != d) c.fail("translations", "translation length mismatch");
    Vecd t(d);
    for (long i = 0; i < d; ++i) t(i) = c.rational(ts[k][i], "translations").get_d();
    ifs.A.push_back(A);
    ifs.t.push_back(t);
  }
  return ifs;
}

inline OraclePtr read_oracle(const ConfigFile& c, const json& root) {
  std::string kind = c.str(root, "oracle");
  int cap = static_cast<int>(c.integer_or(root, "depth_cap", 0));
  if (cap < 0) c.fail("depth_cap", "\"depth_cap\" must be positive");
  if (kind == "cantor") {
    Rational p0 = root.contains("p0") ? c.rational(root.at("p0"), "p0") : Rational(1, 2);
    return cantor_oracle(cap ? cap : 40, p0);
  }
  if (kind == "ssc") {
    const auto& dg = c.need(root, "digits");
    std::vector<int> digits;
    for (const auto& v : dg) {
      if (!v.is_number_integer()) c.fail("digits", "\"digits\" must be integers");
      digits.push_back(v.get<int>());
    }
    return ssc_oracle(static_cast<int>(c.integer(root, "base")), digits, c.rationals(root, "probs"), cap ? cap : 40);
  }
  if (kind == "cascade") {
    CascadeParams p;
    if (root.contains("n")) {
      for (const auto& v : root.at("n")) {
        if (!v.is_number_integer()) c.fail("n", "\"n\" must be integers");
        p.n.push_back(v.get<long>());
      }
      p.q = c.rationals(root, "q");
    } else {
      std::string sched = root.contains("schedule") ? c.str(root, "schedule") : "shipped";
      int blocks = static_cast<int>(c.integer_or(root, "blocks", 4));
      if (sched == "shipped") p = CascadeParams::shipped(blocks);
      else if (sched == "steep") p = CascadeParams::steep(blocks);
      else c.fail("schedule", "unknown schedule \"" + sched + "\"");
    }
    return cascade_oracle(p);
  }
  if (kind == "triadic") return triadic_oracle(cap ? cap : 120);
  if (kind == "salem") {
    std::string mode = root.contains("mode") ? c.str(root, "mode") : "measure-example";
    SalemMode m;
    if (mode == "measure-example") m = SalemMode::measure_example;
    else if (mode == "set-example") m = SalemMode::set_example;
    else c.fail("mode", "mode must be \"measure-example\" or \"set-example\"");
    auto p = SalemParams::desk(static_cast<std::uint64_t>(c.integer_or(root, "seed", 0)), m);
    if (root.contains("n")) {
      p.n.clear();
      for (const auto& v : root.at("n")) {
        if (!v.is_number_integer()) c.fail("n", "\"n\" must be integers");
        p.n.push_back(v.get<long>());
      }
    }
    return salem_oracle(p);
  }
  if (kind == "finite-type") {
    const auto& ifs = c.need(root, "ifs");
    return finite_type_oracle(build_transition_graph(read_ifs(c, ifs)), cap ? cap : 30);
  }
  c.fail("oracle", "unknown oracle \"" + kind + "\"");
}

// ---- output ----

// plain numbers and booleans become JSON scalars; rationals and words stay strings
inline json typed(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.empty() || v.find('/') != std::string::npos || v.find('.') == std::string::npos) {
    char* end = nullptr;
    long long i = v.empty() ? 0 : std::strtoll(v.c_str(), &end, 10);
    if (!v.empty() && *end == 0) return i;
    return v;
  }
  char* end = nullptr;
  double d = std::strtod(v.c_str(), &end);
  if (*end == 0) return d;
  return v;
}

struct Emitter {
  std::ostream& out;
  std::string format;  // json or csv
  std::string config_hash;
  std::uint64_t seed = 0;

  void emit_json(json j) const {
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    out << j.dump(2) << "\n";
  }
  // rows of (quantity, value, provenance)
  void emit_table(const std::string& command, const std::vector<std::array<std::string, 3>>& rows) const {
    if (format == "csv") {
      out << "command,quantity,value,provenance,config_hash,seed\r\n";
      for (const auto& r : rows)
        out << command << "," << csv_field(r[0]) << "," << csv_field(r[1]) << "," << r[2] << "," << config_hash << ","
            << seed << "\r\n";
      return;
    }
    json j{{"command", command}};
    json q = json::object();
    for (const auto& r : rows) q[r[0]] = json{{"value", typed(r[1])}, {"provenance", r[2]}};
    j["quantities"] = q;
    emit_json(j);
  }
};

inline int env_threads() {
  const char* s = std::getenv("ASSOUAD_THREADS");
  if (!s || !*s) return 1;
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (*end || v < 0) throw precondition_error("ASSOUAD_THREADS must be a nonnegative integer");
  return static_cast<int>(v);
}

inline json graph_json(const TransitionGraph& g) {
  json nodes = json::array(), edges = json::array();
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    json nb = json::array();
    for (const auto& n : g.nodes[v].nbrs) nb.push_back({{"a", n.a.str()}, {"L", n.L.str()}});
    nodes.push_back({{"id", v},
                     {"level", g.node_level[v]},
                     {"length", g.nodes[v].length.str()},
                     {"t", g.nodes[v].t},
                     {"neighbours", nb},
                     {"scc", g.scc[v]},
                     {"loop_class", g.in_loop_class(static_cast<int>(v))}});
  }
  for (const auto& e : g.edges) {
    json T = json::array();
    for (const auto& row : e.T) {
      json r = json::array();
      for (const auto& q : row) r.push_back(to_string(q));
      T.push_back(r);
    }
    edges.push_back({{"from", e.from}, {"to", e.to}, {"h", e.h.str()}, {"T", T}});
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

inline std::string graph_dot(const TransitionGraph& g) {
  std::ostringstream s;
  s << "digraph transitions {\n";
  for (std::size_t v = 0; v < g.nodes.size(); ++v)
    s << "  n" << v << " [label=\"" << v << "\\nlen " << g.nodes[v].length.str() << "\"];\n";
  for (const auto& e : g.edges) {
    s << "  n" << e.from << " -> n" << e.to << " [label=\"";
    for (std::size_t i = 0; i < e.T.size(); ++i) {
      if (i) s << ";";
      for (std::size_t j = 0; j < e.T[i].size(); ++j) s << (j ? " " : "") << to_string(e.T[i][j]);
    }
    s << "\"];\n";
  }
  s << "}\n";
  return s.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw precondition_error("cannot write " + path);
  f << text;
}

// ---- commands ----

struct Options {
  std::string config, format = "json", graph_json_path, graph_dot_path, policy = "require";
  std::uint64_t seed = 0;
  int max_level = 30, path_len = 30, depth = 12, samples = 20, levels = 0, moran_depth = 2;
  std::string c1, c3, c, gamma;
  double theta = 0.5, beta = 1.0 / 3, eta = 0.05, spectrum_tol = 0.05;
  int i_min = 15, i_max = 25;
  std::vector<double> params;
};

inline std::string options_hash(const std::string& command, const Options& o, const json& config) {
  json j{{"command", command},
         {"config", config},
         {"format", o.format},
         {"max_level", o.max_level},
         {"path_len", o.path_len},
         {"depth", o.depth},
         {"samples", o.samples},
         {"levels", o.levels},
         {"policy", o.policy},
         {"c1", o.c1},
         {"c3", o.c3},
         {"c", o.c},
         {"gamma", o.gamma},
         {"theta", o.theta},
         {"beta", o.beta},
         {"eta", o.eta},
         {"i_min", o.i_min},
         {"i_max", o.i_max},
         {"spectrum_tol", o.spectrum_tol},
         {"params", o.params}};
  return hash_hex(j.dump());
}

inline void cmd_ifs_analyze(const Options& o, const Emitter& em) {
  auto c = load_config(o.config);
  auto ifs = read_ifs(c, c.data);
  Budget b;
  b.max_level = o.max_level;
  auto g = build_transition_graph(ifs, b);
  auto bounds = local_dim_bounds(g, o.path_len);
  bool cols = true;
  for (const auto& e : g.edges) cols = cols && columns_nonzero(e.T);
  if (!o.graph_json_path.empty()) write_file(o.graph_json_path, graph_json(g).dump(2) + "\n");
  if (!o.graph_dot_path.empty()) write_file(o.graph_dot_path, graph_dot(g));
  std::vector<std::array<std::string, 3>> rows{
      {"dim_l_lower", fmt_double(bounds.lower), "bound"},
      {"dim_l_upper", fmt_double(bounds.upper), "bound"},
      {"nodes", std::to_string(g.nodes.size()), "exact"},
      {"edges", std::to_string(g.edges.size()), "exact"},
      {"certified_depth", std::to_string(g.certified_depth), "exact"},
      {"lambda", g.lambda.str(), "exact"},
      {"ssc", g.ssc ? "true" : "false", "exact"},
      {"columns_nonzero", cols ? "true" : "false", "exact"}};
  if (em.format == "csv") return em.emit_table("ifs-analyze", rows);
  json w = json::array();
  for (int v : bounds.witness_cycle) w.push_back(v);
  json j{{"command", "ifs-analyze"},
         {"dim_l", {{"lower", bounds.lower}, {"upper", bounds.upper}, {"provenance", "bound"}}},
         {"path_len", o.path_len},
         {"witness_cycle", w},
         {"cycle_cap_hit", bounds.cycle_cap_hit},
         {"graph",
          {{"nodes", g.nodes.size()},
           {"edges", g.edges.size()},
           {"certified_depth", g.certified_depth},
           {"new_by_level", g.new_by_level},
           {"columns_nonzero", cols},
           {"provenance", "exact"}}},
         {"lambda", g.lambda.str()},
         {"ssc", g.ssc}};
  em.emit_json(j);
}

inline void cmd_bm(const Options& o, const Emitter& em) {
  auto c = load_config(o.config);
  auto car = read_carpet(c, c.data);
  VssPolicy pol;
  if (o.policy == "require") pol = VssPolicy::require;
  else if (o.policy == "report") pol = VssPolicy::report;
  else throw precondition_error("policy must be require or report");
  auto f = dimL_bm(car, pol);
  auto e = approximate_square_exponent(car, o.depth, pol);
  std::vector<std::array<std::string, 3>> rows{{"formula_value", fmt_double(f.value), "exact"},
                                               {"term1", fmt_double(f.term1), "exact"},
                                               {"term2", fmt_double(f.term2), "exact"},
                                               {"empirical_exponent", fmt_double(e.value), "estimate"},
                                               {"gap", fmt_double(std::fabs(f.value - e.value)), "estimate"},
                                               {"coarse_level", std::to_string(e.coarse_level), "exact"},
                                               {"fine_level", std::to_string(e.fine_level), "exact"},
                                               {"vss", car.vss ? "true" : "false", "exact"}};
  em.emit_table("bm", rows);
}

inline void cmd_moran_bound(const Options& o, const Emitter& em) {
  std::vector<std::array<std::string, 3>> rows;
  if (!o.c1.empty() || !o.c3.empty()) {
    if (o.c1.empty() || o.c3.empty()) throw precondition_error("--c1 and --c3 go together");
    rows.push_back({"moran_lower_bound",
                    fmt_double(moran_lower_bound(parse_rational(o.c1).get_d(), parse_rational(o.c3).get_d())), "bound"});
  }
  if (!o.c.empty() || !o.gamma.empty()) {
    if (o.c.empty() || o.gamma.empty()) throw precondition_error("--c and --gamma go together");
    rows.push_back({"uniformly_perfect_bound",
                    fmt_double(uniformly_perfect_bound(parse_rational(o.c).get_d(), parse_rational(o.gamma).get_d())),
                    "bound"});
  }
  if (!o.config.empty()) {
    auto c = load_config(o.config);
    auto ifs = read_affine(c, c.data);
    auto res = affinize(ifs, c.rationals(c.data, "probs"));
    auto rep = verify_moran(res.structure, o.moran_depth);
    rows.push_back({"K", std::to_string(res.K), "exact"});
    rows.push_back({"C1", fmt_double(res.C1), "bound"});
    rows.push_back({"C2", fmt_double(res.C2), "bound"});
    rows.push_back({"C2_stated", fmt_double(res.C2_stated), "bound"});
    rows.push_back({"C3", fmt_double(res.C3), "bound"});
    rows.push_back({"C1_hat", fmt_double(rep.C1_hat), "estimate"});
    rows.push_back({"C2_hat", fmt_double(rep.C2_hat), "estimate"});
    rows.push_back({"C3_hat", to_string(rep.C3_hat), "exact"});
    for (const auto& cond : rep.conditions) {
      rows.push_back({"condition_" + cond.name, cond.pass ? "pass" : "fail", "exact"});
      if (!cond.pass) rows.push_back({"witness_" + cond.name, cond.witness, "exact"});
    }
    rows.push_back({"moran_lower_bound", fmt_double(moran_lower_bound(res.C1, res.C3)), "bound"});
  }
  if (rows.empty()) throw precondition_error("nothing to bound: give --c1/--c3, --c/--gamma or an affine config");
  em.emit_table("moran-bound", rows);
}

struct EstimateRow {
  std::string quantity;
  double param;
  SpectrumEstimate e;
  bool has_witness = true;
};

inline void emit_estimates(const std::string& command, const std::vector<EstimateRow>& rows, const Emitter& em) {
  if (em.format == "csv") {
    em.out << "quantity,theta_or_delta,mode,estimate_lower,estimate_upper,witness_x,witness_R,witness_r,samples,seed,"
              "provenance,config_hash\r\n";
    for (const auto& r : rows) {
      em.out << r.quantity << "," << fmt_double(r.param) << "," << mode_str(r.e.mode) << ","
             << fmt_double(r.e.value_lower) << "," << fmt_double(r.e.value_upper) << ","
             << (r.has_witness ? to_string(r.e.witness_x) : "") << "," << (r.has_witness ? to_string(r.e.witness_R) : "")
             << "," << (r.has_witness ? to_string(r.e.witness_r) : "") << "," << r.e.samples << "," << em.seed
             << ",estimate," << em.config_hash << "\r\n";
    }
    return;
  }
  json arr = json::array();
  for (const auto& r : rows) {
    json j{{"quantity", r.quantity},
           {"theta_or_delta", r.param},
           {"mode", mode_str(r.e.mode)},
           {"estimate", r.e.value},
           {"estimate_lower", r.e.value_lower},
           {"estimate_upper", r.e.value_upper},
           {"samples", r.e.samples},
           {"masses_exact", r.e.exact},
           {"provenance", "estimate"}};
    if (r.has_witness)
      j["witness"] = {{"x", to_string(r.e.witness_x)}, {"R", to_string(r.e.witness_R)}, {"r", to_string(r.e.witness_r)}};
    arr.push_back(j);
  }
  em.emit_json({{"command", command}, {"rows", arr}});
}

inline Grid grid_for(const Options& o, const ConfigFile& c, const MeasureOracle& oracle) {
  json gj = c.data.contains("grid") ? c.data.at("grid") : json::object();
  int points = static_cast<int>(c.integer_or(gj, "points", o.samples));
  int levels = o.levels > 0 ? o.levels : static_cast<int>(c.integer_or(gj, "levels", 30));
  if (points < 1 || levels < 2) c.fail("grid", "grid needs at least one point and two levels");
  auto g = default_grid(oracle, points, levels, o.seed);
  g.threads = env_threads();
  g.spectrum_tol = o.spectrum_tol;
  return g;
}

inline void cmd_estimate(const Options& o, const Emitter& em) {
  auto c = load_config(o.config);
  auto oracle = read_oracle(c, c.data);
  auto g = grid_for(o, c, *oracle);
  auto deltas = o.params.empty() ? c.doubles_or(c.data, "deltas", {0.5, 0.25, 0.1, 0.05}) : o.params;
  std::vector<EstimateRow> rows;
  for (Mode m : {Mode::upper, Mode::lower}) {
    auto s = quasi_sequence(*oracle, m, g, deltas);
    for (std::size_t i = 0; i < s.estimates.size(); ++i) rows.push_back({"H", s.params[i], s.estimates[i]});
    SpectrumEstimate x = s.estimates.back();
    x.value = x.value_lower = x.value_upper = s.extrapolated;
    rows.push_back({"H_extrapolated", 0, x, false});
  }
  emit_estimates("estimate", rows, em);
}

inline void cmd_spectrum(const Options& o, const Emitter& em) {
  auto c = load_config(o.config);
  auto oracle = read_oracle(c, c.data);
  auto g = grid_for(o, c, *oracle);
  auto thetas = o.params.empty() ? c.doubles_or(c.data, "thetas", {0.5, 0.75, 0.9, 0.95}) : o.params;
  std::vector<EstimateRow> rows;
  for (Mode m : {Mode::upper, Mode::lower}) {
    for (double t : thetas) {
      rows.push_back({"spectrum_eq", t, spectrum_point(*oracle, t, m, g)});
      rows.push_back({"spectrum_le", t, spectrum_le(*oracle, t, m, g)});
    }
    auto s = spectrum_sequence(*oracle, m, g, thetas);
    SpectrumEstimate x = s.estimates.back();
    x.value = x.value_lower = x.value_upper = s.extrapolated;
    rows.push_back({"spectrum_extrapolated", 1, x, false});
  }
  emit_estimates("spectrum", rows, em);
}

inline void cmd_numtheo(const Options& o, const Emitter& em) {
  if (o.i_min > o.i_max) throw precondition_error("--i-min exceeds --i-max");
  std::vector<std::array<std::string, 3>> rows;
  rows.push_back({"rational_warning", log_ratio_looks_rational(o.theta, o.beta) ? "true" : "false", "estimate"});
  for (int i = o.i_min; i <= o.i_max; ++i) {
    double ti = std::pow(o.theta, i);
    auto r = numtheo_find_mn(o.theta, o.beta, ti, o.eta);
    std::string p = "i" + std::to_string(i) + "_";
    rows.push_back({p + "m", std::to_string(r.m), "exact"});
    rows.push_back({p + "n", std::to_string(r.n), "exact"});
    rows.push_back({p + "gap", fmt_double(r.gap), "estimate"});
    rows.push_back({p + "window_lower", fmt_double(r.lower), "bound"});
    rows.push_back({p + "window_upper", fmt_double(r.upper), "bound"});
  }
  em.emit_table("numtheo", rows);
}

inline void cmd_selfcheck(const Emitter& em, bool& ok) {
  std::vector<std::array<std::string, 3>> rows;
  auto add = [&](const std::string& name, bool pass) {
    rows.push_back({name, pass ? "pass" : "fail", "exact"});
    ok = ok && pass;
  };
  {
    auto g = build_transition_graph(cantor_ifs());
    auto b = local_dim_bounds(g, 30);
    double t = std::log(2.0) / std::log(3.0);
    add("cantor_bracket", b.lower <= t + 1e-12 && t <= b.upper + 1e-12 && b.upper - b.lower < 1e-9);
  }
  {
    auto p = CascadeParams::shipped(3);
    auto co = cascade_oracle(p);
    bool eq = true;
    for (std::size_t j = 0; j < 3; ++j) eq = eq && cascade_ratio(*co, p, j) == rational_pow(p.q[j], -p.n[j]);
    add("cascade_ratio", eq);
  }
  {
    auto tr = triadic_oracle(30);
    bool eq = true;
    for (int k = 0; k <= 20; ++k)
      eq = eq && triadic_premass(*tr, std::vector<int>(k, 1)) == (Rational(3, 2) + k) / rational_pow(Rational(3), k);
    add("triadic_identity", eq);
  }
  {
    auto r = numtheo_find_mn(0.5, 1.0 / 3, std::ldexp(1.0, -20), 0.05);
    add("numtheo_window", r.gap >= r.lower - 1e-6 && r.gap <= r.upper + 1e-6);
  }
  {
    auto car = BMCarpet(2, 3, {{0, 0}, {1, 2}}, {Rational(1, 2), Rational(1, 2)});
    add("carpet_singleton", std::fabs(dimL_bm(car).value - 1) < 1e-12);
  }
  em.emit_table("selfcheck", rows);
}

// full command line; returns the process exit status
inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"assouad: lower Assouad-type dimensions of measures"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--output,-o", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", o.seed, "sampling seed");

  auto* ifs = app.add_subcommand("ifs-analyze", "finite-type analysis of a similarity IFS");
  ifs->add_option("config", o.config)->required();
  ifs->add_option("--max-level", o.max_level)->check(CLI::PositiveNumber);
  ifs->add_option("--path-len", o.path_len)->check(CLI::PositiveNumber);
  ifs->add_option("--graph-json", o.graph_json_path);
  ifs->add_option("--graph-dot", o.graph_dot_path);

  auto* bm = app.add_subcommand("bm", "Bedford-McMullen carpet");
  bm->add_option("config", o.config)->required();
  bm->add_option("--depth", o.depth)->check(CLI::PositiveNumber);
  bm->add_option("--policy", o.policy)->check(CLI::IsMember({"require", "report"}));

  auto* mb = app.add_subcommand("moran-bound", "closed-form bounds and Moran verification");
  mb->add_option("config", o.config);
  mb->add_option("--c1", o.c1);
  mb->add_option("--c3", o.c3);
  mb->add_option("--c", o.c);
  mb->add_option("--gamma", o.gamma);
  mb->add_option("--depth", o.moran_depth)->check(CLI::PositiveNumber);

  auto* est = app.add_subcommand("estimate", "empirical H over a delta sequence");
  auto* spec = app.add_subcommand("spectrum", "Assouad spectrum estimates");
  for (auto* s : {est, spec}) {
    s->add_option("config", o.config)->required();
    s->add_option("--samples", o.samples)->check(CLI::PositiveNumber);
    s->add_option("--depth", o.levels)->check(CLI::PositiveNumber);
    s->add_option("--param", o.params, "delta or theta values");
    s->add_option("--spectrum-tol", o.spectrum_tol)->check(CLI::PositiveNumber);
  }

  auto* nt = app.add_subcommand("numtheo", "lattice search for (m, n)");
  nt->add_option("--theta", o.theta);
  nt->add_option("--beta", o.beta);
  nt->add_option("--eta", o.eta);
  nt->add_option("--i-min", o.i_min);
  nt->add_option("--i-max", o.i_max);

  auto* sc = app.add_subcommand("selfcheck", "quick internal consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  std::string command = app.get_subcommands().front()->get_name();
  try {
    json cfg = nullptr;
    if (!o.config.empty()) cfg = load_config(o.config).data;
    Emitter em{out, o.format, options_hash(command, o, cfg), o.seed};
    if (command == "ifs-analyze") cmd_ifs_analyze(o, em);
    else if (command == "bm") cmd_bm(o, em);
    else if (command == "moran-bound") cmd_moran_bound(o, em);
    else if (command == "estimate") cmd_estimate(o, em);
    else if (command == "spectrum") cmd_spectrum(o, em);
    else if (command == "numtheo") cmd_numtheo(o, em);
    else if (command == "selfcheck") {
      bool ok = true;
      cmd_selfcheck(em, ok);
      return ok ? 0 : 1;
    }
    (void)sc;
    return 0;
  } catch (const config_error& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const precondition_error& e) {
    err << (o.config.empty() ? "assouad" : o.config) << ": precondition failed: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "assouad: internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace assouad::cli
