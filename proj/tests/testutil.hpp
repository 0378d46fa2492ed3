// Shared helpers for the test suites: fixture loading, an independent
// matrix-based composition oracle, and a seeded random graph generator.
#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sctlam/absint.hpp"
#include "sctlam/eval.hpp"
#include "sctlam/graph.hpp"
#include "sctlam/parse.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& name) {
  return std::string(SCTLAM_FIXTURE_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("cannot open fixture: " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline sctlam::Program parse_fixture(const std::string& name,
                                     const sctlam::ParseOptions& opts = {}) {
  return sctlam::parse_program(read_fixture(name), opts);
}

// Reads a closed Church-numeral value that may not be in normal form by
// applying it to the successor primitive and literal zero.
inline std::optional<long long> force_numeral(
    const sctlam::Exp* closed_value, sctlam::Ast& ast,
    const sctlam::Grammar& grammar = {}, sctlam::EvalOptions opts = {}) {
  const sctlam::Exp* forced =
      ast.app(ast.app(closed_value, ast.prim(sctlam::PrimKind::Succ)),
              ast.prim(sctlam::PrimKind::Num, 0));
  sctlam::FvCache fv{grammar};
  sctlam::EvalResult r =
      sctlam::eval(forced, sctlam::Env{}, fv, std::move(opts));
  if (!r.ok()) return std::nullopt;
  return sctlam::numeral_value(*r.value);
}

// ---- matrix composition oracle ----
//
// A graph is encoded as a map from (source, target) name pairs to a weight:
// 1 for an equality arc, 2 for a strict arc.  Composition takes, for every
// connecting intermediate name, the maximum of the two leg weights (a strict
// leg makes the path strict), and across intermediates again the maximum
// (any strict path makes the arc strict).  This mirrors the definition
// directly and shares no code with SizeChangeGraph::compose.
using Matrix = std::map<std::pair<std::string, std::string>, int>;

inline Matrix to_matrix(const sctlam::SizeChangeGraph& g) {
  Matrix m;
  for (const sctlam::Arc& a : g.arcs())
    m[{a.src, a.dst}] = a.label == sctlam::ArcLabel::Dec ? 2 : 1;
  return m;
}

inline Matrix matrix_compose(const Matrix& a, const Matrix& b) {
  Matrix out;
  for (const auto& [pa, wa] : a)
    for (const auto& [pb, wb] : b) {
      if (pa.second != pb.first) continue;
      int w = std::max(wa, wb);
      auto key = std::make_pair(pa.first, pb.second);
      auto it = out.find(key);
      if (it == out.end())
        out.emplace(key, w);
      else
        it->second = std::max(it->second, w);
    }
  return out;
}

inline sctlam::SizeChangeGraph from_matrix(const Matrix& m,
                                           const sctlam::VarSet& src,
                                           const sctlam::VarSet& dst) {
  sctlam::SizeChangeGraph g(src, dst);
  for (const auto& [pair, w] : m)
    g.add_arc(pair.first,
              w == 2 ? sctlam::ArcLabel::Dec : sctlam::ArcLabel::Eq,
              pair.second);
  return g;
}

// ---- seeded random graphs ----

struct RandomGraphs {
  std::mt19937_64 rng;

  explicit RandomGraphs(std::uint64_t seed) : rng(seed) {}

  sctlam::VarSet names(int max_extra) {
    static const std::vector<std::string> pool = {"a", "b", "c", "d", "e"};
    sctlam::VarSet out;
    std::uniform_int_distribution<int> count(0, max_extra);
    int n = count(rng);
    std::vector<std::string> shuffled = pool;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (int i = 0; i < n; ++i) out.insert(shuffled[static_cast<size_t>(i)]);
    return out;
  }

  // A random graph between the given interfaces (epsilon is always present).
  sctlam::SizeChangeGraph graph(const sctlam::VarSet& src,
                                const sctlam::VarSet& dst) {
    sctlam::SizeChangeGraph g(src, dst);
    std::vector<std::string> from(g.source().begin(), g.source().end());
    std::vector<std::string> to(g.target().begin(), g.target().end());
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (const auto& s : from)
      for (const auto& t : to) {
        double roll = coin(rng);
        if (roll < 0.25)
          g.add_arc(s, sctlam::ArcLabel::Eq, t);
        else if (roll < 0.45)
          g.add_arc(s, sctlam::ArcLabel::Dec, t);
      }
    return g;
  }
};

}  // namespace testutil
