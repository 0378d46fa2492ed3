// The size-change termination decision: close the analysis edges under
// composition, then require every idempotent self-composition to shrink
// some position.  Also: self-loop reporting for the text output and a
// bounded audit that re-derives per-cycle verdicts from raw multipaths.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sctlam/absint.hpp"
#include "sctlam/graph.hpp"
#include "sctlam/syntax.hpp"

namespace sctlam {

// One element of the composition closure: the composed graph of a nonempty
// edge path src ->+ dst, together with a shortest witness (the labels of the
// intermediate points, excluding both endpoints; empty for a single edge).
struct ClosureElement {
  int src = 0;
  int dst = 0;
  SizeChangeGraph graph;
  std::vector<int> witness;

  friend bool operator<(const ClosureElement& a, const ClosureElement& b) {
    auto ka = std::tuple(a.src, a.dst, a.witness.size(), a.graph.to_text(),
                         a.witness);
    auto kb = std::tuple(b.src, b.dst, b.witness.size(), b.graph.to_text(),
                         b.witness);
    return ka < kb;
  }
};

// All composed graphs of all nonempty edge paths, one element per distinct
// (src, dst, graph) with a shortest (then lexicographically least) witness.
// Dijkstra-style: settle elements in witness order, extend by single edges.
inline std::vector<ClosureElement> closure(const AnalysisResult& analysis) {
  struct QueueItem {
    std::vector<int> witness;
    int src, dst;
    std::string graph_key;
    SizeChangeGraph graph;
  };
  auto later = [](const QueueItem& a, const QueueItem& b) {
    if (a.witness.size() != b.witness.size())
      return a.witness.size() > b.witness.size();
    if (a.src != b.src) return a.src > b.src;
    if (a.dst != b.dst) return a.dst > b.dst;
    if (a.witness != b.witness) return a.witness > b.witness;
    return a.graph_key > b.graph_key;
  };
  std::priority_queue<QueueItem, std::vector<QueueItem>, decltype(later)>
      queue(later);
  std::map<int, std::vector<const CallEdge*>> out_edges;
  for (const CallEdge& e : analysis.edges)
    out_edges[e.src->label].push_back(&e);

  for (const CallEdge& e : analysis.edges)
    queue.push(QueueItem{{}, e.src->label, e.dst->label, e.graph.key(),
                         e.graph});

  std::set<std::tuple<int, int, std::string>> settled;
  std::vector<ClosureElement> out;
  while (!queue.empty()) {
    QueueItem item = queue.top();
    queue.pop();
    if (!settled.emplace(item.src, item.dst, item.graph_key).second) continue;
    out.push_back(ClosureElement{item.src, item.dst, item.graph,
                                 item.witness});
    auto it = out_edges.find(item.dst);
    if (it == out_edges.end()) continue;
    for (const CallEdge* e : it->second) {
      SizeChangeGraph extended = compose(item.graph, e->graph);
      std::string key = extended.key();
      if (settled.count({item.src, e->dst->label, key})) continue;
      std::vector<int> witness = item.witness;
      witness.push_back(item.dst);
      queue.push(QueueItem{std::move(witness), item.src, e->dst->label,
                           std::move(key), std::move(extended)});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline bool idempotent(const SizeChangeGraph& g) {
  return g.source() == g.target() && compose(g, g) == g;
}

inline bool has_strict_self_arc(const SizeChangeGraph& g) {
  for (const Arc& a : g.arcs())
    if (a.src == a.dst && a.label == ArcLabel::Dec) return true;
  return false;
}

struct Verdict {
  bool terminates = false;
  // An idempotent self-element with no strictly decreasing self-arc, when
  // the answer is No.
  std::optional<ClosureElement> counterexample;
};

// The size-change condition over a computed closure: terminating iff every
// idempotent element at a single point keeps some position strictly
// decreasing along its self-arc.
inline Verdict decide(const std::vector<ClosureElement>& closure_elements) {
  for (const ClosureElement& el : closure_elements) {
    if (el.src != el.dst) continue;
    if (!idempotent(el.graph)) continue;
    if (!has_strict_self_arc(el.graph))
      return Verdict{false, el};
  }
  return Verdict{true, std::nullopt};
}

inline Verdict decide(const AnalysisResult& analysis) {
  return decide(closure(analysis));
}

// The elements looping on one point, one line each in reports: ordered by
// point, then witness length, then graph text (each graph listed once).
inline std::vector<ClosureElement> self_loops(
    const std::vector<ClosureElement>& closure_elements) {
  std::vector<ClosureElement> out;
  std::set<std::pair<int, std::string>> seen;
  for (const ClosureElement& el : closure_elements) {
    if (el.src != el.dst) continue;
    if (!seen.emplace(el.src, el.graph.key()).second) continue;
    out.push_back(el);
  }
  std::sort(out.begin(), out.end(),
            [](const ClosureElement& a, const ClosureElement& b) {
              if (a.src != b.src) return a.src < b.src;
              if (a.witness.size() != b.witness.size())
                return a.witness.size() < b.witness.size();
              std::string ta = a.graph.to_text(), tb = b.graph.to_text();
              if (ta != tb) return ta < tb;
              return a.witness < b.witness;
            });
  return out;
}

struct AuditReport {
  std::size_t cycles = 0;   // cyclic multipaths examined
  bool agree = true;        // no contradiction with the closure verdict
  std::string detail;       // first disagreement, if any
};

namespace detail {

// Smallest idempotent iterate of g under self-composition, if one appears
// within `limit` powers (successive-power iteration; squaring can skip it).
inline std::optional<SizeChangeGraph> idempotent_power(
    const SizeChangeGraph& g, int limit = 128) {
  if (g.source() != g.target()) return std::nullopt;
  SizeChangeGraph power = g;
  for (int k = 1; k <= limit; ++k) {
    if (compose(power, power) == power) return power;
    power = compose(power, g);
  }
  return std::nullopt;
}

}  // namespace detail

// Enumerates every cyclic edge path of at most `bound` edges (anchored at
// its least point to visit each cycle rotation once), composes the raw
// multipath, and checks the composed graph against the closure and the
// cycle's own idempotent-power verdict against the closure verdict.
inline AuditReport bounded_multipath_audit(const AnalysisResult& analysis,
                                           const std::vector<ClosureElement>&
                                               closure_elements,
                                           int bound) {
  AuditReport report;
  Verdict verdict = decide(closure_elements);

  std::set<std::tuple<int, int, std::string>> in_closure;
  for (const ClosureElement& el : closure_elements)
    in_closure.emplace(el.src, el.dst, el.graph.key());

  std::map<int, std::vector<const CallEdge*>> out_edges;
  std::set<int> points;
  for (const CallEdge& e : analysis.edges) {
    out_edges[e.src->label].push_back(&e);
    points.insert(e.src->label);
  }

  auto disagree = [&](const std::string& what) {
    if (report.agree) {
      report.agree = false;
      report.detail = what;
    }
  };

  // DFS over edge paths anchor -> ... -> anchor with intermediate points
  // strictly greater than the anchor.
  for (int anchor : points) {
    std::vector<const CallEdge*> path;
    auto dfs = [&](auto&& self, int at) -> void {
      if (static_cast<int>(path.size()) >= bound) return;
      auto it = out_edges.find(at);
      if (it == out_edges.end()) return;
      for (const CallEdge* e : it->second) {
        int next = e->dst->label;
        if (next < anchor) continue;
        path.push_back(e);
        if (next == anchor) {
          ++report.cycles;
          Multipath mp;
          for (const CallEdge* step : path) mp.graphs.push_back(step->graph);
          SizeChangeGraph composed = mp.compose_all();
          std::ostringstream where;
          where << "cycle at " << anchor << " (";
          for (std::size_t i = 0; i < path.size(); ++i)
            where << (i != 0 ? "," : "") << path[i]->dst->label;
          where << ")";
          if (!in_closure.count({anchor, anchor, composed.key()}))
            disagree(where.str() + ": composed graph " + composed.to_text() +
                     " missing from the closure");
          auto power = detail::idempotent_power(composed);
          if (!power.has_value())
            disagree(where.str() + ": no idempotent power found");
          else if (!has_strict_self_arc(*power) && verdict.terminates)
            disagree(where.str() + ": multipath " + power->to_text() +
                     " has no strict self-arc but the verdict is Yes");
        } else {
          self(self, next);
        }
        path.pop_back();
      }
    };
    dfs(dfs, anchor);
  }
  return report;
}

}  // namespace sctlam
