#pragma once

// Size-change graphs and their algebra: composition, the two identity
// graphs, and the call-combination operators used when a beta-call's graph
// is assembled from the operator's and the operand's evaluation graphs.
//
// A graph has a source name set and a target name set (each holding the
// epsilon name plus variables) and arcs labeled "=" (values coincide) or
// "decrease" (the source's substate is strictly larger).  A pair of names
// carries at most one arc; decrease absorbs "=".

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sctlam/syntax.hpp"

namespace sctlam {

enum class ArcLabel : std::uint8_t { Eq, Dec };

struct Arc {
  std::string src;
  ArcLabel label = ArcLabel::Eq;
  std::string dst;

  friend bool operator==(const Arc&, const Arc&) = default;
  friend auto operator<=>(const Arc& a, const Arc& b) {
    return std::tie(a.src, a.dst, a.label) <=> std::tie(b.src, b.dst, b.label);
  }
};

// Prints a graph-name for humans: epsilon shows as "eps".
inline std::string show_name(const std::string& name) {
  return name == kEpsilon ? std::string("eps") : name;
}

class SizeChangeGraph {
 public:
  SizeChangeGraph() = default;

  // Construct over explicit name sets; epsilon is always a member of both.
  SizeChangeGraph(VarSet source, VarSet target)
      : source_(std::move(source)), target_(std::move(target)) {
    source_.insert(kEpsilon);
    target_.insert(kEpsilon);
  }

  const VarSet& source() const { return source_; }
  const VarSet& target() const { return target_; }

  // Inserts an arc; a decrease label absorbs an existing "=" on that pair.
  void add_arc(const std::string& src, ArcLabel label,
               const std::string& dst) {
    if (!source_.count(src))
      throw InternalError("arc source '" + show_name(src) +
                          "' outside the graph's source set");
    if (!target_.count(dst))
      throw InternalError("arc target '" + show_name(dst) +
                          "' outside the graph's target set");
    auto key = std::make_pair(src, dst);
    auto it = arcs_.find(key);
    if (it == arcs_.end())
      arcs_.emplace(key, label);
    else if (label == ArcLabel::Dec)
      it->second = ArcLabel::Dec;
  }

  std::vector<Arc> arcs() const {
    std::vector<Arc> out;
    out.reserve(arcs_.size());
    for (const auto& [key, label] : arcs_)
      out.push_back(Arc{key.first, label, key.second});
    return out;  // sorted by (src, dst) via map ordering
  }

  bool has_arc(const std::string& src, ArcLabel label,
               const std::string& dst) const {
    auto it = arcs_.find(std::make_pair(src, dst));
    return it != arcs_.end() && it->second == label;
  }

  // The label on (src,dst), if any.
  std::optional<ArcLabel> arc_label(const std::string& src,
                                    const std::string& dst) const {
    auto it = arcs_.find(std::make_pair(src, dst));
    if (it == arcs_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t arc_count() const { return arcs_.size(); }

  bool empty_arcs() const { return arcs_.empty(); }

  // Textual form "[(p,r,q),...]" with r in {>,=} and epsilon printed "eps",
  // arcs ordered by (source, target).
  std::string to_text() const {
    std::ostringstream os;
    os << "[";
    bool first = true;
    for (const auto& [key, label] : arcs_) {
      if (!first) os << ",";
      first = false;
      os << "(" << show_name(key.first) << ","
         << (label == ArcLabel::Dec ? ">" : "=") << ","
         << show_name(key.second) << ")";
    }
    os << "]";
    return os.str();
  }

  // Canonical key covering name sets and arcs (for hashing/deduplication).
  std::string key() const {
    std::ostringstream os;
    for (const auto& n : source_) os << show_name(n) << ",";
    os << "->";
    for (const auto& n : target_) os << show_name(n) << ",";
    os << ":" << to_text();
    return os.str();
  }

  friend bool operator==(const SizeChangeGraph& a, const SizeChangeGraph& b) {
    return a.source_ == b.source_ && a.target_ == b.target_ &&
           a.arcs_ == b.arcs_;
  }

  friend bool operator<(const SizeChangeGraph& a, const SizeChangeGraph& b) {
    return std::tie(a.source_, a.target_, a.arcs_) <
           std::tie(b.source_, b.target_, b.arcs_);
  }

 private:
  VarSet source_{kEpsilon};
  VarSet target_{kEpsilon};
  std::map<std::pair<std::string, std::string>, ArcLabel> arcs_;
};

// Composition of g1 : A -> B with g2 : B -> C.  An arc p->q of the result is
// a decrease iff some connecting pair of arcs contains a decrease; it is "="
// iff some pair connects p to q and every connecting pair is all-"=".
inline SizeChangeGraph compose(const SizeChangeGraph& g1,
                               const SizeChangeGraph& g2) {
  if (g1.target() != g2.source())
    throw InternalError("compose: graphs are not composable (target " +
                        std::to_string(g1.target().size()) + " names vs source " +
                        std::to_string(g2.source().size()) + " names)");
  SizeChangeGraph out(g1.source(), g2.target());
  for (const Arc& a : g1.arcs())
    for (const Arc& b : g2.arcs()) {
      if (a.dst != b.src) continue;
      ArcLabel label = (a.label == ArcLabel::Dec || b.label == ArcLabel::Dec)
                           ? ArcLabel::Dec
                           : ArcLabel::Eq;
      out.add_arc(a.src, label, b.dst);
    }
  return out;
}

// id= over the names of `fv`: {eps =-> eps} plus {y =-> y} for each name.
inline SizeChangeGraph identity_eq(const VarSet& fv) {
  SizeChangeGraph g(fv, fv);
  g.add_arc(kEpsilon, ArcLabel::Eq, kEpsilon);
  for (const auto& y : fv)
    if (y != kEpsilon) g.add_arc(y, ArcLabel::Eq, y);
  return g;
}

// id-decrease over the names of `fv`: like id= but the eps arc is strict.
inline SizeChangeGraph identity_dec(const VarSet& fv) {
  SizeChangeGraph g(fv, fv);
  g.add_arc(kEpsilon, ArcLabel::Dec, kEpsilon);
  for (const auto& y : fv)
    if (y != kEpsilon) g.add_arc(y, ArcLabel::Eq, y);
  return g;
}

inline SizeChangeGraph identity_eq(const Exp* e, const Grammar& g = {}) {
  return identity_eq(free_vars(e, g));
}
inline SizeChangeGraph identity_dec(const Exp* e, const Grammar& g = {}) {
  return identity_dec(free_vars(e, g));
}

// Identity-style graph from a state over `src_fv` into a subterm over
// `dst_fv` (a subset of `src_fv`): {y =-> y} for the target's names, plus
// an eps arc that is strict for bridge_dec and equality for bridge_eq.
inline SizeChangeGraph bridge_dec(const VarSet& src_fv, const VarSet& dst_fv) {
  SizeChangeGraph g(src_fv, dst_fv);
  g.add_arc(kEpsilon, ArcLabel::Dec, kEpsilon);
  for (const auto& y : dst_fv)
    if (y != kEpsilon) g.add_arc(y, ArcLabel::Eq, y);
  return g;
}

inline SizeChangeGraph bridge_eq(const VarSet& src_fv, const VarSet& dst_fv) {
  SizeChangeGraph g(src_fv, dst_fv);
  g.add_arc(kEpsilon, ArcLabel::Eq, kEpsilon);
  for (const auto& y : dst_fv)
    if (y != kEpsilon) g.add_arc(y, ArcLabel::Eq, y);
  return g;
}

// Combines the operator's evaluation graph g1 (targeting the value
// lam binder.body) and the operand's evaluation graph g2 into the graph of
// the beta-call into `body`.
//
//   part 1   keeps g1's variable-to-variable arcs; an eps-source arc becomes
//            a strict arc; when the binder is not free in the body, arcs
//            into eps survive as strict arcs (the value is then strictly
//            larger than the call target, which equals body:env).
//   part 2   redirects g2's arcs into eps to arcs into the binder (a
//            variable keeps its label, the eps-to-eps arc becomes strict).
//   union    restricted so that arc targets lie in fv(body) + {eps}; this
//            in particular removes binder arcs when the binder is dead.
inline SizeChangeGraph call_combine(const SizeChangeGraph& g1,
                                    const SizeChangeGraph& g2,
                                    const std::string& binder,
                                    const VarSet& body_fv) {
  // The call edge starts from the application state, whose names are the
  // union of the operator's and the operand's.
  VarSet source = g1.source();
  source.insert(g2.source().begin(), g2.source().end());
  SizeChangeGraph out(source, body_fv);
  bool binder_live = body_fv.count(binder) > 0;
  auto target_ok = [&](const std::string& q) {
    return q == kEpsilon || body_fv.count(q) > 0;
  };

  for (const Arc& a : g1.arcs()) {
    bool src_eps = a.src == kEpsilon;
    bool dst_eps = a.dst == kEpsilon;
    if (binder_live) {
      // Keep variable-to-variable arcs; demote eps-source arcs into
      // variables; drop every arc into eps.
      if (dst_eps) continue;
      if (!target_ok(a.dst)) continue;
      out.add_arc(a.src, src_eps ? ArcLabel::Dec : a.label, a.dst);
    } else {
      // Same as above for variable-source arcs.  Arcs from eps survive in
      // demoted form, including eps->eps: when the binder is unused the call
      // target is the operator value's body under an unextended environment,
      // strictly below the operator-evaluation's endpoints.  Variable arcs
      // into eps are dropped; keeping them (demoted) would be sound as well,
      // but it would certify reduction sequences that the analysis is meant
      // to reject, such as the typable-but-rejected example.
      if (dst_eps && !src_eps) continue;
      if (!target_ok(a.dst)) continue;
      ArcLabel label = (src_eps || dst_eps) ? ArcLabel::Dec : a.label;
      out.add_arc(a.src, label, a.dst);
    }
  }

  if (binder_live) {
    for (const Arc& a : g2.arcs()) {
      if (a.dst != kEpsilon) continue;
      if (a.src == kEpsilon)
        out.add_arc(kEpsilon, ArcLabel::Dec, binder);
      else
        out.add_arc(a.src, a.label, binder);
    }
  }
  return out;
}

inline SizeChangeGraph call_combine(const SizeChangeGraph& g1,
                                    const SizeChangeGraph& g2,
                                    const std::string& binder,
                                    const Exp* body, const Grammar& g = {}) {
  return call_combine(g1, g2, binder, free_vars(body, g));
}

// The variable-to-variable projection of a graph (drops every arc that
// touches eps).  Several of the paper-style flow-chart annotations display
// only this projection.
inline SizeChangeGraph var_projection(const SizeChangeGraph& g) {
  VarSet src = g.source(), dst = g.target();
  SizeChangeGraph out(src, dst);
  for (const Arc& a : g.arcs())
    if (a.src != kEpsilon && a.dst != kEpsilon)
      out.add_arc(a.src, a.label, a.dst);
  return out;
}

// A multipath: a composition-compatible sequence of graphs.
struct Multipath {
  std::vector<SizeChangeGraph> graphs;

  bool composable() const {
    for (std::size_t i = 0; i + 1 < graphs.size(); ++i)
      if (graphs[i].target() != graphs[i + 1].source()) return false;
    return true;
  }

  // Composes the whole sequence (requires at least one graph).
  SizeChangeGraph compose_all() const {
    if (graphs.empty()) throw InternalError("empty multipath");
    SizeChangeGraph acc = graphs.front();
    for (std::size_t i = 1; i < graphs.size(); ++i)
      acc = compose(acc, graphs[i]);
    return acc;
  }
};

}  // namespace sctlam
