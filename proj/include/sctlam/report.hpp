// Rendering: the self-loop report and termination verdict as stable text,
// call-trace lines, and a JSON form of the whole analysis.
#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sctlam/absint.hpp"
#include "sctlam/eval.hpp"
#include "sctlam/graph.hpp"
#include "sctlam/sct.hpp"

namespace sctlam {

inline std::string path_text(const std::vector<int>& path) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < path.size(); ++i)
    os << (i != 0 ? "," : "") << path[i];
  os << "]";
  return os.str();
}

// One report line: `11 →* 11: [(r,>,r)] [13]`.
inline std::string loop_line(const ClosureElement& el) {
  std::ostringstream os;
  os << el.src << " →* " << el.dst << ": " << el.graph.to_text() << " "
     << path_text(el.witness);
  return os.str();
}

inline std::string verdict_line(const Verdict& v) {
  return std::string("Size-Change Termination: ") +
         (v.terminates ? "Yes" : "No");
}

// One trace line: `1 -r-> 2 ; [(eps,>,eps)]`.
inline std::string trace_line(const InstrStep& step) {
  std::ostringstream os;
  os << state_label(*step.src) << " -" << kind_letter(step.kind) << "-> "
     << state_label(*step.dst) << " ; " << step.graph.to_text();
  return os.str();
}

inline std::string edge_line(const CallEdge& e) {
  std::ostringstream os;
  os << e.src->label << " -" << kind_letter(e.kind) << "-> " << e.dst->label
     << " ; " << e.graph.to_text();
  return os.str();
}

inline std::string eval_fact_line(const EvalFact& f) {
  std::ostringstream os;
  os << f.subject->label << " => "
     << (f.value.kind == AbsVal::Kind::Point
             ? std::to_string(f.value.occ->label)
             : show_absval(f.value))
     << " ; " << f.graph.to_text();
  return os.str();
}

// The loop report: header, the per-point loops, and the verdict.  With
// `verbose`, the raw call edges and evaluation facts follow.
inline std::string text_report(const std::vector<ClosureElement>& loops,
                               const Verdict& verdict,
                               const AnalysisResult* analysis = nullptr,
                               bool verbose = false) {
  std::ostringstream os;
  os << "SELF Size-Change Graphs, no repetition of graphs:\n\n";
  for (const ClosureElement& el : loops) os << loop_line(el) << "\n";
  os << "\n" << verdict_line(verdict) << "\n";
  if (!verdict.terminates && verdict.counterexample.has_value())
    os << "counterexample: " << loop_line(*verdict.counterexample) << "\n";
  if (verbose && analysis != nullptr) {
    os << "\nCall edges:\n";
    for (const CallEdge& e : analysis->edges) os << edge_line(e) << "\n";
    os << "\nEvaluation facts:\n";
    for (const EvalFact& f : analysis->evals)
      os << eval_fact_line(f) << "\n";
  }
  return os.str();
}

inline nlohmann::json graph_json(const SizeChangeGraph& g) {
  nlohmann::json arcs = nlohmann::json::array();
  for (const Arc& a : g.arcs())
    arcs.push_back({show_name(a.src),
                    a.label == ArcLabel::Dec ? ">" : "=",
                    show_name(a.dst)});
  nlohmann::json source = nlohmann::json::array();
  for (const auto& n : g.source()) source.push_back(show_name(n));
  nlohmann::json target = nlohmann::json::array();
  for (const auto& n : g.target()) target.push_back(show_name(n));
  return {{"source", source}, {"target", target}, {"arcs", arcs}};
}

inline nlohmann::json loop_json(const ClosureElement& el) {
  return {{"point", el.src},
          {"graph", graph_json(el.graph)},
          {"path", el.witness}};
}

inline nlohmann::json analysis_json(const AnalysisResult& analysis,
                                    const std::vector<ClosureElement>& loops,
                                    const Verdict& verdict) {
  nlohmann::json edges = nlohmann::json::array();
  for (const CallEdge& e : analysis.edges)
    edges.push_back({{"src", e.src->label},
                     {"kind", std::string(1, kind_letter(e.kind))},
                     {"dst", e.dst->label},
                     {"graph", graph_json(e.graph)}});
  nlohmann::json evals = nlohmann::json::array();
  for (const EvalFact& f : analysis.evals) {
    nlohmann::json value;
    if (f.value.kind == AbsVal::Kind::Point)
      value = f.value.occ->label;
    else
      value = show_absval(f.value);
    evals.push_back({{"subject", f.subject->label},
                     {"value", value},
                     {"graph", graph_json(f.graph)}});
  }
  nlohmann::json loops_json = nlohmann::json::array();
  for (const ClosureElement& el : loops) loops_json.push_back(loop_json(el));
  nlohmann::json out = {{"terminates", verdict.terminates},
                        {"loops", loops_json},
                        {"edges", edges},
                        {"evals", evals}};
  if (!verdict.terminates && verdict.counterexample.has_value())
    out["counterexample"] = loop_json(*verdict.counterexample);
  return out;
}

}  // namespace sctlam
