// The command-line front end as a library function, so tests can drive it
// through streams without spawning processes.
#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sctlam/absint.hpp"
#include "sctlam/eval.hpp"
#include "sctlam/parse.hpp"
#include "sctlam/report.hpp"
#include "sctlam/sct.hpp"
#include "sctlam/syntax.hpp"

namespace sctlam {

struct RunConfig {
  std::string mode = "analyze";  // analyze | eval | trace | audit
  std::string input;             // program file path, or "-" for stdin
  std::string grammar_path;      // optional file with extra productions
  long long fuel = 100000;
  bool strict_alpha = false;
  std::string format = "text";  // text | json (analyze mode)
  bool verbose = false;
  int audit_bound = 6;
  std::vector<std::pair<int, long long>> substitutions;  // i-th hole -> n
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string read_input(const std::string& path, std::istream& stdin_stream) {
  if (path == "-") {
    std::ostringstream os;
    os << stdin_stream.rdbuf();
    return os.str();
  }
  return read_file(path);
}

// Resolves `--subst i=NAT` pairs against the program's hole occurrences
// (1-based, in program-point order).
inline std::map<const Exp*, long long> resolve_substitutions(
    const Program& prog, const std::vector<std::pair<int, long long>>& subs) {
  std::vector<const Exp*> holes;
  for (const Exp* p : prog.points)
    if (p->kind == ExpKind::Prim && p->prim == PrimKind::Num &&
        !p->num.has_value())
      holes.push_back(p);
  std::map<const Exp*, long long> out;
  for (const auto& [index, value] : subs) {
    if (index < 1 || index > static_cast<int>(holes.size()))
      throw InputError("--subst index " + std::to_string(index) +
                       " out of range: the program has " +
                       std::to_string(holes.size()) + " hole(s)");
    if (value < 0)
      throw InputError("--subst values must be natural numbers");
    out[holes[static_cast<std::size_t>(index) - 1]] = value;
  }
  return out;
}

}  // namespace detail

// Runs one invocation; reports go to `out`, diagnostics to `err`.
// Exit status: 0 = success (any verdict), 1 = input error, 2 = internal
// invariant breach.
inline int run_cli(const RunConfig& cfg, std::ostream& out, std::ostream& err,
                   std::istream& stdin_stream = std::cin) {
  try {
    ParseOptions popts;
    popts.strict_alpha = cfg.strict_alpha;
    std::string text = detail::read_input(cfg.input, stdin_stream);
    std::string extra = cfg.grammar_path.empty()
                            ? std::string{}
                            : detail::read_file(cfg.grammar_path);
    Program prog = parse_program(text, extra, popts);

    if (cfg.mode == "analyze" || cfg.mode == "audit") {
      if (!cfg.substitutions.empty())
        throw InputError("--subst only applies to eval and trace modes");
      AnalysisResult analysis = absint(prog);
      std::vector<ClosureElement> elements = closure(analysis);
      Verdict verdict = decide(elements);
      if (cfg.mode == "analyze") {
        std::vector<ClosureElement> loops = self_loops(elements);
        if (cfg.format == "json")
          out << analysis_json(analysis, loops, verdict).dump(2) << "\n";
        else
          out << text_report(loops, verdict, &analysis, cfg.verbose);
        return 0;
      }
      AuditReport audit =
          bounded_multipath_audit(analysis, elements, cfg.audit_bound);
      out << "cycles audited: " << audit.cycles << "\n";
      out << "agreement: " << (audit.agree ? "yes" : "no") << "\n";
      if (!audit.agree) out << audit.detail << "\n";
      out << verdict_line(verdict) << "\n";
      return audit.agree ? 0 : 2;
    }

    if (cfg.mode == "eval" || cfg.mode == "trace") {
      if (cfg.fuel <= 0) throw InputError("--fuel must be positive");
      EvalOptions eopts;
      eopts.fuel = cfg.fuel;
      eopts.subst = detail::resolve_substitutions(prog, cfg.substitutions);
      if (cfg.mode == "trace") {
        EvalResult r = eval_instrumented(prog, eopts);
        for (const InstrStep& step : r.steps) out << trace_line(step) << "\n";
        if (r.status == EvalResult::Status::Timeout) out << "TIMEOUT\n";
        if (r.status == EvalResult::Status::Error) {
          err << "error: " << r.message << "\n";
          return r.internal_error ? 2 : 1;
        }
        return 0;
      }
      EvalResult r = eval(prog, eopts);
      if (r.status == EvalResult::Status::Timeout) {
        out << "TIMEOUT\n";
        return 0;
      }
      if (r.status == EvalResult::Status::Error) {
        err << "error: " << r.message << "\n";
        return r.internal_error ? 2 : 1;
      }
      FvCache fv(prog.grammar);
      out << to_text(flatten(*r.value, *prog.ast, fv)) << "\n";
      return 0;
    }

    throw InputError("unknown mode: " + cfg.mode);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace sctlam
