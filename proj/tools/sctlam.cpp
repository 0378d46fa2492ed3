// sctlam: size-change termination analysis for call-by-value lambda
// expressions, with exact evaluation, call tracing, and a closure audit.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "sctlam/cli.hpp"

namespace {

// Parses one `i=NAT` substitution argument.
std::pair<int, long long> parse_subst(const std::string& s) {
  auto eq = s.find('=');
  if (eq == std::string::npos)
    throw sctlam::InputError("--subst expects i=NAT, got: " + s);
  try {
    std::size_t used = 0;
    int index = std::stoi(s.substr(0, eq), &used);
    if (used != eq) throw std::invalid_argument(s);
    std::string rhs = s.substr(eq + 1);
    long long value = std::stoll(rhs, &used);
    if (used != rhs.size()) throw std::invalid_argument(s);
    return {index, value};
  } catch (const std::exception&) {
    throw sctlam::InputError("--subst expects i=NAT, got: " + s);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "size-change termination analysis for call-by-value lambda "
      "expressions and lambda-regular tree grammars"};
  app.require_subcommand(1);

  sctlam::RunConfig cfg;
  std::vector<std::string> subst_args;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("input", cfg.input, "program file, or - for stdin")
        ->required();
    sub->add_option("--grammar", cfg.grammar_path,
                    "file with extra grammar productions");
    sub->add_flag("--strict-alpha", cfg.strict_alpha,
                  "reject duplicate binders instead of renaming them");
  };

  CLI::App* analyze = app.add_subcommand(
      "analyze", "print the self-loop report and the termination verdict");
  add_common(analyze);
  analyze->add_option("--format", cfg.format, "output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->default_str("text");
  analyze->add_flag("--verbose", cfg.verbose,
                    "also list call edges and evaluation facts");

  CLI::App* eval = app.add_subcommand("eval", "run the program, print its value");
  add_common(eval);
  eval->add_option("--fuel", cfg.fuel, "rule-application budget")
      ->default_val(100000);
  eval->add_option("--subst", subst_args,
                   "i=NAT substitution for the i-th hole (repeatable)");

  CLI::App* trace = app.add_subcommand(
      "trace", "run the program, print every instrumented step");
  add_common(trace);
  trace->add_option("--fuel", cfg.fuel, "rule-application budget")
      ->default_val(100000);
  trace->add_option("--subst", subst_args,
                    "i=NAT substitution for the i-th hole (repeatable)");

  CLI::App* audit = app.add_subcommand(
      "audit", "check the closure verdict against raw cyclic multipaths");
  add_common(audit);
  audit->add_option("--audit-bound", cfg.audit_bound,
                    "maximum cycle length to enumerate")
      ->default_val(6);

  CLI11_PARSE(app, argc, argv);
  cfg.mode = app.get_subcommands().front()->get_name();

  try {
    for (const std::string& s : subst_args)
      cfg.substitutions.push_back(parse_subst(s));
  } catch (const sctlam::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  return sctlam::run_cli(cfg, std::cout, std::cerr);
}
