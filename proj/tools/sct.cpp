// Command-line front end: parse/run/analyze programs, check the termination
// criterion, compute fast-growing-hierarchy values, and emit ordinal traces.
//
// Exit codes: 0 success or affirmative verdict, 1 negative verdict
// (NOT ISCT, safety or descent violation), 2 usage or input errors.

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "sct/bounds.hpp"
#include "sct/fgh.hpp"
#include "sct/lang.hpp"
#include "sct/ordinal.hpp"
#include "sct/rewrite.hpp"
#include "sct/scg.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sct::Error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::uint64_t> parse_args_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  if (s.empty()) return out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stoull(item));
  return out;
}

struct Common {
  std::string program_path;
  std::string desc_path;
  std::string args_text;
  std::string base_spec = "succ";
  std::uint64_t fuel = 1000000;
  std::uint64_t budget = 1000000;
  bool lenient = false;
  bool tsv = false;
  std::size_t width = 120;

  sct::Program load() const {
    sct::ParseOptions opts;
    opts.strict_grammar = !lenient;
    return sct::parse_program(read_file(program_path), opts);
  }
  sct::OpInterp ops(const sct::Program& p) const {
    return sct::make_op_table(p, sct::parse_base_spec(base_spec).fn);
  }
  sct::Description description(const sct::Program& p) const {
    if (desc_path.empty()) return sct::extract_description(p);
    return sct::description_from_text(read_file(desc_path), p);
  }
  std::vector<std::uint64_t> entry_args() const { return parse_args_list(args_text); }
};

void add_common_program(CLI::App* cmd, Common& c, bool with_desc = false) {
  cmd->add_option("program", c.program_path, "program file")->required();
  cmd->add_flag("--lenient", c.lenient, "allow conditionals inside application arguments");
  if (with_desc)
    cmd->add_option("--desc", c.desc_path, "description file (default: extract from the program)");
}

int cmd_parse(const Common& c) {
  std::cout << sct::pretty_program(c.load());
  return kExitOk;
}

int cmd_run(const Common& c, bool trace) {
  sct::Program p = c.load();
  sct::OpInterp ops = c.ops(p);
  std::vector<std::uint64_t> args = c.entry_args();
  sct::Term t = sct::make_call_term(p.entry().name, args);
  if (trace) {
    std::vector<sct::StepLine> lines;
    sct::ReduceOutcome r = sct::reduce_traced(t, p, ops, c.fuel, lines, c.width);
    for (const auto& l : lines)
      std::cout << l.index << "\t" << (l.proper ? "P" : "O") << "\t"
                << sct::position_to_string(l.position) << "\t" << l.term << "\n";
    if (const auto* v = std::get_if<sct::ReduceValue>(&r)) {
      std::cout << p.entry().name << "(" << c.args_text << ") = " << v->value << " in "
                << v->steps << " steps (" << v->proper_steps << " proper)\n";
    } else {
      std::cout << "out of fuel after " << std::get<sct::ReduceOutOfFuel>(r).steps << " steps\n";
    }
    return kExitOk;
  }
  sct::TerminationVerdict v = sct::terminates_on(p, ops, args, c.fuel);
  if (const auto* ok = std::get_if<sct::Terminates>(&v)) {
    std::cout << p.entry().name << "(" << c.args_text << ") = " << ok->value << " in "
              << ok->steps << " steps (" << ok->proper_steps << " proper)\n";
  } else {
    std::cout << "unknown: out of fuel (" << c.fuel << ")\n";
  }
  return kExitOk;
}

int cmd_graphs(const Common& c) {
  sct::Program p = c.load();
  std::cout << sct::description_to_text(sct::extract_description(p));
  return kExitOk;
}

int cmd_closure(const Common& c) {
  sct::Program p = c.load();
  sct::Description d = c.description(p);
  std::vector<sct::SizeChangeGraph> cl = sct::closure(d.range());
  std::cout << "closure size " << cl.size() << "\n";
  for (std::size_t i = 0; i < cl.size(); ++i) {
    std::cout << i << ": " << sct::graph_to_string(cl[i])
              << (sct::is_idempotent(cl[i]) ? "  [idempotent]" : "") << "\n";
  }
  return kExitOk;
}

int cmd_check(const Common& c) {
  sct::Program p = c.load();
  sct::Description d = c.description(p);
  sct::IsctVerdict v = sct::check_isct(d);
  if (std::holds_alternative<sct::Isct>(v)) {
    std::cout << "ISCT\n";
    return kExitOk;
  }
  std::cout << "NOT ISCT, witness: " << sct::graph_to_string(std::get<sct::NotIsct>(v).witness)
            << "\n";
  return kExitNegative;
}

int cmd_trace(const Common& c, bool tail) {
  sct::Program p = c.load();
  sct::Description d = c.description(p);
  sct::OpInterp ops = c.ops(p);
  sct::TraceResult r;
  try {
    r = tail ? sct::trace_tail_ordinals(p, d, ops, c.entry_args(), c.fuel)
             : sct::trace_ordinals(p, d, ops, c.entry_args(), c.fuel);
  } catch (const sct::RamseyOverflow& e) {
    std::cout << "overflow: " << e.what() << "\n";
    return kExitUsage;
  }
  std::cout << "# closure " << r.params.closure_size << ", m " << r.params.m << ", r "
            << r.params.r << ", p " << r.params.p_len << ", a " << r.params.a << "\n";
  for (const auto& st : r.steps) {
    std::string alpha = sct::to_string(st.alpha);
    if (c.width && alpha.size() > c.width) alpha = alpha.substr(0, c.width) + "...";
    std::cout << st.index << "\t" << (st.rho ? (st.proper ? "P" : "O") : "-") << "\t"
              << (st.rho ? sct::position_to_string(*st.rho) : "-") << "\t" << alpha;
    for (const std::string& ev : st.fold_events) std::cout << "\t" << ev;
    std::cout << "\n";
  }
  if (!r.ok()) {
    std::cout << "violation: " << r.detail << "\n";
    return kExitNegative;
  }
  std::cout << "descent ok; " << (r.terminated ? "terminated" : "fuel exhausted");
  if (r.value) std::cout << " with value " << *r.value;
  std::cout << "; " << r.fold_count << " folds\n";
  return kExitOk;
}

int cmd_fgh(const std::string& alpha_text, std::uint64_t x, const std::string& base,
            std::uint64_t budget, bool htrace) {
  sct::Ordinal alpha = sct::parse_ordinal(alpha_text);
  sct::BaseFunction f = sct::parse_base_spec(base);
  std::vector<sct::FghTraceEntry> trace;
  sct::FghOutcome out = sct::compute_F(f, alpha, x, budget, htrace ? &trace : nullptr);
  if (htrace) {
    std::vector<sct::Ordinal> hs;
    for (const auto& e : trace) {
      std::cout << e.step << "\t" << sct::to_string(e.h_value) << "\tvalue " << e.state.value
                << "\tstack " << e.state.stack.size() << "\n";
      hs.push_back(e.h_value);
    }
    sct::DescentVerdict v = sct::descending_witness(hs);
    if (std::holds_alternative<sct::Descending>(v)) std::cout << "# h-trace descending\n";
    else
      std::cout << "# h-trace violation at index "
                << std::get<sct::DescentViolation>(v).index << "\n";
  }
  if (const auto* v = std::get_if<sct::FghValue>(&out)) {
    std::cout << "F_{" << alpha_text << "," << f.name << "}(" << x << ") = " << v->value
              << " in " << v->steps << " steps\n";
  } else {
    std::cout << "budget exhausted after " << std::get<sct::FghBudget>(out).steps << " steps\n";
  }
  return kExitOk;
}

int cmd_ackermann(unsigned n, const std::string& args_text, const std::string& base,
                  std::uint64_t fuel, std::uint64_t budget) {
  sct::Program p = sct::gen_ackermann_program(n);
  std::cout << sct::gen_ackermann_source(n);
  std::vector<std::uint64_t> args = parse_args_list(args_text);
  if (args.size() != n + 1) {
    std::cerr << "expected " << n + 1 << " arguments\n";
    return kExitUsage;
  }
  sct::BaseFunction f = sct::parse_base_spec(base);
  sct::OpInterp ops = sct::make_op_table(p, f.fn);
  sct::TerminationVerdict v = sct::terminates_on(p, ops, args, fuel);
  std::vector<std::uint64_t> xs(args.begin(), args.end() - 1);
  sct::FghOutcome k = sct::compute_F(f, sct::alpha_of(xs), args.back(), budget);
  if (const auto* ok = std::get_if<sct::Terminates>(&v))
    std::cout << "interpreter: " << ok->value << " (" << ok->proper_steps << " proper steps)\n";
  else
    std::cout << "interpreter: out of fuel\n";
  if (const auto* kv = std::get_if<sct::FghValue>(&k))
    std::cout << "k-machine:   " << kv->value << " (" << kv->steps << " steps)\n";
  else
    std::cout << "k-machine:   out of budget\n";
  const auto* ok = std::get_if<sct::Terminates>(&v);
  const auto* kv = std::get_if<sct::FghValue>(&k);
  if (ok && kv && ok->value != kv->value) {
    std::cout << "DISAGREEMENT\n";
    return kExitNegative;
  }
  std::cout << (ok && kv ? "values agree\n" : "cross-check incomplete within budget\n");
  return kExitOk;
}

int cmd_monitor(const Common& c) {
  sct::Program p = c.load();
  sct::Description d = c.description(p);
  sct::OpInterp ops = c.ops(p);
  // walk the reachable states depth-first, checking every resolved transition
  std::uint64_t remaining = c.fuel;
  std::uint64_t checked = 0, violations = 0, unresolved = 0;
  std::set<std::pair<std::string, std::vector<std::uint64_t>>> seen;
  std::vector<std::pair<std::string, std::vector<std::uint64_t>>> work;
  work.emplace_back(p.entry().name, c.entry_args());
  while (!work.empty()) {
    auto [fn, args] = work.back();
    work.pop_back();
    if (!seen.emplace(fn, args).second) continue;
    std::uint64_t spent = 0;
    std::vector<sct::StateTransition> trs =
        sct::state_transitions_metered(fn, args, p, ops, remaining, spent);
    remaining -= std::min(remaining, spent);
    for (const auto& tr : trs) {
      if (!tr.resolved) {
        ++unresolved;
        continue;
      }
      ++checked;
      if (!sct::check_safety_runtime(d, tr)) {
        ++violations;
        std::cout << "violation: (" << tr.source_fn << ") call at "
                  << sct::position_to_string(tr.call.pos) << "\n";
      }
      work.emplace_back(tr.target_fn, tr.target_args);
    }
  }
  std::cout << "checked " << checked << " transitions, " << violations << " violations, "
            << unresolved << " unresolved\n";
  return violations == 0 ? kExitOk : kExitNegative;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"size-change termination toolkit"};
  app.require_subcommand(1);

  Common c;
  std::string alpha_text = "0";
  std::uint64_t fgh_x = 0;
  std::string base = "succ";
  bool htrace = false, run_trace = false, tail = false;
  unsigned ack_n = 1;

  CLI::App* parse = app.add_subcommand("parse", "parse and pretty-print a program");
  add_common_program(parse, c);

  CLI::App* run = app.add_subcommand("run", "run the entry function");
  add_common_program(run, c);
  run->add_option("--args", c.args_text, "entry arguments, comma separated");
  run->add_option("--fuel", c.fuel, "reduction step budget");
  run->add_flag("--trace", run_trace, "print one line per reduction step");
  run->add_option("--width", c.width, "truncate printed terms at this width");

  CLI::App* graphs = app.add_subcommand("graphs", "extract and print the size-change description");
  add_common_program(graphs, c);

  CLI::App* closure_cmd = app.add_subcommand("closure", "composition closure of the description");
  add_common_program(closure_cmd, c, true);

  CLI::App* check = app.add_subcommand("check", "termination criterion verdict");
  add_common_program(check, c, true);

  CLI::App* trace = app.add_subcommand("trace", "ordinal-assignment trace of a run");
  add_common_program(trace, c, true);
  trace->add_option("--args", c.args_text, "entry arguments, comma separated");
  trace->add_option("--fuel", c.fuel, "reduction step budget");
  trace->add_flag("--tail", tail, "tail-recursive assignment");
  trace->add_option("--width", c.width, "truncate printed ordinals at this width");

  CLI::App* fgh = app.add_subcommand("fgh", "fast-growing hierarchy value");
  fgh->add_option("--alpha", alpha_text, "ordinal notation, e.g. w^(2)*3+w")->required();
  fgh->add_option("--x", fgh_x, "argument")->required();
  fgh->add_option("--base", base, "base function: succ | affine:a,b");
  fgh->add_option("--budget", c.budget, "step budget");
  fgh->add_flag("--h-trace", htrace, "print the descending measure per step");

  CLI::App* ack = app.add_subcommand("ackermann", "generate and cross-check A^n");
  ack->add_option("-n,--n", ack_n, "number of tower arguments")->required();
  ack->add_option("--args", c.args_text, "x1..xn,y")->required();
  ack->add_option("--base", base, "base function: succ | affine:a,b");
  ack->add_option("--fuel", c.fuel, "interpreter fuel");
  ack->add_option("--budget", c.budget, "k-machine budget");

  CLI::App* monitor = app.add_subcommand("monitor", "check observed transitions against a description");
  add_common_program(monitor, c, true);
  monitor->add_option("--args", c.args_text, "entry arguments, comma separated");
  monitor->add_option("--fuel", c.fuel, "argument normalization budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (parse->parsed()) return cmd_parse(c);
    if (run->parsed()) return cmd_run(c, run_trace);
    if (graphs->parsed()) return cmd_graphs(c);
    if (closure_cmd->parsed()) return cmd_closure(c);
    if (check->parsed()) return cmd_check(c);
    if (trace->parsed()) return cmd_trace(c, tail);
    if (fgh->parsed()) return cmd_fgh(alpha_text, fgh_x, base, c.budget, htrace);
    if (ack->parsed()) return cmd_ackermann(ack_n, c.args_text, base, c.fuel, c.budget);
    if (monitor->parsed()) return cmd_monitor(c);
  } catch (const sct::SyntaxError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sct::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
