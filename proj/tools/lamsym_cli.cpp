// Command-line front end: load a declarative problem file, run the pipeline
// that matches its kind, and print reports.  Exit codes: 0 all checks pass,
// 1 at least one check fails (or a trace goes non-finite), 2 input error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lamsym/problemfile.hpp"

namespace {

std::vector<double> parse_state_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string cell = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    const char* begin = cell.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
      throw lamsym::SyntaxError("bad state value '" + cell + "' in --x0", 0);
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

struct Flags {
  std::string file;
  std::uint64_t seed = 0;
  int samples = 0;
  double tol = 0.0;
  double t0 = 0.0, h = 0.0;
  int steps = 0;
  std::string x0;
  std::string format = "text";
};

int run(CLI::App& app, Flags& f, CLI::App* verify, CLI::App* trace, CLI::App* report) {
  lamsym::ProblemFile pf = lamsym::load_problem_file(f.file);
  if (verify->parsed() || report->parsed()) {
    if (verify->count("--seed")) pf.cfg.seed = f.seed;
    if (verify->count("--samples")) pf.cfg.samples = f.samples;
    if (verify->count("--tol")) {
      pf.cfg.abs_tol = f.tol;
      pf.cfg.rel_tol = f.tol;
    }
    lamsym::VerificationReport rep = lamsym::run_verify(pf);
    if (report->parsed() && f.format == "json")
      std::cout << rep.to_json();
    else
      std::cout << rep.to_text();
    return rep.overall() ? 0 : 1;
  }

  (void)app;
  lamsym::TraceOptions opt;
  if (trace->count("--t0")) opt.t0 = f.t0;
  if (trace->count("--h")) opt.h = f.h;
  if (trace->count("--steps")) opt.steps = f.steps;
  if (trace->count("--x0")) opt.x0 = parse_state_list(f.x0);
  lamsym::TraceRun run = lamsym::run_trace(pf, opt);
  std::cout << lamsym::trajectory_table(run.traj);
  if (!run.report.checks.empty()) {
    std::cout << "\n";
    std::cout << run.report.to_text();
  }
  return run.report.overall() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symbolic-numeric workbench for deformed symmetries of "
               "dynamical systems, Lagrangians, and field theories"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* verify = app.add_subcommand(
      "verify", "run every check declared by a problem file");
  verify->add_option("file", f.file, "problem file")->required();
  verify->add_option("--seed", f.seed, "sampling seed");
  verify->add_option("--samples", f.samples, "number of sample points");
  verify->add_option("--tol", f.tol, "absolute and relative comparison tolerance");

  CLI::App* trace = app.add_subcommand(
      "trace", "integrate the flow and check the declared deviation laws");
  trace->set_help_flag("--help", "print help");  // frees -h for the step size
  trace->add_option("file", f.file, "problem file")->required();
  trace->add_option("--t0", f.t0, "initial time");
  trace->add_option("--h", f.h, "step size");
  trace->add_option("--steps", f.steps, "number of steps");
  trace->add_option("--x0", f.x0, "initial state, comma separated");

  CLI::App* report = app.add_subcommand(
      "report", "run the checks and serialize the report");
  report->add_option("file", f.file, "problem file")->required();
  report->add_option("--format", f.format, "text or json")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (report->parsed() && f.format != "text" && f.format != "json") {
    std::cerr << "input error: unknown format '" << f.format << "'\n";
    return 2;
  }

  try {
    return run(app, f, verify, trace, report);
  } catch (const lamsym::NonFiniteStateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  }
}
