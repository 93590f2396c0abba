#include "stdg/experiments.hpp"
#include "stdg/parallel.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Space-time DG solver for first-order nonlinear acoustics"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int threads = 1;
  bool linear = false;
  for (const char* name : {"solve", "convergence", "bump"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Config file")->required();
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--linear", linear, "Solve the linear acoustic model (N omitted)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  stdg::RunConfig cfg;
  try {
    cfg = stdg::load_config(config_path, linear);
  } catch (const stdg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  stdg::set_num_threads(threads);
  const stdg::Logger log = [](const std::string& msg) { std::cerr << msg << '\n'; };
  try {
    if (command == "solve") return stdg::cmd_solve(cfg, out_dir, log);
    if (command == "convergence") return stdg::cmd_convergence(cfg, out_dir, log);
    return stdg::cmd_bump(cfg, out_dir, log);
  } catch (const stdg::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const stdg::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
