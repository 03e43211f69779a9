// stable-inv: experiment harness for the two-link arm and the ANCF beam.
//
// Exit codes: 0 success, 1 configuration error, 2 solver failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "stable_inv/errors.hpp"
#include "stable_inv/experiments.hpp"
#include "stable_inv/oracle/selftest.hpp"

namespace ex = stable_inv::experiments;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kSolverError = 2;

ex::ExperimentConfig load(const std::string& path, ex::Kind kind) {
  if (path.empty()) return ex::parse_config("{}", kind);
  return ex::load_config(path, kind);
}

void report(const std::vector<std::string>& scripts, const std::string& dir) {
  std::cout << "wrote " << dir << "/summary.json and " << scripts.size() << " plot scripts\n";
}

int run(ex::Kind kind, const std::string& config_path, const std::string& out) {
  const ex::ExperimentConfig cfg = load(config_path, kind);
  switch (kind) {
    case ex::Kind::two_link: {
      const auto r = ex::run_two_link(cfg.two_link);
      report(ex::emit_plot_scripts(ex::write_two_link_artifacts(cfg.two_link, r, out)), out);
      std::printf("max |u_approx - u_orig| = %.3e N m, closure error %.3e rad, %.2f s\n",
                  r.study.max_input_deviation, r.closure_error, r.seconds);
      break;
    }
    case ex::Kind::convergence: {
      const auto r = ex::run_convergence(cfg.two_link);
      report(ex::emit_plot_scripts(ex::write_convergence_artifacts(cfg.two_link, r, out)), out);
      for (const auto& s : r.sweep) {
        std::printf("dT %.3f  max e %.3e  rates %.3f / %.3f\n", s.dT, s.comparison.max_error,
                    s.comparison.early_rate, s.comparison.late_rate);
      }
      break;
    }
    case ex::Kind::ancf: {
      const auto r = ex::run_ancf(cfg.ancf);
      report(ex::emit_plot_scripts(ex::write_ancf_artifacts(cfg.ancf, r, out)), out);
      std::printf("max tracking error %.4f deg (rigid input %.3f deg), %d Newton iterations, %.1f s\n",
                  stable_inv::rad_to_deg(r.max_error_ffw), stable_inv::rad_to_deg(r.post_error_rigid),
                  r.inversion.iterations, r.seconds);
      break;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable inversion of flexible manipulators"};
  app.require_subcommand(1);
  std::string config_path, out_dir;

  auto add_experiment = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment JSON (defaults when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
    return sub;
  };
  auto* two_link = add_experiment("two-link", "two-link arm: original vs approximated BCs");
  auto* ancf = add_experiment("ancf", "ANCF beam: inversion on N=4, validation on N=10");
  auto* convergence = add_experiment("convergence", "two-link Delta-T sweep");
  auto* selftest = app.add_subcommand("selftest", "run the oracle suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (selftest->parsed()) {
      const auto results = stable_inv::oracle::run_oracle_suite(std::cout);
      for (const auto& r : results) {
        if (!r.passed) return kSolverError;
      }
      return kOk;
    }
    if (two_link->parsed()) return run(ex::Kind::two_link, config_path, out_dir);
    if (ancf->parsed()) return run(ex::Kind::ancf, config_path, out_dir);
    if (convergence->parsed()) return run(ex::Kind::convergence, config_path, out_dir);
  } catch (const stable_inv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverError;
  }
  return kOk;
}
