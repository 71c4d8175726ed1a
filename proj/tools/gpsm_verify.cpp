// Batch verification driver.  Subcommands mirror the experiment suites;
// reports are written as JSON lines (one record per line) or flat CSV.
// Exit codes: 0 all selected suites pass, 1 a suite failed its tolerance,
// 2 usage error.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gpsm/gpsm.hpp"

namespace {

struct CliOptions {
  gpsm::ExperimentConfig cfg;
  std::string config_file;
  std::string domain_text;
  std::string out_path;
  std::string format = "jsonl";
  int levels = 3;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_file,
                  "JSON config file; command-line flags override its fields");
  cmd->add_option("--p", opt.cfg.p, "slice part dimension p (default 0)");
  cmd->add_option("--q", opt.cfg.q, "sphere part dimension q (default 1)");
  cmd->add_option("--domain", opt.domain_text,
                  "stem domain, e.g. ball;center=0,1;radius=0.45 or "
                  "box;center=0,0;halfwidth=1,1 or "
                  "annulus;center=0,0;inner=0.5;outer=1 (default: auto)");
  cmd->add_option("--res-boundary", opt.cfg.res_boundary, "boundary rule resolution");
  cmd->add_option("--res-slice", opt.cfg.res_slice, "slice volume rule resolution");
  cmd->add_option("--res-eta", opt.cfg.res_eta, "sphere (eta) rule resolution");
  cmd->add_option("--fd-order", opt.cfg.fd_order, "finite difference order (2 or 4)");
  cmd->add_option("--fd-step", opt.cfg.fd_step, "finite difference step (0 = auto)");
  cmd->add_option("--tol", opt.cfg.tol_scale, "tolerance scale factor (default 1)");
  cmd->add_option("--seed", opt.cfg.seed, "random seed for the experiment ensembles");
  cmd->add_option("--delta-schedule", opt.cfg.delta_schedule,
                  "singular exclusion radii, decreasing (default: from domain scale)");
  cmd->add_option("--out", opt.out_path, "report output path (default: stdout)");
  cmd->add_option("--format", opt.format, "report format: jsonl or csv")
      ->check(CLI::IsMember({"jsonl", "csv"}));
}

void apply_config_file(CliOptions& opt, const CLI::App* cmd) {
  if (opt.config_file.empty()) return;
  std::ifstream in(opt.config_file);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + opt.config_file);
  nlohmann::json j;
  in >> j;
  gpsm::ExperimentConfig file_cfg = gpsm::ExperimentConfig::from_json(j);
  // flags given on the command line win over the file
  auto keep = [&](const std::string& flag) { return cmd->count(flag) > 0; };
  if (!keep("--p")) opt.cfg.p = file_cfg.p;
  if (!keep("--q")) opt.cfg.q = file_cfg.q;
  if (!keep("--domain")) opt.cfg.domain = file_cfg.domain;
  if (!keep("--res-boundary")) opt.cfg.res_boundary = file_cfg.res_boundary;
  if (!keep("--res-slice")) opt.cfg.res_slice = file_cfg.res_slice;
  if (!keep("--res-eta")) opt.cfg.res_eta = file_cfg.res_eta;
  if (!keep("--fd-order")) opt.cfg.fd_order = file_cfg.fd_order;
  if (!keep("--fd-step")) opt.cfg.fd_step = file_cfg.fd_step;
  if (!keep("--tol")) opt.cfg.tol_scale = file_cfg.tol_scale;
  if (!keep("--seed")) opt.cfg.seed = file_cfg.seed;
  if (!keep("--delta-schedule")) opt.cfg.delta_schedule = file_cfg.delta_schedule;
}

int emit(const gpsm::Report& rep, const CliOptions& opt) {
  if (opt.out_path.empty()) {
    if (opt.format == "csv")
      rep.write_csv(std::cout);
    else
      rep.write_jsonl(std::cout);
  } else {
    std::ofstream out(opt.out_path);
    if (!out) {
      std::cerr << "error: cannot write " << opt.out_path << "\n";
      return 2;
    }
    if (opt.format == "csv")
      rep.write_csv(out);
    else
      rep.write_jsonl(out);
  }
  int failed = 0;
  for (const gpsm::Record& r : rep.records) {
    std::cerr << (r.pass ? "[pass] " : "[FAIL] ") << r.suite << "/" << r.name << " ("
              << r.wall_ms << " ms)\n";
    if (!r.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification driver for the partial-slice Clifford analysis library"};
  app.require_subcommand(1);

  CliOptions opt;
  std::vector<std::string> selected;
  std::string conv_suite;

  std::vector<CLI::App*> cmds;
  for (const std::string& name : gpsm::all_suites()) {
    CLI::App* cmd = app.add_subcommand(name, "run the " + name + " suite");
    add_common_flags(cmd, opt);
    cmd->callback([&selected, name] { selected.push_back(name); });
    cmds.push_back(cmd);
  }
  CLI::App* all_cmd = app.add_subcommand("all", "run every suite applicable to (p, q)");
  add_common_flags(all_cmd, opt);
  all_cmd->callback([&selected] { selected.push_back("all"); });
  cmds.push_back(all_cmd);

  CLI::App* conv = app.add_subcommand(
      "convergence", "rerun a refinable suite across resolutions and report orders");
  add_common_flags(conv, opt);
  conv->add_option("--suite", conv_suite,
                   "one of: circle-trapezoid, kernel-residual, cauchy-verify, "
                   "pompeiu-verify")
      ->required();
  conv->add_option("--levels", opt.levels, "number of refinement levels (>= 3)");
  cmds.push_back(conv);

  try {
    app.parse(argc, argv);
    const CLI::App* active = app.get_subcommands().front();
    apply_config_file(opt, active);
    if (!opt.domain_text.empty())
      opt.cfg.domain = gpsm::DomainSpec::parse(opt.domain_text);

    gpsm::Report rep;
    if (conv->parsed()) {
      rep = gpsm::convergence_table(opt.cfg, conv_suite, opt.levels);
    } else {
      rep = gpsm::run(opt.cfg, selected);
    }
    return emit(rep, opt);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
