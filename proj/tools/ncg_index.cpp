// Command-line driver: load a job description, run it, emit the report.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ncg/config.hpp"
#include "ncg/report.hpp"
#include "ncg/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spectral triple index pipelines"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format;
  std::int64_t window = 0;
  bool verbose = false;

  CLI::App* run_cmd = app.add_subcommand("run", "run a job file");
  run_cmd->add_option("config", config_path, "job file (JSON)")->required();
  run_cmd->add_option("--out", out_path, "write the report here instead of stdout");
  run_cmd->add_option("--format", format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  run_cmd->add_option("--window", window, "override every task's lattice window");
  run_cmd->add_flag("--verbose", verbose, "log per-epsilon sweeps and diagnostics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "cannot open config: " << config_path << "\n";
    return 2;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  ncg::JobConfig job;
  try {
    job = ncg::load_config(buf.str());
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  if (!format.empty())
    job.format = (format == "jsonl") ? ncg::ReportFormat::jsonl : ncg::ReportFormat::csv;
  if (!out_path.empty()) job.out_path = out_path;

  std::optional<std::int64_t> window_override;
  if (window > 0) window_override = window;

  std::string sweep_log;
  ncg::RunResult res = ncg::run(job, window_override, verbose, &sweep_log);

  for (const auto& row : res.rows)
    if (row.failed && !row.error.empty())
      std::cerr << "task " << row.task << " (" << row.method << "): " << row.error
                << "\n";
  if (verbose && !sweep_log.empty()) std::cerr << sweep_log;

  std::string report = ncg::emit_report(res.rows, job.format);
  if (job.out_path) {
    std::ofstream out(*job.out_path);
    if (!out) {
      std::cerr << "cannot write report: " << *job.out_path << "\n";
      return 2;
    }
    out << report;
  } else {
    std::cout << report;
  }
  return res.exit_code;
}
