// Command-line front end: leadfield synthesis/inspection, experiment sweeps,
// and post-hoc analysis of a records CSV.

#include <CLI11.hpp>

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "spectreg/harness.hpp"
#include "spectreg/inverse.hpp"

namespace {

using namespace spectreg;

int cmd_leadfield_synth(int sensors, int sources, std::uint64_t seed,
                        const std::string& out_path) {
  std::mt19937_64 rng(seed);
  const auto lf = forward::synth_leadfield(sensors, sources, rng);
  forward::save_leadfield(lf, out_path);
  std::cout << "wrote " << sensors << "x" << sources << " leadfield to "
            << out_path << "\n";
  return 0;
}

int cmd_leadfield_info(const std::string& path) {
  const auto lf = forward::load_leadfield(path);
  const auto inv = inverse::build_inverter(lf.G);
  const Eigen::VectorXd norms = lf.G.colwise().norm();
  std::cout << "sensors: " << lf.sensors() << "\n"
            << "sources: " << lf.sources() << "\n"
            << "rank: " << inv.rank << "\n"
            << "largest singular value: " << inv.s(0) << "\n"
            << "condition number: " << inv.s(0) / inv.s(inv.rank - 1) << "\n"
            << "column norms: [" << norms.minCoeff() << ", "
            << norms.maxCoeff() << "]\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& preset,
            const std::string& out_path, int jobs) {
  harness::ExperimentConfig cfg;
  if (preset == "paper") cfg = harness::paper_preset();
  else if (preset == "desk" || preset.empty()) cfg = harness::desk_preset();
  else throw Error("unknown preset '" + preset + "'");
  if (!config_path.empty()) cfg = harness::parse_config_file(config_path, cfg);

  const auto records = harness::run_experiment(cfg, jobs);
  harness::write_records_csv(records, out_path);
  int failed = 0, flagged = 0;
  for (const auto& r : records) {
    failed += r.failed;
    flagged += r.flagged();
  }
  std::cout << "wrote " << records.size() << " records to " << out_path << " ("
            << failed << " failed, " << flagged << " flagged)\n";
  return 0;
}

int cmd_analyze(const std::string& records_path, const std::string& report_path,
                const std::string& plots_dir) {
  const auto records = harness::read_records_csv(records_path);
  std::ofstream report(report_path);
  if (!report) throw IoError("cannot open " + report_path);

  int failed = 0, flagged = 0;
  double max_identity_gap = 0.0;
  for (const auto& r : records) {
    failed += r.failed;
    flagged += r.flagged();
    if (!r.failed)
      max_identity_gap = std::max(
          max_identity_gap, std::abs(r.snr_s_db - r.snr_s_predicted_db));
  }
  report << "records: " << records.size() << "\n"
         << "failed: " << failed << "\n"
         << "flagged (failed or boundary): " << flagged << "\n"
         << "max |snr_s - snr_s_predicted| (dB): " << max_identity_gap << "\n\n";

  const auto summary = harness::summarize_ratio(records);
  report << "lambda_s/lambda_x by (model, snr), mean +- std over locations ("
         << summary.n_excluded << " excluded):\n";
  for (const auto& row : summary.rows)
    report << "  model " << row.model_id << " snr " << row.snr_id << ": "
           << row.mean << " +- " << row.stddev << " (n=" << row.count << ")\n";

  const auto fit = harness::fit_collapse(records);
  report << "\nlog10(lambda_s) linear-fit R^2 (" << fit.n_used << " records):\n"
         << "  vs SNR_X: " << fit.r2_vs_snr_x << "\n"
         << "  vs SNR_S: " << fit.r2_vs_snr_s << "\n";

  if (!plots_dir.empty()) {
    std::filesystem::create_directories(plots_dir);
    harness::emit_plot_data(records, harness::PlotKind::fig3,
                            plots_dir + "/fig3.csv");
    harness::emit_plot_data(records, harness::PlotKind::fig4,
                            plots_dir + "/fig4.csv");
    report << "\nplot data: " << plots_dir << "/fig3.csv, " << plots_dir
           << "/fig4.csv\n";
  }
  std::cout << "report written to " << report_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-step cross-power spectrum estimation laboratory"};
  app.require_subcommand(1);

  auto* lf_cmd = app.add_subcommand("leadfield", "Leadfield utilities");
  lf_cmd->require_subcommand(1);

  int sensors = 40, sources = 80;
  std::uint64_t seed = 1;
  std::string out_path;
  auto* synth = lf_cmd->add_subcommand("synth", "Generate a synthetic leadfield");
  synth->add_option("--sensors", sensors, "Number of sensors")->required();
  synth->add_option("--sources", sources, "Number of sources")->required();
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_option("--out", out_path, "Output file")->required();

  std::string info_path;
  auto* info = lf_cmd->add_subcommand("info", "Print leadfield summary");
  info->add_option("file", info_path, "Leadfield file")->required();

  std::string config_path, preset, run_out = "records.csv";
  int jobs = 1;
  auto* run = app.add_subcommand("run", "Run an experiment sweep");
  run->add_option("--config", config_path, "key = value config file");
  run->add_option("--preset", preset, "desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  run->add_option("--out", run_out, "Records CSV output")->required();
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string records_path, report_path = "report.txt", plots_dir;
  auto* analyze = app.add_subcommand("analyze", "Summarize a records CSV");
  analyze->add_option("records", records_path, "Records CSV")->required();
  analyze->add_option("--report", report_path, "Report output path");
  analyze->add_option("--plots", plots_dir, "Directory for plot-data CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_leadfield_synth(sensors, sources, seed, out_path);
    if (info->parsed()) return cmd_leadfield_info(info_path);
    if (run->parsed()) return cmd_run(config_path, preset, run_out, jobs);
    if (analyze->parsed()) return cmd_analyze(records_path, report_path, plots_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
