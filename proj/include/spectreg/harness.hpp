#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectreg/errors.hpp"
#include "spectreg/forward.hpp"
#include "spectreg/optimize.hpp"
#include "spectreg/spectra.hpp"

namespace spectreg::harness {

struct ExperimentConfig {
  int n_mod = 4;
  int n_loc = 5;
  int n_snr = 4;
  double snr_lo_db = -20.0;
  double snr_hi_db = 5.0;
  double gamma_lo = 0.4;
  double gamma_hi = 1.0;
  int n_samples = 4000;
  int mvar_order = 5;
  int burn_in = 1000;
  std::string leadfield_file;  // empty: synthesize
  int sensors = 40;
  int sources = 80;
  double min_dist_m = 0.07;
  double norm_ratio_tol = 0.1;
  spectra::WelchConfig welch;
  optimize::OptimConfig optim;
  std::uint64_t master_seed = 20260825ull;
};

/// Paper-scale preset: 10 models x 20 locations x 6 SNR levels, T = 10000,
/// 102 sensors, 274 sources, gamma in [0.1, 1].
ExperimentConfig paper_preset();
ExperimentConfig desk_preset();

/// One simulated configuration and its measured outputs. A failed cell keeps
/// its identifiers and carries the error message.
struct ResultRecord {
  int model_id = 0;
  int loc_id = 0;
  int snr_id = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  double complexity = 0.0;
  int src_i = 0;
  int src_j = 0;
  double snr_x_target_db = 0.0;
  double snr_x_realized_db = 0.0;
  double snr_s_db = 0.0;
  double snr_s_predicted_db = 0.0;
  double lambda_x_star = 0.0;
  double eps_x_star = 0.0;
  double lambda_s_star = 0.0;
  double eps_s_star = 0.0;
  bool boundary_x = false;
  bool boundary_s = false;
  int n_evals = 0;
  bool failed = false;
  std::string error;

  bool flagged() const { return failed || boundary_x || boundary_s; }
};

/// Deterministic per-stream seed derivation from the master seed; stream
/// tags keep leadfield, model, location and cell noise draws independent.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t a = 0, std::uint64_t b = 0,
                          std::uint64_t c = 0);
inline constexpr std::uint64_t kStreamLeadfield = 1;
inline constexpr std::uint64_t kStreamModel = 2;
inline constexpr std::uint64_t kStreamLocation = 3;
inline constexpr std::uint64_t kStreamNoise = 4;

/// Runs the full sweep: n_mod models x n_loc shared locations x n_snr
/// evenly spaced SNR targets. Output is ordered by (model, location, snr)
/// regardless of the number of worker threads.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg,
                                         int jobs = 1);

struct RatioRow {
  int model_id = 0;
  int snr_id = 0;
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
};

struct RatioSummary {
  std::vector<RatioRow> rows;
  int n_excluded = 0;
};

/// Mean and standard deviation of lambda_s/lambda_x over locations, keyed by
/// (model, snr); flagged records are excluded and counted.
RatioSummary summarize_ratio(const std::vector<ResultRecord>& records);

struct CollapseFit {
  double r2_vs_snr_x = 0.0;
  double r2_vs_snr_s = 0.0;
  int n_used = 0;
};

/// R^2 of linear fits of log10 lambda_s against the two SNR axes, pooled
/// across models; requires >= 10 unflagged records from >= 2 models.
CollapseFit fit_collapse(const std::vector<ResultRecord>& records);

void write_records_csv(const std::vector<ResultRecord>& records,
                       const std::string& path);
std::vector<ResultRecord> read_records_csv(const std::string& path);

enum class PlotKind { fig3, fig4 };

/// Tidy long-format CSV with columns series,x,y[,ystd]. fig3: one row per
/// unflagged record, x = spectrum-domain SNR, y = lambda_s. fig4: one row
/// per (model, snr) group, x = target SNR, y = mean ratio, ystd = std.
void emit_plot_data(const std::vector<ResultRecord>& records, PlotKind kind,
                    const std::string& path);

/// key = value configuration file mirroring ExperimentConfig; '#' starts a
/// comment, unknown keys are errors. `base` supplies defaults.
ExperimentConfig parse_config_file(const std::string& path,
                                   const ExperimentConfig& base);
void write_config_file(const ExperimentConfig& cfg, const std::string& path);

}  // namespace spectreg::harness
