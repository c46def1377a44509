#include "spectreg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "spectreg/inverse.hpp"
#include "spectreg/mvar.hpp"

namespace spectreg::harness {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t state = master;
  splitmix64(state);
  state ^= splitmix64(state) + stream;
  state ^= splitmix64(state) + a;
  state ^= splitmix64(state) + b;
  state ^= splitmix64(state) + c;
  return splitmix64(state);
}

ExperimentConfig desk_preset() { return {}; }

ExperimentConfig paper_preset() {
  ExperimentConfig cfg;
  cfg.n_mod = 10;
  cfg.n_loc = 20;
  cfg.n_snr = 6;
  cfg.gamma_lo = 0.1;
  cfg.gamma_hi = 1.0;
  cfg.n_samples = 10000;
  cfg.sensors = 102;
  cfg.sources = 274;
  return cfg;
}

namespace {

struct ModelSlot {
  double gamma = 0.0;
  std::optional<mvar::SourcePair> pair;
  std::string error;
};

double snr_target(const ExperimentConfig& cfg, int snr_id) {
  if (cfg.n_snr == 1) return cfg.snr_lo_db;
  return cfg.snr_lo_db +
         snr_id * (cfg.snr_hi_db - cfg.snr_lo_db) / (cfg.n_snr - 1);
}

}  // namespace

std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg, int jobs) {
  if (cfg.n_mod < 1 || cfg.n_loc < 1 || cfg.n_snr < 1)
    throw Error("run_experiment: n_mod, n_loc, n_snr must be >= 1");
  if (cfg.n_snr > 1 && cfg.snr_lo_db >= cfg.snr_hi_db)
    throw Error("run_experiment: snr_lo_db must be below snr_hi_db");

  forward::Leadfield lf;
  if (cfg.leadfield_file.empty()) {
    std::mt19937_64 rng(derive_seed(cfg.master_seed, kStreamLeadfield));
    lf = forward::synth_leadfield(cfg.sensors, cfg.sources, rng);
  } else {
    lf = forward::load_leadfield(cfg.leadfield_file);
  }
  const inverse::RegularizedInverter inv = inverse::build_inverter(lf.G);

  std::vector<ModelSlot> models(cfg.n_mod);
  for (int m = 0; m < cfg.n_mod; ++m) {
    std::mt19937_64 rng(derive_seed(cfg.master_seed, kStreamModel, m));
    std::uniform_real_distribution<double> unif(cfg.gamma_lo, cfg.gamma_hi);
    models[m].gamma = unif(rng);
    try {
      auto gen = mvar::generate_accepted(models[m].gamma, cfg.mvar_order,
                                         cfg.n_samples, rng, cfg.burn_in);
      gen.pair.model_id = m;
      gen.pair.complexity =
          spectra::complexity(spectra::welch(gen.pair.samples, cfg.welch));
      models[m].pair = std::move(gen.pair);
    } catch (const std::exception& e) {
      models[m].error = e.what();
    }
  }

  std::vector<std::pair<int, int>> locations(cfg.n_loc);
  std::vector<std::string> location_errors(cfg.n_loc);
  for (int l = 0; l < cfg.n_loc; ++l) {
    std::mt19937_64 rng(derive_seed(cfg.master_seed, kStreamLocation, l));
    try {
      locations[l] =
          forward::place_pair(lf, rng, cfg.min_dist_m, cfg.norm_ratio_tol);
    } catch (const std::exception& e) {
      location_errors[l] = e.what();
    }
  }

  std::vector<ResultRecord> records(
      static_cast<std::size_t>(cfg.n_mod) * cfg.n_loc * cfg.n_snr);

  auto run_task = [&](int m, int l) {
    const ModelSlot& slot = models[m];
    const auto [si, sj] = locations[l];

    std::optional<forward::SourceConfig> sc;
    std::optional<spectra::CrossSpectrum> s_true;
    Eigen::MatrixXd y_clean;
    std::string setup_error = !slot.error.empty() ? slot.error
                              : !location_errors[l].empty() ? location_errors[l]
                                                            : "";
    if (setup_error.empty()) {
      try {
        sc = forward::embed_sources(*slot.pair, si, sj, lf.sources());
        y_clean = forward::project(lf, sc->full_x);
        s_true = spectra::welch(sc->full_x, cfg.welch);
      } catch (const std::exception& e) {
        setup_error = e.what();
      }
    }

    for (int s = 0; s < cfg.n_snr; ++s) {
      const std::size_t idx =
          (static_cast<std::size_t>(m) * cfg.n_loc + l) * cfg.n_snr + s;
      ResultRecord& rec = records[idx];
      rec.model_id = m;
      rec.loc_id = l;
      rec.snr_id = s;
      rec.seed = derive_seed(cfg.master_seed, kStreamNoise, m, l, s);
      rec.gamma = slot.gamma;
      rec.src_i = si;
      rec.src_j = sj;
      rec.snr_x_target_db = snr_target(cfg, s);
      if (!setup_error.empty()) {
        rec.failed = true;
        rec.error = setup_error;
        continue;
      }
      rec.complexity = slot.pair->complexity;
      try {
        const double alpha = forward::alpha_for_snr(y_clean, rec.snr_x_target_db);
        std::mt19937_64 rng(rec.seed);
        std::normal_distribution<double> normal(0.0, alpha);
        Eigen::MatrixXd noise(y_clean.rows(), y_clean.cols());
        for (int col = 0; col < noise.cols(); ++col)
          for (int row = 0; row < noise.rows(); ++row)
            noise(row, col) = normal(rng);
        const Eigen::MatrixXd y = y_clean + noise;
        rec.snr_x_realized_db = forward::snr_x(y_clean, noise);
        auto [rx, rs] = optimize::find_optimal_lambdas(inv, y, sc->full_x,
                                                       *s_true, cfg.welch,
                                                       cfg.optim);
        rec.lambda_x_star = rx.lambda_star;
        rec.eps_x_star = rx.eps_star;
        rec.boundary_x = rx.boundary;
        rec.lambda_s_star = rs.lambda_star;
        rec.eps_s_star = rs.eps_star;
        rec.boundary_s = rs.boundary;
        rec.n_evals = rx.n_evals + rs.n_evals;
        rec.snr_s_db = spectra::snr_s(lf.G, *s_true, alpha);
        rec.snr_s_predicted_db = spectra::predicted_snr_s(
            lf.G, *s_true, sc->full_x, rec.snr_x_target_db);
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
      }
    }
  };

  const int n_tasks = cfg.n_mod * cfg.n_loc;
  if (jobs <= 1) {
    for (int t = 0; t < n_tasks; ++t) run_task(t / cfg.n_loc, t % cfg.n_loc);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int n_workers = std::min(jobs, n_tasks);
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1))
          run_task(t / cfg.n_loc, t % cfg.n_loc);
      });
    }
    for (auto& th : pool) th.join();
  }
  return records;
}

RatioSummary summarize_ratio(const std::vector<ResultRecord>& records) {
  RatioSummary out;
  std::map<std::pair<int, int>, std::vector<double>> groups;
  for (const auto& rec : records) {
    if (rec.flagged()) {
      ++out.n_excluded;
      continue;
    }
    groups[{rec.model_id, rec.snr_id}].push_back(rec.lambda_s_star /
                                                 rec.lambda_x_star);
  }
  if (groups.empty())
    throw EmptyAfterFiltering("summarize_ratio: no unflagged records");
  for (const auto& [key, vals] : groups) {
    RatioRow row;
    row.model_id = key.first;
    row.snr_id = key.second;
    row.count = static_cast<int>(vals.size());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    row.mean = mean;
    row.stddev = std::sqrt(var / vals.size());
    out.rows.push_back(row);
  }
  return out;
}

namespace {

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return (sxy * sxy) / (sxx * syy);
}

}  // namespace

CollapseFit fit_collapse(const std::vector<ResultRecord>& records) {
  std::vector<double> snr_x, snr_s, log_lambda;
  std::map<int, int> models_seen;
  for (const auto& rec : records) {
    if (rec.flagged()) continue;
    snr_x.push_back(rec.snr_x_target_db);
    snr_s.push_back(rec.snr_s_db);
    log_lambda.push_back(std::log10(rec.lambda_s_star));
    ++models_seen[rec.model_id];
  }
  if (snr_x.size() < 10 || models_seen.size() < 2)
    throw InsufficientData("fit_collapse: need >= 10 unflagged records from >= 2 models");
  CollapseFit fit;
  fit.n_used = static_cast<int>(snr_x.size());
  fit.r2_vs_snr_x = r_squared(snr_x, log_lambda);
  fit.r2_vs_snr_s = r_squared(snr_s, log_lambda);
  return fit;
}

namespace {

const std::vector<std::string> kCsvColumns = {
    "model_id",         "loc_id",         "snr_id",
    "seed",             "gamma",          "complexity",
    "src_i",            "src_j",          "snr_x_target_db",
    "snr_x_realized_db", "snr_s_db",      "snr_s_predicted_db",
    "lambda_x_star",    "eps_x_star",     "lambda_s_star",
    "eps_s_star",       "boundary_x",     "boundary_s",
    "n_evals",          "failed",         "error"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& tok, int row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("row " + std::to_string(row) + ": bad number '" + tok + "'");
  }
}

}  // namespace

void write_records_csv(const std::vector<ResultRecord>& records,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_records_csv: cannot open " + path);
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i)
    out << kCsvColumns[i] << (i + 1 < kCsvColumns.size() ? "," : "\n");
  for (const auto& r : records) {
    out << r.model_id << ',' << r.loc_id << ',' << r.snr_id << ',' << r.seed
        << ',' << fmt(r.gamma) << ',' << fmt(r.complexity) << ',' << r.src_i
        << ',' << r.src_j << ',' << fmt(r.snr_x_target_db) << ','
        << fmt(r.snr_x_realized_db) << ',' << fmt(r.snr_s_db) << ','
        << fmt(r.snr_s_predicted_db) << ',' << fmt(r.lambda_x_star) << ','
        << fmt(r.eps_x_star) << ',' << fmt(r.lambda_s_star) << ','
        << fmt(r.eps_s_star) << ',' << int(r.boundary_x) << ','
        << int(r.boundary_s) << ',' << r.n_evals << ',' << int(r.failed) << ','
        << sanitize(r.error) << '\n';
  }
  if (!out) throw IoError("write_records_csv: write failed for " + path);
}

std::vector<ResultRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_records_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("row 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  std::map<std::string, int> col;
  for (std::size_t i = 0; i < header.size(); ++i)
    col[header[i]] = static_cast<int>(i);
  for (const auto& name : kCsvColumns)
    if (!col.count(name))
      throw ParseError("header: missing column '" + name + "'");

  std::vector<ResultRecord> records;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() < header.size())
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(f.size()));
    auto fld = [&](const char* name) -> const std::string& {
      return f[col.at(name)];
    };
    ResultRecord r;
    r.model_id = static_cast<int>(parse_double(fld("model_id"), row));
    r.loc_id = static_cast<int>(parse_double(fld("loc_id"), row));
    r.snr_id = static_cast<int>(parse_double(fld("snr_id"), row));
    try {
      r.seed = std::stoull(fld("seed"));
    } catch (const std::exception&) {
      throw ParseError("row " + std::to_string(row) + ": bad seed '" +
                       fld("seed") + "'");
    }
    r.gamma = parse_double(fld("gamma"), row);
    r.complexity = parse_double(fld("complexity"), row);
    r.src_i = static_cast<int>(parse_double(fld("src_i"), row));
    r.src_j = static_cast<int>(parse_double(fld("src_j"), row));
    r.snr_x_target_db = parse_double(fld("snr_x_target_db"), row);
    r.snr_x_realized_db = parse_double(fld("snr_x_realized_db"), row);
    r.snr_s_db = parse_double(fld("snr_s_db"), row);
    r.snr_s_predicted_db = parse_double(fld("snr_s_predicted_db"), row);
    r.lambda_x_star = parse_double(fld("lambda_x_star"), row);
    r.eps_x_star = parse_double(fld("eps_x_star"), row);
    r.lambda_s_star = parse_double(fld("lambda_s_star"), row);
    r.eps_s_star = parse_double(fld("eps_s_star"), row);
    r.boundary_x = parse_double(fld("boundary_x"), row) != 0.0;
    r.boundary_s = parse_double(fld("boundary_s"), row) != 0.0;
    r.n_evals = static_cast<int>(parse_double(fld("n_evals"), row));
    r.failed = parse_double(fld("failed"), row) != 0.0;
    r.error = fld("error");
    records.push_back(std::move(r));
  }
  return records;
}

void emit_plot_data(const std::vector<ResultRecord>& records, PlotKind kind,
                    const std::string& path) {
  if (records.empty()) throw EmptyInput("emit_plot_data: no records");
  std::ofstream out(path);
  if (!out) throw IoError("emit_plot_data: cannot open " + path);
  if (kind == PlotKind::fig3) {
    out << "series,x,y\n";
    for (const auto& r : records) {
      if (r.flagged()) continue;
      out << r.model_id << ',' << fmt(r.snr_s_db) << ','
          << fmt(r.lambda_s_star) << '\n';
    }
  } else {
    std::map<std::pair<int, int>, double> targets;
    for (const auto& r : records) targets[{r.model_id, r.snr_id}] = r.snr_x_target_db;
    const RatioSummary summary = summarize_ratio(records);
    out << "series,x,y,ystd\n";
    for (const auto& row : summary.rows)
      out << row.model_id << ',' << fmt(targets.at({row.model_id, row.snr_id}))
          << ',' << fmt(row.mean) << ',' << fmt(row.stddev) << '\n';
  }
  if (!out) throw IoError("emit_plot_data: write failed for " + path);
}

namespace {

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig parse_config_file(const std::string& path,
                                   const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw IoError("parse_config_file: cannot open " + path);
  ExperimentConfig cfg = base;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto as_int = [&] {
      return static_cast<int>(parse_double(value, lineno));
    };
    auto as_double = [&] { return parse_double(value, lineno); };
    if (key == "n_mod") cfg.n_mod = as_int();
    else if (key == "n_loc") cfg.n_loc = as_int();
    else if (key == "n_snr") cfg.n_snr = as_int();
    else if (key == "snr_lo_db") cfg.snr_lo_db = as_double();
    else if (key == "snr_hi_db") cfg.snr_hi_db = as_double();
    else if (key == "gamma_lo") cfg.gamma_lo = as_double();
    else if (key == "gamma_hi") cfg.gamma_hi = as_double();
    else if (key == "n_samples") cfg.n_samples = as_int();
    else if (key == "mvar_order") cfg.mvar_order = as_int();
    else if (key == "burn_in") cfg.burn_in = as_int();
    else if (key == "leadfield_file") cfg.leadfield_file = value;
    else if (key == "sensors") cfg.sensors = as_int();
    else if (key == "sources") cfg.sources = as_int();
    else if (key == "min_dist_m") cfg.min_dist_m = as_double();
    else if (key == "norm_ratio_tol") cfg.norm_ratio_tol = as_double();
    else if (key == "welch_segment_length") cfg.welch.segment_length = as_int();
    else if (key == "welch_overlap") cfg.welch.overlap_fraction = as_double();
    else if (key == "welch_window") cfg.welch.window = spectra::window_from_string(value);
    else if (key == "optim_log10_lo") cfg.optim.log10_lo = as_double();
    else if (key == "optim_log10_hi") cfg.optim.log10_hi = as_double();
    else if (key == "optim_coarse_points") cfg.optim.coarse_points = as_int();
    else if (key == "optim_tol_log10") cfg.optim.tol_log10 = as_double();
    else if (key == "master_seed") {
      try {
        cfg.master_seed = std::stoull(value);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineno) + ": bad seed '" + value + "'");
      }
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

void write_config_file(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_config_file: cannot open " + path);
  out << "n_mod = " << cfg.n_mod << "\n"
      << "n_loc = " << cfg.n_loc << "\n"
      << "n_snr = " << cfg.n_snr << "\n"
      << "snr_lo_db = " << fmt(cfg.snr_lo_db) << "\n"
      << "snr_hi_db = " << fmt(cfg.snr_hi_db) << "\n"
      << "gamma_lo = " << fmt(cfg.gamma_lo) << "\n"
      << "gamma_hi = " << fmt(cfg.gamma_hi) << "\n"
      << "n_samples = " << cfg.n_samples << "\n"
      << "mvar_order = " << cfg.mvar_order << "\n"
      << "burn_in = " << cfg.burn_in << "\n";
  if (!cfg.leadfield_file.empty())
    out << "leadfield_file = " << cfg.leadfield_file << "\n";
  out << "sensors = " << cfg.sensors << "\n"
      << "sources = " << cfg.sources << "\n"
      << "min_dist_m = " << fmt(cfg.min_dist_m) << "\n"
      << "norm_ratio_tol = " << fmt(cfg.norm_ratio_tol) << "\n"
      << "welch_segment_length = " << cfg.welch.segment_length << "\n"
      << "welch_overlap = " << fmt(cfg.welch.overlap_fraction) << "\n"
      << "welch_window = " << spectra::to_string(cfg.welch.window) << "\n"
      << "optim_log10_lo = " << fmt(cfg.optim.log10_lo) << "\n"
      << "optim_log10_hi = " << fmt(cfg.optim.log10_hi) << "\n"
      << "optim_coarse_points = " << cfg.optim.coarse_points << "\n"
      << "optim_tol_log10 = " << fmt(cfg.optim.tol_log10) << "\n"
      << "master_seed = " << cfg.master_seed << "\n";
  if (!out) throw IoError("write_config_file: write failed for " + path);
}

}  // namespace spectreg::harness
