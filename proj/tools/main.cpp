// exprod: batch CLI for the two-stage productivity estimator with
// learning-by-exporting / learning-from-exporters effects.
//
// Subcommands: simulate, estimate, bootstrap, baseline, report.
// Exit codes: 0 ok, 1 usage, 2 validation, 3 I/O, 4 convergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "exprod/baselines.hpp"
#include "exprod/effects.hpp"
#include "exprod/errors.hpp"
#include "exprod/inference.hpp"
#include "exprod/parallel.hpp"
#include "exprod/pipeline.hpp"
#include "exprod/simulate.hpp"
#include "exprod/stats.hpp"

using json = nlohmann::json;
using namespace exprod;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
  std::string out;
  int threads = 0;
};

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("EXPROD_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return default_threads();
}

fs::path make_run_dir(const std::string& out, const std::string& command) {
  fs::path dir;
  if (!out.empty()) {
    dir = out;
  } else {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::localtime(&t));
    dir = fs::path("run-" + command + "-" + buf);
  }
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << content;
  if (!f) throw IoError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json stage2_options_json(const Stage2Options& o) {
  return json{{"fe_region", o.fe_region},
              {"fe_industry", o.fe_industry},
              {"markov_only", o.markov_only},
              {"n_starts", o.n_starts},
              {"rel_sse_tol", o.rel_sse_tol},
              {"simplex_tol", o.simplex_tol},
              {"max_evals_per_start", o.max_evals_per_start},
              {"pivot_rel_tol", o.pivot_rel_tol}};
}

json conventions_json() {
  return json{{"percentile", "linear interpolation at rank p*(n-1)"},
              {"quantile_premium", "lower empirical quantile x_(ceil(n*tau))"},
              {"wild_weights", "Rademacher, one per firm"},
              {"cluster_se_scale", "G/(G-1)"},
              {"bca_count_clamp", "[0.5, B-0.5]"}};
}

struct ExposureFlags {
  std::string mode = "peer";
  std::string measure = "intensity";
  std::string pool = "region-industry";

  ExposureMode mode_enum() const { return mode == "grand" ? ExposureMode::grand : ExposureMode::peer; }
  ExportMeasure measure_enum() const {
    return measure == "status" ? ExportMeasure::status : ExportMeasure::intensity;
  }
  PeerPool pool_enum() const {
    return pool == "industry" ? PeerPool::industry_only : PeerPool::region_industry;
  }
  json to_json() const { return json{{"mode", mode}, {"measure", measure}, {"pool", pool}}; }
};

void add_exposure_flags(CLI::App* cmd, ExposureFlags& f) {
  cmd->add_option("--mode", f.mode, "Exposure mode")->check(CLI::IsMember({"peer", "grand"}));
  cmd->add_option("--measure", f.measure, "Export measure")
      ->check(CLI::IsMember({"intensity", "status"}));
  cmd->add_option("--pool", f.pool, "Peer pool")
      ->check(CLI::IsMember({"region-industry", "industry"}));
}

struct LoadedSample {
  Panel panel;
  ExposureSeries exposure;
  EstimationSample sample;
  LoadReport report;
};

LoadedSample load_input(const std::string& input, const ExposureFlags& flags) {
  LoadedSample ls;
  ls.panel = load_panel(input, &ls.report);
  for (const auto& [rownum, reason] : ls.report.rejections)
    std::cerr << "warning: " << input << " row " << rownum << " rejected: " << reason << "\n";
  for (const auto& w : ls.report.warnings) std::cerr << "warning: " << w << "\n";
  ls.exposure =
      compute_exposure(ls.panel, flags.mode_enum(), flags.measure_enum(), flags.pool_enum());
  ls.sample = build_sample(ls.panel, ls.exposure);
  return ls;
}

json validation_json(const LoadReport& rep) {
  json rejections = json::array();
  for (const auto& [rownum, reason] : rep.rejections)
    rejections.push_back(json{{"row", rownum}, {"reason", reason}});
  return json{{"rows_read", rep.n_read},
              {"rows_accepted", rep.n_accepted},
              {"rejections", rejections},
              {"warnings", rep.warnings}};
}

json stage1_json(const Stage1Result& s1) {
  return json{{"ln_alpham_theta", s1.ln_alpham_theta},
              {"theta", s1.theta},
              {"alpha_m", s1.alpha_m},
              {"n_obs", s1.n_obs},
              {"eta", s1.eta}};
}

json stage2_json(const Stage2Result& s2) {
  json starts = json::array();
  for (const auto& s : s2.convergence.starts)
    starts.push_back(json{{"alpha_k", s.alpha_k},
                          {"alpha_l", s.alpha_l},
                          {"sse", s.sse},
                          {"evals", s.evals},
                          {"converged", s.converged},
                          {"boundary", s.boundary},
                          {"box_exit", s.box_exit}});
  return json{{"alpha_k", s2.alpha_k},
              {"alpha_l", s2.alpha_l},
              {"gamma", std::vector<double>(s2.gamma.data(), s2.gamma.data() + s2.gamma.size())},
              {"basis", s2.basis_names},
              {"sse", s2.sse},
              {"fe_region", s2.fe_region},
              {"fe_industry", s2.fe_industry},
              {"convergence",
               json{{"starts", starts},
                    {"chosen_start", s2.convergence.chosen_start},
                    {"total_evals", s2.convergence.total_evals},
                    {"dropped_columns", s2.convergence.dropped_columns}}}};
}

json summary_row_json(const SummaryRow& r) {
  json j{{"mean", r.mean}, {"q1", r.q1}, {"median", r.median}, {"q3", r.q3}, {"n", r.n}};
  if (r.sig_share >= 0) j["sig_share"] = r.sig_share;
  return j;
}

json effects_summary_json(const EffectsSummary& s) {
  static const char* groups[3] = {"all", "exporters", "non_exporters"};
  json out;
  for (int g = 0; g < 3; ++g) {
    out["lbe"][groups[g]] = summary_row_json(s.lbe[g]);
    out["lfe"][groups[g]] = summary_row_json(s.lfe[g]);
    out["lfe_per_peer"][groups[g]] = summary_row_json(s.lfe_per_peer[g]);
  }
  return out;
}

json effect_functions_json(const EffectFunctions& f) {
  auto fj = [](const EffectFunction& e) {
    return json{{"intercept", e.intercept},
                {"slope_omega", e.slope_omega},
                {"slope_x", e.slope_x},
                {"slope_xbar", e.slope_xbar}};
  };
  return json{{"lbe", fj(f.lbe)}, {"lfe", fj(f.lfe)}};
}

json long_run_json(const LongRunReport& r) {
  json j{{"mean_persistence", r.mean_persistence}, {"stationary", r.stationary}};
  if (r.stationary) {
    j["lbe_long_run"] = r.lbe_long_run;
    j["lfe_long_run"] = r.lfe_long_run;
    j["total_per_10pp"] = r.total_per_10pp;
  }
  return j;
}

void write_omega_csv(const fs::path& path, const EstimationSample& sample, const PointFit& fit) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f.precision(17);
  f << "firm_id,year,omega_plus_const,eta,zeta,resid\n";
  for (std::size_t i = 0; i < sample.aligned.size(); ++i) {
    const auto& a = sample.aligned[i];
    f << a.firm_id << ',' << a.year << ',' << fit.s2.omega_plus_const[i] << ','
      << fit.ts.eta_cur[i] << ',' << fit.s2.zeta[i] << ',' << fit.s2.resid[i] << '\n';
  }
}

void write_effects_csv(const fs::path& path, const EstimationSample& sample,
                       const EffectsTable& table, const RowIntervals* iv) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f.precision(17);
  f << "firm_id,year,exporter_lag,n_lag,lbe,lfe,lfe_per_peer,persistence";
  if (iv) f << ",lbe_lo,lbe_hi,lbe_sig,lfe_lo,lfe_hi,lfe_sig";
  f << '\n';
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& a = sample.aligned[i];
    const auto& r = table.rows[i];
    f << a.firm_id << ',' << a.year << ',' << (r.exporter ? 1 : 0) << ',' << a.n_lag << ',' << r.lbe
      << ',' << r.lfe << ',' << r.lfe_per_peer << ',' << r.persistence;
    if (iv) {
      const bool lbe_sig = iv->lbe_lo[i] > 0.0 || iv->lbe_hi[i] < 0.0;
      const bool lfe_sig = iv->lfe_lo[i] > 0.0 || iv->lfe_hi[i] < 0.0;
      f << ',' << iv->lbe_lo[i] << ',' << iv->lbe_hi[i] << ',' << (lbe_sig ? 1 : 0) << ','
        << iv->lfe_lo[i] << ',' << iv->lfe_hi[i] << ',' << (lfe_sig ? 1 : 0);
    }
    f << '\n';
  }
}

json intervals_json(const IntervalSet& set) {
  json arr = json::array();
  for (std::size_t j = 0; j < set.names.size(); ++j) {
    const auto& iv = set.intervals[j];
    json e{{"name", set.names[j]}, {"level", iv.level},   {"q0", iv.q0},
           {"c", iv.c},            {"clamped", iv.clamped}};
    // NaN is not representable in JSON; degenerate estimands keep nulls
    if (std::isfinite(iv.point)) e["point"] = iv.point;
    if (std::isfinite(iv.lo)) e["lo"] = iv.lo;
    if (std::isfinite(iv.hi)) e["hi"] = iv.hi;
    arr.push_back(e);
  }
  return arr;
}

// estimate/bootstrap shared result emission
struct EstimateOutputs {
  LoadedSample ls;
  PointFit fit;
  EffectsTable table;
  EstimandSet point;
};

EstimateOutputs run_estimate(const std::string& input, const ExposureFlags& flags,
                             const Stage2Options& opt) {
  EstimateOutputs out{load_input(input, flags), {}, {}, {}};
  out.fit = run_pipeline(out.ls.sample, opt);
  out.table = compute_effects(out.fit.s2, out.ls.sample);
  out.point = compute_estimands(out.ls.sample, out.fit);
  return out;
}

void emit_estimate(const fs::path& dir, const EstimateOutputs& eo, const RowIntervals* row_iv) {
  write_json(dir / "stage1.json", stage1_json(eo.fit.s1));
  write_json(dir / "stage2.json", stage2_json(eo.fit.s2));
  EffectsSummary summary;
  if (row_iv)
    summary = summarize_effects(eo.table, row_iv->lbe_lo, row_iv->lbe_hi, row_iv->lfe_lo,
                                row_iv->lfe_hi);
  else
    summary = summarize_effects(eo.table);
  write_json(dir / "effects_summary.json", effects_summary_json(summary));
  write_json(dir / "effect_functions.json", effect_functions_json(effect_functions(eo.fit.s2)));

  std::vector<double> persistence;
  persistence.reserve(eo.table.rows.size());
  for (const auto& r : eo.table.rows) persistence.push_back(r.persistence);
  const LongRunReport lr = long_run(summary.lbe[0].mean, summary.lfe[0].mean, mean(persistence));
  write_json(dir / "long_run.json", long_run_json(lr));

  write_omega_csv(dir / "omega.csv", eo.ls.sample, eo.fit);
  write_effects_csv(dir / "effects.csv", eo.ls.sample, eo.table, row_iv);
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

// ------------------------------- report --------------------------------

json read_json_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path.string());
  json j;
  f >> j;
  return j;
}

std::string interval_suffix(const json& intervals, const std::string& name) {
  if (intervals.is_null()) return "";
  for (const auto& iv : intervals)
    if (iv["name"] == name && iv.contains("lo"))
      return " (" + fmt(iv["lo"].get<double>()) + ", " + fmt(iv["hi"].get<double>()) + ")";
  return "";
}

std::string render_run_report(const fs::path& dir) {
  std::string out;
  out += "=== Run: " + dir.string() + " ===\n\n";

  json intervals;
  if (fs::exists(dir / "intervals.json")) intervals = read_json_file(dir / "intervals.json");

  if (fs::exists(dir / "stage1.json") && fs::exists(dir / "stage2.json")) {
    const json s1 = read_json_file(dir / "stage1.json");
    const json s2 = read_json_file(dir / "stage2.json");
    out += "Production function\n";
    out += "  alpha_K = " + fmt(s2["alpha_k"].get<double>()) + interval_suffix(intervals, "alpha_k") + "\n";
    out += "  alpha_L = " + fmt(s2["alpha_l"].get<double>()) + interval_suffix(intervals, "alpha_l") + "\n";
    out += "  alpha_M = " + fmt(s1["alpha_m"].get<double>()) + interval_suffix(intervals, "alpha_m") + "\n";
    const double scale =
        s1["alpha_m"].get<double>() + s2["alpha_k"].get<double>() + s2["alpha_l"].get<double>();
    out += "  scale   = " + fmt(scale) + interval_suffix(intervals, "scale_elasticity") + "\n\n";
  }

  if (fs::exists(dir / "effects_summary.json")) {
    const json s = read_json_file(dir / "effects_summary.json");
    out += "Productivity effects of exporting\n";
    out += "  group              mean      1st Qu.   median    3rd Qu.   signif.\n";
    static const char* groups[3] = {"all", "exporters", "non_exporters"};
    static const char* labels[3] = {"All firms    ", "Exporters    ", "Non-exporters"};
    for (const char* effect : {"lbe", "lfe"}) {
      out += std::string("  -- ") +
             (std::string(effect) == "lbe" ? "Learning by Exporting" : "Learning from Exporters") +
             " --\n";
      for (int g = 0; g < 3; ++g) {
        const json& row = s[effect][groups[g]];
        out += "  " + std::string(labels[g]) + "  " + fmt(row["mean"].get<double>()) + "    " +
               fmt(row["q1"].get<double>()) + "    " + fmt(row["median"].get<double>()) + "    " +
               fmt(row["q3"].get<double>());
        if (row.contains("sig_share"))
          out += "    " + fmt(100.0 * row["sig_share"].get<double>(), 1) + "%";
        out += "\n";
        const std::string iv_name =
            std::string(effect) + "_" + (g == 0 ? "all" : g == 1 ? "exp" : "non") + "_mean";
        const std::string suffix = interval_suffix(intervals, iv_name);
        if (!suffix.empty()) out += "      mean CI:" + suffix + "\n";
      }
    }
    out += "\n";
  }

  if (fs::exists(dir / "effect_functions.json")) {
    const json f = read_json_file(dir / "effect_functions.json");
    out += "Effect functions (slopes on the lagged state)\n";
    out += "                     LBE        LFE\n";
    out += "  omega_{t-1}     " + fmt(f["lbe"]["slope_omega"].get<double>()) + "     " +
           fmt(f["lfe"]["slope_omega"].get<double>()) + "\n";
    out += "  X_{t-1}         " + fmt(f["lbe"]["slope_x"].get<double>()) + "     " +
           fmt(f["lfe"]["slope_x"].get<double>()) + "\n";
    out += "  Xbar_{t-1}      " + fmt(f["lbe"]["slope_xbar"].get<double>()) + "     " +
           fmt(f["lfe"]["slope_xbar"].get<double>()) + "\n\n";
  }

  if (fs::exists(dir / "long_run.json")) {
    const json lr = read_json_file(dir / "long_run.json");
    out += "Long-run multipliers\n";
    out += "  mean persistence = " + fmt(lr["mean_persistence"].get<double>()) + "\n";
    if (lr["stationary"].get<bool>()) {
      out += "  long-run LBE     = " + fmt(lr["lbe_long_run"].get<double>()) + "\n";
      out += "  long-run LFE     = " + fmt(lr["lfe_long_run"].get<double>()) + "\n";
      out += "  total per 10pp   = " + fmt(lr["total_per_10pp"].get<double>(), 2) + "\n";
    } else {
      out += "  non-stationary persistence; multipliers omitted\n";
    }
    out += "\n";
  }

  if (fs::exists(dir / "premium.json")) {
    const json p = read_json_file(dir / "premium.json");
    out += "Exporter premium (recovered productivity)\n";
    out += "  mean difference = " + fmt(p["mean_diff"]["point"].get<double>());
    if (p["mean_diff"].contains("lo"))
      out += " (" + fmt(p["mean_diff"]["lo"].get<double>()) + ", " +
             fmt(p["mean_diff"]["hi"].get<double>()) + ")";
    out += "\n\n";
  }

  if (fs::exists(dir / "dominance.json")) {
    const json d = read_json_file(dir / "dominance.json");
    out += "Stochastic dominance (exporters over non-exporters)\n";
    out += "  statistic = " + fmt(d["statistic"].get<double>()) +
           "  p-value = " + fmt(d["p_value"].get<double>()) + "\n\n";
  }

  if (fs::exists(dir / "two_step.json")) {
    const json t = read_json_file(dir / "two_step.json");
    out += "Two-step comparator (grand-average exposure)\n";
    out += "  spec                    beta_x (se)          beta_xbar (se)\n";
    for (const auto& spec : t) {
      out += "  " + spec["label"].get<std::string>() + "  " + fmt(spec["beta_x"].get<double>()) +
             " (" + fmt(spec["se_x"].get<double>()) + ")  " + fmt(spec["beta_xbar"].get<double>()) +
             " (" + fmt(spec["se_xbar"].get<double>()) + ")\n";
    }
    out += "\n";
  }
  return out;
}

std::string render_comparison(const std::vector<fs::path>& dirs) {
  std::string out = "=== Cross-specification comparison ===\n\n";
  out += "  run                                  mean LBE    mean LFE\n";
  for (const auto& dir : dirs) {
    if (!fs::exists(dir / "effects_summary.json")) continue;
    const json s = read_json_file(dir / "effects_summary.json");
    char buf[256];
    std::snprintf(buf, sizeof(buf), "  %-36s %8s    %8s\n", dir.string().c_str(),
                  fmt(s["lbe"]["all"]["mean"].get<double>()).c_str(),
                  fmt(s["lfe"]["all"]["mean"].get<double>()).c_str());
    out += buf;
  }
  out += "\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage semiparametric productivity estimator with export learning effects"};
  app.require_subcommand(1);

  // ---- simulate ----
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic panel from the structural DGP");
  std::string sim_config;
  std::uint64_t sim_seed = 0;
  CommonOpts sim_common;
  sim_cmd->add_option("--config", sim_config, "DGP config file (key=value)")->required();
  auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "Override the config seed");
  sim_cmd->add_option("--out", sim_common.out, "Run directory");
  sim_cmd->add_option("--threads", sim_common.threads, "Worker threads");

  // ---- estimate ----
  auto* est_cmd = app.add_subcommand("estimate", "Run the two-stage estimator on a panel CSV");
  std::string est_input;
  ExposureFlags est_flags;
  Stage2Options est_opt;
  CommonOpts est_common;
  bool est_validation = false;
  est_cmd->add_option("--input", est_input, "Panel CSV")->required();
  add_exposure_flags(est_cmd, est_flags);
  est_cmd->add_flag("--fe-region", est_opt.fe_region, "Region fixed effects in the sieve");
  est_cmd->add_flag("--fe-industry", est_opt.fe_industry, "Industry fixed effects in the sieve");
  est_cmd->add_flag("--validation-report", est_validation, "Emit validation.json");
  est_cmd->add_option("--out", est_common.out, "Run directory");
  est_cmd->add_option("--threads", est_common.threads, "Worker threads");

  // ---- bootstrap ----
  auto* bs_cmd = app.add_subcommand("bootstrap", "Estimate plus wild-bootstrap BCa intervals");
  std::string bs_input;
  ExposureFlags bs_flags;
  Stage2Options bs_opt;
  CommonOpts bs_common;
  int bs_B = 500;
  std::uint64_t bs_seed = 1;
  int bs_jackknife = 20;
  bs_cmd->add_option("--input", bs_input, "Panel CSV")->required();
  add_exposure_flags(bs_cmd, bs_flags);
  bs_cmd->add_flag("--fe-region", bs_opt.fe_region, "Region fixed effects in the sieve");
  bs_cmd->add_flag("--fe-industry", bs_opt.fe_industry, "Industry fixed effects in the sieve");
  bs_cmd->add_option("--bootstrap", bs_B, "Bootstrap replicates B")->check(CLI::PositiveNumber);
  bs_cmd->add_option("--seed", bs_seed, "Bootstrap seed");
  bs_cmd->add_option("--jackknife-delete", bs_jackknife,
                     "Firms per jackknife deletion group (0 disables acceleration)");
  bs_cmd->add_option("--out", bs_common.out, "Run directory");
  bs_cmd->add_option("--threads", bs_common.threads, "Worker threads");

  // ---- baseline ----
  auto* base_cmd =
      app.add_subcommand("baseline", "Premium, dominance, two-step and grand-average diagnostics");
  std::string base_input;
  ExposureFlags base_flags;
  CommonOpts base_common;
  std::uint64_t base_seed = 1;
  int base_B = 0;
  int base_R = 500;
  int base_b = 0;
  base_cmd->add_option("--input", base_input, "Panel CSV")->required();
  add_exposure_flags(base_cmd, base_flags);
  base_cmd->add_option("--seed", base_seed, "Seed for subsampling / bootstrap");
  base_cmd->add_option("--bootstrap", base_B, "Replicates for premium intervals (0 = none)");
  base_cmd->add_option("--subsamples", base_R, "Dominance-test subsample draws");
  base_cmd->add_option("--subsample-size", base_b, "Firms per dominance subsample (0 = n^0.7)");
  base_cmd->add_option("--out", base_common.out, "Run directory");
  base_cmd->add_option("--threads", base_common.threads, "Worker threads");

  // ---- report ----
  auto* rep_cmd = app.add_subcommand("report", "Render text tables from prior run directories");
  std::vector<std::string> rep_runs;
  CommonOpts rep_common;
  rep_cmd->add_option("--run", rep_runs, "Run directory (repeatable)")->required();
  rep_cmd->add_option("--out", rep_common.out, "Run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*sim_cmd) {
      DgpConfig cfg = load_dgp_config(sim_config);
      if (sim_seed_opt->count() > 0) cfg.seed = sim_seed;
      const int threads = resolve_threads(sim_common.threads);
      const fs::path dir = make_run_dir(sim_common.out, "simulate");
      const SimResult sim = simulate_panel(cfg, threads);
      write_panel_csv(sim.panel, (dir / "panel.csv").string());
      write_truth_csv(sim.panel, sim.truth, (dir / "truth.csv").string());
      double exporters = 0;
      for (const auto& r : sim.panel.rows) exporters += r.X > 0 ? 1 : 0;
      write_json(dir / "manifest.json",
                 json{{"command", "simulate"},
                      {"version", kVersion},
                      {"config_file", sim_config},
                      {"seed", cfg.seed},
                      {"threads", threads},
                      {"rows", sim.panel.size()},
                      {"exporter_share", exporters / sim.panel.size()},
                      {"conventions", conventions_json()}});
      std::cout << "wrote " << (dir / "panel.csv").string() << " (" << sim.panel.size()
                << " rows)\n";
      return 0;
    }

    if (*est_cmd) {
      est_opt.threads = resolve_threads(est_common.threads);
      const fs::path dir = make_run_dir(est_common.out, "estimate");
      const EstimateOutputs eo = run_estimate(est_input, est_flags, est_opt);
      emit_estimate(dir, eo, nullptr);
      if (est_validation) write_json(dir / "validation.json", validation_json(eo.ls.report));
      write_json(dir / "manifest.json",
                 json{{"command", "estimate"},
                      {"version", kVersion},
                      {"input", est_input},
                      {"exposure", est_flags.to_json()},
                      {"stage2_options", stage2_options_json(est_opt)},
                      {"threads", est_opt.threads},
                      {"rows_aligned", eo.ls.sample.aligned.size()},
                      {"rows_dropped_no_lag", eo.ls.sample.dropped_rows},
                      {"conventions", conventions_json()}});
      std::cout << "alpha_m=" << eo.fit.s1.alpha_m << " alpha_k=" << eo.fit.s2.alpha_k
                << " alpha_l=" << eo.fit.s2.alpha_l << "\n";
      return 0;
    }

    if (*bs_cmd) {
      bs_opt.threads = 1;  // parallelism runs at the replicate level
      const int threads = resolve_threads(bs_common.threads);
      const fs::path dir = make_run_dir(bs_common.out, "bootstrap");
      EstimateOutputs eo = run_estimate(bs_input, bs_flags, bs_opt);

      const BootstrapSet bs = wild_bootstrap(eo.ls.sample, eo.fit, bs_B, bs_seed, bs_opt, threads);
      JackknifeSet jk;
      const JackknifeSet* jk_ptr = nullptr;
      if (bs_jackknife > 0) {
        jk = jackknife_pipeline(eo.ls.sample, eo.fit, bs_jackknife, bs_opt, threads);
        jk_ptr = &jk;
      }
      const IntervalSet iv = make_intervals(eo.point, bs, jk_ptr);
      const RowIntervals row_iv = make_row_intervals(eo.table, bs, jk_ptr);

      emit_estimate(dir, eo, &row_iv);
      write_json(dir / "intervals.json", intervals_json(iv));
      write_bootstrap_csv(bs, (dir / "bootstrap_replicates.csv").string());
      const SignificanceShares shares = significance_share(eo.table, row_iv);
      write_json(
          dir / "significance.json",
          json{{"lbe",
                {{"all", shares.lbe[0]}, {"exporters", shares.lbe[1]}, {"non_exporters", shares.lbe[2]}}},
               {"lfe",
                {{"all", shares.lfe[0]}, {"exporters", shares.lfe[1]}, {"non_exporters", shares.lfe[2]}}}});
      write_json(dir / "manifest.json",
                 json{{"command", "bootstrap"},
                      {"version", kVersion},
                      {"input", bs_input},
                      {"exposure", bs_flags.to_json()},
                      {"stage2_options", stage2_options_json(bs_opt)},
                      {"bootstrap_B", bs_B},
                      {"seed", bs_seed},
                      {"jackknife_delete", bs_jackknife},
                      {"threads", threads},
                      {"replicate_failures", bs.failures},
                      {"conventions", conventions_json()}});
      std::cout << "bootstrap done: B=" << bs_B << " failures=" << bs.failures << "\n";
      return 0;
    }

    if (*base_cmd) {
      const int threads = resolve_threads(base_common.threads);
      const fs::path dir = make_run_dir(base_common.out, "baseline");
      Stage2Options opt;
      opt.threads = 1;
      EstimateOutputs eo = run_estimate(base_input, base_flags, opt);

      // exporter premium on recovered productivity, current-period status
      std::vector<double> omega = eo.fit.s2.omega_plus_const;
      std::vector<char> exporter(omega.size());
      std::vector<int> firm(omega.size());
      for (std::size_t i = 0; i < omega.size(); ++i) {
        exporter[i] = eo.ls.sample.aligned[i].x_cur_raw > 0.0 ? 1 : 0;
        firm[i] = eo.ls.sample.aligned[i].firm_index;
      }
      const PremiumReport prem = premium(omega, exporter, premium_taus());

      json prem_json;
      if (base_B > 0) {
        const BootstrapSet bs =
            wild_bootstrap(eo.ls.sample, eo.fit, base_B, base_seed, opt, threads);
        const IntervalSet iv = make_intervals(eo.point, bs);
        auto find = [&](const std::string& name) -> const IntervalEstimate& {
          for (std::size_t j = 0; j < iv.names.size(); ++j)
            if (iv.names[j] == name) return iv.intervals[j];
          throw ValidationError("missing estimand " + name);
        };
        const auto& md = find("premium_mean_diff");
        prem_json["mean_diff"] = json{{"point", prem.mean_diff}, {"lo", md.lo}, {"hi", md.hi}};
        json qs = json::array();
        for (std::size_t t = 0; t < prem.taus.size(); ++t) {
          char name[40];
          std::snprintf(name, sizeof(name), "premium_tau_%03d",
                        static_cast<int>(std::lround(prem.taus[t] * 100)));
          const auto& ivq = find(name);
          qs.push_back(json{{"tau", prem.taus[t]},
                            {"beta0", prem.beta0[t]},
                            {"beta1", prem.beta1[t]},
                            {"lo", ivq.lo},
                            {"hi", ivq.hi}});
        }
        prem_json["quantile_premia"] = qs;
      } else {
        prem_json["mean_diff"] = json{{"point", prem.mean_diff}};
        json qs = json::array();
        for (std::size_t t = 0; t < prem.taus.size(); ++t)
          qs.push_back(
              json{{"tau", prem.taus[t]}, {"beta0", prem.beta0[t]}, {"beta1", prem.beta1[t]}});
        prem_json["quantile_premia"] = qs;
      }
      write_json(dir / "premium.json", prem_json);

      DominanceConfig dcfg;
      dcfg.R = base_R;
      dcfg.b = base_b;
      dcfg.seed = base_seed;
      dcfg.threads = threads;
      const DominanceResult dom = dominance_test(omega, exporter, firm, dcfg);
      write_json(dir / "dominance.json", json{{"statistic", dom.statistic},
                                              {"p_value", dom.p_value},
                                              {"subsample_firms", dom.b_used},
                                              {"subsamples_used", dom.R_used},
                                              {"subsamples_skipped", dom.skipped}});

      // two-step comparator across the three fixed-effect specs
      json two_step_json = json::array();
      std::string fig3 = "spec,beta_xbar,lo,hi\n";
      const double z975 = norm_ppf(0.975);
      for (int spec = 0; spec < 3; ++spec) {
        TwoStepOptions topt;
        topt.pool = base_flags.pool_enum();
        topt.fe_region = spec >= 1;
        topt.fe_industry = spec >= 2;
        const TwoStepResult ts = two_step(eo.ls.panel, topt);
        const std::string label = spec == 0   ? "(I) no FE        "
                                  : spec == 1 ? "(II) region FE   "
                                              : "(III) region+ind ";
        two_step_json.push_back(json{{"label", label},
                                     {"exposure_mode", ts.exposure_mode},
                                     {"fe_region", ts.fe_region},
                                     {"fe_industry", ts.fe_industry},
                                     {"beta0", ts.beta0},
                                     {"beta_x", ts.beta_x},
                                     {"beta_xbar", ts.beta_xbar},
                                     {"se0", ts.se0},
                                     {"se_x", ts.se_x},
                                     {"se_xbar", ts.se_xbar},
                                     {"n_rows", ts.n_rows},
                                     {"n_clusters", ts.n_firms}});
        fig3 += "spec" + std::to_string(spec + 1) + "," + fmt(ts.beta_xbar, 6) + "," +
                fmt(ts.beta_xbar - z975 * ts.se_xbar, 6) + "," +
                fmt(ts.beta_xbar + z975 * ts.se_xbar, 6) + "\n";
      }
      write_json(dir / "two_step.json", two_step_json);
      write_text(dir / "figure3.csv", fig3);

      // implied effects from the no-FE grand regression
      const json& g0 = two_step_json[0];
      double p_ii = 0;
      for (const auto& a : eo.ls.sample.aligned) p_ii += 1.0 / (a.n_lag + 1.0);
      p_ii /= eo.ls.sample.aligned.size();
      const GrandAlgebra ga =
          grand_average_algebra(g0["beta_x"].get<double>(), g0["beta_xbar"].get<double>(), p_ii);
      write_json(dir / "grand_average.json", json{{"beta_x", g0["beta_x"]},
                                                  {"beta_xbar", g0["beta_xbar"]},
                                                  {"p_ii_mean", p_ii},
                                                  {"lbe_implied", ga.lbe_implied},
                                                  {"spill_implied", ga.spill_implied},
                                                  {"divergence_flag", ga.divergence_flag}});
      write_json(dir / "manifest.json",
                 json{{"command", "baseline"},
                      {"version", kVersion},
                      {"input", base_input},
                      {"exposure", base_flags.to_json()},
                      {"seed", base_seed},
                      {"bootstrap_B", base_B},
                      {"dominance", json{{"R", base_R}, {"b", base_b}}},
                      {"threads", threads},
                      {"conventions", conventions_json()}});
      std::cout << "premium mean diff=" << prem.mean_diff << " dominance p=" << dom.p_value
                << "\n";
      return 0;
    }

    if (*rep_cmd) {
      const fs::path dir = make_run_dir(rep_common.out, "report");
      std::string text;
      std::vector<fs::path> dirs;
      for (const auto& r : rep_runs) dirs.emplace_back(r);
      for (const auto& d : dirs) text += render_run_report(d);
      if (dirs.size() > 1) text += render_comparison(dirs);
      write_text(dir / "report.txt", text);
      // carry the plot-ready two-step CSV along when a run produced one
      for (const auto& d : dirs) {
        if (fs::exists(d / "figure3.csv")) {
          fs::copy_file(d / "figure3.csv", dir / "figure3.csv",
                        fs::copy_options::overwrite_existing);
          break;
        }
      }
      std::cout << text;
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
