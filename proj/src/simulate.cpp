#include "exprod/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "exprod/errors.hpp"
#include "exprod/parallel.hpp"
#include "exprod/rng.hpp"

namespace exprod {

namespace {

double h_eval(const DgpConfig& c, double w, double x, double xb) {
  return c.h_const + c.rho * w + c.b_x * x + c.b_xbar * xb + c.c_ww * w * w + c.c_xx * x * x +
         c.c_xbxb * xb * xb + c.c_wx * w * x + c.c_wxb * w * xb + c.c_xxb * x * xb;
}

std::string pad_id(const char* prefix, int v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
  return std::string(prefix) + s;
}

int draw_category(Rng& rng, int n, const std::vector<double>& probs) {
  if (probs.empty()) return static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  double total = 0.0;
  for (double p : probs) total += p;
  double u = rng.uniform() * total;
  for (int i = 0; i < n; ++i) {
    u -= probs[i];
    if (u < 0.0) return i;
  }
  return n - 1;
}

}  // namespace

void DgpConfig::validate() const {
  if (n_firms < 1 || n_periods < 1 || burn_in < 0)
    throw ValidationError("dgp: n_firms, n_periods must be >= 1 and burn_in >= 0");
  if (!(alpha_m > 0.0 && alpha_m < 1.0)) throw ValidationError("dgp: alpha_m must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("dgp: delta must lie in (0,1)");
  if (!(std::fabs(rho) < 1.0)) throw ValidationError("dgp: |rho| must be < 1");
  if (sigma_zeta < 0.0 || sigma_eta < 0.0 || x_noise_sd < 0.0 || inv_noise_sd < 0.0 ||
      lab_noise_sd < 0.0 || group_shift_sd < 0.0 || group_shift_t_sd < 0.0)
    throw ValidationError("dgp: noise standard deviations must be non-negative");
  if (n_regions < 1 || n_industries < 1)
    throw ValidationError("dgp: need at least one region and one industry");
  if (!region_probs.empty() && static_cast<int>(region_probs.size()) != n_regions)
    throw ValidationError("dgp: region_probs length must equal n_regions");
  if (!industry_probs.empty() && static_cast<int>(industry_probs.size()) != n_industries)
    throw ValidationError("dgp: industry_probs length must equal n_industries");
}

double dgp_theta(const DgpConfig& cfg) { return std::exp(0.5 * cfg.sigma_eta * cfg.sigma_eta); }

TrueEffects oracle_effects(const DgpConfig& c, double w, double x, double xb) {
  TrueEffects e;
  e.lbe = c.b_x + 2.0 * c.c_xx * x + c.c_wx * w + c.c_xxb * xb;
  e.lfe = c.b_xbar + 2.0 * c.c_xbxb * xb + c.c_wxb * w + c.c_xxb * x;
  e.persistence = c.rho + 2.0 * c.c_ww * w + c.c_wx * x + c.c_wxb * xb;
  return e;
}

SimResult simulate_panel(const DgpConfig& cfg, int threads) {
  cfg.validate();
  const int n = cfg.n_firms;
  const int total_periods = cfg.burn_in + cfg.n_periods;
  const double ln_theta = 0.5 * cfg.sigma_eta * cfg.sigma_eta;

  // firm assignments and group export-climate shifts come from dedicated
  // streams so firm trajectories stay per-firm deterministic
  std::vector<int> region(n), industry(n);
  {
    Rng assign(cfg.seed, 0x67726F7570ULL);
    for (int i = 0; i < n; ++i) {
      region[i] = draw_category(assign, cfg.n_regions, cfg.region_probs);
      industry[i] = draw_category(assign, cfg.n_industries, cfg.industry_probs);
    }
  }
  const std::size_t n_cells = static_cast<std::size_t>(cfg.n_regions) * cfg.n_industries;
  std::vector<double> group_shift(n_cells);
  std::vector<double> group_shift_t(n_cells * total_periods);
  {
    Rng gs(cfg.seed, 0x7368696674ULL);
    for (auto& v : group_shift) v = cfg.group_shift_sd * gs.normal();
    for (auto& v : group_shift_t) v = cfg.group_shift_t_sd * gs.normal();
  }

  // members of each (region, industry) cell in ascending firm index; this is
  // the row order compute_exposure sees after the panel sort, so the group
  // sums accumulate identically (bitwise) on both paths
  std::vector<std::vector<int>> cell_members(group_shift.size());
  for (int i = 0; i < n; ++i)
    cell_members[static_cast<std::size_t>(region[i]) * cfg.n_industries + industry[i]].push_back(i);

  const double sd0 = cfg.sigma_zeta / std::sqrt(1.0 - cfg.rho * cfg.rho);
  const double mu0 = cfg.h_const / (1.0 - cfg.rho);

  // per-firm state
  std::vector<double> omega(n), cap(n), lab(n);
  std::vector<double> omega_prev(n, 0.0), x_prev(n, 0.0), xbar_prev(n, 0.0);
  std::vector<double> x_cur(n), xbar_cur(n), zeta_cur(n), eta_cur(n);
  std::vector<double> k_level(n), l_level(n), m_level(n), y_level(n);
  std::vector<Rng> firm_rng;
  firm_rng.reserve(n);
  for (int i = 0; i < n; ++i) firm_rng.emplace_back(cfg.seed, static_cast<std::uint64_t>(i) + 1);

  std::vector<FirmYear> rows;
  std::vector<double> t_omega, t_eta, t_zeta;
  rows.reserve(static_cast<std::size_t>(n) * cfg.n_periods);

  auto price_at = [&](int t) {
    if (cfg.rel_price_series.empty()) return 1.0;
    return cfg.rel_price_series[static_cast<std::size_t>(t) % cfg.rel_price_series.size()];
  };

  for (int t = 0; t < total_periods; ++t) {
    const double price = price_at(t);

    // productivity transition, then the contemporaneous export choice
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t ui) {
      const int i = static_cast<int>(ui);
      Rng& rng = firm_rng[i];
      if (t == 0) {
        omega[i] = mu0 + sd0 * rng.normal();
        zeta_cur[i] = 0.0;
        cap[i] = std::exp(cfg.k0_mean + cfg.k0_sd * rng.normal());
        lab[i] = std::exp(cfg.l0_mean + cfg.l0_sd * rng.normal());
      } else {
        const double zeta = cfg.sigma_zeta * rng.normal();
        omega[i] = h_eval(cfg, omega_prev[i], x_prev[i], xbar_prev[i]) + zeta;
        zeta_cur[i] = zeta;
      }
      const std::size_t cell = static_cast<std::size_t>(region[i]) * cfg.n_industries + industry[i];
      const double latent = cfg.x_const + cfg.x_persist * x_prev[i] + cfg.x_load * omega[i] +
                            group_shift[cell] + group_shift_t[cell * total_periods + t] +
                            cfg.x_noise_sd * rng.normal();
      x_cur[i] = latent < cfg.x_threshold ? 0.0 : std::min(latent, 1.0);
    });

    // barrier: every firm's X_t must be realized before peer exposure;
    // prefix/suffix peer sums match compute_exposure's arithmetic bitwise
    for (const auto& members : cell_members) {
      if (members.empty()) continue;
      const std::size_t m = members.size();
      std::vector<double> prefix(m + 1, 0.0), suffix(m + 1, 0.0);
      for (std::size_t j = 0; j < m; ++j) prefix[j + 1] = prefix[j] + x_cur[members[j]];
      for (std::size_t j = m; j-- > 0;) suffix[j] = suffix[j + 1] + x_cur[members[j]];
      for (std::size_t j = 0; j < m; ++j)
        xbar_cur[members[j]] =
            m > 1 ? (prefix[j] + suffix[j + 1]) / static_cast<double>(m - 1) : 0.0;
    }

    // static materials choice, output, and next-period input plans
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t ui) {
      const int i = static_cast<int>(ui);
      Rng& rng = firm_rng[i];
      const double k = std::log(cap[i]);
      const double l = std::log(lab[i]);
      const double ln_m = (std::log(cfg.alpha_m) + ln_theta + cfg.alpha0 + cfg.alpha_k * k +
                           cfg.alpha_l * l + omega[i] - std::log(price)) /
                          (1.0 - cfg.alpha_m);
      const double eta = cfg.sigma_eta * rng.normal();
      const double ln_y =
          cfg.alpha0 + cfg.alpha_k * k + cfg.alpha_l * l + cfg.alpha_m * ln_m + omega[i] + eta;
      k_level[i] = cap[i];
      l_level[i] = lab[i];
      m_level[i] = std::exp(ln_m);
      y_level[i] = std::exp(ln_y);
      eta_cur[i] = eta;

      const double inv = std::exp(cfg.inv_const + cfg.inv_k * k + cfg.inv_omega * omega[i] +
                                  cfg.inv_noise_sd * rng.normal());
      const double lab_next = std::exp(cfg.lab_const + cfg.lab_persist * l +
                                       cfg.lab_omega * omega[i] + cfg.lab_noise_sd * rng.normal());
      cap[i] = (1.0 - cfg.delta) * cap[i] + inv;
      lab[i] = lab_next;
    });

    if (t >= cfg.burn_in) {
      const int year = cfg.start_year + (t - cfg.burn_in);
      for (int i = 0; i < n; ++i) {
        if (!std::isfinite(y_level[i]) || !std::isfinite(m_level[i]) || !std::isfinite(omega[i]) ||
            !std::isfinite(cap[i]) || !std::isfinite(lab[i]))
          throw ValidationError("dgp: non-finite state for firm " + std::to_string(i) +
                                " in period " + std::to_string(t) + " (explosive configuration)");
        FirmYear r;
        r.firm_id = pad_id("F", i, 6);
        r.year = year;
        r.Y = y_level[i];
        r.K = std::exp(k_log[i]);
        r.L = std::exp(l_log[i]);
        r.M = m_level[i];
        r.X = x_cur[i];
        r.region = pad_id("R", region[i], 2);
        r.industry = pad_id("I", industry[i], 2);
        r.rel_price = price;
        rows.push_back(std::move(r));
        t_omega.push_back(omega[i]);
        t_eta.push_back(eta_cur[i]);
        t_zeta.push_back(zeta_cur[i]);
      }
    }

    for (int i = 0; i < n; ++i) {
      omega_prev[i] = omega[i];
      x_prev[i] = x_cur[i];
      xbar_prev[i] = xbar_cur[i];
    }
  }

  // rows were appended year-major but firm ids sort first; reorder the truth
  // arrays to match the panel's (firm_id, year) order
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a].firm_id != rows[b].firm_id) return rows[a].firm_id < rows[b].firm_id;
    return rows[a].year < rows[b].year;
  });

  SimResult out;
  std::vector<FirmYear> sorted_rows;
  sorted_rows.reserve(rows.size());
  out.truth.omega.reserve(rows.size());
  out.truth.eta.reserve(rows.size());
  out.truth.zeta.reserve(rows.size());
  for (std::size_t idx : order) {
    sorted_rows.push_back(std::move(rows[idx]));
    out.truth.omega.push_back(t_omega[idx]);
    out.truth.eta.push_back(t_eta[idx]);
    out.truth.zeta.push_back(t_zeta[idx]);
  }
  out.panel = make_panel(std::move(sorted_rows));
  return out;
}

void write_truth_csv(const Panel& panel, const SimTruth& truth, const std::string& path) {
  if (truth.omega.size() != panel.size())
    throw ValidationError("truth arrays do not match panel size");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write CSV file: " + path);
  out.precision(17);
  out << "firm_id,year,omega,eta,zeta\n";
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const auto& r = panel.rows[i];
    out << r.firm_id << ',' << r.year << ',' << truth.omega[i] << ',' << truth.eta[i] << ','
        << truth.zeta[i] << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

namespace {

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

}  // namespace

DgpConfig load_dgp_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  DgpConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = v.find_last_not_of(" \t\r");
      return v.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "n_firms") c.n_firms = std::stoi(val);
      else if (key == "n_periods") c.n_periods = std::stoi(val);
      else if (key == "burn_in") c.burn_in = std::stoi(val);
      else if (key == "seed") c.seed = std::stoull(val);
      else if (key == "start_year") c.start_year = std::stoi(val);
      else if (key == "alpha0") c.alpha0 = std::stod(val);
      else if (key == "alpha_k") c.alpha_k = std::stod(val);
      else if (key == "alpha_l") c.alpha_l = std::stod(val);
      else if (key == "alpha_m") c.alpha_m = std::stod(val);
      else if (key == "delta") c.delta = std::stod(val);
      else if (key == "h_const") c.h_const = std::stod(val);
      else if (key == "rho") c.rho = std::stod(val);
      else if (key == "b_x") c.b_x = std::stod(val);
      else if (key == "b_xbar") c.b_xbar = std::stod(val);
      else if (key == "c_ww") c.c_ww = std::stod(val);
      else if (key == "c_xx") c.c_xx = std::stod(val);
      else if (key == "c_xbxb") c.c_xbxb = std::stod(val);
      else if (key == "c_wx") c.c_wx = std::stod(val);
      else if (key == "c_wxb") c.c_wxb = std::stod(val);
      else if (key == "c_xxb") c.c_xxb = std::stod(val);
      else if (key == "sigma_zeta") c.sigma_zeta = std::stod(val);
      else if (key == "sigma_eta") c.sigma_eta = std::stod(val);
      else if (key == "x_const") c.x_const = std::stod(val);
      else if (key == "x_persist") c.x_persist = std::stod(val);
      else if (key == "x_load") c.x_load = std::stod(val);
      else if (key == "x_noise_sd") c.x_noise_sd = std::stod(val);
      else if (key == "x_threshold") c.x_threshold = std::stod(val);
      else if (key == "group_shift_sd") c.group_shift_sd = std::stod(val);
      else if (key == "group_shift_t_sd") c.group_shift_t_sd = std::stod(val);
      else if (key == "inv_const") c.inv_const = std::stod(val);
      else if (key == "inv_k") c.inv_k = std::stod(val);
      else if (key == "inv_omega") c.inv_omega = std::stod(val);
      else if (key == "inv_noise_sd") c.inv_noise_sd = std::stod(val);
      else if (key == "lab_const") c.lab_const = std::stod(val);
      else if (key == "lab_persist") c.lab_persist = std::stod(val);
      else if (key == "lab_omega") c.lab_omega = std::stod(val);
      else if (key == "lab_noise_sd") c.lab_noise_sd = std::stod(val);
      else if (key == "k0_mean") c.k0_mean = std::stod(val);
      else if (key == "k0_sd") c.k0_sd = std::stod(val);
      else if (key == "l0_mean") c.l0_mean = std::stod(val);
      else if (key == "l0_sd") c.l0_sd = std::stod(val);
      else if (key == "n_regions") c.n_regions = std::stoi(val);
      else if (key == "n_industries") c.n_industries = std::stoi(val);
      else if (key == "region_probs") c.region_probs = parse_double_list(val);
      else if (key == "industry_probs") c.industry_probs = parse_double_list(val);
      else if (key == "rel_price_series") c.rel_price_series = parse_double_list(val);
      else throw ValidationError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ValidationError("config line " + std::to_string(lineno) + ": cannot parse value '" +
                            val + "' for key '" + key + "'");
    }
  }
  return c;
}

}  // namespace exprod
