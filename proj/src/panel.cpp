#include "exprod/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "exprod/csv.hpp"
#include "exprod/errors.hpp"

namespace exprod {

namespace {

double parse_double(const std::string& s, std::size_t row, const std::string& col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("malformed CSV: row " + std::to_string(row) + ", column '" + col +
                          "': cannot parse '" + s + "' as a number");
  }
}

int parse_int(const std::string& s, std::size_t row, const std::string& col) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("malformed CSV: row " + std::to_string(row) + ", column '" + col +
                          "': cannot parse '" + s + "' as an integer");
  }
}

Panel finalize_panel(std::vector<FirmYear> rows) {
  if (rows.empty()) throw ValidationError("panel has no valid rows");
  std::sort(rows.begin(), rows.end(), [](const FirmYear& a, const FirmYear& b) {
    if (a.firm_id != b.firm_id) return a.firm_id < b.firm_id;
    return a.year < b.year;
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].firm_id == rows[i - 1].firm_id && rows[i].year == rows[i - 1].year)
      throw ValidationError("duplicate (firm_id, year) key: (" + rows[i].firm_id + ", " +
                            std::to_string(rows[i].year) + ")");
  }

  Panel p;
  p.rows = std::move(rows);
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const auto& r = p.rows[i];
    auto it = p.firm_ranges.find(r.firm_id);
    if (it == p.firm_ranges.end())
      p.firm_ranges.emplace(r.firm_id, std::make_pair(i, i + 1));
    else
      it->second.second = i + 1;
    p.groups[GroupKey{r.region, r.industry, r.year}].push_back(i);

    auto [yit, inserted] = p.year_price.emplace(r.year, r.rel_price);
    if (!inserted && yit->second != r.rel_price)
      throw ValidationError("rel_price must be constant within year " + std::to_string(r.year) +
                            ": saw " + std::to_string(yit->second) + " and " +
                            std::to_string(r.rel_price));
  }
  return p;
}

}  // namespace

Panel load_panel(const std::string& path, LoadReport* report) {
  const CsvTable t = read_csv(path);

  const char* required[] = {"firm_id", "year", "Y", "K", "L", "M", "X", "region", "industry"};
  for (const char* name : required)
    if (t.column(name) < 0) throw ValidationError("CSV schema: missing required column '" + std::string(name) + "'");
  const int c_firm = t.column("firm_id"), c_year = t.column("year"), c_y = t.column("Y"),
            c_k = t.column("K"), c_l = t.column("L"), c_m = t.column("M"), c_x = t.column("X"),
            c_reg = t.column("region"), c_ind = t.column("industry"), c_p = t.column("rel_price");

  LoadReport rep;
  if (c_p < 0) rep.warnings.push_back("rel_price column missing; defaulting to 1.0 for all rows");

  std::vector<FirmYear> rows;
  rows.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& cells = t.rows[i];
    const std::size_t rownum = i + 1;  // 1-based data row (header excluded)
    if (cells.size() != t.header.size())
      throw ValidationError("malformed CSV: row " + std::to_string(rownum) + " has " +
                            std::to_string(cells.size()) + " fields, expected " +
                            std::to_string(t.header.size()));
    FirmYear r;
    r.firm_id = cells[c_firm];
    r.year = parse_int(cells[c_year], rownum, "year");
    r.Y = parse_double(cells[c_y], rownum, "Y");
    r.K = parse_double(cells[c_k], rownum, "K");
    r.L = parse_double(cells[c_l], rownum, "L");
    r.M = parse_double(cells[c_m], rownum, "M");
    r.X = parse_double(cells[c_x], rownum, "X");
    r.region = cells[c_reg];
    r.industry = cells[c_ind];
    r.rel_price = c_p >= 0 ? parse_double(cells[c_p], rownum, "rel_price") : 1.0;

    std::string reason;
    auto positive = [&](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        if (!reason.empty()) reason += "; ";
        reason += std::string(name) + " must be strictly positive, got " + std::to_string(v);
      }
    };
    positive(r.Y, "Y");
    positive(r.K, "K");
    positive(r.L, "L");
    positive(r.M, "M");
    positive(r.rel_price, "rel_price");
    if (!(r.X >= 0.0 && r.X <= 1.0)) {
      if (!reason.empty()) reason += "; ";
      reason += "X must lie in [0,1], got " + std::to_string(r.X);
    }
    if (!reason.empty()) {
      rep.rejections.emplace_back(rownum, reason);
      continue;
    }
    rows.push_back(std::move(r));
  }
  rep.n_read = t.rows.size();
  rep.n_accepted = rows.size();
  if (report) *report = rep;

  return finalize_panel(std::move(rows));
}

Panel make_panel(std::vector<FirmYear> rows) { return finalize_panel(std::move(rows)); }

void write_panel_csv(const Panel& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write CSV file: " + path);
  out.precision(17);
  out << "firm_id,year,Y,K,L,M,X,region,industry,rel_price\n";
  for (const auto& r : panel.rows) {
    out << r.firm_id << ',' << r.year << ',' << r.Y << ',' << r.K << ',' << r.L << ',' << r.M << ','
        << r.X << ',' << r.region << ',' << r.industry << ',' << r.rel_price << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

ExposureSeries compute_exposure(const Panel& panel, ExposureMode mode, ExportMeasure measure,
                                PeerPool pool) {
  ExposureSeries es;
  es.mode = mode;
  es.measure = measure;
  es.pool = pool;
  es.xbar.assign(panel.size(), 0.0);
  es.peer_count.assign(panel.size(), 0);
  es.flagged.assign(panel.size(), 0);

  // Group membership per pool; members kept in panel-row order so the group
  // sum accumulates identically wherever this series is computed.
  std::map<GroupKey, std::vector<std::size_t>> pooled;
  if (pool == PeerPool::region_industry) {
    pooled = panel.groups;
  } else {
    for (const auto& [key, members] : panel.groups) {
      auto& dst = pooled[GroupKey{"", key.industry, key.year}];
      dst.insert(dst.end(), members.begin(), members.end());
    }
    for (auto& [key, members] : pooled) std::sort(members.begin(), members.end());
  }

  std::vector<double> xv, prefix, suffix;
  for (const auto& [key, members] : pooled) {
    const std::size_t m = members.size();
    xv.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double xj = panel.rows[members[j]].X;
      xv[j] = measure == ExportMeasure::status ? (xj > 0.0 ? 1.0 : 0.0) : xj;
    }
    // peer sums via prefix/suffix so the own value never enters the
    // arithmetic; perturbing a firm's X leaves its own xbar bit-unchanged
    prefix.assign(m + 1, 0.0);
    suffix.assign(m + 1, 0.0);
    for (std::size_t j = 0; j < m; ++j) prefix[j + 1] = prefix[j] + xv[j];
    for (std::size_t j = m; j-- > 0;) suffix[j] = suffix[j + 1] + xv[j];

    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t idx = members[j];
      const int n = static_cast<int>(m) - 1;
      es.peer_count[idx] = n;
      es.flagged[idx] = (n == 0);
      if (n == 0) {
        // no peers: peer average degenerates to 0; grand average is the own value
        es.xbar[idx] = mode == ExposureMode::peer ? 0.0 : xv[j];
        continue;
      }
      const double peer_avg = (prefix[j] + suffix[j + 1]) / static_cast<double>(n);
      if (mode == ExposureMode::peer) {
        es.xbar[idx] = peer_avg;
      } else {
        // written in this form so the grand/peer identity holds bit-exactly
        es.xbar[idx] = xv[j] / static_cast<double>(n + 1) +
                       (static_cast<double>(n) / static_cast<double>(n + 1)) * peer_avg;
      }
    }
  }
  return es;
}

EstimationSample build_sample(const Panel& panel, const ExposureSeries& exposure) {
  if (exposure.xbar.size() != panel.size())
    throw ValidationError("exposure series was not computed on this panel");

  EstimationSample s;
  s.measure = exposure.measure;
  s.all_rows.reserve(panel.size());

  std::unordered_map<std::string, int> firm_index;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const auto& r = panel.rows[i];
    ObsRow o;
    o.firm_id = r.firm_id;
    o.year = r.year;
    auto [it, inserted] = firm_index.emplace(r.firm_id, static_cast<int>(firm_index.size()));
    o.firm_index = it->second;
    o.y = std::log(r.Y);
    o.k = std::log(r.K);
    o.l = std::log(r.L);
    o.m = std::log(r.M);
    o.ln_share = std::log(r.rel_price * r.M / r.Y);
    o.rel_price = r.rel_price;
    o.x_raw = r.X;
    o.region = r.region;
    o.industry = r.industry;
    o.panel_row = i;
    s.all_rows.push_back(std::move(o));
  }
  s.n_firms = static_cast<int>(firm_index.size());

  std::vector<char> firm_aligned(firm_index.size(), 0);
  for (std::size_t i = 0; i < panel.size(); ++i) {
    if (i == 0 || panel.rows[i].firm_id != panel.rows[i - 1].firm_id ||
        panel.rows[i].year != panel.rows[i - 1].year + 1)
      continue;  // gaps break the lag chain; no imputation
    const auto& cur = panel.rows[i];
    const auto& prev = panel.rows[i - 1];
    const ObsRow& o = s.all_rows[i];

    AlignedRow a;
    a.obs_index = i;
    a.y = o.y;
    a.k = o.k;
    a.l = o.l;
    a.m = o.m;
    a.k_lag = std::log(prev.K);
    a.l_lag = std::log(prev.L);
    a.m_lag = std::log(prev.M);
    a.x_lag = exposure.measure == ExportMeasure::status ? (prev.X > 0.0 ? 1.0 : 0.0) : prev.X;
    a.xbar_lag = exposure.xbar[i - 1];
    a.n_lag = exposure.peer_count[i - 1];
    a.lag_flagged = exposure.flagged[i - 1] != 0;
    a.rel_price_lag = prev.rel_price;
    a.exporter_lag = prev.X > 0.0;
    a.x_cur_raw = cur.X;
    a.firm_id = cur.firm_id;
    a.year = cur.year;
    a.firm_index = o.firm_index;
    a.region = cur.region;
    a.industry = cur.industry;
    firm_aligned[o.firm_index] = 1;
    s.aligned.push_back(std::move(a));
  }
  s.dropped_rows = panel.size() - s.aligned.size();
  for (char f : firm_aligned) s.n_firms_aligned += f;

  if (s.aligned.empty())
    throw ValidationError("estimation sample is empty after lag alignment (no consecutive firm-year pairs)");
  return s;
}

}  // namespace exprod
