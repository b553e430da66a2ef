#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace exprod {

// One firm-year observation. Y/K/L/M are levels (deflated), X is the export
// intensity in [0,1], rel_price = P^M_t / P^Y_t (year-level, repeated per row).
struct FirmYear {
  std::string firm_id;
  int year = 0;
  double Y = 0, K = 0, L = 0, M = 0;
  double X = 0;
  std::string region, industry;
  double rel_price = 1.0;
};

struct GroupKey {
  std::string region;  // empty when pooling over industry only
  std::string industry;
  int year = 0;
  auto operator<=>(const GroupKey&) const = default;
};

// Immutable after load; rows sorted by (firm_id, year), keys unique.
struct Panel {
  std::vector<FirmYear> rows;
  std::map<std::string, std::pair<std::size_t, std::size_t>> firm_ranges;  // firm_id -> [begin,end)
  std::map<GroupKey, std::vector<std::size_t>> groups;                     // (region,industry,year) -> rows
  std::map<int, double> year_price;

  std::size_t size() const { return rows.size(); }
};

struct LoadReport {
  std::size_t n_read = 0;
  std::size_t n_accepted = 0;
  std::vector<std::pair<std::size_t, std::string>> rejections;  // (1-based data row, reason)
  std::vector<std::string> warnings;
};

// Reads the canonical CSV schema (header required):
//   firm_id,year,Y,K,L,M,X,region,industry[,rel_price]
// Rows violating positivity/range invariants are dropped and reported in
// `report`; structural problems (missing columns, duplicate keys, unparseable
// fields, rel_price varying within a year) throw. A missing rel_price column
// defaults to 1.0 with a warning.
Panel load_panel(const std::string& path, LoadReport* report = nullptr);

Panel make_panel(std::vector<FirmYear> rows);  // same validation, in-memory

void write_panel_csv(const Panel& panel, const std::string& path);

enum class ExposureMode { peer, grand };
enum class ExportMeasure { intensity, status };
enum class PeerPool { region_industry, industry_only };

// Per-(firm,year) average export measure of the reference group.
// peer mode excludes the own firm; rows with no peers get xbar = 0 and a flag.
struct ExposureSeries {
  ExposureMode mode = ExposureMode::peer;
  ExportMeasure measure = ExportMeasure::intensity;
  PeerPool pool = PeerPool::region_industry;
  std::vector<double> xbar;      // parallel to Panel rows
  std::vector<int> peer_count;   // n_it (peers, excluding own firm)
  std::vector<char> flagged;     // peer_count == 0
};

ExposureSeries compute_exposure(const Panel& panel, ExposureMode mode, ExportMeasure measure,
                                PeerPool pool);

// One usable observation (stage-1 sample), in logs.
struct ObsRow {
  std::string firm_id;
  int year = 0;
  int firm_index = -1;  // dense index over firms in the panel
  double y = 0, k = 0, l = 0, m = 0;
  double ln_share = 0;  // ln(rel_price * M / Y)
  double rel_price = 1.0;
  double x_raw = 0;  // current-period export intensity as loaded
  std::string region, industry;
  std::size_t panel_row = 0;
};

// A row with a consecutive predecessor: current-period outcome/inputs plus the
// lagged regressor set entering the proxy.
struct AlignedRow {
  std::size_t obs_index = 0;  // current-period row in EstimationSample::all_rows
  double y = 0, k = 0, l = 0, m = 0;
  double k_lag = 0, l_lag = 0, m_lag = 0;
  double x_lag = 0;     // own export measure at t-1 (binarized when measure=status)
  double xbar_lag = 0;  // exposure at t-1, period-(t-1) group membership
  int n_lag = 0;
  bool lag_flagged = false;
  double rel_price_lag = 1.0;
  bool exporter_lag = false;  // 1(X_{t-1} > 0) on the raw intensity
  double x_cur_raw = 0;
  std::string firm_id;
  int year = 0;
  int firm_index = -1;
  std::string region, industry;
};

struct EstimationSample {
  std::vector<ObsRow> all_rows;     // stage-1 moment sample (all usable rows)
  std::vector<AlignedRow> aligned;  // stage-2 rows
  std::size_t dropped_rows = 0;     // rows without a consecutive predecessor
  int n_firms = 0;                  // firms present in all_rows
  int n_firms_aligned = 0;
  ExportMeasure measure = ExportMeasure::intensity;
};

// exposure must have been computed on the same panel.
EstimationSample build_sample(const Panel& panel, const ExposureSeries& exposure);

}  // namespace exprod
