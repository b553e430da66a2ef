#pragma once

#include <functional>
#include <string>
#include <vector>

#include "exprod/effects.hpp"
#include "exprod/panel.hpp"
#include "exprod/stage1.hpp"
#include "exprod/stage2.hpp"

namespace exprod {

struct PointFit {
  Stage1Result s1;
  TransformedSample ts;
  Stage2Result s2;
};

PointFit run_pipeline(const EstimationSample& sample, const Stage2Options& opt = {});

// Scalar estimands recorded per bootstrap replicate / jackknife deletion:
// parameters, gamma, subgroup effect summaries, effect-function slopes,
// long-run multipliers, and the exporter-premium quantities.
struct EstimandSet {
  std::vector<std::string> names;
  std::vector<double> values;
};

inline const std::vector<double>& premium_taus() {
  static const std::vector<double> taus = {0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50,
                                           0.55, 0.60, 0.65, 0.70, 0.75, 0.80};
  return taus;
}

EstimandSet compute_estimands(const EstimationSample& sample, const PointFit& fit);

// Keeps only firms passing `keep` (by dense firm_index); rebuilds indices.
EstimationSample filter_sample(const EstimationSample& sample,
                               const std::function<bool(int)>& keep_firm);

}  // namespace exprod
