// digitvec/metrics.cc

// Copyright 2026 The digitvec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "digitvec/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "digitvec/error.h"

namespace digitvec {

void DcfParams::Validate() const {
  if (!(c_miss > 0.0) || !(c_fa > 0.0))
    throw ConfigError("DCF costs must be positive");
  if (!(p_target > 0.0 && p_target < 1.0))
    throw ConfigError("DCF target prior must lie in (0,1)");
}

DetCurve ComputeDet(std::span<const double> target_scores,
                    std::span<const double> nontarget_scores) {
  if (target_scores.empty() || nontarget_scores.empty())
    throw DegenerateTrialSet("need at least one target and one nontarget trial");
  std::vector<double> tgt(target_scores.begin(), target_scores.end());
  std::vector<double> non(nontarget_scores.begin(), nontarget_scores.end());
  for (double s : tgt)
    if (!std::isfinite(s)) throw NumericalError("non-finite target score");
  for (double s : non)
    if (!std::isfinite(s)) throw NumericalError("non-finite nontarget score");
  std::sort(tgt.begin(), tgt.end());
  std::sort(non.begin(), non.end());

  DetCurve curve;
  curve.num_target = static_cast<int>(tgt.size());
  curve.num_nontarget = static_cast<int>(non.size());
  const double nt = static_cast<double>(tgt.size());
  const double nn = static_cast<double>(non.size());
  const double inf = std::numeric_limits<double>::infinity();

  curve.points.push_back({-inf, 1.0, 0.0});
  // Sweep thresholds upward; `it` and `in` count scores strictly below the
  // current threshold, i.e. rejected trials.
  std::size_t it = 0, in = 0;
  while (it < tgt.size() || in < non.size()) {
    double thr;
    if (it == tgt.size()) thr = non[in];
    else if (in == non.size()) thr = tgt[it];
    else thr = std::min(tgt[it], non[in]);
    curve.points.push_back({thr, (nn - static_cast<double>(in)) / nn,
                            static_cast<double>(it) / nt});
    while (it < tgt.size() && tgt[it] == thr) ++it;
    while (in < non.size() && non[in] == thr) ++in;
  }
  curve.points.push_back({inf, 0.0, 1.0});
  return curve;
}

double ComputeEer(const DetCurve &curve) {
  const auto &p = curve.points;
  if (p.empty()) return 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i].far - p[i].frr;
    if (d == 0.0) return p[i].far;
    if (d < 0.0) {
      if (i == 0) return 0.5 * (p[i].far + p[i].frr);
      const double dp = p[i - 1].far - p[i - 1].frr;
      const double alpha = dp / (dp - d);
      return p[i - 1].far + alpha * (p[i].far - p[i - 1].far);
    }
  }
  return 0.5 * (p.back().far + p.back().frr);
}

double ComputeMinDcf(const DetCurve &curve, const DcfParams &params) {
  params.Validate();
  const double miss_w = params.c_miss * params.p_target;
  const double fa_w = params.c_fa * (1.0 - params.p_target);
  const double norm = std::min(miss_w, fa_w);
  double best = std::numeric_limits<double>::infinity();
  for (const DetPoint &pt : curve.points)
    best = std::min(best, (miss_w * pt.frr + fa_w * pt.far) / norm);
  return best;
}

MetricsReport Evaluate(std::span<const double> target_scores,
                       std::span<const double> nontarget_scores,
                       const DcfParams &old_params, const DcfParams &new_params) {
  DetCurve curve = ComputeDet(target_scores, nontarget_scores);
  MetricsReport r;
  r.num_target = curve.num_target;
  r.num_nontarget = curve.num_nontarget;
  r.eer = ComputeEer(curve);
  r.min_dcf_old = ComputeMinDcf(curve, old_params);
  r.min_dcf_new = ComputeMinDcf(curve, new_params);
  r.old_params = old_params;
  r.new_params = new_params;
  return r;
}

void WriteReportTable(const MetricsReport &r, std::ostream &os) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%-12s %10s\n"
                "%-12s %10d\n"
                "%-12s %10d\n"
                "%-12s %9.3f%%\n"
                "%-12s %10.4f\n"
                "%-12s %10.4f\n",
                "metric", "value", "targets", r.num_target, "nontargets",
                r.num_nontarget, "EER", 100.0 * r.eer, "minDCF_old", r.min_dcf_old,
                "minDCF_new", r.min_dcf_new);
  os << buf;
}

void WriteReportKeyValue(const MetricsReport &r, std::ostream &os) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "num_target=%d\nnum_nontarget=%d\neer=%.17g\nmin_dcf_old=%.17g\n"
                "min_dcf_new=%.17g\n",
                r.num_target, r.num_nontarget, r.eer, r.min_dcf_old, r.min_dcf_new);
  os << buf;
}

void WriteDetCsv(const DetCurve &curve, std::ostream &os) {
  os << "threshold,far,frr\n";
  char buf[128];
  for (const DetPoint &pt : curve.points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", pt.threshold, pt.far, pt.frr);
    os << buf;
  }
}

}  // namespace digitvec
