// digitvec/metrics.h

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

#ifndef DIGITVEC_METRICS_H_
#define DIGITVEC_METRICS_H_

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace digitvec {

/// One operating point.  A trial is accepted iff score >= threshold.
struct DetPoint {
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

/// Operating points in increasing threshold order, starting at -inf
/// (accept all: FAR 1, FRR 0) and ending at +inf (reject all).
struct DetCurve {
  std::vector<DetPoint> points;
  int num_target = 0;
  int num_nontarget = 0;
};

struct DcfParams {
  double c_miss = 10.0;
  double c_fa = 1.0;
  double p_target = 0.01;

  /// NIST SRE08 ("old") parameters.
  static DcfParams Old() { return {10.0, 1.0, 0.01}; }
  /// NIST SRE10 ("new") parameters.
  static DcfParams New() { return {1.0, 1.0, 0.001}; }
  /// Throws ConfigError for non-positive costs or a prior outside (0,1).
  void Validate() const;
};

/// Throws DegenerateTrialSet when either class is empty.
DetCurve ComputeDet(std::span<const double> target_scores,
                    std::span<const double> nontarget_scores);

/// Linear interpolation between the two operating points where FAR - FRR
/// changes sign.
double ComputeEer(const DetCurve &curve);

/// Minimum normalized detection cost over all operating points.
double ComputeMinDcf(const DetCurve &curve, const DcfParams &params);

struct MetricsReport {
  int num_target = 0;
  int num_nontarget = 0;
  double eer = 0.0;
  double min_dcf_old = 0.0;
  double min_dcf_new = 0.0;
  DcfParams old_params = DcfParams::Old();
  DcfParams new_params = DcfParams::New();
};

MetricsReport Evaluate(std::span<const double> target_scores,
                       std::span<const double> nontarget_scores,
                       const DcfParams &old_params = DcfParams::Old(),
                       const DcfParams &new_params = DcfParams::New());

/// Aligned human-readable table.
void WriteReportTable(const MetricsReport &report, std::ostream &os);
/// key=value lines.
void WriteReportKeyValue(const MetricsReport &report, std::ostream &os);
/// "threshold,far,frr" with a header line.
void WriteDetCsv(const DetCurve &curve, std::ostream &os);

}  // namespace digitvec

#endif  // DIGITVEC_METRICS_H_
