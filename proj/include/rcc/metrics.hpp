#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rcc/clinical.hpp"

namespace rcc {

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // threshold descending, (0,0) .. (1,1)
    double auc = 0.0;
    std::string name;
};

struct AucResult {
    double auc = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long n_pos = 0;
    long n_neg = 0;
};

struct CutoffResult {
    double threshold = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double youden_j = 0.0;
};

// Thresholds at each distinct score, classification rule score >= threshold.
// The AUC is accumulated in integers so it equals the Mann-Whitney statistic
// (ties 0.5) bit-for-bit.
RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

// percentile bootstrap CI; resamples missing a class are redrawn; the
// interval is widened to bracket the point estimate if needed
AucResult auc_ci(const std::vector<double>& scores, const std::vector<int>& labels,
                 int B = 2000, std::uint64_t seed = 0);

// threshold among distinct scores maximizing Youden J; ties broken toward
// higher specificity, then lower threshold
CutoffResult best_cutoff(const std::vector<double>& scores,
                         const std::vector<int>& labels);

CutoffResult sens_spec_at(const std::vector<double>& scores,
                          const std::vector<int>& labels, double threshold);

struct IndicatorRow {
    std::string name;
    AucResult auc_5y, auc_3y, auc_1y;
    double c_index = 0.0;
};

struct NamedScores {
    std::string name;
    std::vector<double> scores;  // aligned with the record list
};

// Per indicator: AUC against the 60/36/12-month horizon labels (Excluded and
// unknown-event records dropped) plus Harrell's C against (time, event).
std::vector<IndicatorRow> indicator_comparison(
    const std::vector<ClinicalRecord>& records,
    const std::vector<NamedScores>& indicators, int bootstrap_B = 2000,
    std::uint64_t seed = 0);

// header: indicator,auc_5y,ci_5y,auc_3y,ci_3y,auc_1y,ci_1y,c_index
std::string comparison_table_csv(const std::vector<IndicatorRow>& rows);

// threshold,fpr,tpr rows for plotting
std::string roc_points_csv(const RocCurve& curve);

}  // namespace rcc
