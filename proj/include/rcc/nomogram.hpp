#pragma once

#include <map>
#include <string>
#include <vector>

#include "rcc/survival.hpp"

namespace rcc {

struct NomogramVariable {
    std::string name;
    double beta = 0.0;
    double ref_value = 0.0;  // value mapped to 0 points
    double min = 0.0;
    double max = 0.0;
};

enum class StratifiedGroup { Worse, Favorable };

struct CovariateRange {
    double min = 0.0;
    double max = 0.0;
};

// Points-based risk chart built from a fitted Cox model. Per-variable points
// are 100 * beta_i * (x - ref_i) / max_j |beta_j * (max_j - min_j)|, with the
// reference at the low-risk range end so points are nonnegative. Exactly one
// variable reaches 100 at its extreme (more on ties).
struct Nomogram {
    std::vector<NomogramVariable> variables;
    double scale = 0.0;  // points per unit of beta*x
    double cutoff_points = -1.0;  // < 0 means unset
    std::vector<std::pair<double, double>> baseline_cumhaz;
    std::vector<double> covariate_means;
    double max_time = 0.0;
};

Nomogram build_nomogram(const CoxModel& model, const std::vector<std::string>& names,
                        const std::map<std::string, CovariateRange>& ranges);

// total points for one patient; out-of-range covariates clamp to the range
// ends (a warning counter is bumped when a clamp happens)
double nomogram_score(const Nomogram& nomogram, const std::vector<double>& covariates,
                      int* clamp_warnings = nullptr);

StratifiedGroup stratify(const Nomogram& nomogram, double total_points);

// S(t|x) = exp(-cumhaz0(t) * exp(lp)) with lp centered as in the fit
double survival_probability(const Nomogram& nomogram, const std::vector<double>& covariates,
                            double horizon_months);

std::string nomogram_to_json(const Nomogram& nomogram);
Nomogram nomogram_from_json(const std::string& json_text);

}  // namespace rcc
