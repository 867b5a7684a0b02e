#pragma once

#include <utility>
#include <vector>

namespace rcc {

struct SurvivalSample {
    double time = 0.0;  // months, > 0
    int event = 0;      // 1 event, 0 censored
    std::vector<double> covariates;
};

struct KmCurve {
    std::vector<double> event_times;  // ascending distinct times with >= 1 event
    std::vector<double> surv;         // S(t) just after each event time
    std::vector<int> at_risk;
    std::vector<int> events;
    std::vector<double> censor_times;

    // step-function lookup, S(0) = 1
    double survival_at(double t) const;
};

struct CoxModel {
    std::vector<double> beta;
    std::vector<double> covariance;  // p x p, row-major
    double loglik = 0.0;
    int iterations = 0;
    std::vector<double> covariate_means;          // centering used by the fit
    std::vector<std::pair<double, double>> baseline_cumhaz;  // (t, cumhaz) steps
    double max_time = 0.0;

    int p() const { return static_cast<int>(beta.size()); }
    double se(int j) const;
    double linear_predictor(const std::vector<double>& x) const;
    // left-continuous step interpolation of the Breslow baseline
    double cumhaz_at(double t) const;
};

struct HazardRatioResult {
    double hr = 1.0;
    double ci_low = 1.0;
    double ci_high = 1.0;
    double p_value = 1.0;
    double beta = 0.0;
    double se = 0.0;
};

struct LogrankResult {
    double chi2 = 0.0;
    double p = 1.0;
};

struct AnovaResult {
    double F = 0.0;
    double p = 1.0;
};

// Product-limit estimator; censored-at-t subjects remain at risk for deaths
// at t.
KmCurve km_estimate(const std::vector<SurvivalSample>& samples);

LogrankResult logrank(const std::vector<SurvivalSample>& group_a,
                      const std::vector<SurvivalSample>& group_b);

// Efron-tie-corrected partial likelihood maximized by Newton-Raphson with
// step-halving; covariance from the inverse observed information; Breslow
// baseline cumulative hazard at beta-hat. Covariates are centered at their
// means internally (beta is unaffected; the baseline refers to the mean
// covariate profile).
CoxModel cox_fit(const std::vector<SurvivalSample>& samples);

// univariate Cox on the group indicator (1 = group A), Wald CI and p
HazardRatioResult hazard_ratio_groups(const std::vector<SurvivalSample>& group_a,
                                      const std::vector<SurvivalSample>& group_b);

// Harrell's C: pairs with t_i < t_j and event_i = 1 are permissible, plus
// equal-time pairs where exactly one is an event; tied risks count 0.5.
double c_index(const std::vector<double>& risk,
               const std::vector<SurvivalSample>& samples);

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

}  // namespace rcc
