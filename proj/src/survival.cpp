#include "rcc/survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rcc/errors.hpp"
#include "rcc/special.hpp"

namespace rcc {

namespace {

// in-place inverse by Gauss-Jordan with partial pivoting; p is small here
std::vector<double> invert(std::vector<double> a, int p) {
    std::vector<double> inv(std::size_t(p) * p, 0.0);
    for (int i = 0; i < p; ++i) inv[std::size_t(i) * p + i] = 1.0;
    for (int col = 0; col < p; ++col) {
        int pivot = col;
        for (int r = col + 1; r < p; ++r)
            if (std::fabs(a[std::size_t(r) * p + col]) >
                std::fabs(a[std::size_t(pivot) * p + col]))
                pivot = r;
        if (std::fabs(a[std::size_t(pivot) * p + col]) < 1e-300)
            throw NonConvergence("singular information matrix");
        if (pivot != col) {
            for (int j = 0; j < p; ++j) {
                std::swap(a[std::size_t(pivot) * p + j], a[std::size_t(col) * p + j]);
                std::swap(inv[std::size_t(pivot) * p + j], inv[std::size_t(col) * p + j]);
            }
        }
        const double d = a[std::size_t(col) * p + col];
        for (int j = 0; j < p; ++j) {
            a[std::size_t(col) * p + j] /= d;
            inv[std::size_t(col) * p + j] /= d;
        }
        for (int r = 0; r < p; ++r) {
            if (r == col) continue;
            const double f = a[std::size_t(r) * p + col];
            if (f == 0.0) continue;
            for (int j = 0; j < p; ++j) {
                a[std::size_t(r) * p + j] -= f * a[std::size_t(col) * p + j];
                inv[std::size_t(r) * p + j] -= f * inv[std::size_t(col) * p + j];
            }
        }
    }
    return inv;
}

std::vector<double> solve(std::vector<double> a, std::vector<double> b, int p) {
    const auto inv = invert(std::move(a), p);
    std::vector<double> x(p, 0.0);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) x[i] += inv[std::size_t(i) * p + j] * b[j];
    return x;
}

struct EfronEval {
    double loglik = 0.0;
    std::vector<double> grad;
    std::vector<double> info;  // negative Hessian, p x p
};

// One pass over the data: partial log-likelihood, gradient, and observed
// information under the Efron tie correction, with centered covariates.
EfronEval efron_eval(const std::vector<SurvivalSample>& samples,
                     const std::vector<std::size_t>& by_time_desc,
                     const std::vector<std::vector<double>>& xc,
                     const std::vector<double>& beta) {
    const int p = static_cast<int>(beta.size());
    EfronEval ev;
    ev.grad.assign(p, 0.0);
    ev.info.assign(std::size_t(p) * p, 0.0);

    double s0 = 0.0;
    std::vector<double> s1(p, 0.0);
    std::vector<double> s2(std::size_t(p) * p, 0.0);
    std::vector<double> d1(p), d2(std::size_t(p) * p), zl(p);

    std::size_t i = 0;
    const std::size_t n = by_time_desc.size();
    while (i < n) {
        const double t = samples[by_time_desc[i]].time;
        // add everyone at this time to the risk set; gather the tied events
        double d0 = 0.0;
        int deaths = 0;
        std::fill(d1.begin(), d1.end(), 0.0);
        std::fill(d2.begin(), d2.end(), 0.0);
        std::size_t j = i;
        for (; j < n && samples[by_time_desc[j]].time == t; ++j) {
            const std::size_t idx = by_time_desc[j];
            const auto& x = xc[idx];
            double eta = 0.0;
            for (int k = 0; k < p; ++k) eta += beta[k] * x[k];
            const double w = std::exp(eta);
            s0 += w;
            for (int a = 0; a < p; ++a) {
                s1[a] += w * x[a];
                for (int b = 0; b < p; ++b) s2[std::size_t(a) * p + b] += w * x[a] * x[b];
            }
            if (samples[idx].event == 1) {
                ++deaths;
                ev.loglik += eta;
                for (int a = 0; a < p; ++a) ev.grad[a] += x[a];
                d0 += w;
                for (int a = 0; a < p; ++a) {
                    d1[a] += w * x[a];
                    for (int b = 0; b < p; ++b)
                        d2[std::size_t(a) * p + b] += w * x[a] * x[b];
                }
            }
        }
        for (int l = 0; l < deaths; ++l) {
            const double f = double(l) / double(deaths);
            const double phi = s0 - f * d0;
            ev.loglik -= std::log(phi);
            for (int a = 0; a < p; ++a) zl[a] = (s1[a] - f * d1[a]) / phi;
            for (int a = 0; a < p; ++a) {
                ev.grad[a] -= zl[a];
                for (int b = 0; b < p; ++b)
                    ev.info[std::size_t(a) * p + b] +=
                        (s2[std::size_t(a) * p + b] - f * d2[std::size_t(a) * p + b]) / phi -
                        zl[a] * zl[b];
            }
        }
        i = j;
    }
    return ev;
}

}  // namespace

double KmCurve::survival_at(double t) const {
    double s = 1.0;
    for (std::size_t i = 0; i < event_times.size(); ++i) {
        if (event_times[i] > t) break;
        s = surv[i];
    }
    return s;
}

KmCurve km_estimate(const std::vector<SurvivalSample>& samples) {
    if (samples.empty()) throw EmptyInput("km_estimate: no samples");
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return samples[a].time < samples[b].time;
    });
    KmCurve curve;
    double s = 1.0;
    int at_risk = static_cast<int>(samples.size());
    std::size_t i = 0;
    while (i < order.size()) {
        const double t = samples[order[i]].time;
        int deaths = 0, censored = 0;
        std::size_t j = i;
        for (; j < order.size() && samples[order[j]].time == t; ++j) {
            if (samples[order[j]].event == 1)
                ++deaths;
            else
                ++censored;
        }
        if (deaths > 0) {
            s *= 1.0 - double(deaths) / double(at_risk);
            curve.event_times.push_back(t);
            curve.surv.push_back(s);
            curve.at_risk.push_back(at_risk);
            curve.events.push_back(deaths);
        }
        for (int c = 0; c < censored; ++c) curve.censor_times.push_back(t);
        at_risk -= deaths + censored;
        i = j;
    }
    return curve;
}

LogrankResult logrank(const std::vector<SurvivalSample>& group_a,
                      const std::vector<SurvivalSample>& group_b) {
    if (group_a.empty() || group_b.empty()) throw EmptyGroup("logrank: empty group");
    struct Row {
        double time;
        int event;
        int group;
    };
    std::vector<Row> rows;
    rows.reserve(group_a.size() + group_b.size());
    for (const auto& s : group_a) rows.push_back({s.time, s.event, 0});
    for (const auto& s : group_b) rows.push_back({s.time, s.event, 1});
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.time < b.time; });

    long n1 = static_cast<long>(group_a.size());
    long n2 = static_cast<long>(group_b.size());
    double observed_minus_expected = 0.0;
    double variance = 0.0;
    bool any_event = false;
    std::size_t i = 0;
    while (i < rows.size()) {
        const double t = rows[i].time;
        long d1 = 0, d2 = 0, c1 = 0, c2 = 0;
        std::size_t j = i;
        for (; j < rows.size() && rows[j].time == t; ++j) {
            if (rows[j].event == 1)
                (rows[j].group == 0 ? d1 : d2)++;
            else
                (rows[j].group == 0 ? c1 : c2)++;
        }
        const long d = d1 + d2;
        const long n = n1 + n2;
        if (d > 0) {
            any_event = true;
            observed_minus_expected += double(d1) - double(d) * double(n1) / double(n);
            if (n > 1)
                variance += double(d) * (double(n1) / n) * (double(n2) / n) *
                            (double(n - d) / double(n - 1));
        }
        n1 -= d1 + c1;
        n2 -= d2 + c2;
        i = j;
    }
    if (!any_event) throw NoEvents("logrank: no events in either group");
    LogrankResult res;
    if (variance <= 0.0) {
        res.chi2 = 0.0;
        res.p = 1.0;
        return res;
    }
    res.chi2 = observed_minus_expected * observed_minus_expected / variance;
    res.p = chi2_sf(res.chi2, 1.0);
    return res;
}

CoxModel cox_fit(const std::vector<SurvivalSample>& samples) {
    if (samples.empty()) throw EmptyInput("cox_fit: no samples");
    const int p = static_cast<int>(samples.front().covariates.size());
    if (p < 1) throw EmptyInput("cox_fit: no covariates");
    int events = 0;
    for (const auto& s : samples) {
        if (static_cast<int>(s.covariates.size()) != p)
            throw DimensionMismatch("cox_fit: ragged covariates");
        events += s.event;
    }
    if (events < 2) throw EmptyInput("cox_fit: fewer than 2 events");

    const std::size_t n = samples.size();
    std::vector<double> mean(p, 0.0), sd(p, 0.0);
    for (const auto& s : samples)
        for (int j = 0; j < p; ++j) mean[j] += s.covariates[j];
    for (int j = 0; j < p; ++j) mean[j] /= double(n);
    for (const auto& s : samples)
        for (int j = 0; j < p; ++j) {
            const double dv = s.covariates[j] - mean[j];
            sd[j] += dv * dv;
        }
    for (int j = 0; j < p; ++j) {
        sd[j] = std::sqrt(sd[j] / double(n));
        if (sd[j] == 0.0)
            throw ConstantCovariate("cox_fit: covariate " + std::to_string(j) +
                                    " is constant");
    }

    std::vector<std::vector<double>> xc(n, std::vector<double>(p));
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) xc[i][j] = samples[i].covariates[j] - mean[j];

    std::vector<std::size_t> by_time_desc(n);
    std::iota(by_time_desc.begin(), by_time_desc.end(), 0);
    std::sort(by_time_desc.begin(), by_time_desc.end(),
              [&](std::size_t a, std::size_t b) { return samples[a].time > samples[b].time; });

    std::vector<double> beta(p, 0.0);
    EfronEval ev = efron_eval(samples, by_time_desc, xc, beta);
    double loglik = ev.loglik;
    int iter = 0;
    for (; iter < 100; ++iter) {
        const std::vector<double> step = solve(ev.info, ev.grad, p);
        double scale = 1.0;
        std::vector<double> beta_new(p);
        double ll_new = -1e300;
        EfronEval ev_new;
        for (int halvings = 0; halvings < 40; ++halvings) {
            for (int j = 0; j < p; ++j) beta_new[j] = beta[j] + scale * step[j];
            ev_new = efron_eval(samples, by_time_desc, xc, beta_new);
            ll_new = ev_new.loglik;
            if (std::isfinite(ll_new) && ll_new >= loglik - 1e-12) break;
            scale *= 0.5;
        }
        beta = beta_new;
        for (int j = 0; j < p; ++j)
            if (std::fabs(beta[j]) * sd[j] > 20.0)
                throw Separation("cox_fit: standardized |beta| exceeded 20");
        const double delta = ll_new - loglik;
        loglik = ll_new;
        ev = std::move(ev_new);
        if (std::fabs(delta) < 1e-9) {
            ++iter;
            break;
        }
    }
    if (iter >= 100) throw NonConvergence("cox_fit: Newton-Raphson did not converge");

    CoxModel model;
    model.beta = beta;
    model.covariance = invert(ev.info, p);
    model.loglik = loglik;
    model.iterations = iter;
    model.covariate_means = mean;

    // Breslow baseline cumulative hazard at beta-hat (mean covariate profile)
    std::vector<std::size_t> by_time_asc(by_time_desc.rbegin(), by_time_desc.rend());
    std::vector<double> weights(n);
    for (std::size_t i = 0; i < n; ++i) {
        double eta = 0.0;
        for (int j = 0; j < p; ++j) eta += beta[j] * xc[i][j];
        weights[i] = std::exp(eta);
    }
    double risk_sum = 0.0;
    for (double w : weights) risk_sum += w;
    double cumhaz = 0.0;
    std::size_t i = 0;
    while (i < n) {
        const double t = samples[by_time_asc[i]].time;
        int deaths = 0;
        double leaving = 0.0;
        std::size_t j = i;
        for (; j < n && samples[by_time_asc[j]].time == t; ++j) {
            deaths += samples[by_time_asc[j]].event;
            leaving += weights[by_time_asc[j]];
        }
        if (deaths > 0) {
            cumhaz += double(deaths) / risk_sum;
            model.baseline_cumhaz.emplace_back(t, cumhaz);
        }
        risk_sum -= leaving;
        i = j;
    }
    model.max_time = samples[by_time_desc.front()].time;
    return model;
}

double CoxModel::se(int j) const {
    return std::sqrt(covariance[std::size_t(j) * p() + j]);
}

double CoxModel::linear_predictor(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != p())
        throw DimensionMismatch("linear_predictor: covariate length mismatch");
    double lp = 0.0;
    for (int j = 0; j < p(); ++j) lp += beta[j] * (x[j] - covariate_means[j]);
    return lp;
}

double CoxModel::cumhaz_at(double t) const {
    double h = 0.0;
    for (const auto& [ti, hi] : baseline_cumhaz) {
        if (ti > t) break;
        h = hi;
    }
    return h;
}

HazardRatioResult hazard_ratio_groups(const std::vector<SurvivalSample>& group_a,
                                      const std::vector<SurvivalSample>& group_b) {
    if (group_a.empty() || group_b.empty())
        throw EmptyGroup("hazard_ratio_groups: empty group");
    std::vector<SurvivalSample> combined;
    combined.reserve(group_a.size() + group_b.size());
    for (const auto& s : group_a) combined.push_back({s.time, s.event, {1.0}});
    for (const auto& s : group_b) combined.push_back({s.time, s.event, {0.0}});
    const CoxModel model = cox_fit(combined);
    HazardRatioResult res;
    res.beta = model.beta[0];
    res.se = model.se(0);
    res.hr = std::exp(res.beta);
    res.ci_low = std::exp(res.beta - 1.96 * res.se);
    res.ci_high = std::exp(res.beta + 1.96 * res.se);
    res.p_value = 2.0 * normal_sf(std::fabs(res.beta / res.se));
    return res;
}

double c_index(const std::vector<double>& risk,
               const std::vector<SurvivalSample>& samples) {
    if (risk.size() != samples.size())
        throw DimensionMismatch("c_index: risk/sample length mismatch");
    const std::size_t n = samples.size();
    long permissible = 0;
    double score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const bool earlier_event =
                samples[i].time < samples[j].time && samples[i].event == 1;
            const bool tied_time_one_event = samples[i].time == samples[j].time &&
                                             samples[i].event == 1 &&
                                             samples[j].event == 0;
            if (!earlier_event && !tied_time_one_event) continue;
            ++permissible;
            if (risk[i] > risk[j])
                score += 1.0;
            else if (risk[i] == risk[j])
                score += 0.5;
        }
    }
    if (permissible == 0) throw NoPermissiblePairs("c_index: no permissible pairs");
    return score / double(permissible);
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw DegenerateGroups("anova: need >= 2 groups");
    long total_n = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw DegenerateGroups("anova: group with < 2 values");
        total_n += static_cast<long>(g.size());
    }
    const long df_between = static_cast<long>(groups.size()) - 1;
    const long df_within = total_n - static_cast<long>(groups.size());
    if (df_within < 1) throw DegenerateGroups("anova: no within-group df");

    double grand = 0.0;
    for (const auto& g : groups)
        for (double v : g) grand += v;
    grand /= double(total_n);

    double ssb = 0.0, ssw = 0.0;
    for (const auto& g : groups) {
        double mean = 0.0;
        for (double v : g) mean += v;
        mean /= double(g.size());
        ssb += double(g.size()) * (mean - grand) * (mean - grand);
        for (double v : g) ssw += (v - mean) * (v - mean);
    }

    AnovaResult res;
    if (ssw == 0.0) {
        if (ssb == 0.0) {
            res.F = 0.0;
            res.p = 1.0;
        } else {
            res.F = std::numeric_limits<double>::infinity();
            res.p = 0.0;
        }
        return res;
    }
    res.F = (ssb / double(df_between)) / (ssw / double(df_within));
    res.p = f_sf(res.F, double(df_between), double(df_within));
    return res;
}

}  // namespace rcc
