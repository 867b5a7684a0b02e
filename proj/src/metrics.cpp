#include "rcc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "rcc/errors.hpp"
#include "rcc/prng.hpp"
#include "rcc/survival.hpp"
#include "rcc/util.hpp"

namespace rcc {

namespace {

void check_classes(const std::vector<double>& scores, const std::vector<int>& labels,
                   long& n_pos, long& n_neg) {
    if (scores.size() != labels.size())
        throw DimensionMismatch("scores/labels length mismatch");
    n_pos = n_neg = 0;
    for (int l : labels) (l == 1 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw SingleClass("need both classes present");
}

// 2U accumulated over the descending-score sweep; exact integer arithmetic
long two_u_statistic(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    long tp = 0, fp = 0, acc = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        long dtp = 0, dfp = 0;
        std::size_t j = i;
        for (; j < order.size() && scores[order[j]] == s; ++j)
            (labels[order[j]] == 1 ? dtp : dfp)++;
        acc += dfp * (2 * tp + dtp);  // trapezoid: dFP * (TP_prev + TP_cur)
        tp += dtp;
        fp += dfp;
        i = j;
    }
    return acc;
}

struct Counts {
    long tp = 0, fp = 0, tn = 0, fn = 0;
};

Counts counts_at(const std::vector<double>& scores, const std::vector<int>& labels,
                 double threshold) {
    Counts c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (labels[i] == 1)
            (predicted ? c.tp : c.fn)++;
        else
            (predicted ? c.fp : c.tn)++;
    }
    return c;
}

CutoffResult cutoff_from_counts(const Counts& c, double threshold) {
    CutoffResult r;
    r.threshold = threshold;
    r.sensitivity = double(c.tp) / double(c.tp + c.fn);
    r.specificity = double(c.tn) / double(c.tn + c.fp);
    r.youden_j = r.sensitivity + r.specificity - 1.0;
    return r;
}

}  // namespace

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
    long n_pos, n_neg;
    check_classes(scores, labels, n_pos, n_neg);
    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        std::size_t j = i;
        for (; j < order.size() && scores[order[j]] == s; ++j)
            (labels[order[j]] == 1 ? tp : fp)++;
        curve.points.push_back({double(fp) / double(n_neg), double(tp) / double(n_pos), s});
        i = j;
    }
    curve.auc = double(two_u_statistic(scores, labels)) / (2.0 * double(n_pos) * double(n_neg));
    return curve;
}

AucResult auc_ci(const std::vector<double>& scores, const std::vector<int>& labels,
                 int B, std::uint64_t seed) {
    long n_pos, n_neg;
    check_classes(scores, labels, n_pos, n_neg);
    const std::size_t n = scores.size();
    AucResult res;
    res.n_pos = n_pos;
    res.n_neg = n_neg;
    res.auc = double(two_u_statistic(scores, labels)) / (2.0 * double(n_pos) * double(n_neg));

    std::vector<double> boot(B);
    std::vector<double> rs(n);
    std::vector<int> rl(n);
    for (int b = 0; b < B; ++b) {
        Prng rng = Prng::substream(seed, std::uint64_t(b));
        long bp = 0, bn = 0;
        do {
            bp = bn = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t k = std::size_t(rng.uniform_int(n));
                rs[i] = scores[k];
                rl[i] = labels[k];
                (rl[i] == 1 ? bp : bn)++;
            }
        } while (bp == 0 || bn == 0);
        boot[b] = double(two_u_statistic(rs, rl)) / (2.0 * double(bp) * double(bn));
    }
    std::sort(boot.begin(), boot.end());
    auto quantile = [&](double q) {
        const double pos = q * double(B - 1);
        const std::size_t lo = std::size_t(pos);
        const std::size_t hi = std::min<std::size_t>(lo + 1, B - 1);
        const double frac = pos - double(lo);
        return boot[lo] * (1.0 - frac) + boot[hi] * frac;
    };
    res.ci_low = std::min(quantile(0.025), res.auc);
    res.ci_high = std::max(quantile(0.975), res.auc);
    return res;
}

CutoffResult best_cutoff(const std::vector<double>& scores, const std::vector<int>& labels) {
    long n_pos, n_neg;
    check_classes(scores, labels, n_pos, n_neg);
    std::vector<double> thresholds(scores);
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    CutoffResult best;
    bool have = false;
    for (double t : thresholds) {
        const CutoffResult cand = cutoff_from_counts(counts_at(scores, labels, t), t);
        const bool better =
            !have || cand.youden_j > best.youden_j ||
            (cand.youden_j == best.youden_j &&
             (cand.specificity > best.specificity ||
              (cand.specificity == best.specificity && cand.threshold < best.threshold)));
        if (better) {
            best = cand;
            have = true;
        }
    }
    return best;
}

CutoffResult sens_spec_at(const std::vector<double>& scores, const std::vector<int>& labels,
                          double threshold) {
    long n_pos, n_neg;
    check_classes(scores, labels, n_pos, n_neg);
    return cutoff_from_counts(counts_at(scores, labels, threshold), threshold);
}

std::vector<IndicatorRow> indicator_comparison(const std::vector<ClinicalRecord>& records,
                                               const std::vector<NamedScores>& indicators,
                                               int bootstrap_B, std::uint64_t seed) {
    std::vector<IndicatorRow> rows;
    std::uint64_t stream = 0;
    for (const auto& ind : indicators) {
        if (ind.scores.size() != records.size())
            throw DimensionMismatch("indicator '" + ind.name +
                                    "' score count does not match record count");
        IndicatorRow row;
        row.name = ind.name;
        const double horizons[3] = {60.0, 36.0, 12.0};
        AucResult* slots[3] = {&row.auc_5y, &row.auc_3y, &row.auc_1y};
        for (int hidx = 0; hidx < 3; ++hidx) {
            std::vector<double> s;
            std::vector<int> l;
            for (std::size_t i = 0; i < records.size(); ++i) {
                const auto& r = records[i];
                if (r.event == EventStatus::Unknown) continue;
                const HorizonLabel hl = horizon_label(r.os_months, r.event, horizons[hidx]);
                if (hl == HorizonLabel::Excluded) continue;
                s.push_back(ind.scores[i]);
                l.push_back(hl == HorizonLabel::Positive ? 1 : 0);
            }
            *slots[hidx] = auc_ci(s, l, bootstrap_B, seed + stream);
            ++stream;
        }
        std::vector<double> risk;
        std::vector<SurvivalSample> samples;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            if (r.event == EventStatus::Unknown) continue;
            risk.push_back(ind.scores[i]);
            samples.push_back({r.os_months, r.event == EventStatus::Dead ? 1 : 0, {}});
        }
        row.c_index = c_index(risk, samples);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string comparison_table_csv(const std::vector<IndicatorRow>& rows) {
    std::ostringstream out;
    out << "indicator,auc_5y,ci_5y,auc_3y,ci_3y,auc_1y,ci_1y,c_index\n";
    for (const auto& r : rows) {
        auto emit = [&](const AucResult& a) {
            out << ',' << format_double(a.auc) << ',' << format_double(a.ci_low) << '-'
                << format_double(a.ci_high);
        };
        out << r.name;
        emit(r.auc_5y);
        emit(r.auc_3y);
        emit(r.auc_1y);
        out << ',' << format_double(r.c_index) << "\n";
    }
    return out.str();
}

std::string roc_points_csv(const RocCurve& curve) {
    std::ostringstream out;
    out << "threshold,fpr,tpr\n";
    for (const auto& p : curve.points)
        out << format_double(p.threshold) << ',' << format_double(p.fpr) << ','
            << format_double(p.tpr) << "\n";
    return out.str();
}

}  // namespace rcc
