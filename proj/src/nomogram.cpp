#include "rcc/nomogram.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "rcc/errors.hpp"

namespace rcc {

Nomogram build_nomogram(const CoxModel& model, const std::vector<std::string>& names,
                        const std::map<std::string, CovariateRange>& ranges) {
    const int p = model.p();
    if (p < 1) throw EmptyInput("build_nomogram: model has no covariates");
    if (static_cast<int>(names.size()) != p)
        throw DimensionMismatch("build_nomogram: name count != covariate count");

    Nomogram nom;
    double max_span = 0.0;
    for (int j = 0; j < p; ++j) {
        const auto it = ranges.find(names[j]);
        if (it == ranges.end())
            throw MissingCovariate("build_nomogram: no range for '" + names[j] + "'");
        const CovariateRange& r = it->second;
        if (!(r.min < r.max))
            throw DegenerateRange("build_nomogram: degenerate range for '" + names[j] + "'");
        NomogramVariable v;
        v.name = names[j];
        v.beta = model.beta[j];
        v.min = r.min;
        v.max = r.max;
        // reference at the endpoint minimizing beta*x, so points run upward
        v.ref_value = v.beta >= 0.0 ? r.min : r.max;
        max_span = std::max(max_span, std::fabs(v.beta * (r.max - r.min)));
        nom.variables.push_back(v);
    }
    if (max_span == 0.0) throw ZeroBeta("build_nomogram: all betas zero");
    nom.scale = 100.0 / max_span;
    nom.baseline_cumhaz = model.baseline_cumhaz;
    nom.covariate_means = model.covariate_means;
    nom.max_time = model.max_time;
    return nom;
}

double nomogram_score(const Nomogram& nomogram, const std::vector<double>& covariates,
                      int* clamp_warnings) {
    if (covariates.size() != nomogram.variables.size())
        throw MissingCovariate("nomogram_score: covariate count mismatch");
    double total = 0.0;
    for (std::size_t j = 0; j < covariates.size(); ++j) {
        const NomogramVariable& v = nomogram.variables[j];
        double x = covariates[j];
        if (x < v.min || x > v.max) {
            x = std::clamp(x, v.min, v.max);
            if (clamp_warnings) ++*clamp_warnings;
        }
        total += nomogram.scale * v.beta * (x - v.ref_value);
    }
    return total;
}

StratifiedGroup stratify(const Nomogram& nomogram, double total_points) {
    if (nomogram.cutoff_points < 0.0)
        throw CutoffUnset("stratify: cutoff not set on this nomogram");
    return total_points > nomogram.cutoff_points ? StratifiedGroup::Worse
                                                 : StratifiedGroup::Favorable;
}

double survival_probability(const Nomogram& nomogram, const std::vector<double>& covariates,
                            double horizon_months) {
    if (covariates.size() != nomogram.variables.size())
        throw MissingCovariate("survival_probability: covariate count mismatch");
    if (horizon_months > nomogram.max_time)
        throw HorizonBeyondFollowUp("horizon exceeds observed follow-up");
    double lp = 0.0;
    for (std::size_t j = 0; j < covariates.size(); ++j)
        lp += nomogram.variables[j].beta * (covariates[j] - nomogram.covariate_means[j]);
    double cumhaz = 0.0;
    for (const auto& [t, h] : nomogram.baseline_cumhaz) {
        if (t > horizon_months) break;
        cumhaz = h;
    }
    return std::exp(-cumhaz * std::exp(lp));
}

std::string nomogram_to_json(const Nomogram& nomogram) {
    nlohmann::ordered_json j;
    j["variables"] = nlohmann::ordered_json::array();
    for (const auto& v : nomogram.variables)
        j["variables"].push_back({{"name", v.name},
                                  {"beta", v.beta},
                                  {"ref", v.ref_value},
                                  {"min", v.min},
                                  {"max", v.max}});
    j["scale"] = nomogram.scale;
    j["cutoff"] = nomogram.cutoff_points;
    j["baseline"] = nlohmann::ordered_json::array();
    for (const auto& [t, h] : nomogram.baseline_cumhaz)
        j["baseline"].push_back({{"t", t}, {"cumhaz", h}});
    j["covariate_means"] = nomogram.covariate_means;
    j["max_time"] = nomogram.max_time;
    return j.dump(2) + "\n";
}

Nomogram nomogram_from_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    Nomogram nom;
    for (const auto& v : j.at("variables")) {
        NomogramVariable nv;
        nv.name = v.at("name");
        nv.beta = v.at("beta");
        nv.ref_value = v.at("ref");
        nv.min = v.at("min");
        nv.max = v.at("max");
        nom.variables.push_back(std::move(nv));
    }
    nom.scale = j.at("scale");
    nom.cutoff_points = j.at("cutoff");
    for (const auto& b : j.at("baseline"))
        nom.baseline_cumhaz.emplace_back(b.at("t"), b.at("cumhaz"));
    nom.covariate_means = j.at("covariate_means").get<std::vector<double>>();
    nom.max_time = j.at("max_time");
    return nom;
}

}  // namespace rcc
