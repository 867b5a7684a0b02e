#include "rcc/mil.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <json.hpp>

#include "rcc/errors.hpp"
#include "rcc/prng.hpp"

namespace rcc {

void Bag::canonicalize() {
    std::vector<std::size_t> idx(features.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::pair(coords[a].second, coords[a].first) <
               std::pair(coords[b].second, coords[b].first);
    });
    std::vector<std::vector<double>> nf;
    std::vector<std::pair<int, int>> nc;
    nf.reserve(idx.size());
    nc.reserve(idx.size());
    for (std::size_t i : idx) {
        nf.push_back(std::move(features[i]));
        nc.push_back(coords[i]);
    }
    features = std::move(nf);
    coords = std::move(nc);
}

namespace {

void softmax_inplace(std::vector<double>& v) {
    const double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

struct ForwardCache {
    std::vector<std::vector<double>> u;  // n x h, tanh activations
    std::vector<double> attention;       // n
    std::vector<double> z;               // d
    std::vector<double> q;               // m, pre-ReLU
    std::vector<double> r;               // m
    std::vector<double> probs;           // C
};

ForwardCache forward_cache(const Bag& bag, const MilModel& model) {
    if (bag.n() < 1) throw EmptyDataset("empty bag");
    if (bag.d() != model.d)
        throw DimensionMismatch("bag dim " + std::to_string(bag.d()) +
                                " vs model dim " + std::to_string(model.d));
    const int n = bag.n(), d = model.d, h = model.h, m = model.m, C = model.C;
    ForwardCache fc;
    fc.u.assign(n, std::vector<double>(h));
    fc.attention.resize(n);
    for (int k = 0; k < n; ++k) {
        const auto& hk = bag.features[k];
        double s = 0.0;
        for (int i = 0; i < h; ++i) {
            double t = model.b_v[i];
            const double* vrow = model.V.data() + std::size_t(i) * d;
            for (int j = 0; j < d; ++j) t += vrow[j] * hk[j];
            fc.u[k][i] = std::tanh(t);
            s += model.w[i] * fc.u[k][i];
        }
        fc.attention[k] = s;
    }
    softmax_inplace(fc.attention);
    fc.z.assign(d, 0.0);
    for (int k = 0; k < n; ++k) {
        const double a = fc.attention[k];
        const auto& hk = bag.features[k];
        for (int j = 0; j < d; ++j) fc.z[j] += a * hk[j];
    }
    fc.q.resize(m);
    fc.r.resize(m);
    for (int i = 0; i < m; ++i) {
        double t = model.b1[i];
        const double* row = model.W1.data() + std::size_t(i) * d;
        for (int j = 0; j < d; ++j) t += row[j] * fc.z[j];
        fc.q[i] = t;
        fc.r[i] = t > 0.0 ? t : 0.0;
    }
    fc.probs.resize(C);
    for (int c = 0; c < C; ++c) {
        double t = model.b2[c];
        const double* row = model.W2.data() + std::size_t(c) * m;
        for (int i = 0; i < m; ++i) t += row[i] * fc.r[i];
        fc.probs[c] = t;
    }
    softmax_inplace(fc.probs);
    return fc;
}

MilGradients backward(const Bag& bag, const MilModel& model, int label,
                      const ForwardCache& fc) {
    const int n = bag.n(), d = model.d, h = model.h, m = model.m, C = model.C;
    MilGradients g;
    g.V.assign(model.V.size(), 0.0);
    g.b_v.assign(h, 0.0);
    g.w.assign(h, 0.0);
    g.W1.assign(model.W1.size(), 0.0);
    g.b1.assign(m, 0.0);
    g.W2.assign(model.W2.size(), 0.0);
    g.b2.assign(C, 0.0);

    // softmax cross-entropy head
    std::vector<double> g_logits(fc.probs);
    g_logits[label] -= 1.0;
    std::vector<double> g_r(m, 0.0);
    for (int c = 0; c < C; ++c) {
        g.b2[c] = g_logits[c];
        double* row = g.W2.data() + std::size_t(c) * m;
        const double* w2row = model.W2.data() + std::size_t(c) * m;
        for (int i = 0; i < m; ++i) {
            row[i] = g_logits[c] * fc.r[i];
            g_r[i] += w2row[i] * g_logits[c];
        }
    }
    std::vector<double> g_z(d, 0.0);
    for (int i = 0; i < m; ++i) {
        const double gq = fc.q[i] > 0.0 ? g_r[i] : 0.0;
        g.b1[i] = gq;
        double* row = g.W1.data() + std::size_t(i) * d;
        const double* w1row = model.W1.data() + std::size_t(i) * d;
        for (int j = 0; j < d; ++j) {
            row[j] = gq * fc.z[j];
            g_z[j] += w1row[j] * gq;
        }
    }

    // through z = sum_k a_k h_k into the attention scores
    std::vector<double> g_a(n);
    for (int k = 0; k < n; ++k) {
        const auto& hk = bag.features[k];
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += g_z[j] * hk[j];
        g_a[k] = s;
    }
    double dot = 0.0;
    for (int k = 0; k < n; ++k) dot += fc.attention[k] * g_a[k];
    for (int k = 0; k < n; ++k) {
        const double g_s = fc.attention[k] * (g_a[k] - dot);
        const auto& hk = bag.features[k];
        for (int i = 0; i < h; ++i) {
            const double ui = fc.u[k][i];
            g.w[i] += g_s * ui;
            const double g_t = g_s * model.w[i] * (1.0 - ui * ui);
            g.b_v[i] += g_t;
            double* vrow = g.V.data() + std::size_t(i) * d;
            for (int j = 0; j < d; ++j) vrow[j] += g_t * hk[j];
        }
    }
    return g;
}

void xavier_fill(std::vector<double>& w, int fan_in, int fan_out, Prng& rng) {
    const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    for (double& x : w) x = rng.uniform(-limit, limit);
}

struct AdamState {
    std::vector<double> m1, m2;
    explicit AdamState(std::size_t n) : m1(n, 0.0), m2(n, 0.0) {}
};

void adam_step(std::vector<double>& param, const std::vector<double>& grad,
               AdamState& st, double lr, long t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, double(t));
    const double c2 = 1.0 - std::pow(b2, double(t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        st.m1[i] = b1 * st.m1[i] + (1.0 - b1) * grad[i];
        st.m2[i] = b2 * st.m2[i] + (1.0 - b2) * grad[i] * grad[i];
        param[i] -= lr * (st.m1[i] / c1) / (std::sqrt(st.m2[i] / c2) + eps);
    }
}

}  // namespace

MilModel mil_init(int d, int h, int m, int C, const MilHyperparams& hyper, Task task) {
    MilModel model;
    model.d = d;
    model.h = h;
    model.m = m;
    model.C = C;
    model.hyper = hyper;
    model.task = task;
    model.V.resize(std::size_t(h) * d);
    model.b_v.assign(h, 0.0);
    model.w.resize(h);
    model.W1.resize(std::size_t(m) * d);
    model.b1.assign(m, 0.0);
    model.W2.resize(std::size_t(C) * m);
    model.b2.assign(C, 0.0);
    Prng rng(hyper.seed);
    xavier_fill(model.V, d, h, rng);
    xavier_fill(model.w, h, 1, rng);
    xavier_fill(model.W1, d, m, rng);
    xavier_fill(model.W2, m, C, rng);
    return model;
}

MilOutput mil_forward(const Bag& bag, const MilModel& model) {
    ForwardCache fc = forward_cache(bag, model);
    return {std::move(fc.probs), std::move(fc.attention)};
}

double mil_loss(const MilOutput& output, int label, int C) {
    if (label < 0 || label >= C) throw BadLabel("label out of [0, C)");
    const double p = std::clamp(output.probs[label], 1e-7, 1.0 - 1e-7);
    return -std::log(p);
}

MilGradients mil_gradients(const Bag& bag, const MilModel& model, int label) {
    if (label < 0 || label >= model.C) throw BadLabel("label out of [0, C)");
    const ForwardCache fc = forward_cache(bag, model);
    return backward(bag, model, label, fc);
}

MilModel mil_train(const std::vector<Bag>& bags, const MilHyperparams& hyper,
                   int h, int m, int C, Task task) {
    if (bags.empty()) throw EmptyDataset("no training bags");
    if (bags.size() < 2) throw SingleClassDataset("need at least 2 bags");
    bool multi = false;
    for (const auto& b : bags)
        if (b.label != bags.front().label) multi = true;
    if (!multi) throw SingleClassDataset("all bags share one label");

    MilModel model = mil_init(bags.front().d(), h, m, C, hyper, task);
    Prng rng(hyper.seed + 1);  // shuffle stream, distinct from init stream

    AdamState sV(model.V.size()), sb_v(model.b_v.size()), sw(model.w.size()),
        sW1(model.W1.size()), sb1(model.b1.size()), sW2(model.W2.size()),
        sb2(model.b2.size());
    const double decay = 1.0 - hyper.weight_decay;
    std::vector<std::size_t> order(bags.size());
    std::iota(order.begin(), order.end(), 0);
    long t = 0;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            const Bag& bag = bags[idx];
            // multiplicative shrinkage on the weight matrices, independent of lr
            for (double& x : model.V) x *= decay;
            for (double& x : model.w) x *= decay;
            for (double& x : model.W1) x *= decay;
            for (double& x : model.W2) x *= decay;
            const ForwardCache fc = forward_cache(bag, model);
            loss_sum += -std::log(std::clamp(fc.probs[bag.label], 1e-7, 1.0 - 1e-7));
            const MilGradients g = backward(bag, model, bag.label, fc);
            ++t;
            adam_step(model.V, g.V, sV, hyper.learning_rate, t);
            adam_step(model.b_v, g.b_v, sb_v, hyper.learning_rate, t);
            adam_step(model.w, g.w, sw, hyper.learning_rate, t);
            adam_step(model.W1, g.W1, sW1, hyper.learning_rate, t);
            adam_step(model.b1, g.b1, sb1, hyper.learning_rate, t);
            adam_step(model.W2, g.W2, sW2, hyper.learning_rate, t);
            adam_step(model.b2, g.b2, sb2, hyper.learning_rate, t);
        }
        model.loss_log.push_back(loss_sum / double(bags.size()));
    }
    return model;
}

RiskScore predict_risk(const Bag& bag, const MilModel& model, Task task) {
    const MilOutput out = mil_forward(bag, model);
    RiskScore rs;
    rs.slide_id = bag.slide_id;
    rs.task = task;
    // binary heads: class 1 is the positive class (high grade / dead within
    // horizon / RCC); the 3-class subtype head reports P(ccRCC) = class 0
    rs.value = task == Task::Subtype ? out.probs[0] : out.probs[1];
    return rs;
}

Mask attention_heatmap(const Bag& bag, const MilOutput& output, int cell) {
    if (cell < 1) throw DataError("heatmap cell must be >= 1");
    int max_cx = 0, max_cy = 0;
    for (const auto& [x, y] : bag.coords) {
        max_cx = std::max(max_cx, x / cell);
        max_cy = std::max(max_cy, y / cell);
    }
    Mask mask;
    mask.width = max_cx + 1;
    mask.height = max_cy + 1;
    mask.values.assign(std::size_t(mask.width) * mask.height, 0.0);
    const double amax = *std::max_element(output.attention.begin(), output.attention.end());
    for (int k = 0; k < bag.n(); ++k) {
        const auto& [x, y] = bag.coords[k];
        mask.at(x / cell, y / cell) = output.attention[k] / amax;
    }
    return mask;
}

std::string task_name(Task t) {
    switch (t) {
        case Task::Diagnosis: return "diagnosis";
        case Task::Subtype: return "subtype";
        case Task::GradeRisk: return "grade_risk";
        case Task::OsRisk: return "os_risk";
    }
    return "?";
}

Task task_from_name(const std::string& name) {
    if (name == "diagnosis") return Task::Diagnosis;
    if (name == "subtype") return Task::Subtype;
    if (name == "grade_risk") return Task::GradeRisk;
    if (name == "os_risk") return Task::OsRisk;
    throw DataError("unknown task '" + name + "'");
}

std::string mil_model_to_json(const MilModel& model) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["task"] = task_name(model.task);
    j["dims"] = {{"d", model.d}, {"h", model.h}, {"m", model.m}, {"C", model.C}};
    j["weights"] = {{"V", model.V},   {"b_v", model.b_v}, {"w", model.w},
                    {"W1", model.W1}, {"b1", model.b1},   {"W2", model.W2},
                    {"b2", model.b2}};
    j["hyperparams"] = {{"learning_rate", model.hyper.learning_rate},
                        {"epochs", model.hyper.epochs},
                        {"weight_decay", model.hyper.weight_decay}};
    j["seed"] = model.hyper.seed;
    j["loss_log"] = model.loss_log;
    return j.dump(2) + "\n";
}

MilModel mil_model_from_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    if (j.at("schema").get<int>() != 1) throw DataError("unsupported model schema");
    MilModel model;
    model.task = task_from_name(j.at("task").get<std::string>());
    const auto& dims = j.at("dims");
    model.d = dims.at("d");
    model.h = dims.at("h");
    model.m = dims.at("m");
    model.C = dims.at("C");
    const auto& w = j.at("weights");
    model.V = w.at("V").get<std::vector<double>>();
    model.b_v = w.at("b_v").get<std::vector<double>>();
    model.w = w.at("w").get<std::vector<double>>();
    model.W1 = w.at("W1").get<std::vector<double>>();
    model.b1 = w.at("b1").get<std::vector<double>>();
    model.W2 = w.at("W2").get<std::vector<double>>();
    model.b2 = w.at("b2").get<std::vector<double>>();
    const auto& hp = j.at("hyperparams");
    model.hyper.learning_rate = hp.at("learning_rate");
    model.hyper.epochs = hp.at("epochs");
    model.hyper.weight_decay = hp.at("weight_decay");
    model.hyper.seed = j.at("seed");
    model.loss_log = j.at("loss_log").get<std::vector<double>>();
    if (model.V.size() != std::size_t(model.h) * model.d ||
        model.W1.size() != std::size_t(model.m) * model.d ||
        model.W2.size() != std::size_t(model.C) * model.m)
        throw DimensionMismatch("model weight sizes inconsistent with dims");
    return model;
}

std::vector<Bag> bags_from_feature_rows(const std::vector<PatchFeatureRow>& rows) {
    std::vector<Bag> bags;
    std::map<std::string, std::size_t> index;
    for (const auto& r : rows) {
        auto [it, inserted] = index.try_emplace(r.slide_id, bags.size());
        if (inserted) {
            Bag b;
            b.slide_id = r.slide_id;
            bags.push_back(std::move(b));
        }
        Bag& bag = bags[it->second];
        bag.features.push_back(r.features.values);
        bag.coords.emplace_back(r.patch_x, r.patch_y);
    }
    for (auto& b : bags) b.canonicalize();
    return bags;
}

}  // namespace rcc
