#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rcc/imaging.hpp"

namespace rcc {

// One slide's bag of patch feature vectors. Rows are kept in canonical
// (y, x) order so reductions are bit-reproducible regardless of how the
// patches were produced.
struct Bag {
    std::string slide_id;
    std::vector<std::vector<double>> features;  // n rows of dim d
    std::vector<std::pair<int, int>> coords;    // (x, y) per row
    int label = 0;

    int n() const { return static_cast<int>(features.size()); }
    int d() const { return features.empty() ? 0 : static_cast<int>(features.front().size()); }

    // sorts rows by (y, x); call after assembly
    void canonicalize();
};

enum class Task { Diagnosis, Subtype, GradeRisk, OsRisk };

struct MilHyperparams {
    double learning_rate = 1e-3;
    int epochs = 50;
    double weight_decay = 1e-5;
    std::uint64_t seed = 0;
};

// Attention pooling s_k = w . tanh(V h_k + b_v), a = softmax(s),
// z = sum_k a_k h_k, then a two-layer ReLU classifier on z.
struct MilModel {
    int d = 0;  // input dim
    int h = 0;  // attention hidden dim
    int m = 0;  // classifier hidden dim
    int C = 0;  // class count
    std::vector<double> V;    // h x d, row-major
    std::vector<double> b_v;  // h
    std::vector<double> w;    // h
    std::vector<double> W1;   // m x d
    std::vector<double> b1;   // m
    std::vector<double> W2;   // C x m
    std::vector<double> b2;   // C
    MilHyperparams hyper;
    Task task = Task::Diagnosis;
    std::vector<double> loss_log;  // mean training loss per epoch
};

struct MilOutput {
    std::vector<double> probs;      // C, sums to 1
    std::vector<double> attention;  // n, sums to 1
};

// Parameter-shaped gradients; same layout as MilModel weights.
struct MilGradients {
    std::vector<double> V, b_v, w, W1, b1, W2, b2;
};

struct RiskScore {
    std::string slide_id;
    Task task = Task::Diagnosis;
    double value = 0.0;  // positive-class probability
};

MilModel mil_init(int d, int h, int m, int C, const MilHyperparams& hyper,
                  Task task = Task::Diagnosis);

MilOutput mil_forward(const Bag& bag, const MilModel& model);

double mil_loss(const MilOutput& output, int label, int C);

// exact analytic gradients of mil_loss w.r.t. every parameter
MilGradients mil_gradients(const Bag& bag, const MilModel& model, int label);

// Deterministic given seed: Xavier-uniform init, Adam one bag per step,
// per-epoch shuffle from the same PRNG stream, fixed epoch count.
MilModel mil_train(const std::vector<Bag>& bags, const MilHyperparams& hyper,
                   int h = 16, int m = 16, int C = 2, Task task = Task::Diagnosis);

RiskScore predict_risk(const Bag& bag, const MilModel& model, Task task);

// Grid raster over the slide extent with each occupied cell at
// a_k / max_j a_j; empty cells 0.
Mask attention_heatmap(const Bag& bag, const MilOutput& output, int cell);

std::string mil_model_to_json(const MilModel& model);
MilModel mil_model_from_json(const std::string& json_text);

std::string task_name(Task t);
Task task_from_name(const std::string& name);

// Assemble bags from feature rows grouped by slide_id, in row order of
// first appearance; rows within a bag are canonicalized by (y, x).
std::vector<Bag> bags_from_feature_rows(const std::vector<PatchFeatureRow>& rows);

}  // namespace rcc
