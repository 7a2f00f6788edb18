#pragma once

#include <string>
#include <vector>

#include "va/geometry.hpp"
#include "va/sparse.hpp"

namespace va {

enum class FeatureKind { hog, channel_sums };

std::string to_string(FeatureKind k);
FeatureKind feature_kind_from_string(const std::string& s);

// Linear scoring model: y = w . x + b. Viewpoint adaptation replaces w by
// G^T w, leaving the bias alone.
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    FeatureKind feature_kind = FeatureKind::hog;
    CameraPose training_view;

    double score(std::span<const double> x) const;
};

struct Stump {
    int feature_index = 0;
    double threshold = 0.0;
    int polarity = 1;  // +1: predict positive when x[i] > threshold
    double vote_weight = 0.0;
};

// Boosted decision stumps over channel-sum features. Scores cannot absorb a
// feature transform into the parameters; features are remapped at run time
// instead.
struct StumpEnsemble {
    std::vector<Stump> stumps;
    FeatureKind feature_kind = FeatureKind::channel_sums;
    CameraPose training_view;

    double score(std::span<const double> x) const;
};

struct TrainOptions {
    double lambda = 1e-4;
    int epochs = 50;
    uint64_t seed = 1;
};

// L2-regularized hinge loss minimized by seeded stochastic subgradient
// descent (step 1/(lambda*t), bias unregularized). Deterministic: identical
// inputs and seed give bitwise-identical weights.
LinearModel train_linear(const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, const TrainOptions& opt);

// Discrete AdaBoost over exhaustive decision stumps. Deterministic
// (ties broken by feature index, then threshold).
StumpEnsemble train_stumps(const std::vector<std::vector<double>>& features,
                           const std::vector<int>& labels, int rounds, uint64_t seed);

// Closed-form viewpoint adaptation: weights become G^T w so that scoring a
// target-view descriptor equals scoring its remapped version with the
// original model. G must map target-view features into the model's space.
LinearModel adapt_linear(const LinearModel& model, const SparseMatrix& G);

// JSON model file I/O (works for both model types; "kind" discriminates).
void save_linear_model(const LinearModel& m, const std::string& path, int bins, int grid_cols,
                       int grid_rows, int cell_size);
LinearModel load_linear_model(const std::string& path);
void save_stump_model(const StumpEnsemble& m, const std::string& path, int grid_cols,
                      int grid_rows, int cell_size);
StumpEnsemble load_stump_model(const std::string& path);

// Peeks at the "kind" field of a model file.
std::string model_kind(const std::string& path);

} // namespace va
