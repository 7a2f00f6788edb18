#include "va/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "va/rng.hpp"

namespace va {

std::string to_string(FeatureKind k) {
    return k == FeatureKind::hog ? "hog" : "channel-sums";
}

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "hog") return FeatureKind::hog;
    if (s == "channel-sums") return FeatureKind::channel_sums;
    throw MalformedFileError("unknown feature kind: " + s);
}

double LinearModel::score(std::span<const double> x) const {
    if (x.size() != weights.size())
        throw DimensionMismatchError("feature vector does not match model dimension");
    double s = bias;
    for (size_t i = 0; i < weights.size(); ++i) s += weights[i] * x[i];
    return s;
}

double StumpEnsemble::score(std::span<const double> x) const {
    double s = 0.0;
    for (const Stump& st : stumps) {
        if (st.feature_index < 0 || static_cast<size_t>(st.feature_index) >= x.size())
            throw DimensionMismatchError("stump index outside feature vector");
        double v = x[static_cast<size_t>(st.feature_index)];
        int h = (v > st.threshold) ? st.polarity : -st.polarity;
        s += st.vote_weight * h;
    }
    return s;
}

namespace {

void check_training_inputs(const std::vector<std::vector<double>>& features,
                           const std::vector<int>& labels) {
    if (features.size() != labels.size())
        throw DimensionMismatchError("feature/label count mismatch");
    if (features.empty()) throw DegenerateDataError("no training examples");
    size_t dim = features[0].size();
    int pos = 0, neg = 0;
    for (size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != dim)
            throw DimensionMismatchError("inconsistent feature dimensions");
        if (labels[i] == 1)
            ++pos;
        else if (labels[i] == -1)
            ++neg;
        else
            throw DegenerateDataError("labels must be +1 or -1");
    }
    if (pos < 2 || neg < 2)
        throw DegenerateDataError("need at least 2 examples of each class");
}

} // namespace

LinearModel train_linear(const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, const TrainOptions& opt) {
    check_training_inputs(features, labels);
    const size_t n = features.size();
    const size_t dim = features[0].size();
    LinearModel m;
    m.weights.assign(dim, 0.0);
    m.bias = 0.0;

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(opt.seed);
    int64_t t = 1;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        // Fisher-Yates with our own RNG so shuffles are platform-stable
        for (size_t i = n - 1; i > 0; --i) {
            size_t j = static_cast<size_t>(rng.next_below(i + 1));
            std::swap(order[i], order[j]);
        }
        for (size_t idx : order) {
            const std::vector<double>& x = features[idx];
            double y = labels[idx];
            double eta = 1.0 / (opt.lambda * static_cast<double>(t));
            double margin = y * (std::inner_product(x.begin(), x.end(), m.weights.begin(), 0.0) +
                                 m.bias);
            double shrink = 1.0 - eta * opt.lambda;  // = 1 - 1/t
            for (double& w : m.weights) w *= shrink;
            m.bias *= shrink;  // bias trained as an augmented, regularized weight
            if (margin < 1.0) {
                double step = eta * y;
                for (size_t d = 0; d < dim; ++d) m.weights[d] += step * x[d];
                m.bias += step;
            }
            ++t;
        }
    }
    return m;
}

StumpEnsemble train_stumps(const std::vector<std::vector<double>>& features,
                           const std::vector<int>& labels, int rounds, uint64_t /*seed*/) {
    check_training_inputs(features, labels);
    if (rounds < 1) throw DegenerateDataError("need at least one boosting round");
    const size_t n = features.size();
    const size_t dim = features[0].size();

    // per-dimension sort orders, computed once
    std::vector<std::vector<int>> sorted(dim, std::vector<int>(n));
    for (size_t d = 0; d < dim; ++d) {
        std::iota(sorted[d].begin(), sorted[d].end(), 0);
        std::stable_sort(sorted[d].begin(), sorted[d].end(), [&](int a, int b) {
            return features[static_cast<size_t>(a)][d] < features[static_cast<size_t>(b)][d];
        });
    }

    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    StumpEnsemble ens;
    for (int round = 0; round < rounds; ++round) {
        // Exhaustive stump search: for each dimension scan the sorted
        // examples; err(theta, polarity=+1) = sum w of positives below theta
        // plus negatives above.
        double best_err = 1e300;
        Stump best;
        for (size_t d = 0; d < dim; ++d) {
            double w_pos = 0.0;
            for (size_t i = 0; i < n; ++i)
                if (labels[i] == 1) w_pos += w[i];
            // threshold below all values: everything predicted positive
            double err_plus = 1.0 - w_pos;  // all negatives wrong
            const auto& ord = sorted[d];
            double prev_val = features[static_cast<size_t>(ord[0])][d] - 1.0;
            size_t i = 0;
            while (i <= n) {
                double thr;
                if (i == 0)
                    thr = prev_val;
                else if (i == n)
                    thr = features[static_cast<size_t>(ord[n - 1])][d] + 1.0;
                else
                    thr = 0.5 * (features[static_cast<size_t>(ord[i - 1])][d] +
                                 features[static_cast<size_t>(ord[i])][d]);
                // only consider distinct thresholds
                bool distinct = (i == 0 || i == n ||
                                 features[static_cast<size_t>(ord[i - 1])][d] <
                                     features[static_cast<size_t>(ord[i])][d]);
                if (distinct) {
                    double err_minus = 1.0 - err_plus;
                    if (err_plus < best_err - 1e-15) {
                        best_err = err_plus;
                        best = {static_cast<int>(d), thr, 1, 0.0};
                    }
                    if (err_minus < best_err - 1e-15) {
                        best_err = err_minus;
                        best = {static_cast<int>(d), thr, -1, 0.0};
                    }
                }
                if (i == n) break;
                // moving the threshold above example ord[i] flips it to the
                // "below" side (predicted negative for polarity +1)
                size_t e = static_cast<size_t>(ord[i]);
                if (labels[e] == 1)
                    err_plus += w[e];
                else
                    err_plus -= w[e];
                ++i;
            }
        }
        double eps = std::clamp(best_err, 1e-10, 1.0 - 1e-10);
        double alpha = 0.5 * std::log((1.0 - eps) / eps);
        best.vote_weight = alpha;
        ens.stumps.push_back(best);
        // reweight and renormalize
        double z = 0.0;
        for (size_t e = 0; e < n; ++e) {
            double v = features[e][static_cast<size_t>(best.feature_index)];
            int h = (v > best.threshold) ? best.polarity : -best.polarity;
            w[e] *= std::exp(-alpha * labels[e] * h);
            z += w[e];
        }
        for (double& wi : w) wi /= z;
        if (best_err < 1e-12) break;  // perfect stump, no signal left
    }
    return ens;
}

LinearModel adapt_linear(const LinearModel& model, const SparseMatrix& G) {
    if (G.rows() != static_cast<int>(model.weights.size()))
        throw DimensionMismatchError("remap rows do not match model dimension");
    LinearModel out = model;
    out.weights = G.transpose_apply(model.weights);
    return out;
}

namespace {

nlohmann::json pose_to_json(const CameraPose& p) {
    return {{"elevation", p.elevation},
            {"distance", p.distance},
            {"focal_length", p.focal_length},
            {"principal_point", {p.principal_point.x, p.principal_point.y}},
            {"image_size", {p.image_width, p.image_height}}};
}

CameraPose pose_from_json(const nlohmann::json& j) {
    CameraPose p;
    p.elevation = j.at("elevation").get<double>();
    p.distance = j.at("distance").get<double>();
    p.focal_length = j.at("focal_length").get<double>();
    p.principal_point.x = j.at("principal_point")[0].get<double>();
    p.principal_point.y = j.at("principal_point")[1].get<double>();
    p.image_width = j.at("image_size")[0].get<int>();
    p.image_height = j.at("image_size")[1].get<int>();
    return p;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedFileError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedFileError(path + ": " + e.what());
    }
    return j;
}

void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MalformedFileError("cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace

void save_linear_model(const LinearModel& m, const std::string& path, int bins, int grid_cols,
                       int grid_rows, int cell_size) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["kind"] = "linear";
    j["feature_kind"] = to_string(m.feature_kind);
    j["grid"] = {{"cols", grid_cols}, {"rows", grid_rows}, {"cell_size", cell_size}};
    j["bins"] = bins;
    j["weights"] = m.weights;
    j["bias"] = m.bias;
    j["training_view"] = pose_to_json(m.training_view);
    write_json(j, path);
}

LinearModel load_linear_model(const std::string& path) {
    nlohmann::json j = load_json(path);
    if (j.value("kind", "") != "linear")
        throw MalformedFileError(path + ": not a linear model file");
    LinearModel m;
    m.feature_kind = feature_kind_from_string(j.at("feature_kind").get<std::string>());
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.training_view = pose_from_json(j.at("training_view"));
    return m;
}

void save_stump_model(const StumpEnsemble& m, const std::string& path, int grid_cols,
                      int grid_rows, int cell_size) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["kind"] = "stumps";
    j["feature_kind"] = to_string(m.feature_kind);
    j["grid"] = {{"cols", grid_cols}, {"rows", grid_rows}, {"cell_size", cell_size}};
    nlohmann::json stumps = nlohmann::json::array();
    for (const Stump& s : m.stumps)
        stumps.push_back({{"feature_index", s.feature_index},
                          {"threshold", s.threshold},
                          {"polarity", s.polarity},
                          {"vote_weight", s.vote_weight}});
    j["stumps"] = stumps;
    j["training_view"] = pose_to_json(m.training_view);
    write_json(j, path);
}

StumpEnsemble load_stump_model(const std::string& path) {
    nlohmann::json j = load_json(path);
    if (j.value("kind", "") != "stumps")
        throw MalformedFileError(path + ": not a stump model file");
    StumpEnsemble m;
    m.feature_kind = feature_kind_from_string(j.at("feature_kind").get<std::string>());
    for (const auto& s : j.at("stumps"))
        m.stumps.push_back({s.at("feature_index").get<int>(), s.at("threshold").get<double>(),
                            s.at("polarity").get<int>(), s.at("vote_weight").get<double>()});
    m.training_view = pose_from_json(j.at("training_view"));
    return m;
}

std::string model_kind(const std::string& path) {
    nlohmann::json j = load_json(path);
    return j.value("kind", "");
}

} // namespace va
