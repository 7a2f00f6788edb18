#pragma once

#include <functional>
#include <string>
#include <vector>

#include "va/classifier.hpp"
#include "va/detector.hpp"
#include "va/synthdata.hpp"

namespace va {

enum class FpDomain { fppi, fppw };

std::string to_string(FpDomain d);

// Miss rate as a function of the false-positive rate. Points are sorted
// with strictly increasing fp and non-increasing miss rate; lookups use
// stepwise-constant interpolation, clamping to the first point below the
// curve's support.
struct EvalCurve {
    FpDomain domain = FpDomain::fppi;
    std::vector<std::pair<double, double>> points;  // (fp rate, miss rate)

    double miss_at(double fp_rate) const;
};

struct ScoredDetection {
    double score = 0.0;
    bool is_tp = false;
};

struct MatchResult {
    std::vector<ScoredDetection> detections;
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

// Greedy one-to-one matching by descending score; a detection matches the
// best still-unmatched truth with IoU >= threshold.
MatchResult match_detections(const std::vector<Detection>& detections,
                             const std::vector<RectF>& truths, double iou_threshold);

// Threshold sweep over all distinct scores. `n_positives` is the ground
// truth count, `denominator` the fppi/fppw normalizer (images or windows).
EvalCurve miss_rate_curve(const std::vector<ScoredDetection>& detections, int n_positives,
                          double denominator, FpDomain domain);

// Mean of the miss rates sampled at 9 log-spaced fp values in [lo, hi].
double log_average_miss_rate(const EvalCurve& curve, double lo, double hi);

// Scores labeled crop-level examples (each crop is one window) and builds
// the fppw curve. features[i] scored with `score`, labels are +-1.
EvalCurve crop_curve(const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels,
                     const std::function<double(std::span<const double>)>& score);

struct SweepPoint {
    double elevation = 0.0;
    double miss_rate = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    double unadapted_miss = 0.0;
    double fppw_operating_point = 1e-2;
};

// Adapts `source_model` to each candidate elevation and measures the miss
// rate at the fppw operating point on the given test crops (taken at the
// true elevation). `source_pose` is the model's training pose.
SweepResult robustness_sweep(const LinearModel& source_model, const CameraPose& source_pose,
                             const std::vector<double>& adapted_elevations,
                             const std::vector<std::vector<double>>& test_features,
                             const std::vector<int>& test_labels, const ObjectPlaneSpec& obj,
                             const CanonicalWindow& canon, int bins, RemapMode mode,
                             double fppw_point = 1e-2);

struct BenchRow {
    Pipeline pipeline = Pipeline::unadapted;
    double fps_median = 0.0;
    double fps_min = 0.0;
    double fps_max = 0.0;
    uint64_t feature_pixels = 0;  // across all frames, one pass
    uint64_t windows = 0;
    double precompute_seconds = 0.0;  // bank construction (off-line step)
};

struct BenchReport {
    std::vector<BenchRow> rows;
    int frames = 0;
    int repetitions = 0;
};

// Wall-clock comparison of the pipelines on identical frames and windows.
// Single-threaded by contract; fps is the median over repetitions. Remap
// banks are built before timing starts (they are position-dependent
// constants of the camera setup, reused across frames).
BenchReport benchmark(const std::vector<Pipeline>& pipelines, const std::vector<ImageGray>& frames,
                      const DetectorModel& model, const WindowSet& windows, int repetitions,
                      RemapMode mode = RemapMode::shared_angle);

// Rank correlation (average ranks for ties).
double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

void save_curve_csv(const EvalCurve& curve, const std::string& path);
EvalCurve load_curve_csv(const std::string& path);

struct NamedCurve {
    std::string name;
    EvalCurve curve;
};

// Log-log curve plot, one polyline per curve, decade ticks.
void write_curve_svg(const std::vector<NamedCurve>& curves, const std::string& path);

void save_bench_csv(const BenchReport& report, const std::string& path, bool include_timing);
std::string bench_table(const BenchReport& report);

} // namespace va
