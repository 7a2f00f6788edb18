#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "va/classifier.hpp"
#include "va/features.hpp"
#include "va/image.hpp"
#include "va/remap.hpp"

namespace va {

// Minimum image-space separation (in the L-inf metric over the rect tuple
// (x0, y0, x1, y1)) between two candidate detection windows.
constexpr double kMinRectSeparationPx = 1.0;

// Converts a pixel-space detector stride into a ground-plane stride in
// meters: stride_px * object_height_m / object_height_px.
double world_stride(double pixel_stride_px, double object_height_m, double object_height_px);

struct WindowInfo {
    Vec2 world_pos;      // meters on the ground plane
    RectF image_rect;    // bounding box of the projected canonical window
    Homography h_st;     // canonical model-view pixels -> frame pixels
    uint64_t remap_key = 0;
    CellGrid patch;      // frame-grid cells this window reads
};

struct WindowSet {
    std::vector<WindowInfo> entries;
    CameraPose scene_pose;
    CanonicalWindow canon;
    int cell_size = 8;
};

// Candidate windows for a fixed scene camera: a stride_m lattice of ground
// positions inside ground_extent (x across, y depth, meters around the
// camera's aim point), each projected through its own object-plane
// homography. Positions are scanned near to far; a window whose rect comes
// closer than 1 px (tuple L-inf) to an accepted one is dropped, as are
// windows that miss the frame or its cell grid. Each entry's h_st relates
// the trained model's canonical view (from model_pose) to this window.
WindowSet generate_windows(const CameraPose& scene_pose, const RectF& ground_extent,
                           double stride_m, const ObjectPlaneSpec& obj,
                           const CameraPose& model_pose, const CanonicalWindow& canon,
                           int cell_size = 8);

enum class Pipeline { unadapted, image_warp, classifier_adapt, feature_remap };

std::string to_string(Pipeline p);
Pipeline pipeline_from_string(const std::string& s);

struct Detection {
    int window_index = -1;
    RectF image_rect;
    Vec2 world_pos;
    double score = 0.0;
    Pipeline pipeline = Pipeline::unadapted;
};

// Either model type plus its feature configuration.
struct DetectorModel {
    enum class Kind { linear, stumps } kind = Kind::linear;
    LinearModel linear;
    StumpEnsemble stumps;
    int bins = 9;
    int cell_size = 8;

    FeatureKind feature_kind() const {
        return kind == Kind::linear ? linear.feature_kind : stumps.feature_kind;
    }
    const CameraPose& training_view() const {
        return kind == Kind::linear ? linear.training_view : stumps.training_view;
    }
    double score(std::span<const double> x) const {
        return kind == Kind::linear ? linear.score(x) : stumps.score(x);
    }
};

// Per-window precomputed adaptation parameters: the sparse feature remap
// from the window's frame-grid patch into the model's canonical feature
// space, and (for linear models) the pre-adapted weight vector over the
// patch so scoring is a single dot product.
struct RemapBankEntry {
    SparseMatrix G;
    std::vector<double> adapted_weights;
    CellGrid patch;
};

struct RemapBank {
    std::unordered_map<uint64_t, RemapBankEntry> entries;

    const RemapBankEntry& lookup(uint64_t key) const {
        auto it = entries.find(key);
        if (it == entries.end())
            throw MissingCacheEntryError("no remap bank entry for this window");
        return it->second;
    }
};

// Builds the bank for every window (the off-line step; at run time entries
// are only looked up).
RemapBank build_remap_bank(const WindowSet& windows, const DetectorModel& model,
                           RemapMode mode = RemapMode::shared_angle, int threads = 1);

struct WorkCounters {
    uint64_t feature_pixels = 0;  // pixels touched by feature computation
    uint64_t windows = 0;
};

// Per-window resample-and-score pipelines. `unadapted` stretches each rect
// to the canonical window with a plain axis-aligned scale (no perspective
// correction); `image_warp` resamples through the window's full h_st.
std::vector<Detection> detect_warped(const ImageGray& frame, const DetectorModel& model,
                                     const WindowSet& windows, Pipeline pipeline,
                                     WorkCounters* work = nullptr, int threads = 1);

// Algorithm with frame-level features: descriptors are computed once over
// the whole frame; each window gathers its patch and either scores with
// pre-adapted weights (classifier_adapt, linear models only) or remaps the
// patch through its cached G and scores the original model (feature_remap).
std::vector<Detection> detect_adapted(const ImageGray& frame, const DetectorModel& model,
                                      const WindowSet& windows, const RemapBank& bank,
                                      Pipeline pipeline, WorkCounters* work = nullptr,
                                      int threads = 1);

// Greedy non-maximum suppression by descending score.
std::vector<Detection> non_max_suppress(std::vector<Detection> detections, double iou_threshold);

} // namespace va
