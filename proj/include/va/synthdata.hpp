#pragma once

#include <string>
#include <utility>
#include <vector>

#include "va/image.hpp"
#include "va/remap.hpp"

namespace va {

// Resolved geometry and shading of one procedural planar figure. All
// lengths are meters in the object-plane frame (origin at the base
// midpoint, +u camera-right, +v up).
struct FigureParams {
    struct Disc {
        Vec2 center;
        double radius;
    };
    std::vector<Disc> discs;
    std::vector<Quad> quads;
    int pattern = 0;  // 0 solid, 1 stripes, 2 cross-stripes, 3 checker, 4 gradient
    double pattern_scale = 10.0;
    double pattern_phase = 0.0;
    double pattern_angle = 0.0;  // stripe orientation
    double tone_a = 0.8;
    double tone_b = 0.2;
    double height = 1.75;
};

// Figure family: proportions, limb articulation and interior pattern are
// drawn from the seed. Instance-level articulation jitter stands in for
// small rotations about the vertical axis.
FigureParams make_figure(uint64_t seed, double height_m, double width_m);

// Person-like but wrong-shaped clutter (bars, poles, stacked boxes,
// headless trunks) used as hard negatives; same compositing path as
// figures.
FigureParams make_distractor(uint64_t seed, double height_m, double width_m);

double figure_alpha(const FigureParams& fig, Vec2 plane_pt);
double figure_lum(const FigureParams& fig, Vec2 plane_pt);

// Smooth procedural background: oriented sinusoids plus value noise on a
// lattice. Evaluated at arbitrary 2-D coordinates (plane meters for crops,
// scaled pixels for frames).
struct BackgroundParams {
    double base = 0.5;
    struct Wave {
        double amp, kx, ky, phase;
    };
    std::vector<Wave> waves;
    // structured clutter: rotated boxes with their own tones, so negatives
    // carry strong oriented gradients and classifiers must learn shape
    struct Box {
        Vec2 center;
        double half_w, half_h, angle, tone;
    };
    std::vector<Box> boxes;
    uint64_t noise_seed = 0;
    double noise_amp = 0.1;
    double noise_scale = 1.0;  // lattice step in input units
};

BackgroundParams make_background(uint64_t seed, double feature_scale);
double background_value(const BackgroundParams& bg, Vec2 pt);

struct LightingSpec {
    double gain = 1.0;    // [0.5, 1.5]
    double offset = 0.0;  // [-0.2, 0.2]
};

// Everything that determines one rendered example. The seed fully resolves
// figure, background, lighting and placement jitter; rendering is pure.
struct SceneSpec {
    uint64_t rng_seed = 0;
    FigureParams figure;
    BackgroundParams background;
    LightingSpec lighting;
    Vec2 base_offset{0, 0};  // placement jitter on the plane, meters
    bool has_figure = true;
    Vec2 background_shift{0, 0};  // texture offset (used for negatives)
};

// Renders the canonical 64x128 crop of the example as seen from `pose`:
// the object plane (background texture plus figure) is sampled through the
// pose's plane homography composed with the crop similarity, so crops taken
// at different elevations are exactly homography-related. Returns the crop
// and the nominal object box in crop pixels.
std::pair<ImageGray, RectF> render_example(const SceneSpec& spec, const CameraPose& pose,
                                           const ObjectPlaneSpec& obj,
                                           const CanonicalWindow& canon);

struct DatasetConfig {
    int figures = 12;
    int scenes = 6;
    int instances = 3;
    std::vector<double> elevations{0.0, kPi / 8, kPi / 4};
    int negatives_per_scene = 20;  // per scene, per elevation
    int folds = 3;
    uint64_t master_seed = 12345;
    double jitter_m = 0.03;
    CameraPose base_pose;     // elevation field is overridden per entry
    ObjectPlaneSpec object;   // person geometry
    CanonicalWindow canon;
};

DatasetConfig default_dataset_config();

struct ManifestEntry {
    std::string path;  // empty when images are kept in memory only
    int label = 1;     // +1 object, -1 background
    int elevation_index = 0;
    double elevation = 0.0;
    int scene_id = 0;
    int figure_id = -1;    // -1 for negatives
    int instance_id = 0;
    RectF crop_rect;   // frame-space rectangle of the crop similarity
    RectF truth_rect;  // nominal object box in crop pixels (positives)
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    int folds = 3;

    // Scene/figure-disjoint cross-validation membership. An entry is test
    // material for fold f when both its figure and scene groups equal f
    // (scene only, for negatives); train material when neither does.
    bool in_test_fold(size_t i, int fold) const;
    bool in_train_fold(size_t i, int fold) const;
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<ImageGray> images;  // parallel to manifest.entries
    DatasetConfig config;

    CameraPose pose_for(int elevation_index) const;
};

// Generates the full crop dataset deterministically from the config seed.
// Counts: figures x scenes x instances x elevations positives plus
// scenes x elevations x negatives_per_scene negatives.
Dataset make_dataset(const DatasetConfig& config);

void save_dataset(const Dataset& ds, const std::string& dir, DatasetManifest* with_paths);
void save_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

// Full-frame detection scenes: a frame-space background with figures
// composited at ground positions snapped to `snap_stride_m` (0 disables
// snapnig). Truth boxes use the detector's window convention: the projected
// canonical window at the object's position.
struct FrameExample {
    ImageGray image;
    std::vector<RectF> truth_rects;
    std::vector<Vec2> truth_positions;
    double elevation = 0.0;
    int scene_id = 0;
};

FrameExample render_frame(uint64_t seed, const CameraPose& pose, const ObjectPlaneSpec& obj,
                          const CanonicalWindow& canon, int n_objects, const RectF& ground_extent,
                          double snap_stride_m);

} // namespace va
