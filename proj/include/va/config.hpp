#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "va/errors.hpp"
#include "va/geometry.hpp"

namespace va {

// Declarative run configuration. Plain-text key=value file with [section]
// headers; '#' starts a comment. Unknown keys are a hard error. Angle
// values accept plain radians or pi fractions ("pi/8", "3pi/16").
struct RunConfig {
    // [dataset]
    int figures = 12;
    int scenes = 6;
    int instances = 3;
    int negatives_per_scene = 20;
    int folds = 3;
    double jitter_m = 0.03;
    int frames_per_elevation = 2;
    int objects_per_frame = 3;
    int empty_frames_per_elevation = 1;
    std::vector<double> elevations{0.0, kPi / 8, kPi / 4};

    // [geometry]
    double distance_m = 6.0;
    double focal_px = 512.0;
    int image_width = 640;
    int image_height = 480;
    double person_height_m = 1.75;
    double person_width_m = 0.55;

    // [features]
    int cell_size = 8;
    int bins = 9;
    bool soft_binning = false;
    std::string remap_mode = "per-cell";  // "shared" | "per-cell"

    // [train]
    double lambda = 1e-4;
    int epochs = 50;
    int rounds = 64;

    // [windows]
    double stride_px = 8.0;
    double ground_x0 = -4.0;
    double ground_x1 = 4.0;
    double ground_y0 = -2.0;
    double ground_y1 = 20.0;

    // [eval]
    double iou_threshold = 0.5;
    double nms_iou = 0.5;
    double lamr_lo = 1e-2;
    double lamr_hi = 1.0;
    double fppw_point = 1e-2;

    // [bench]
    int repetitions = 5;

    // [output]
    std::string out_dir = "out";
    bool force = false;
    int threads = 1;
    uint64_t seed = 12345;

    CameraPose pose_at(double elevation) const;
    ObjectPlaneSpec object_spec() const;
};

double parse_angle(const std::string& s);

RunConfig load_run_config(const std::string& path);

// Applies one "section.key=value" override (command line takes precedence
// over the file).
void apply_override(RunConfig& cfg, const std::string& assignment);

// Echo of the effective configuration, written next to outputs for
// provenance.
void save_run_config(const RunConfig& cfg, const std::string& path);

} // namespace va
