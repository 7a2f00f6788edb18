#include "va/detector.hpp"

#include <algorithm>
#include <cmath>

#include "va/rng.hpp"
#include "va/util.hpp"

namespace va {

double world_stride(double pixel_stride_px, double object_height_m, double object_height_px) {
    if (!(pixel_stride_px > 0.0) || !(object_height_m > 0.0) || !(object_height_px > 0.0))
        throw NonPositiveInputError("world_stride inputs must be positive");
    return pixel_stride_px * object_height_m / object_height_px;
}

std::string to_string(Pipeline p) {
    switch (p) {
        case Pipeline::unadapted: return "unadapted";
        case Pipeline::image_warp: return "image-warp";
        case Pipeline::classifier_adapt: return "classifier-adapt";
        default: return "feature-remap";
    }
}

Pipeline pipeline_from_string(const std::string& s) {
    if (s == "unadapted") return Pipeline::unadapted;
    if (s == "image-warp") return Pipeline::image_warp;
    if (s == "classifier-adapt") return Pipeline::classifier_adapt;
    if (s == "feature-remap") return Pipeline::feature_remap;
    throw InvalidConfigError("unknown pipeline: " + s);
}

namespace {

double rect_distance(const RectF& a, const RectF& b) {
    return std::max(std::max(std::abs(a.x0 - b.x0), std::abs(a.y0 - b.y0)),
                    std::max(std::abs(a.x1 - b.x1), std::abs(a.y1 - b.y1)));
}

// Frame-grid cells overlapped by `rect`; nullopt when the rect misses the
// grid entirely.
std::optional<CellGrid> patch_for_rect(const RectF& rect, int frame_w, int frame_h,
                                       int cell_size) {
    CellGrid frame = frame_grid(frame_w, frame_h, cell_size);
    if (frame.cols < 1 || frame.rows < 1) return std::nullopt;
    int cx0 = static_cast<int>(std::floor(rect.x0 / cell_size));
    int cy0 = static_cast<int>(std::floor(rect.y0 / cell_size));
    int cx1 = static_cast<int>(std::ceil(rect.x1 / cell_size)) - 1;
    int cy1 = static_cast<int>(std::ceil(rect.y1 / cell_size)) - 1;
    cx0 = std::max(cx0, 0);
    cy0 = std::max(cy0, 0);
    cx1 = std::min(cx1, frame.cols - 1);
    cy1 = std::min(cy1, frame.rows - 1);
    if (cx1 < cx0 || cy1 < cy0) return std::nullopt;
    CellGrid patch;
    patch.cell_size = cell_size;
    patch.origin_x = cx0 * cell_size;
    patch.origin_y = cy0 * cell_size;
    patch.cols = cx1 - cx0 + 1;
    patch.rows = cy1 - cy0 + 1;
    return patch;
}

uint64_t window_key(const Homography& h, const CellGrid& patch, const CanonicalWindow& canon) {
    CellGrid out;
    out.cell_size = patch.cell_size;
    out.cols = canon.width_px / patch.cell_size;
    out.rows = canon.height_px / patch.cell_size;
    return remap_key(out, patch, 0, RemapMode::shared_angle, h);
}

} // namespace

WindowSet generate_windows(const CameraPose& scene_pose, const RectF& ground_extent,
                           double stride_m, const ObjectPlaneSpec& obj,
                           const CameraPose& model_pose, const CanonicalWindow& canon,
                           int cell_size) {
    if (!(stride_m > 0.0)) throw NonPositiveInputError("stride must be positive");
    if (!(ground_extent.x1 >= ground_extent.x0 && ground_extent.y1 >= ground_extent.y0))
        throw NonPositiveInputError("ground extent is empty");
    scene_pose.validate();

    WorldCamera cam = camera_for_pose(scene_pose, Vec3{0, 0, 0});
    Homography view_to_plane = model_view_to_plane(model_pose, obj, canon);

    // lattice of candidate positions, then near-to-far ordering
    std::vector<Vec2> positions;
    for (double y = ground_extent.y0; y <= ground_extent.y1 + 1e-9; y += stride_m)
        for (double x = ground_extent.x0; x <= ground_extent.x1 + 1e-9; x += stride_m)
            positions.push_back({x, y});
    std::sort(positions.begin(), positions.end(), [&](Vec2 a, Vec2 b) {
        double da = std::hypot(a.x - cam.center.x, a.y - cam.center.y);
        double db = std::hypot(b.x - cam.center.x, b.y - cam.center.y);
        if (da != db) return da < db;
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });

    WindowSet ws;
    ws.scene_pose = scene_pose;
    ws.canon = canon;
    ws.cell_size = cell_size;
    const double fw = scene_pose.image_width;
    const double fh = scene_pose.image_height;
    for (Vec2 p : positions) {
        Homography plane_to_image;
        try {
            plane_to_image = object_plane_homography(cam, Vec3{p.x, p.y, 0.0});
        } catch (const NonInvertibleError&) {
            continue;
        }
        Homography h_st = multiply(plane_to_image, view_to_plane);
        // cull windows whose plane region reaches behind the camera
        {
            Vec3 horiz{p.x - cam.center.x, p.y - cam.center.y, 0.0};
            double hn = std::hypot(horiz.x, horiz.y);
            Vec3 u_axis = cross(Vec3{horiz.x / hn, horiz.y / hn, 0.0}, Vec3{0, 0, 1});
            Vec2 top = transform_point(view_to_plane, {canon.width_px / 2.0, 0.0});
            Vec2 bot = transform_point(view_to_plane,
                                       {canon.width_px / 2.0, static_cast<double>(canon.height_px)});
            bool behind = false;
            for (Vec2 pp : {top, bot}) {
                Vec3 world = Vec3{p.x, p.y, 0.0} + pp.x * u_axis + Vec3{0, 0, pp.y};
                if (dot(cam.rot[2], world - cam.center) < 0.05) behind = true;
            }
            if (behind) continue;
        }
        RectF rect;
        bool ok = true;
        const Vec2 corners[4] = {{0, 0},
                                 {static_cast<double>(canon.width_px), 0},
                                 {static_cast<double>(canon.width_px),
                                  static_cast<double>(canon.height_px)},
                                 {0, static_cast<double>(canon.height_px)}};
        for (int c = 0; c < 4; ++c) {
            Vec2 q;
            try {
                q = transform_point(h_st, corners[c]);
            } catch (const PointAtInfinityError&) {
                ok = false;
                break;
            }
            if (c == 0) {
                rect = {q.x, q.y, q.x, q.y};
            } else {
                rect.x0 = std::min(rect.x0, q.x);
                rect.y0 = std::min(rect.y0, q.y);
                rect.x1 = std::max(rect.x1, q.x);
                rect.y1 = std::max(rect.y1, q.y);
            }
        }
        if (!ok) continue;
        // behind-the-camera projections produce inverted or absurd rects
        if (!(rect.x1 > rect.x0 && rect.y1 > rect.y0)) continue;
        if (rect.x1 <= 0 || rect.y1 <= 0 || rect.x0 >= fw || rect.y0 >= fh) continue;
        // mostly-offscreen windows have too little support to score
        double vis_w = std::min(rect.x1, fw) - std::max(rect.x0, 0.0);
        double vis_h = std::min(rect.y1, fh) - std::max(rect.y0, 0.0);
        if (vis_w * vis_h < 0.5 * rect.area()) continue;
        auto patch = patch_for_rect(rect, scene_pose.image_width, scene_pose.image_height,
                                    cell_size);
        if (!patch) continue;
        bool too_close = false;
        for (const WindowInfo& w : ws.entries) {
            if (rect_distance(rect, w.image_rect) < kMinRectSeparationPx) {
                too_close = true;
                break;
            }
        }
        if (too_close) continue;
        WindowInfo info;
        info.world_pos = p;
        info.image_rect = rect;
        info.h_st = h_st;
        info.patch = *patch;
        info.remap_key = window_key(h_st, *patch, canon);
        ws.entries.push_back(info);
    }
    if (ws.entries.empty()) throw EmptyWindowSetError("no candidate window projects into the frame");
    return ws;
}

RemapBank build_remap_bank(const WindowSet& windows, const DetectorModel& model, RemapMode mode,
                           int threads) {
    CellGrid out = canonical_grid(model.cell_size);
    const int n = static_cast<int>(windows.entries.size());
    std::vector<RemapBankEntry> built(static_cast<size_t>(n));
    const double cell_area = static_cast<double>(out.cell_size) * out.cell_size;
    parallel_for(n, threads, [&](int i) {
        const WindowInfo& w = windows.entries[static_cast<size_t>(i)];
        RemapBankEntry e;
        e.patch = w.patch;
        // Windows come at all image scales; per-cell area normalization puts
        // their scores on the canonical-window footing. Intensity sums scale
        // with projected area; gradient magnitudes scale with its square
        // root (the directional stretch).
        std::vector<double> areas = projected_cell_areas(out, w.h_st);
        std::vector<double> area_scale(areas.size(), 0.0);
        std::vector<double> grad_scale(areas.size(), 0.0);
        for (size_t k = 0; k < areas.size(); ++k)
            if (areas[k] > kEpsArea) {
                area_scale[k] = cell_area / areas[k];
                grad_scale[k] = std::sqrt(area_scale[k]);
            }
        if (model.feature_kind() == FeatureKind::hog) {
            RemapMatrices rm = build_feature_remap(out, w.patch, w.h_st, model.bins, mode);
            std::vector<double> per_row(static_cast<size_t>(rm.G.rows()));
            for (int r = 0; r < rm.G.rows(); ++r)
                per_row[static_cast<size_t>(r)] = grad_scale[static_cast<size_t>(r / model.bins)];
            e.G = scale_rows(rm.G, per_row);
        } else {
            CellOverlapResult ov = cell_overlap_matrix(out, w.patch, w.h_st);
            SparseMatrix G = channel_sum_remap(ov.S);
            const int K = out.cell_count();
            std::vector<double> per_row(static_cast<size_t>(G.rows()));
            for (int r = 0; r < G.rows(); ++r)
                per_row[static_cast<size_t>(r)] =
                    r < K ? area_scale[static_cast<size_t>(r)] : grad_scale[static_cast<size_t>(r - K)];
            e.G = scale_rows(G, per_row);
        }
        if (model.kind == DetectorModel::Kind::linear)
            e.adapted_weights = e.G.transpose_apply(model.linear.weights);
        built[static_cast<size_t>(i)] = std::move(e);
    });
    RemapBank bank;
    for (int i = 0; i < n; ++i)
        bank.entries[windows.entries[static_cast<size_t>(i)].remap_key] =
            std::move(built[static_cast<size_t>(i)]);
    return bank;
}

namespace {

std::vector<double> gather_hog_patch(const HogDescriptor& frame_hog, const CellGrid& patch) {
    const CellGrid& fg = frame_hog.grid;
    const int B = frame_hog.bins;
    std::vector<double> x(static_cast<size_t>(patch.cell_count()) * B, 0.0);
    int base_cx = (patch.origin_x - fg.origin_x) / fg.cell_size;
    int base_cy = (patch.origin_y - fg.origin_y) / fg.cell_size;
    for (int cy = 0; cy < patch.rows; ++cy)
        for (int cx = 0; cx < patch.cols; ++cx) {
            int src = fg.cell_index(base_cx + cx, base_cy + cy);
            int dst = patch.cell_index(cx, cy);
            for (int b = 0; b < B; ++b)
                x[static_cast<size_t>(dst) * B + b] =
                    frame_hog.values[static_cast<size_t>(src) * B + b];
        }
    return x;
}

std::vector<double> gather_sum_patch(const ChannelSums& frame_sums, const CellGrid& patch) {
    const CellGrid& fg = frame_sums.grid;
    std::vector<double> x(static_cast<size_t>(kChannelCount) * patch.cell_count(), 0.0);
    int base_cx = (patch.origin_x - fg.origin_x) / fg.cell_size;
    int base_cy = (patch.origin_y - fg.origin_y) / fg.cell_size;
    for (int c = 0; c < kChannelCount; ++c)
        for (int cy = 0; cy < patch.rows; ++cy)
            for (int cx = 0; cx < patch.cols; ++cx) {
                int src = fg.cell_index(base_cx + cx, base_cy + cy);
                int dst = patch.cell_index(cx, cy);
                x[static_cast<size_t>(c) * patch.cell_count() + dst] =
                    frame_sums.values[static_cast<size_t>(c) * fg.cell_count() + src];
            }
    return x;
}

std::vector<double> window_features(const ImageGray& crop, const DetectorModel& model) {
    CellGrid grid = canonical_grid(model.cell_size);
    if (model.feature_kind() == FeatureKind::hog)
        return compute_hog(crop, grid, model.bins).values;
    return compute_channel_sums(crop, grid).values;
}

} // namespace

std::vector<Detection> detect_warped(const ImageGray& frame, const DetectorModel& model,
                                     const WindowSet& windows, Pipeline pipeline,
                                     WorkCounters* work, int threads) {
    if (pipeline != Pipeline::unadapted && pipeline != Pipeline::image_warp)
        throw InvalidConfigError("detect_warped handles unadapted and image-warp pipelines");
    const int n = static_cast<int>(windows.entries.size());
    const CanonicalWindow& canon = windows.canon;
    std::vector<Detection> dets(static_cast<size_t>(n));
    parallel_for(n, threads, [&](int i) {
        const WindowInfo& w = windows.entries[static_cast<size_t>(i)];
        Homography h = w.h_st;
        if (pipeline == Pipeline::unadapted) {
            // plain axis-aligned stretch of the rect onto the canonical window
            std::array<double, 9> m{w.image_rect.width() / canon.width_px, 0, w.image_rect.x0,
                                    0, w.image_rect.height() / canon.height_px, w.image_rect.y0,
                                    0, 0, 1};
            h = make_homography(m);
        }
        ImageGray crop = warp_window(frame, h, canon.width_px, canon.height_px);
        Detection d;
        d.window_index = i;
        d.image_rect = w.image_rect;
        d.world_pos = w.world_pos;
        d.pipeline = pipeline;
        d.score = model.score(window_features(crop, model));
        dets[static_cast<size_t>(i)] = d;
    });
    if (work) {
        work->windows += static_cast<uint64_t>(n);
        work->feature_pixels += static_cast<uint64_t>(n) *
                                static_cast<uint64_t>(canon.width_px) *
                                static_cast<uint64_t>(canon.height_px);
    }
    return dets;
}

std::vector<Detection> detect_adapted(const ImageGray& frame, const DetectorModel& model,
                                      const WindowSet& windows, const RemapBank& bank,
                                      Pipeline pipeline, WorkCounters* work, int threads) {
    if (pipeline != Pipeline::classifier_adapt && pipeline != Pipeline::feature_remap)
        throw InvalidConfigError("detect_adapted handles classifier-adapt and feature-remap");
    if (pipeline == Pipeline::classifier_adapt && model.kind != DetectorModel::Kind::linear)
        throw InvalidConfigError("classifier-adapt requires a linear model");

    // whole-frame features, computed once
    CellGrid fg = frame_grid(frame.width, frame.height, model.cell_size);
    HogDescriptor frame_hog;
    ChannelSums frame_sums;
    if (model.feature_kind() == FeatureKind::hog)
        frame_hog = compute_hog(frame, fg, model.bins);
    else
        frame_sums = compute_channel_sums(frame, fg);
    if (work)
        work->feature_pixels +=
            static_cast<uint64_t>(frame.width) * static_cast<uint64_t>(frame.height);

    const int n = static_cast<int>(windows.entries.size());
    std::vector<Detection> dets(static_cast<size_t>(n));
    parallel_for(n, threads, [&](int i) {
        const WindowInfo& w = windows.entries[static_cast<size_t>(i)];
        const RemapBankEntry& entry = bank.lookup(w.remap_key);
        std::vector<double> x = model.feature_kind() == FeatureKind::hog
                                    ? gather_hog_patch(frame_hog, entry.patch)
                                    : gather_sum_patch(frame_sums, entry.patch);
        Detection d;
        d.window_index = i;
        d.image_rect = w.image_rect;
        d.world_pos = w.world_pos;
        d.pipeline = pipeline;
        if (pipeline == Pipeline::classifier_adapt) {
            double s = model.linear.bias;
            for (size_t k = 0; k < x.size(); ++k) s += entry.adapted_weights[k] * x[k];
            d.score = s;
        } else {
            d.score = model.score(apply_remap(entry.G, x));
        }
        dets[static_cast<size_t>(i)] = d;
    });
    if (work) work->windows += static_cast<uint64_t>(n);
    return dets;
}

std::vector<Detection> non_max_suppress(std::vector<Detection> detections, double iou_threshold) {
    std::stable_sort(detections.begin(), detections.end(),
                     [](const Detection& a, const Detection& b) { return a.score > b.score; });
    std::vector<Detection> kept;
    for (const Detection& d : detections) {
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (rect_iou(d.image_rect, k.image_rect) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

} // namespace va
