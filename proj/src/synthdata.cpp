#include "va/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "va/rng.hpp"
#include "va/util.hpp"

namespace va {

namespace {

bool point_in_quad(const Quad& q, Vec2 p) {
    // convex, consistent winding: same side of every edge
    double sign = 0.0;
    for (int i = 0; i < 4; ++i) {
        Vec2 a = q.corners[static_cast<size_t>(i)];
        Vec2 b = q.corners[static_cast<size_t>((i + 1) % 4)];
        double c = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if (c != 0.0) {
            if (sign == 0.0)
                sign = c;
            else if ((c > 0) != (sign > 0))
                return false;
        }
    }
    return true;
}

Quad limb_quad(Vec2 from, Vec2 to, double half_width) {
    Vec2 d{to.x - from.x, to.y - from.y};
    double len = std::hypot(d.x, d.y);
    Vec2 n{-d.y / len * half_width, d.x / len * half_width};
    Quad q;
    q.corners = {Vec2{from.x + n.x, from.y + n.y}, Vec2{to.x + n.x, to.y + n.y},
                 Vec2{to.x - n.x, to.y - n.y}, Vec2{from.x - n.x, from.y - n.y}};
    return q;
}

} // namespace

FigureParams make_figure(uint64_t seed, double height_m, double width_m) {
    Rng rng(seed);
    FigureParams f;
    f.height = height_m;
    const double h = height_m;
    double head_r = rng.uniform(0.055, 0.07) * h;
    double shoulder_half = rng.uniform(0.30, 0.45) * width_m / 2.0 * 1.6;
    double hip_half = shoulder_half * rng.uniform(0.7, 0.95);
    double shoulder_v = 0.78 * h;
    double hip_v = rng.uniform(0.46, 0.52) * h;
    double head_c = 0.92 * h - head_r * 0.2;
    double limb_hw = rng.uniform(0.030, 0.045) * h;
    double arm_angle = rng.uniform(0.08, 0.40);
    double leg_spread = rng.uniform(0.05, 0.28);

    f.discs.push_back({{0.0, head_c}, head_r});
    // neck
    f.quads.push_back(limb_quad({0.0, shoulder_v}, {0.0, head_c}, limb_hw));
    // torso trapezoid
    Quad torso;
    torso.corners = {Vec2{-shoulder_half, shoulder_v}, Vec2{shoulder_half, shoulder_v},
                     Vec2{hip_half, hip_v}, Vec2{-hip_half, hip_v}};
    f.quads.push_back(torso);
    // arms
    double arm_len = 0.32 * h;
    for (int side = -1; side <= 1; side += 2) {
        Vec2 from{side * shoulder_half * 0.9, shoulder_v - 0.02 * h};
        double ang = arm_angle * rng.uniform(0.8, 1.2);
        Vec2 to{from.x + side * arm_len * std::sin(ang), from.y - arm_len * std::cos(ang)};
        f.quads.push_back(limb_quad(from, to, limb_hw));
    }
    // legs
    for (int side = -1; side <= 1; side += 2) {
        Vec2 from{side * hip_half * 0.55, hip_v};
        double ang = leg_spread * rng.uniform(0.8, 1.2);
        Vec2 to{from.x + side * hip_v * std::tan(ang) * 0.8, 0.0};
        f.quads.push_back(limb_quad(from, to, limb_hw * 1.2));
    }

    f.pattern = static_cast<int>(rng.next_below(5));
    // cap pattern frequency well below the feature-cell Nyquist rate so
    // textures resample cleanly; orient stripes randomly
    f.pattern_scale = rng.uniform(8.0, 20.0);
    f.pattern_angle = rng.uniform(0.0, kPi);
    f.pattern_phase = rng.uniform(0.0, 6.28);
    double bright = rng.next_double() < 0.5 ? 1.0 : 0.0;
    f.tone_a = bright > 0.5 ? rng.uniform(0.75, 0.95) : rng.uniform(0.05, 0.25);
    f.tone_b = bright > 0.5 ? rng.uniform(0.25, 0.5) : rng.uniform(0.5, 0.75);
    return f;
}

FigureParams make_distractor(uint64_t seed, double height_m, double width_m) {
    Rng rng(seed);
    FigureParams f;
    f.height = height_m;
    const double h = height_m;
    int type = static_cast<int>(rng.next_below(5));
    auto box = [&](double cx, double cy, double hw, double hh) {
        Quad q;
        q.corners = {Vec2{cx - hw, cy + hh}, Vec2{cx + hw, cy + hh}, Vec2{cx + hw, cy - hh},
                     Vec2{cx - hw, cy - hh}};
        f.quads.push_back(q);
    };
    switch (type) {
        case 0: {  // single pole
            double hw = rng.uniform(0.05, 0.22) * h * 0.4;
            double top = rng.uniform(0.7, 1.3) * h;
            box(0.0, top / 2, hw, top / 2);
            break;
        }
        case 1: {  // two parallel bars
            double hw = rng.uniform(0.03, 0.08) * h;
            double gap = rng.uniform(0.08, 0.2) * h;
            double top = rng.uniform(0.8, 1.1) * h;
            box(-gap, top / 2, hw, top / 2);
            box(gap, top / 2, hw, top / 2);
            break;
        }
        case 2: {  // blob on a stand
            double r = rng.uniform(0.15, 0.3) * h;
            double cy = rng.uniform(0.45, 0.7) * h;
            f.discs.push_back({{0.0, cy}, r});
            box(0.0, cy / 2, 0.04 * h, cy / 2);
            break;
        }
        case 3: {  // stacked boxes
            double y = 0.0;
            int nlev = 2 + static_cast<int>(rng.next_below(2));
            for (int i = 0; i < nlev; ++i) {
                double hh = rng.uniform(0.12, 0.25) * h;
                double hw = rng.uniform(0.5, 1.4) * width_m / 2;
                box(rng.uniform(-0.05, 0.05) * h, y + hh, hw, hh);
                y += 2 * hh;
            }
            break;
        }
        default: {  // headless wide trunk
            double hw = rng.uniform(0.9, 1.6) * width_m / 2;
            double top = rng.uniform(0.5, 0.85) * h;
            box(0.0, top / 2, hw, top / 2);
            break;
        }
    }
    f.pattern = static_cast<int>(rng.next_below(5));
    f.pattern_scale = rng.uniform(8.0, 20.0);
    f.pattern_angle = rng.uniform(0.0, kPi);
    f.pattern_phase = rng.uniform(0.0, 6.28);
    double bright = rng.next_double() < 0.5 ? 1.0 : 0.0;
    f.tone_a = bright > 0.5 ? rng.uniform(0.75, 0.95) : rng.uniform(0.05, 0.25);
    f.tone_b = bright > 0.5 ? rng.uniform(0.25, 0.5) : rng.uniform(0.5, 0.75);
    return f;
}

double figure_alpha(const FigureParams& fig, Vec2 p) {
    for (const auto& d : fig.discs) {
        double dx = p.x - d.center.x, dy = p.y - d.center.y;
        if (dx * dx + dy * dy <= d.radius * d.radius) return 1.0;
    }
    for (const auto& q : fig.quads)
        if (point_in_quad(q, p)) return 1.0;
    return 0.0;
}

double figure_lum(const FigureParams& fig, Vec2 p) {
    double ca = std::cos(fig.pattern_angle), sa = std::sin(fig.pattern_angle);
    double along = p.x * ca + p.y * sa;
    double across = -p.x * sa + p.y * ca;
    switch (fig.pattern) {
        case 1:
            return std::sin(along * fig.pattern_scale + fig.pattern_phase) > 0 ? fig.tone_a
                                                                               : fig.tone_b;
        case 2:
            return std::sin(across * fig.pattern_scale + fig.pattern_phase) > 0 ? fig.tone_a
                                                                               : fig.tone_b;
        case 3: {
            double s = std::sin(along * fig.pattern_scale) * std::sin(across * fig.pattern_scale);
            return s > 0 ? fig.tone_a : fig.tone_b;
        }
        case 4: {
            double t = std::clamp(p.y / fig.height, 0.0, 1.0);
            double v = fig.tone_a + (fig.tone_b - fig.tone_a) * t;
            return v + 0.12 * std::sin(along * fig.pattern_scale + fig.pattern_phase);
        }
        default:
            return fig.tone_a;
    }
}

BackgroundParams make_background(uint64_t seed, double feature_scale) {
    Rng rng(seed);
    BackgroundParams bg;
    bg.base = rng.uniform(0.35, 0.65);
    int n = 2 + static_cast<int>(rng.next_below(3));
    for (int i = 0; i < n; ++i) {
        double ang = rng.uniform(0.0, kPi);
        double k = rng.uniform(0.5, 2.5) / feature_scale;
        bg.waves.push_back({rng.uniform(0.03, 0.10), k * std::cos(ang), k * std::sin(ang),
                            rng.uniform(0.0, 6.28)});
    }
    int nb = 5 + static_cast<int>(rng.next_below(5));
    for (int i = 0; i < nb; ++i) {
        BackgroundParams::Box b;
        b.center = {rng.uniform(-6.0, 6.0) * feature_scale, rng.uniform(-2.0, 6.0) * feature_scale};
        b.half_w = rng.uniform(0.1, 0.9) * feature_scale;
        b.half_h = rng.uniform(0.1, 0.9) * feature_scale;
        b.angle = rng.uniform(0.0, kPi);
        b.tone = rng.next_double() < 0.5 ? rng.uniform(0.05, 0.3) : rng.uniform(0.7, 0.95);
        bg.boxes.push_back(b);
    }
    bg.noise_seed = rng.next_u64();
    bg.noise_amp = rng.uniform(0.04, 0.12);
    bg.noise_scale = feature_scale * rng.uniform(0.5, 1.5);
    return bg;
}

namespace {

double lattice_noise(uint64_t seed, double x, double y) {
    auto hash01 = [&](int64_t ix, int64_t iy) {
        uint64_t h = hash_combine(seed, static_cast<uint64_t>(ix) * 0x9E3779B97F4A7C15ULL ^
                                            static_cast<uint64_t>(iy));
        return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    };
    double fx = std::floor(x), fy = std::floor(y);
    int64_t ix = static_cast<int64_t>(fx), iy = static_cast<int64_t>(fy);
    double tx = x - fx, ty = y - fy;
    // smoothstep weights
    tx = tx * tx * (3 - 2 * tx);
    ty = ty * ty * (3 - 2 * ty);
    double v00 = hash01(ix, iy), v10 = hash01(ix + 1, iy);
    double v01 = hash01(ix, iy + 1), v11 = hash01(ix + 1, iy + 1);
    return (v00 * (1 - tx) + v10 * tx) * (1 - ty) + (v01 * (1 - tx) + v11 * tx) * ty;
}

} // namespace

double background_value(const BackgroundParams& bg, Vec2 pt) {
    for (const auto& b : bg.boxes) {
        double dx = pt.x - b.center.x, dy = pt.y - b.center.y;
        double lx = dx * std::cos(b.angle) + dy * std::sin(b.angle);
        double ly = -dx * std::sin(b.angle) + dy * std::cos(b.angle);
        if (std::abs(lx) <= b.half_w && std::abs(ly) <= b.half_h) {
            double v = b.tone + 0.05 * lattice_noise(bg.noise_seed ^ 0x626f78ULL,
                                                     pt.x / bg.noise_scale, pt.y / bg.noise_scale);
            return std::clamp(v, 0.02, 0.98);
        }
    }
    double v = bg.base;
    for (const auto& w : bg.waves) v += w.amp * std::sin(w.kx * pt.x + w.ky * pt.y + w.phase);
    v += bg.noise_amp * lattice_noise(bg.noise_seed, pt.x / bg.noise_scale, pt.y / bg.noise_scale);
    return std::clamp(v, 0.02, 0.98);
}

std::pair<ImageGray, RectF> render_example(const SceneSpec& spec, const CameraPose& pose,
                                           const ObjectPlaneSpec& obj,
                                           const CanonicalWindow& canon) {
    Homography plane_to_image = build_object_plane_homography(pose, obj);
    Homography crop_sim = canonical_crop_similarity(plane_to_image, canon);
    // crop pixels -> plane meters, exact
    Homography crop_to_plane = multiply(invert(plane_to_image), crop_sim);

    ImageGray out(canon.width_px, canon.height_px);
    const double ss[2] = {0.25, 0.75};  // 2x2 supersampling offsets
    for (int y = 0; y < canon.height_px; ++y) {
        for (int x = 0; x < canon.width_px; ++x) {
            double acc = 0.0;
            for (double oy : ss)
                for (double ox : ss) {
                    Vec2 pt = transform_point(crop_to_plane, {x + ox, y + oy});
                    Vec2 bg_pt{pt.x + spec.background_shift.x, pt.y + spec.background_shift.y};
                    double v = background_value(spec.background, bg_pt);
                    if (spec.has_figure) {
                        Vec2 fp{pt.x - spec.base_offset.x, pt.y - spec.base_offset.y};
                        double a = figure_alpha(spec.figure, fp);
                        if (a > 0.0) v = v * (1.0 - a) + figure_lum(spec.figure, fp) * a;
                    }
                    acc += v;
                }
            double v = acc / 4.0;
            v = spec.lighting.gain * v + spec.lighting.offset;
            out.at(x, y) = std::clamp(v, 0.0, 1.0);
        }
    }

    // nominal object box mapped into crop pixels
    Homography plane_to_crop = invert(crop_to_plane);
    RectF box;
    bool first = true;
    for (double u : {-obj.width / 2, obj.width / 2})
        for (double v : {0.0, obj.height}) {
            Vec2 c = transform_point(plane_to_crop,
                                     {u + spec.base_offset.x, v + spec.base_offset.y});
            if (first) {
                box = {c.x, c.y, c.x, c.y};
                first = false;
            } else {
                box.x0 = std::min(box.x0, c.x);
                box.y0 = std::min(box.y0, c.y);
                box.x1 = std::max(box.x1, c.x);
                box.y1 = std::max(box.y1, c.y);
            }
        }
    return {std::move(out), box};
}

DatasetConfig default_dataset_config() {
    DatasetConfig c;
    c.base_pose.elevation = 0.0;
    c.base_pose.distance = 6.0;
    c.base_pose.focal_length = 512.0;
    c.base_pose.principal_point = {320.0, 240.0};
    c.base_pose.image_width = 640;
    c.base_pose.image_height = 480;
    c.object.height = 1.75;
    c.object.width = 0.55;
    c.object.base_point = {0, 0, 0};
    return c;
}

bool DatasetManifest::in_test_fold(size_t i, int fold) const {
    const ManifestEntry& e = entries[i];
    int scene_fold = e.scene_id % folds;
    if (e.label == 1) {
        int fig_fold = e.figure_id % folds;
        return fig_fold == fold && scene_fold == fold;
    }
    return scene_fold == fold;
}

bool DatasetManifest::in_train_fold(size_t i, int fold) const {
    const ManifestEntry& e = entries[i];
    int scene_fold = e.scene_id % folds;
    if (e.label == 1) {
        int fig_fold = e.figure_id % folds;
        return fig_fold != fold && scene_fold != fold;
    }
    return scene_fold != fold;
}

CameraPose Dataset::pose_for(int elevation_index) const {
    CameraPose p = config.base_pose;
    p.elevation = config.elevations[static_cast<size_t>(elevation_index)];
    return p;
}

Dataset make_dataset(const DatasetConfig& config) {
    if (config.figures < 2 || config.scenes < 2 || config.folds < 2 ||
        config.figures < config.folds || config.scenes < config.folds)
        throw InsufficientDiversityError(
            "dataset needs >= 2 figures and scenes and enough of each for the fold split");
    Dataset ds;
    ds.config = config;
    ds.manifest.folds = config.folds;

    uint64_t figures_seed = derive_seed(config.master_seed, "figures");
    uint64_t scenes_seed = derive_seed(config.master_seed, "scenes");
    uint64_t instances_seed = derive_seed(config.master_seed, "instances");
    uint64_t negatives_seed = derive_seed(config.master_seed, "negatives");

    std::vector<BackgroundParams> backgrounds;
    for (int s = 0; s < config.scenes; ++s)
        backgrounds.push_back(
            make_background(hash_combine(scenes_seed, static_cast<uint64_t>(s)), 0.5));

    for (int ei = 0; ei < static_cast<int>(config.elevations.size()); ++ei) {
        CameraPose pose = config.base_pose;
        pose.elevation = config.elevations[static_cast<size_t>(ei)];
        for (int sc = 0; sc < config.scenes; ++sc) {
            for (int fg = 0; fg < config.figures; ++fg) {
                for (int in = 0; in < config.instances; ++in) {
                    // figure family per figure id; articulation varies per instance
                    uint64_t fig_seed = hash_combine(
                        hash_combine(figures_seed, static_cast<uint64_t>(fg)),
                        static_cast<uint64_t>(in));
                    uint64_t inst_seed = hash_combine(
                        hash_combine(hash_combine(instances_seed, static_cast<uint64_t>(fg)),
                                     static_cast<uint64_t>(sc)),
                        static_cast<uint64_t>(in));
                    Rng rng(inst_seed);
                    SceneSpec spec;
                    spec.rng_seed = inst_seed;
                    spec.figure = make_figure(fig_seed, config.object.height, config.object.width);
                    spec.background = backgrounds[static_cast<size_t>(sc)];
                    spec.lighting.gain = rng.uniform(0.5, 1.5);
                    spec.lighting.offset = rng.uniform(-0.2, 0.2);
                    spec.base_offset = {rng.uniform(-config.jitter_m, config.jitter_m),
                                        rng.uniform(-config.jitter_m / 2, config.jitter_m / 2)};
                    spec.background_shift = {rng.uniform(-1.0, 1.0), rng.uniform(-0.5, 0.5)};

                    auto [img, box] = render_example(spec, pose, config.object, config.canon);
                    ManifestEntry e;
                    e.label = 1;
                    e.elevation_index = ei;
                    e.elevation = pose.elevation;
                    e.scene_id = sc;
                    e.figure_id = fg;
                    e.instance_id = in;
                    e.truth_rect = box;
                    Homography p2i = build_object_plane_homography(pose, config.object);
                    Homography sim = canonical_crop_similarity(p2i, config.canon);
                    Vec2 tl = transform_point(sim, {0, 0});
                    Vec2 br = transform_point(sim, {static_cast<double>(config.canon.width_px),
                                                    static_cast<double>(config.canon.height_px)});
                    e.crop_rect = {tl.x, tl.y, br.x, br.y};
                    ds.manifest.entries.push_back(e);
                    ds.images.push_back(std::move(img));
                }
            }
            // background-only negatives from this scene
            for (int k = 0; k < config.negatives_per_scene; ++k) {
                uint64_t nseed = hash_combine(
                    hash_combine(hash_combine(negatives_seed, static_cast<uint64_t>(ei)),
                                 static_cast<uint64_t>(sc)),
                    static_cast<uint64_t>(k));
                Rng rng(nseed);
                SceneSpec spec;
                spec.rng_seed = nseed;
                spec.background = backgrounds[static_cast<size_t>(sc)];
                spec.lighting.gain = rng.uniform(0.5, 1.5);
                spec.lighting.offset = rng.uniform(-0.2, 0.2);
                spec.background_shift = {rng.uniform(-3.0, 3.0), rng.uniform(-1.5, 1.5)};
                // alternate plain background with person-like clutter
                if (k % 2 == 0) {
                    spec.has_figure = false;
                } else {
                    spec.has_figure = true;
                    spec.figure =
                        make_distractor(rng.next_u64(), config.object.height, config.object.width);
                    spec.base_offset = {rng.uniform(-0.1, 0.1), 0.0};
                }
                auto [img, box] = render_example(spec, pose, config.object, config.canon);
                (void)box;
                ManifestEntry e;
                e.label = -1;
                e.elevation_index = ei;
                e.elevation = pose.elevation;
                e.scene_id = sc;
                e.figure_id = -1;
                e.instance_id = k;
                ds.manifest.entries.push_back(e);
                ds.images.push_back(std::move(img));
            }
        }
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir, DatasetManifest* with_paths) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "crops");
    DatasetManifest out = ds.manifest;
    for (size_t i = 0; i < ds.manifest.entries.size(); ++i) {
        const ManifestEntry& e = ds.manifest.entries[i];
        char name[128];
        if (e.label == 1)
            std::snprintf(name, sizeof(name), "crops/pos_e%d_s%02d_f%03d_i%02d.pgm",
                          e.elevation_index, e.scene_id, e.figure_id, e.instance_id);
        else
            std::snprintf(name, sizeof(name), "crops/neg_e%d_s%02d_n%03d.pgm",
                          e.elevation_index, e.scene_id, e.instance_id);
        out.entries[i].path = name;
        save_pgm(ds.images[i], (fs::path(dir) / name).string());
    }
    if (with_paths) *with_paths = std::move(out);
}

namespace {

std::string rect_csv(const RectF& r) {
    return format_double(r.x0) + "," + format_double(r.y0) + "," + format_double(r.x1) + "," +
           format_double(r.y1);
}

} // namespace

void save_manifest(const DatasetManifest& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MalformedFileError("cannot write " + path);
    out << "path,label,elevation_index,elevation,scene_id,figure_id,instance_id,"
           "crop_x0,crop_y0,crop_x1,crop_y1,truth_x0,truth_y0,truth_x1,truth_y1,folds\n";
    for (const ManifestEntry& e : m.entries) {
        out << e.path << "," << e.label << "," << e.elevation_index << ","
            << format_double(e.elevation) << "," << e.scene_id << "," << e.figure_id << ","
            << e.instance_id << "," << rect_csv(e.crop_rect) << "," << rect_csv(e.truth_rect)
            << "," << m.folds << "\n";
    }
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedFileError("cannot open " + path);
    DatasetManifest m;
    std::string line;
    if (!std::getline(in, line)) throw MalformedFileError(path + ": empty manifest");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> tok;
        size_t pos = 0;
        while (true) {
            size_t c = line.find(',', pos);
            if (c == std::string::npos) {
                tok.push_back(line.substr(pos));
                break;
            }
            tok.push_back(line.substr(pos, c - pos));
            pos = c + 1;
        }
        if (tok.size() != 16) throw MalformedFileError(path + ": bad manifest row");
        ManifestEntry e;
        e.path = tok[0];
        e.label = std::stoi(tok[1]);
        e.elevation_index = std::stoi(tok[2]);
        e.elevation = std::stod(tok[3]);
        e.scene_id = std::stoi(tok[4]);
        e.figure_id = std::stoi(tok[5]);
        e.instance_id = std::stoi(tok[6]);
        e.crop_rect = {std::stod(tok[7]), std::stod(tok[8]), std::stod(tok[9]), std::stod(tok[10])};
        e.truth_rect = {std::stod(tok[11]), std::stod(tok[12]), std::stod(tok[13]),
                        std::stod(tok[14])};
        m.folds = std::stoi(tok[15]);
        m.entries.push_back(e);
    }
    return m;
}

FrameExample render_frame(uint64_t seed, const CameraPose& pose, const ObjectPlaneSpec& obj,
                          const CanonicalWindow& canon, int n_objects, const RectF& ground_extent,
                          double snap_stride_m) {
    Rng rng(seed);
    FrameExample fr;
    fr.elevation = pose.elevation;
    WorldCamera cam = camera_for_pose(pose, Vec3{0, 0, 0});
    BackgroundParams bg = make_background(hash_combine(seed, 0x6267ULL), 40.0);

    struct Obj {
        Vec3 base;
        FigureParams fig;
        Homography plane_to_image;
        Homography image_to_plane;
        RectF bbox;  // frame AABB of the plane region worth sampling
        double depth;
    };
    std::vector<Obj> objects;
    for (int i = 0; i < n_objects; ++i) {
        for (int attempt = 0; attempt < 40; ++attempt) {
            double gx = rng.uniform(ground_extent.x0, ground_extent.x1);
            double gy = rng.uniform(ground_extent.y0, ground_extent.y1);
            if (snap_stride_m > 0) {
                gx = std::round(gx / snap_stride_m) * snap_stride_m;
                gy = std::round(gy / snap_stride_m) * snap_stride_m;
            }
            Obj o;
            o.base = {gx, gy, 0};
            try {
                o.plane_to_image = object_plane_homography(cam, o.base);
                o.image_to_plane = invert(o.plane_to_image);
            } catch (const NonInvertibleError&) {
                continue;
            }
            // frame bounds of the figure box (with margin)
            bool first = true;
            bool visible = true;
            for (double u : {-obj.width * 0.8, obj.width * 0.8})
                for (double v : {-0.05 * obj.height, 1.05 * obj.height}) {
                    Vec2 q;
                    try {
                        q = transform_point(o.plane_to_image, {u, v});
                    } catch (const PointAtInfinityError&) {
                        visible = false;
                        break;
                    }
                    if (first) {
                        o.bbox = {q.x, q.y, q.x, q.y};
                        first = false;
                    } else {
                        o.bbox.x0 = std::min(o.bbox.x0, q.x);
                        o.bbox.y0 = std::min(o.bbox.y0, q.y);
                        o.bbox.x1 = std::max(o.bbox.x1, q.x);
                        o.bbox.y1 = std::max(o.bbox.y1, q.y);
                    }
                }
            if (!visible || o.bbox.x0 < 0 || o.bbox.y0 < 0 || o.bbox.x1 > pose.image_width ||
                o.bbox.y1 > pose.image_height)
                continue;
            // avoid overlapping figures
            bool clash = false;
            for (const Obj& other : objects)
                if (rect_iou(RectF{o.bbox.x0, o.bbox.y0, o.bbox.x1, o.bbox.y1},
                             RectF{other.bbox.x0, other.bbox.y0, other.bbox.x1, other.bbox.y1}) >
                    0.05)
                    clash = true;
            if (clash) continue;
            o.fig = make_figure(rng.next_u64(), obj.height, obj.width);
            o.depth = std::hypot(gx - cam.center.x, gy - cam.center.y);
            objects.push_back(o);
            break;
        }
    }
    // far to near so closer figures overwrite
    std::sort(objects.begin(), objects.end(),
              [](const Obj& a, const Obj& b) { return a.depth > b.depth; });

    ImageGray img(pose.image_width, pose.image_height);
    const double ss[2] = {0.25, 0.75};
    for (int y = 0; y < pose.image_height; ++y)
        for (int x = 0; x < pose.image_width; ++x) {
            double acc = 0.0;
            for (double oy : ss)
                for (double ox : ss)
                    acc += background_value(bg, {x + ox, y + oy});
            img.at(x, y) = acc / 4.0;
        }
    for (const Obj& o : objects) {
        int x0 = std::max(0, static_cast<int>(std::floor(o.bbox.x0)));
        int y0 = std::max(0, static_cast<int>(std::floor(o.bbox.y0)));
        int x1 = std::min(pose.image_width, static_cast<int>(std::ceil(o.bbox.x1)));
        int y1 = std::min(pose.image_height, static_cast<int>(std::ceil(o.bbox.y1)));
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) {
                double acc = 0.0;
                double cover = 0.0;
                for (double oy : ss)
                    for (double ox : ss) {
                        Vec2 pt = transform_point(o.image_to_plane, {x + ox, y + oy});
                        double a = figure_alpha(o.fig, pt);
                        if (a > 0) {
                            acc += figure_lum(o.fig, pt);
                            cover += 1.0;
                        }
                    }
                if (cover > 0) {
                    double fig_v = acc / cover;
                    double w = cover / 4.0;
                    img.at(x, y) = img.at(x, y) * (1.0 - w) + fig_v * w;
                }
            }
        // truth box: the projected canonical window at this position
        Homography win = multiply(o.plane_to_image, canon.window_to_plane());
        RectF tb;
        bool first = true;
        for (double cx : {0.0, static_cast<double>(canon.width_px)})
            for (double cy : {0.0, static_cast<double>(canon.height_px)}) {
                Vec2 q = transform_point(win, {cx, cy});
                if (first) {
                    tb = {q.x, q.y, q.x, q.y};
                    first = false;
                } else {
                    tb.x0 = std::min(tb.x0, q.x);
                    tb.y0 = std::min(tb.y0, q.y);
                    tb.x1 = std::max(tb.x1, q.x);
                    tb.y1 = std::max(tb.y1, q.y);
                }
            }
        fr.truth_rects.push_back(tb);
        fr.truth_positions.push_back({o.base.x, o.base.y});
    }
    fr.image = std::move(img);
    return fr;
}

} // namespace va
