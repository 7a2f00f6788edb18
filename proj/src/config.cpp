#include "va/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "va/util.hpp"

namespace va {

CameraPose RunConfig::pose_at(double elevation) const {
    CameraPose p;
    p.elevation = elevation;
    p.distance = distance_m;
    p.focal_length = focal_px;
    p.principal_point = {image_width / 2.0, image_height / 2.0};
    p.image_width = image_width;
    p.image_height = image_height;
    return p;
}

ObjectPlaneSpec RunConfig::object_spec() const {
    ObjectPlaneSpec o;
    o.height = person_height_m;
    o.width = person_width_m;
    o.base_point = {0, 0, 0};
    return o;
}

double parse_angle(const std::string& s) {
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    size_t pi = t.find("pi");
    if (pi == std::string::npos) {
        size_t used = 0;
        double v = std::stod(t, &used);
        if (used != t.size()) throw InvalidConfigError("bad angle: " + s);
        return v;
    }
    double mult = 1.0;
    if (pi > 0) {
        std::string pre = t.substr(0, pi);
        if (pre == "-")
            mult = -1.0;
        else
            mult = std::stod(pre);
    }
    double div = 1.0;
    std::string rest = t.substr(pi + 2);
    if (!rest.empty()) {
        if (rest[0] != '/') throw InvalidConfigError("bad angle: " + s);
        div = std::stod(rest.substr(1));
    }
    return mult * kPi / div;
}

namespace {

std::vector<double> parse_angle_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_angle(item));
    if (out.empty()) throw InvalidConfigError("empty angle list");
    return out;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw InvalidConfigError("bad boolean: " + s);
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"dataset.figures", [](RunConfig& c, const std::string& v) { c.figures = std::stoi(v); }},
        {"dataset.scenes", [](RunConfig& c, const std::string& v) { c.scenes = std::stoi(v); }},
        {"dataset.instances",
         [](RunConfig& c, const std::string& v) { c.instances = std::stoi(v); }},
        {"dataset.negatives_per_scene",
         [](RunConfig& c, const std::string& v) { c.negatives_per_scene = std::stoi(v); }},
        {"dataset.folds", [](RunConfig& c, const std::string& v) { c.folds = std::stoi(v); }},
        {"dataset.jitter_m",
         [](RunConfig& c, const std::string& v) { c.jitter_m = std::stod(v); }},
        {"dataset.frames_per_elevation",
         [](RunConfig& c, const std::string& v) { c.frames_per_elevation = std::stoi(v); }},
        {"dataset.objects_per_frame",
         [](RunConfig& c, const std::string& v) { c.objects_per_frame = std::stoi(v); }},
        {"dataset.empty_frames_per_elevation",
         [](RunConfig& c, const std::string& v) { c.empty_frames_per_elevation = std::stoi(v); }},
        {"dataset.elevations",
         [](RunConfig& c, const std::string& v) { c.elevations = parse_angle_list(v); }},
        {"geometry.distance_m",
         [](RunConfig& c, const std::string& v) { c.distance_m = std::stod(v); }},
        {"geometry.focal_px",
         [](RunConfig& c, const std::string& v) { c.focal_px = std::stod(v); }},
        {"geometry.image_width",
         [](RunConfig& c, const std::string& v) { c.image_width = std::stoi(v); }},
        {"geometry.image_height",
         [](RunConfig& c, const std::string& v) { c.image_height = std::stoi(v); }},
        {"geometry.person_height_m",
         [](RunConfig& c, const std::string& v) { c.person_height_m = std::stod(v); }},
        {"geometry.person_width_m",
         [](RunConfig& c, const std::string& v) { c.person_width_m = std::stod(v); }},
        {"features.cell_size",
         [](RunConfig& c, const std::string& v) { c.cell_size = std::stoi(v); }},
        {"features.bins", [](RunConfig& c, const std::string& v) { c.bins = std::stoi(v); }},
        {"features.soft_binning",
         [](RunConfig& c, const std::string& v) { c.soft_binning = parse_bool(v); }},
        {"features.remap_mode",
         [](RunConfig& c, const std::string& v) {
             if (v != "shared" && v != "per-cell")
                 throw InvalidConfigError("remap_mode must be shared or per-cell");
             c.remap_mode = v;
         }},
        {"train.lambda", [](RunConfig& c, const std::string& v) { c.lambda = std::stod(v); }},
        {"train.epochs", [](RunConfig& c, const std::string& v) { c.epochs = std::stoi(v); }},
        {"train.rounds", [](RunConfig& c, const std::string& v) { c.rounds = std::stoi(v); }},
        {"windows.stride_px",
         [](RunConfig& c, const std::string& v) { c.stride_px = std::stod(v); }},
        {"windows.ground_x0",
         [](RunConfig& c, const std::string& v) { c.ground_x0 = std::stod(v); }},
        {"windows.ground_x1",
         [](RunConfig& c, const std::string& v) { c.ground_x1 = std::stod(v); }},
        {"windows.ground_y0",
         [](RunConfig& c, const std::string& v) { c.ground_y0 = std::stod(v); }},
        {"windows.ground_y1",
         [](RunConfig& c, const std::string& v) { c.ground_y1 = std::stod(v); }},
        {"eval.iou_threshold",
         [](RunConfig& c, const std::string& v) { c.iou_threshold = std::stod(v); }},
        {"eval.nms_iou", [](RunConfig& c, const std::string& v) { c.nms_iou = std::stod(v); }},
        {"eval.lamr_lo", [](RunConfig& c, const std::string& v) { c.lamr_lo = std::stod(v); }},
        {"eval.lamr_hi", [](RunConfig& c, const std::string& v) { c.lamr_hi = std::stod(v); }},
        {"eval.fppw_point",
         [](RunConfig& c, const std::string& v) { c.fppw_point = std::stod(v); }},
        {"bench.repetitions",
         [](RunConfig& c, const std::string& v) { c.repetitions = std::stoi(v); }},
        {"output.dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
        {"output.force", [](RunConfig& c, const std::string& v) { c.force = parse_bool(v); }},
        {"output.threads", [](RunConfig& c, const std::string& v) { c.threads = std::stoi(v); }},
        {"output.seed",
         [](RunConfig& c, const std::string& v) { c.seed = std::stoull(v); }},
    };
    return table;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

void apply_override(RunConfig& cfg, const std::string& assignment) {
    size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw InvalidConfigError("expected section.key=value, got: " + assignment);
    std::string key = trim(assignment.substr(0, eq));
    std::string value = trim(assignment.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) throw InvalidConfigError("unknown config key: " + key);
    try {
        it->second(cfg, value);
    } catch (const InvalidConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw InvalidConfigError("bad value for " + key + ": " + value);
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfigError("cannot open config file " + path);
    RunConfig cfg;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw InvalidConfigError(path + ":" + std::to_string(lineno) + ": bad section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        apply_override(cfg, key + "=" + trim(line.substr(eq + 1)));
    }
    return cfg;
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MalformedFileError("cannot write " + path);
    out << "[dataset]\n";
    out << "figures=" << cfg.figures << "\nscenes=" << cfg.scenes
        << "\ninstances=" << cfg.instances << "\nnegatives_per_scene=" << cfg.negatives_per_scene
        << "\nfolds=" << cfg.folds << "\njitter_m=" << format_double(cfg.jitter_m)
        << "\nframes_per_elevation=" << cfg.frames_per_elevation
        << "\nobjects_per_frame=" << cfg.objects_per_frame
        << "\nempty_frames_per_elevation=" << cfg.empty_frames_per_elevation << "\nelevations=";
    for (size_t i = 0; i < cfg.elevations.size(); ++i)
        out << (i ? "," : "") << format_double(cfg.elevations[i]);
    out << "\n\n[geometry]\n";
    out << "distance_m=" << format_double(cfg.distance_m)
        << "\nfocal_px=" << format_double(cfg.focal_px) << "\nimage_width=" << cfg.image_width
        << "\nimage_height=" << cfg.image_height
        << "\nperson_height_m=" << format_double(cfg.person_height_m)
        << "\nperson_width_m=" << format_double(cfg.person_width_m);
    out << "\n\n[features]\n";
    out << "cell_size=" << cfg.cell_size << "\nbins=" << cfg.bins
        << "\nsoft_binning=" << (cfg.soft_binning ? "true" : "false")
        << "\nremap_mode=" << cfg.remap_mode;
    out << "\n\n[train]\n";
    out << "lambda=" << format_double(cfg.lambda) << "\nepochs=" << cfg.epochs
        << "\nrounds=" << cfg.rounds;
    out << "\n\n[windows]\n";
    out << "stride_px=" << format_double(cfg.stride_px)
        << "\nground_x0=" << format_double(cfg.ground_x0)
        << "\nground_x1=" << format_double(cfg.ground_x1)
        << "\nground_y0=" << format_double(cfg.ground_y0)
        << "\nground_y1=" << format_double(cfg.ground_y1);
    out << "\n\n[eval]\n";
    out << "iou_threshold=" << format_double(cfg.iou_threshold)
        << "\nnms_iou=" << format_double(cfg.nms_iou)
        << "\nlamr_lo=" << format_double(cfg.lamr_lo)
        << "\nlamr_hi=" << format_double(cfg.lamr_hi)
        << "\nfppw_point=" << format_double(cfg.fppw_point);
    out << "\n\n[bench]\n";
    out << "repetitions=" << cfg.repetitions;
    out << "\n\n[output]\n";
    out << "dir=" << cfg.out_dir << "\nforce=" << (cfg.force ? "true" : "false")
        << "\nthreads=" << cfg.threads << "\nseed=" << cfg.seed << "\n";
}

} // namespace va
