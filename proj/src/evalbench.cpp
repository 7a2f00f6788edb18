#include "va/evalbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "va/util.hpp"

namespace va {

std::string to_string(FpDomain d) { return d == FpDomain::fppi ? "fppi" : "fppw"; }

double EvalCurve::miss_at(double fp_rate) const {
    if (points.empty()) throw EmptyCurveError("curve has no points");
    // last point with fp <= fp_rate; clamp below the support
    double miss = points.front().second;
    for (const auto& [fp, m] : points) {
        if (fp <= fp_rate)
            miss = m;
        else
            break;
    }
    return miss;
}

MatchResult match_detections(const std::vector<Detection>& detections,
                             const std::vector<RectF>& truths, double iou_threshold) {
    std::vector<int> order(detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return detections[static_cast<size_t>(a)].score > detections[static_cast<size_t>(b)].score;
    });
    std::vector<bool> truth_used(truths.size(), false);
    MatchResult res;
    res.detections.reserve(detections.size());
    for (int idx : order) {
        const Detection& d = detections[static_cast<size_t>(idx)];
        int best = -1;
        double best_iou = iou_threshold;
        for (size_t t = 0; t < truths.size(); ++t) {
            if (truth_used[t]) continue;
            double iou = rect_iou(d.image_rect, truths[t]);
            if (iou >= best_iou) {
                best_iou = iou;
                best = static_cast<int>(t);
            }
        }
        ScoredDetection sd;
        sd.score = d.score;
        sd.is_tp = best >= 0;
        if (best >= 0) {
            truth_used[static_cast<size_t>(best)] = true;
            res.tp++;
        } else {
            res.fp++;
        }
        res.detections.push_back(sd);
    }
    res.fn = static_cast<int>(truths.size()) - res.tp;
    return res;
}

EvalCurve miss_rate_curve(const std::vector<ScoredDetection>& detections, int n_positives,
                          double denominator, FpDomain domain) {
    if (n_positives <= 0) throw DegenerateDataError("curve needs at least one positive");
    if (!(denominator > 0)) throw DegenerateDataError("curve needs a positive denominator");
    EvalCurve curve;
    curve.domain = domain;
    if (detections.empty()) {
        curve.points.push_back({0.0, 1.0});
        return curve;
    }
    std::vector<ScoredDetection> sorted = detections;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ScoredDetection& a, const ScoredDetection& b) {
                         return a.score > b.score;
                     });
    int tp = 0, fp = 0;
    std::vector<std::pair<double, double>> raw;
    for (size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i].is_tp)
            ++tp;
        else
            ++fp;
        // emit a point after each distinct threshold (group equal scores)
        if (i + 1 < sorted.size() && sorted[i + 1].score == sorted[i].score) continue;
        raw.push_back({static_cast<double>(fp) / denominator,
                       1.0 - static_cast<double>(tp) / n_positives});
    }
    // collapse equal fp values to the lowest miss, keep fp strictly increasing
    for (const auto& p : raw) {
        if (!curve.points.empty() && curve.points.back().first == p.first)
            curve.points.back().second = std::min(curve.points.back().second, p.second);
        else
            curve.points.push_back(p);
    }
    return curve;
}

double log_average_miss_rate(const EvalCurve& curve, double lo, double hi) {
    if (curve.points.empty()) throw EmptyCurveError("curve has no points");
    if (!(lo > 0) || !(hi > lo)) throw DegenerateDataError("need 0 < lo < hi");
    const int n = 9;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double f = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
        sum += curve.miss_at(f);
    }
    return sum / n;
}

EvalCurve crop_curve(const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels,
                     const std::function<double(std::span<const double>)>& score) {
    if (features.size() != labels.size())
        throw DimensionMismatchError("feature/label count mismatch");
    std::vector<ScoredDetection> dets;
    int n_pos = 0;
    for (size_t i = 0; i < features.size(); ++i) {
        dets.push_back({score(features[i]), labels[i] > 0});
        if (labels[i] > 0) ++n_pos;
    }
    return miss_rate_curve(dets, n_pos, static_cast<double>(features.size()), FpDomain::fppw);
}

SweepResult robustness_sweep(const LinearModel& source_model, const CameraPose& source_pose,
                             const std::vector<double>& adapted_elevations,
                             const std::vector<std::vector<double>>& test_features,
                             const std::vector<int>& test_labels, const ObjectPlaneSpec& obj,
                             const CanonicalWindow& canon, int bins, RemapMode mode,
                             double fppw_point) {
    SweepResult res;
    res.fppw_operating_point = fppw_point;
    CellGrid grid = canonical_grid();
    {
        EvalCurve c = crop_curve(test_features, test_labels,
                                 [&](std::span<const double> x) { return source_model.score(x); });
        res.unadapted_miss = c.miss_at(fppw_point);
    }
    for (double elev : adapted_elevations) {
        CameraPose target = source_pose;
        target.elevation = elev;
        double miss;
        try {
            Homography rel = crop_relative_homography(source_pose, target, obj, canon);
            RemapMatrices rm = build_feature_remap(grid, rel, bins, mode);
            LinearModel adapted = adapt_linear(source_model, rm.G);
            EvalCurve c = crop_curve(test_features, test_labels,
                                     [&](std::span<const double> x) { return adapted.score(x); });
            miss = c.miss_at(fppw_point);
        } catch (const Error&) {
            // geometrically degenerate adaptation target (e.g. overhead view)
            miss = 1.0;
        }
        res.points.push_back({elev, miss});
    }
    return res;
}

BenchReport benchmark(const std::vector<Pipeline>& pipelines, const std::vector<ImageGray>& frames,
                      const DetectorModel& model, const WindowSet& windows, int repetitions,
                      RemapMode mode) {
    if (frames.empty()) throw DegenerateDataError("benchmark needs at least one frame");
    if (repetitions < 1) throw DegenerateDataError("benchmark needs at least one repetition");
    BenchReport rep;
    rep.frames = static_cast<int>(frames.size());
    rep.repetitions = repetitions;
    for (Pipeline p : pipelines) {
        BenchRow row;
        row.pipeline = p;
        RemapBank bank;
        bool adapted = (p == Pipeline::classifier_adapt || p == Pipeline::feature_remap);
        if (adapted) {
            auto t0 = std::chrono::steady_clock::now();
            bank = build_remap_bank(windows, model, mode, 1);
            row.precompute_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        // counted pass (deterministic work counters)
        WorkCounters work;
        for (const ImageGray& f : frames) {
            if (adapted)
                detect_adapted(f, model, windows, bank, p, &work, 1);
            else
                detect_warped(f, model, windows, p, &work, 1);
        }
        row.feature_pixels = work.feature_pixels;
        row.windows = work.windows;
        // timed passes
        std::vector<double> times;
        for (int r = 0; r < repetitions; ++r) {
            auto t0 = std::chrono::steady_clock::now();
            for (const ImageGray& f : frames) {
                if (adapted)
                    detect_adapted(f, model, windows, bank, p, nullptr, 1);
                else
                    detect_warped(f, model, windows, p, nullptr, 1);
            }
            times.push_back(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        std::sort(times.begin(), times.end());
        double median = times[times.size() / 2];
        if (times.size() % 2 == 0) median = (median + times[times.size() / 2 - 1]) / 2.0;
        row.fps_median = frames.size() / median;
        row.fps_min = frames.size() / times.back();
        row.fps_max = frames.size() / times.front();
        rep.rows.push_back(row);
    }
    return rep;
}

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw DimensionMismatchError("rank correlation needs two equal-length vectors");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<int> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int x, int y) { return v[static_cast<size_t>(x)] < v[static_cast<size_t>(y)]; });
        std::vector<double> r(v.size());
        size_t i = 0;
        while (i < order.size()) {
            size_t j = i;
            while (j + 1 < order.size() &&
                   v[static_cast<size_t>(order[j + 1])] == v[static_cast<size_t>(order[i])])
                ++j;
            double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;
            for (size_t k = i; k <= j; ++k) r[static_cast<size_t>(order[k])] = avg;
            i = j + 1;
        }
        return r;
    };
    std::vector<double> ra = ranks(a), rb = ranks(b);
    double ma = 0, mb = 0;
    for (size_t i = 0; i < ra.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= ra.size();
    mb /= rb.size();
    double num = 0, da = 0, db = 0;
    for (size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    if (da == 0 || db == 0) return 0.0;
    return num / std::sqrt(da * db);
}

void save_curve_csv(const EvalCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MalformedFileError("cannot write " + path);
    out << to_string(curve.domain) << ",miss_rate\n";
    for (const auto& [fp, miss] : curve.points)
        out << format_double(fp) << "," << format_double(miss) << "\n";
}

EvalCurve load_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedFileError("cannot open " + path);
    EvalCurve c;
    std::string line;
    if (!std::getline(in, line)) throw MalformedFileError(path + ": empty curve file");
    c.domain = line.rfind("fppw", 0) == 0 ? FpDomain::fppw : FpDomain::fppi;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos) throw MalformedFileError(path + ": bad curve row");
        c.points.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    }
    return c;
}

namespace {

double log_map(double v, double lo, double hi, double out0, double out1) {
    double t = (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
    return out0 + t * (out1 - out0);
}

} // namespace

void write_curve_svg(const std::vector<NamedCurve>& curves, const std::string& path) {
    if (curves.empty()) throw DegenerateDataError("nothing to plot");
    double fp_lo = 1e308, fp_hi = 0, miss_lo = 1e308;
    for (const auto& nc : curves)
        for (const auto& [fp, miss] : nc.curve.points) {
            if (fp > 0) {
                fp_lo = std::min(fp_lo, fp);
                fp_hi = std::max(fp_hi, fp);
            }
            if (miss > 0) miss_lo = std::min(miss_lo, miss);
        }
    if (!(fp_hi > 0)) {
        fp_lo = 1e-3;
        fp_hi = 1.0;
    }
    fp_lo = std::pow(10.0, std::floor(std::log10(fp_lo)));
    fp_hi = std::pow(10.0, std::ceil(std::log10(std::max(fp_hi, fp_lo * 10))));
    miss_lo = std::min(0.1, std::pow(10.0, std::floor(std::log10(std::max(miss_lo, 1e-3)))));
    const double miss_hi = 1.0;
    const int W = 640, H = 480, ml = 70, mr = 20, mt = 30, mb = 50;
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    auto X = [&](double fp) { return log_map(fp, fp_lo, fp_hi, ml, W - mr); };
    auto Y = [&](double m) { return log_map(m, miss_lo, miss_hi, H - mb, mt); };
    // decade grid
    for (double d = fp_lo; d <= fp_hi * 1.0001; d *= 10) {
        double x = X(d);
        svg << "<line x1='" << x << "' y1='" << mt << "' x2='" << x << "' y2='" << H - mb
            << "' stroke='#ddd'/>\n";
        svg << "<text x='" << x << "' y='" << H - mb + 18
            << "' font-size='11' text-anchor='middle'>1e" << static_cast<int>(std::log10(d))
            << "</text>\n";
    }
    for (double d = miss_lo; d <= 1.0001; d *= 10) {
        double y = Y(d);
        svg << "<line x1='" << ml << "' y1='" << y << "' x2='" << W - mr << "' y2='" << y
            << "' stroke='#ddd'/>\n";
        svg << "<text x='" << ml - 8 << "' y='" << y + 4
            << "' font-size='11' text-anchor='end'>" << format_double(d) << "</text>\n";
    }
    svg << "<rect x='" << ml << "' y='" << mt << "' width='" << W - ml - mr << "' height='"
        << H - mt - mb << "' fill='none' stroke='black'/>\n";
    const std::string xlabel = curves[0].curve.domain == FpDomain::fppw
                                   ? "false positives per window"
                                   : "false positives per image";
    svg << "<text x='" << (ml + W - mr) / 2 << "' y='" << H - 12
        << "' font-size='13' text-anchor='middle'>" << xlabel << "</text>\n";
    svg << "<text x='16' y='" << (mt + H - mb) / 2
        << "' font-size='13' text-anchor='middle' transform='rotate(-90 16 "
        << (mt + H - mb) / 2 << ")'>miss rate</text>\n";
    int ci = 0;
    for (const auto& nc : curves) {
        const char* col = colors[ci % 6];
        svg << "<polyline fill='none' stroke='" << col << "' stroke-width='1.5' points='";
        for (const auto& [fp, miss] : nc.curve.points) {
            double fx = std::clamp(fp, fp_lo, fp_hi);
            double fy = std::clamp(miss, miss_lo, miss_hi);
            svg << X(fx) << "," << Y(fy) << " ";
        }
        svg << "'/>\n";
        svg << "<text x='" << ml + 10 << "' y='" << mt + 16 + 14 * ci << "' font-size='12' fill='"
            << col << "'>" << nc.name << "</text>\n";
        ++ci;
    }
    svg << "</svg>\n";
    std::ofstream out(path);
    if (!out) throw MalformedFileError("cannot write " + path);
    out << svg.str();
}

void save_bench_csv(const BenchReport& report, const std::string& path, bool include_timing) {
    std::ofstream out(path);
    if (!out) throw MalformedFileError("cannot write " + path);
    out << "pipeline,windows,feature_pixels";
    if (include_timing) out << ",fps_median,fps_min,fps_max,precompute_seconds";
    out << "\n";
    for (const BenchRow& r : report.rows) {
        out << to_string(r.pipeline) << "," << r.windows << "," << r.feature_pixels;
        if (include_timing)
            out << "," << format_double(r.fps_median) << "," << format_double(r.fps_min) << ","
                << format_double(r.fps_max) << "," << format_double(r.precompute_seconds);
        out << "\n";
    }
}

std::string bench_table(const BenchReport& report) {
    std::ostringstream os;
    os << "Method               | Frame rate (fps) | Feature pixels | Windows\n";
    os << "---------------------+------------------+----------------+--------\n";
    for (const BenchRow& r : report.rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-20s | %16.4g | %14llu | %7llu\n",
                      to_string(r.pipeline).c_str(), r.fps_median,
                      static_cast<unsigned long long>(r.feature_pixels),
                      static_cast<unsigned long long>(r.windows));
        os << line;
    }
    return os.str();
}

} // namespace va
