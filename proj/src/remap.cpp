#include "va/remap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "va/rng.hpp"

namespace va {

double rect_iou(const RectF& a, const RectF& b) {
    double ix = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    double iy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    if (ix <= 0 || iy <= 0) return 0.0;
    double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
}

Polygon clip_polygon(const Polygon& subject, const RectF& clip) {
    if (!(clip.x1 > clip.x0 && clip.y1 > clip.y0))
        throw Error("clip rectangle is degenerate");
    // inside tests for the four half-planes, in clip order
    auto inside = [&](Vec2 p, int edge) {
        switch (edge) {
            case 0: return p.x >= clip.x0;
            case 1: return p.x <= clip.x1;
            case 2: return p.y >= clip.y0;
            default: return p.y <= clip.y1;
        }
    };
    auto intersect = [&](Vec2 a, Vec2 b, int edge) {
        double t;
        if (edge == 0)
            t = (clip.x0 - a.x) / (b.x - a.x);
        else if (edge == 1)
            t = (clip.x1 - a.x) / (b.x - a.x);
        else if (edge == 2)
            t = (clip.y0 - a.y) / (b.y - a.y);
        else
            t = (clip.y1 - a.y) / (b.y - a.y);
        return Vec2{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    };
    Polygon poly = subject;
    for (int edge = 0; edge < 4; ++edge) {
        Polygon out;
        for (int i = 0; i < poly.count; ++i) {
            Vec2 cur = poly.pts[static_cast<size_t>(i)];
            Vec2 prev = poly.pts[static_cast<size_t>((i + poly.count - 1) % poly.count)];
            bool cur_in = inside(cur, edge);
            bool prev_in = inside(prev, edge);
            if (cur_in) {
                if (!prev_in) out.push(intersect(prev, cur, edge));
                out.push(cur);
            } else if (prev_in) {
                out.push(intersect(prev, cur, edge));
            }
        }
        poly = out;
        if (poly.empty()) break;
    }
    return poly;
}

double polygon_area(const Polygon& poly) {
    if (poly.count < 3) return 0.0;
    double s = 0.0;
    for (int i = 0; i < poly.count; ++i) {
        Vec2 a = poly.pts[static_cast<size_t>(i)];
        Vec2 b = poly.pts[static_cast<size_t>((i + 1) % poly.count)];
        s += a.x * b.y - b.x * a.y;
    }
    return std::abs(s) / 2.0;
}

RectF cell_rect(const CellGrid& grid, int cx, int cy) {
    double s = grid.cell_size;
    double x0 = grid.origin_x + cx * s;
    double y0 = grid.origin_y + cy * s;
    return {x0, y0, x0 + s, y0 + s};
}

std::vector<double> angle_bin_matrix(const Homography& h, Vec2 anchor, int bins) {
    invert(h);  // must be a valid viewpoint map
    if (bins < 2) throw DimensionMismatchError("need at least 2 orientation bins");
    const double bw = kPi / bins;
    std::vector<double> A(static_cast<size_t>(bins) * bins, 0.0);
    auto map_angle = [&](double t) {
        return transform_gradient_angle(h, anchor.x, anchor.y, t);
    };
    for (int j = 0; j < bins; ++j) {
        double e0 = map_angle(j * bw);
        double e1 = map_angle((j + 1) * bw);
        double mid = map_angle((j + 0.5) * bw);
        // The image of the bin is one of the two arcs between e0 and e1 on
        // the half circle; the mapped midpoint tells us which.
        double fwd = e1 - e0;
        if (fwd < 0) fwd += kPi;
        double mid_off = mid - e0;
        if (mid_off < 0) mid_off += kPi;
        double start, len;
        if (mid_off <= fwd) {
            start = e0;
            len = fwd;
        } else {
            start = e1;
            len = kPi - fwd;
        }
        if (len < 1e-12) continue;  // collapsed arc, drop
        // split at the pi wrap point into at most two linear intervals
        struct Interval {
            double a, b;
        };
        Interval parts[2];
        int nparts = 0;
        if (start + len <= kPi) {
            parts[nparts++] = {start, start + len};
        } else {
            parts[nparts++] = {start, kPi};
            parts[nparts++] = {0.0, start + len - kPi};
        }
        for (int p = 0; p < nparts; ++p) {
            for (int i = 0; i < bins; ++i) {
                double b0 = i * bw;
                double b1 = (i + 1) * bw;
                double ov = std::min(parts[p].b, b1) - std::max(parts[p].a, b0);
                if (ov > 1e-12) A[static_cast<size_t>(i) * bins + j] += ov / len;
            }
        }
    }
    return A;
}

CellOverlapResult cell_overlap_matrix(const CellGrid& out_grid, const CellGrid& in_grid,
                                      const Homography& h) {
    invert(h);
    out_grid.validate();
    in_grid.validate();
    CellOverlapResult res;
    const double in_cell_area =
        static_cast<double>(in_grid.cell_size) * in_grid.cell_size;
    std::vector<SparseMatrix::Triplet> trip;
    for (int cy = 0; cy < out_grid.rows; ++cy) {
        for (int cx = 0; cx < out_grid.cols; ++cx) {
            int k = out_grid.cell_index(cx, cy);
            RectF r = cell_rect(out_grid, cx, cy);
            Quad q;
            bool at_infinity = false;
            const Vec2 corners[4] = {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}};
            for (int c = 0; c < 4; ++c) {
                try {
                    q.corners[static_cast<size_t>(c)] = transform_point(h, corners[c]);
                } catch (const PointAtInfinityError&) {
                    at_infinity = true;
                    break;
                }
            }
            Polygon proj = q.as_polygon();
            if (at_infinity || polygon_area(proj) < kEpsArea) {
                res.degenerate_cells.push_back(k);
                continue;
            }
            // candidate input cells from the projected bounding box
            double bx0 = proj.pts[0].x, bx1 = proj.pts[0].x;
            double by0 = proj.pts[0].y, by1 = proj.pts[0].y;
            for (int c = 1; c < proj.count; ++c) {
                bx0 = std::min(bx0, proj.pts[static_cast<size_t>(c)].x);
                bx1 = std::max(bx1, proj.pts[static_cast<size_t>(c)].x);
                by0 = std::min(by0, proj.pts[static_cast<size_t>(c)].y);
                by1 = std::max(by1, proj.pts[static_cast<size_t>(c)].y);
            }
            const double s = in_grid.cell_size;
            int lx0 = std::max(0, static_cast<int>(std::floor((bx0 - in_grid.origin_x) / s)));
            int lx1 = std::min(in_grid.cols - 1,
                               static_cast<int>(std::floor((bx1 - in_grid.origin_x) / s)));
            int ly0 = std::max(0, static_cast<int>(std::floor((by0 - in_grid.origin_y) / s)));
            int ly1 = std::min(in_grid.rows - 1,
                               static_cast<int>(std::floor((by1 - in_grid.origin_y) / s)));
            for (int ly = ly0; ly <= ly1; ++ly) {
                for (int lx = lx0; lx <= lx1; ++lx) {
                    Polygon clipped = clip_polygon(proj, cell_rect(in_grid, lx, ly));
                    double a = polygon_area(clipped);
                    if (a > 0.0)
                        trip.push_back({k, in_grid.cell_index(lx, ly), a / in_cell_area});
                }
            }
        }
    }
    res.S = SparseMatrix::from_triplets(out_grid.cell_count(), in_grid.cell_count(),
                                        std::move(trip));
    return res;
}

CellOverlapResult cell_overlap_matrix(const CellGrid& grid, const Homography& h) {
    return cell_overlap_matrix(grid, grid, h);
}

std::vector<double> projected_cell_areas(const CellGrid& out_grid, const Homography& h) {
    out_grid.validate();
    std::vector<double> areas(static_cast<size_t>(out_grid.cell_count()), 0.0);
    for (int cy = 0; cy < out_grid.rows; ++cy)
        for (int cx = 0; cx < out_grid.cols; ++cx) {
            RectF r = cell_rect(out_grid, cx, cy);
            Quad q;
            bool ok = true;
            const Vec2 corners[4] = {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}};
            for (int c = 0; c < 4 && ok; ++c) {
                try {
                    q.corners[static_cast<size_t>(c)] = transform_point(h, corners[c]);
                } catch (const PointAtInfinityError&) {
                    ok = false;
                }
            }
            if (ok) areas[static_cast<size_t>(out_grid.cell_index(cx, cy))] = polygon_area(q.as_polygon());
        }
    return areas;
}

SparseMatrix scale_rows(const SparseMatrix& m, const std::vector<double>& factors) {
    if (static_cast<int>(factors.size()) != m.rows())
        throw DimensionMismatchError("need one factor per row");
    std::vector<SparseMatrix::Triplet> trip;
    trip.reserve(m.nnz());
    const auto& rp = m.row_ptr();
    const auto& ci = m.col_idx();
    const auto& v = m.values();
    for (int r = 0; r < m.rows(); ++r)
        for (int k = rp[static_cast<size_t>(r)]; k < rp[static_cast<size_t>(r) + 1]; ++k)
            trip.push_back({r, ci[static_cast<size_t>(k)],
                            v[static_cast<size_t>(k)] * factors[static_cast<size_t>(r)]});
    return SparseMatrix::from_triplets(m.rows(), m.cols(), std::move(trip));
}

SparseMatrix kronecker_remap(const SparseMatrix& S, const std::vector<double>& A, int bins) {
    if (static_cast<int>(A.size()) != bins * bins)
        throw DimensionMismatchError("angle matrix size does not match bin count");
    std::vector<SparseMatrix::Triplet> trip;
    const auto& rp = S.row_ptr();
    const auto& ci = S.col_idx();
    const auto& sv = S.values();
    for (int k = 0; k < S.rows(); ++k) {
        for (int e = rp[static_cast<size_t>(k)]; e < rp[static_cast<size_t>(k) + 1]; ++e) {
            int l = ci[static_cast<size_t>(e)];
            double s = sv[static_cast<size_t>(e)];
            for (int i = 0; i < bins; ++i)
                for (int j = 0; j < bins; ++j) {
                    double a = A[static_cast<size_t>(i) * bins + j];
                    if (a != 0.0) trip.push_back({k * bins + i, l * bins + j, s * a});
                }
        }
    }
    return SparseMatrix::from_triplets(S.rows() * bins, S.cols() * bins, std::move(trip));
}

SparseMatrix kronecker_remap_per_cell(const SparseMatrix& S,
                                      const std::vector<std::vector<double>>& A_cells,
                                      int bins) {
    if (static_cast<int>(A_cells.size()) != S.rows())
        throw DimensionMismatchError("need one angle matrix per output cell");
    std::vector<SparseMatrix::Triplet> trip;
    const auto& rp = S.row_ptr();
    const auto& ci = S.col_idx();
    const auto& sv = S.values();
    for (int k = 0; k < S.rows(); ++k) {
        const auto& A = A_cells[static_cast<size_t>(k)];
        for (int e = rp[static_cast<size_t>(k)]; e < rp[static_cast<size_t>(k) + 1]; ++e) {
            int l = ci[static_cast<size_t>(e)];
            double s = sv[static_cast<size_t>(e)];
            for (int i = 0; i < bins; ++i)
                for (int j = 0; j < bins; ++j) {
                    double a = A[static_cast<size_t>(i) * bins + j];
                    if (a != 0.0) trip.push_back({k * bins + i, l * bins + j, s * a});
                }
        }
    }
    return SparseMatrix::from_triplets(S.rows() * bins, S.cols() * bins, std::move(trip));
}

RemapMatrices build_feature_remap(const CellGrid& out_grid, const CellGrid& in_grid,
                                  const Homography& h, int bins, RemapMode mode) {
    RemapMatrices rm;
    rm.bins = bins;
    rm.mode = mode;
    CellOverlapResult ov = cell_overlap_matrix(out_grid, in_grid, h);
    rm.S = std::move(ov.S);
    rm.degenerate_cells = std::move(ov.degenerate_cells);
    if (mode == RemapMode::shared_angle) {
        Vec2 center{out_grid.origin_x + out_grid.cols * out_grid.cell_size / 2.0,
                    out_grid.origin_y + out_grid.rows * out_grid.cell_size / 2.0};
        rm.A = angle_bin_matrix(h, center, bins);
        rm.G = kronecker_remap(rm.S, rm.A, bins);
    } else {
        rm.A_per_cell.reserve(static_cast<size_t>(out_grid.cell_count()));
        for (int cy = 0; cy < out_grid.rows; ++cy)
            for (int cx = 0; cx < out_grid.cols; ++cx) {
                RectF r = cell_rect(out_grid, cx, cy);
                Vec2 center{(r.x0 + r.x1) / 2.0, (r.y0 + r.y1) / 2.0};
                rm.A_per_cell.push_back(angle_bin_matrix(h, center, bins));
            }
        rm.G = kronecker_remap_per_cell(rm.S, rm.A_per_cell, bins);
    }
    return rm;
}

RemapMatrices build_feature_remap(const CellGrid& grid, const Homography& h, int bins,
                                  RemapMode mode) {
    return build_feature_remap(grid, grid, h, bins, mode);
}

SparseMatrix channel_sum_remap(const SparseMatrix& S, int channels) {
    std::vector<SparseMatrix::Triplet> trip;
    const auto& rp = S.row_ptr();
    const auto& ci = S.col_idx();
    const auto& sv = S.values();
    for (int c = 0; c < channels; ++c)
        for (int k = 0; k < S.rows(); ++k)
            for (int e = rp[static_cast<size_t>(k)]; e < rp[static_cast<size_t>(k) + 1]; ++e)
                trip.push_back({c * S.rows() + k, c * S.cols() + ci[static_cast<size_t>(e)],
                                sv[static_cast<size_t>(e)]});
    return SparseMatrix::from_triplets(S.rows() * channels, S.cols() * channels,
                                       std::move(trip));
}

std::vector<double> apply_remap(const SparseMatrix& G, std::span<const double> x) {
    return G.apply(x);
}

uint64_t remap_key(const CellGrid& out_grid, const CellGrid& in_grid, int bins, RemapMode mode,
                   const Homography& h, uint64_t kind_tag) {
    uint64_t k = 0x56524d4150303163ULL ^ kind_tag;
    auto mix_i = [&](int v) { k = hash_combine(k, static_cast<uint64_t>(static_cast<int64_t>(v))); };
    mix_i(out_grid.cols);
    mix_i(out_grid.rows);
    mix_i(out_grid.cell_size);
    mix_i(out_grid.origin_x);
    mix_i(out_grid.origin_y);
    mix_i(in_grid.cols);
    mix_i(in_grid.rows);
    mix_i(in_grid.cell_size);
    mix_i(in_grid.origin_x);
    mix_i(in_grid.origin_y);
    mix_i(bins);
    mix_i(static_cast<int>(mode));
    for (double v : h.m) {
        uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        k = hash_combine(k, bits);
    }
    return k;
}

const SparseMatrix& RemapCache::get(uint64_t key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw MissingCacheEntryError("remap cache has no such entry");
    return it->second;
}

namespace {
constexpr char kCacheMagic[8] = {'V', 'R', 'E', 'M', 'A', 'P', 'C', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw MalformedFileError("remap cache truncated");
}
} // namespace

void RemapCache::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MalformedFileError("cannot write " + path);
    out.write(kCacheMagic, sizeof(kCacheMagic));
    // deterministic order: sorted keys
    std::vector<uint64_t> keys;
    keys.reserve(entries_.size());
    for (const auto& [k, _] : entries_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    uint64_t n = keys.size();
    write_pod(out, n);
    for (uint64_t key : keys) {
        const SparseMatrix& m = entries_.at(key);
        write_pod(out, key);
        int32_t rows = m.rows(), cols = m.cols();
        int64_t nnz = static_cast<int64_t>(m.nnz());
        write_pod(out, rows);
        write_pod(out, cols);
        write_pod(out, nnz);
        out.write(reinterpret_cast<const char*>(m.row_ptr().data()),
                  static_cast<std::streamsize>(m.row_ptr().size() * sizeof(int)));
        out.write(reinterpret_cast<const char*>(m.col_idx().data()),
                  static_cast<std::streamsize>(m.col_idx().size() * sizeof(int)));
        out.write(reinterpret_cast<const char*>(m.values().data()),
                  static_cast<std::streamsize>(m.values().size() * sizeof(double)));
    }
    if (!out) throw MalformedFileError("write failed: " + path);
}

RemapCache RemapCache::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedFileError("cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
        throw MalformedFileError(path + ": not a remap cache file");
    uint64_t n = 0;
    read_pod(in, n);
    RemapCache cache;
    for (uint64_t e = 0; e < n; ++e) {
        uint64_t key;
        int32_t rows, cols;
        int64_t nnz;
        read_pod(in, key);
        read_pod(in, rows);
        read_pod(in, cols);
        read_pod(in, nnz);
        if (rows < 0 || cols < 0 || nnz < 0) throw MalformedFileError(path + ": bad entry");
        std::vector<int> rp(static_cast<size_t>(rows) + 1);
        std::vector<int> cix(static_cast<size_t>(nnz));
        std::vector<double> vals(static_cast<size_t>(nnz));
        in.read(reinterpret_cast<char*>(rp.data()),
                static_cast<std::streamsize>(rp.size() * sizeof(int)));
        in.read(reinterpret_cast<char*>(cix.data()),
                static_cast<std::streamsize>(cix.size() * sizeof(int)));
        in.read(reinterpret_cast<char*>(vals.data()),
                static_cast<std::streamsize>(vals.size() * sizeof(double)));
        if (!in) throw MalformedFileError(path + ": truncated entry");
        std::vector<SparseMatrix::Triplet> trip;
        trip.reserve(static_cast<size_t>(nnz));
        for (int32_t r = 0; r < rows; ++r)
            for (int k2 = rp[static_cast<size_t>(r)]; k2 < rp[static_cast<size_t>(r) + 1]; ++k2)
                trip.push_back({r, cix[static_cast<size_t>(k2)], vals[static_cast<size_t>(k2)]});
        cache.put(key, SparseMatrix::from_triplets(rows, cols, std::move(trip)));
    }
    return cache;
}

} // namespace va
