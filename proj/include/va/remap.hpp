#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "va/features.hpp"
#include "va/geometry.hpp"
#include "va/sparse.hpp"

namespace va {

// Area below which a projected cell extent counts as collapsed; its row in
// S is left zero and the cell is reported in RemapMatrices::degenerate_cells.
constexpr double kEpsArea = 1e-9;

// Convex polygon with a small fixed capacity (a clipped quad has at most 8
// vertices; we leave headroom).
struct Polygon {
    static constexpr int kMax = 16;
    std::array<Vec2, kMax> pts{};
    int count = 0;

    void push(Vec2 p) { pts[static_cast<size_t>(count++)] = p; }
    bool empty() const { return count == 0; }
};

// Quadrilateral cell extent in pixel coordinates, winding order.
struct Quad {
    std::array<Vec2, 4> corners{};

    Polygon as_polygon() const {
        Polygon p;
        for (const auto& c : corners) p.push(c);
        return p;
    }
};

struct RectF {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
};

double rect_iou(const RectF& a, const RectF& b);

// Sutherland-Hodgman clip of a convex polygon against an axis-aligned
// rectangle. An empty result is valid (disjoint inputs).
Polygon clip_polygon(const Polygon& subject, const RectF& clip);

// Absolute shoelace area.
double polygon_area(const Polygon& poly);

// Pixel rectangle of a grid cell in image coordinates.
RectF cell_rect(const CellGrid& grid, int cx, int cy);

// Orientation-bin resampling matrix, bins x bins row-major. Column j holds
// the redistribution of computed bin j over the output bins: bin edges are
// mapped through the gradient-angle transform at `anchor`, the image arc is
// reduced mod pi (split in two if it wraps), and entry (i, j) is the
// fraction of the arc covered by output bin i. Columns sum to 1.
std::vector<double> angle_bin_matrix(const Homography& h, Vec2 anchor, int bins);

struct CellOverlapResult {
    SparseMatrix S;                     // out cells x in cells
    std::vector<int> degenerate_cells;  // out-cell indices with collapsed projections
};

// Spatial cell-resampling matrix. Each output cell's extent is projected by
// h into the input grid's pixel space; entry (k, l) is
// area(in_cell_l intersect projected_out_cell_k) / area(in_cell_l).
// Projections falling outside the input grid simply contribute less mass.
CellOverlapResult cell_overlap_matrix(const CellGrid& out_grid, const CellGrid& in_grid,
                                      const Homography& h);

// Single-grid convenience (same grid on both sides).
CellOverlapResult cell_overlap_matrix(const CellGrid& grid, const Homography& h);

// Area of each output cell's extent after projection by h (0 for
// degenerate projections). Detection banks use these to put windows of
// different image scales on a comparable score footing.
std::vector<double> projected_cell_areas(const CellGrid& out_grid, const Homography& h);

// Returns a copy of m with row r multiplied by factors[r].
SparseMatrix scale_rows(const SparseMatrix& m, const std::vector<double>& factors);

enum class RemapMode { shared_angle, per_cell_angle };

// The combined feature-space transform between two viewpoints. For
// orientation histograms G is the Kronecker-style combination of S and A;
// for plain channel sums G is S applied per channel.
struct RemapMatrices {
    SparseMatrix S;
    std::vector<double> A;                        // shared mode, bins x bins
    std::vector<std::vector<double>> A_per_cell;  // per-cell mode, one per out cell
    SparseMatrix G;
    int bins = 0;
    RemapMode mode = RemapMode::shared_angle;
    std::vector<int> degenerate_cells;
};

// Assembles G from S and a shared A: G[(k*B+i),(l*B+j)] = S[k][l] * A[i][j]
// (the Kronecker product in the cell-major descriptor layout).
SparseMatrix kronecker_remap(const SparseMatrix& S, const std::vector<double>& A, int bins);

// Assembles G with per-output-cell angle matrices: block (k, l) = S[k][l] * A_k.
SparseMatrix kronecker_remap_per_cell(const SparseMatrix& S,
                                      const std::vector<std::vector<double>>& A_cells, int bins);

// Builds S, A and G for a viewpoint change. h maps output-grid pixel
// coordinates into input-grid pixel coordinates; applying G to a descriptor
// computed on the input grid approximates the descriptor that would be
// computed after warping the underlying window into the output view.
//
// For detector adaptation the output side is the trained model's canonical
// view and the input side the deployment view, so G carries target-view
// features into the training feature space (pass the inverse map for the
// opposite direction). Shared mode anchors the angle transform at the
// output window center; per-cell mode anchors at each output cell center.
RemapMatrices build_feature_remap(const CellGrid& out_grid, const CellGrid& in_grid,
                                  const Homography& h, int bins,
                                  RemapMode mode = RemapMode::shared_angle);

RemapMatrices build_feature_remap(const CellGrid& grid, const Homography& h, int bins,
                                  RemapMode mode = RemapMode::shared_angle);

// Channel-sum variant: G applies S to each channel block (block-diagonal).
SparseMatrix channel_sum_remap(const SparseMatrix& S, int channels = kChannelCount);

// G x with dimension checking.
std::vector<double> apply_remap(const SparseMatrix& G, std::span<const double> x);

// Content hash identifying a remap: grids, bin count, mode and the
// normalized homography entries. Used as the cache key.
uint64_t remap_key(const CellGrid& out_grid, const CellGrid& in_grid, int bins, RemapMode mode,
                   const Homography& h, uint64_t kind_tag = 0);

// Binary sidecar cache of precomputed remap matrices keyed by remap_key.
class RemapCache {
public:
    bool contains(uint64_t key) const { return entries_.count(key) != 0; }
    const SparseMatrix& get(uint64_t key) const;
    void put(uint64_t key, SparseMatrix m) { entries_[key] = std::move(m); }
    size_t size() const { return entries_.size(); }

    void save(const std::string& path) const;
    static RemapCache load(const std::string& path);

private:
    std::unordered_map<uint64_t, SparseMatrix> entries_;
};

} // namespace va
