#pragma once

#include <vector>

#include "va/image.hpp"

namespace va {

// Regular grid of square cells inside an image. Cell (cx, cy) covers the
// pixel rectangle [origin_x + cx*s, origin_x + (cx+1)*s) x [...] with
// s = cell_size. Cells are indexed row-major: index = cy * cols + cx.
struct CellGrid {
    int cols = 0;
    int rows = 0;
    int cell_size = 8;
    int origin_x = 0;
    int origin_y = 0;

    int cell_count() const { return cols * rows; }
    int cell_index(int cx, int cy) const { return cy * cols + cx; }

    void validate() const;
    void check_fits(int img_w, int img_h) const;
};

// Canonical 64x128 detector grid: 8x16 cells of 8 px.
CellGrid canonical_grid(int cell_size = 8);

// Grid covering a whole frame from origin (0,0).
CellGrid frame_grid(int img_w, int img_h, int cell_size = 8);

// Orientation histograms per cell over [0, pi). Layout: cell-major, then
// bin — value index = cell_index * bins + bin.
struct HogDescriptor {
    CellGrid grid;
    int bins = 9;
    std::vector<double> values;

    size_t size() const { return values.size(); }
};

enum class Channel { intensity = 0, gradient_magnitude = 1 };
constexpr int kChannelCount = 2;

// Per-cell rectangular sums of pixel-wise channels. Layout: channel-major —
// values[c * cell_count + cell_index].
struct ChannelSums {
    CellGrid grid;
    std::vector<double> values;

    double at(Channel c, int cell) const {
        return values[static_cast<size_t>(c) * grid.cell_count() + cell];
    }
};

// Magnitude-weighted orientation histograms. Hard assignment by default:
// each pixel votes its full magnitude into the single bin containing its
// angle. soft_binning linearly splits the vote between the two nearest bin
// centers (wrap-around on the half circle).
HogDescriptor compute_hog(const ImageGray& img, const CellGrid& grid, int bins,
                          bool soft_binning = false);

// As above but from precomputed gradients (the per-frame path: gradients
// are computed once, descriptors read per window).
HogDescriptor compute_hog(const GradientField& grad, const CellGrid& grid, int bins,
                          bool soft_binning = false);

// Per-cell sums of {intensity, gradient magnitude}; O(1) per cell via
// summed-area tables.
ChannelSums compute_channel_sums(const ImageGray& img, const CellGrid& grid);

} // namespace va
