#include "va/features.hpp"

#include <cmath>

namespace va {

void CellGrid::validate() const {
    if (cols < 1 || rows < 1) throw GridOutOfBoundsError("grid needs at least one cell");
    if (cell_size < 2) throw GridOutOfBoundsError("cell_size must be >= 2");
}

void CellGrid::check_fits(int img_w, int img_h) const {
    validate();
    if (origin_x < 0 || origin_y < 0 || origin_x + cols * cell_size > img_w ||
        origin_y + rows * cell_size > img_h)
        throw GridOutOfBoundsError("cell grid does not fit inside the image");
}

CellGrid canonical_grid(int cell_size) {
    CellGrid g;
    g.cell_size = cell_size;
    g.cols = 64 / cell_size;
    g.rows = 128 / cell_size;
    return g;
}

CellGrid frame_grid(int img_w, int img_h, int cell_size) {
    CellGrid g;
    g.cell_size = cell_size;
    g.cols = img_w / cell_size;
    g.rows = img_h / cell_size;
    return g;
}

HogDescriptor compute_hog(const ImageGray& img, const CellGrid& grid, int bins,
                          bool soft_binning) {
    grid.check_fits(img.width, img.height);
    return compute_hog(compute_gradients(img), grid, bins, soft_binning);
}

HogDescriptor compute_hog(const GradientField& grad, const CellGrid& grid, int bins,
                          bool soft_binning) {
    grid.check_fits(grad.width, grad.height);
    if (bins < 2) throw DimensionMismatchError("need at least 2 orientation bins");
    HogDescriptor d;
    d.grid = grid;
    d.bins = bins;
    d.values.assign(static_cast<size_t>(grid.cell_count()) * bins, 0.0);
    const double bin_width = kPi / bins;
    for (int cy = 0; cy < grid.rows; ++cy) {
        for (int cx = 0; cx < grid.cols; ++cx) {
            double* cell = d.values.data() + static_cast<size_t>(grid.cell_index(cx, cy)) * bins;
            int px0 = grid.origin_x + cx * grid.cell_size;
            int py0 = grid.origin_y + cy * grid.cell_size;
            for (int y = py0; y < py0 + grid.cell_size; ++y) {
                for (int x = px0; x < px0 + grid.cell_size; ++x) {
                    double mag = grad.mag(x, y);
                    if (mag == 0.0) continue;
                    double ang = grad.ang(x, y);
                    if (!soft_binning) {
                        int b = static_cast<int>(ang / bin_width);
                        if (b >= bins) b = bins - 1;
                        cell[b] += mag;
                    } else {
                        // split between the two nearest bin centers, wrapping
                        double pos = ang / bin_width - 0.5;
                        double fb = std::floor(pos);
                        double frac = pos - fb;
                        int b0 = static_cast<int>(fb);
                        int b1 = b0 + 1;
                        if (b0 < 0) b0 += bins;
                        if (b1 >= bins) b1 -= bins;
                        cell[b0] += mag * (1.0 - frac);
                        cell[b1] += mag * frac;
                    }
                }
            }
        }
    }
    return d;
}

ChannelSums compute_channel_sums(const ImageGray& img, const CellGrid& grid) {
    grid.check_fits(img.width, img.height);
    ChannelSums out;
    out.grid = grid;
    out.values.assign(static_cast<size_t>(kChannelCount) * grid.cell_count(), 0.0);

    GradientField grad = compute_gradients(img);
    const int w = img.width, h = img.height;
    // summed-area tables, (w+1) x (h+1), sat[0][*] = sat[*][0] = 0
    std::vector<double> sat_i(static_cast<size_t>(w + 1) * (h + 1), 0.0);
    std::vector<double> sat_g(sat_i.size(), 0.0);
    for (int y = 0; y < h; ++y) {
        double row_i = 0.0, row_g = 0.0;
        for (int x = 0; x < w; ++x) {
            row_i += img.at(x, y);
            row_g += grad.mag(x, y);
            size_t idx = static_cast<size_t>(y + 1) * (w + 1) + (x + 1);
            size_t up = static_cast<size_t>(y) * (w + 1) + (x + 1);
            sat_i[idx] = row_i + sat_i[up];
            sat_g[idx] = row_g + sat_g[up];
        }
    }
    auto rect_sum = [&](const std::vector<double>& sat, int x0, int y0, int x1, int y1) {
        auto v = [&](int x, int y) { return sat[static_cast<size_t>(y) * (w + 1) + x]; };
        return v(x1, y1) - v(x0, y1) - v(x1, y0) + v(x0, y0);
    };
    const int s = grid.cell_size;
    for (int cy = 0; cy < grid.rows; ++cy) {
        for (int cx = 0; cx < grid.cols; ++cx) {
            int x0 = grid.origin_x + cx * s;
            int y0 = grid.origin_y + cy * s;
            int cell = grid.cell_index(cx, cy);
            out.values[static_cast<size_t>(cell)] = rect_sum(sat_i, x0, y0, x0 + s, y0 + s);
            out.values[static_cast<size_t>(grid.cell_count()) + cell] =
                rect_sum(sat_g, x0, y0, x0 + s, y0 + s);
        }
    }
    return out;
}

} // namespace va
