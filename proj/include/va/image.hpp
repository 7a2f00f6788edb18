#pragma once

#include <string>
#include <vector>

#include "va/geometry.hpp"

namespace va {

// Grayscale image, intensities in [0, 1], row-major. Continuous coordinates
// put pixel (i, j) on the square [i, i+1) x [j, j+1); samples outside the
// image read as mid-gray 0.5.
struct ImageGray {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    ImageGray() = default;
    ImageGray(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {}

    double at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }

    // Bilinear sample at continuous coordinates; out-of-image taps are 0.5.
    double sample(double x, double y) const;
};

struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<double> magnitude;  // >= 0
    std::vector<double> angle;      // [0, pi); 0 where magnitude is 0

    double mag(int x, int y) const { return magnitude[static_cast<size_t>(y) * width + x]; }
    double ang(int x, int y) const { return angle[static_cast<size_t>(y) * width + x]; }
};

// Binary PGM (P5), maxval up to 255. Comment lines in the header are
// tolerated on read and never written.
ImageGray load_pgm(const std::string& path);
void save_pgm(const ImageGray& img, const std::string& path);

// Resamples `img` into an out_w x out_h window: each output pixel center is
// mapped through h and sampled bilinearly. h maps window coordinates into
// image coordinates and must be invertible.
ImageGray warp_window(const ImageGray& img, const Homography& h, int out_w, int out_h);

// Central differences [-1,0,1]/2 in the interior, one-sided differences at
// the borders. Angles are folded into [0, pi); zero-magnitude pixels get
// angle 0.
GradientField compute_gradients(const ImageGray& img);

} // namespace va
