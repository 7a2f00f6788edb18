#pragma once

#include <array>
#include <cmath>

#include "va/errors.hpp"

namespace va {

constexpr double kPi = 3.14159265358979323846;

// Default tolerances. All configurable at the call sites that use them.
constexpr double kEpsNorm = 1e-12;   // homography normalization
constexpr double kEpsHomog = 1e-12;  // dehomogenization
constexpr double kEpsDenom = 1e-12;  // gradient-angle denominator

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(Vec3 v) {
    double n = norm(v);
    return {v.x / n, v.y / n, v.z / n};
}

// 3x3 planar projective map, row-major. Stored as the normalized
// representative (bottom-right entry 1) whenever that entry is
// representable; otherwise `normalized` is false and the raw matrix is
// kept as-is.
struct Homography {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};
    bool normalized = true;

    static Homography identity() { return Homography{}; }

    double operator()(int r, int c) const { return m[static_cast<size_t>(3 * r + c)]; }

    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) -
               m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
};

Homography make_homography(const std::array<double, 9>& raw, double eps_norm = kEpsNorm);
Homography multiply(const Homography& a, const Homography& b);
Homography invert(const Homography& h);

// H1 * H2^{-1}, normalized. Relates two views of the same plane.
Homography relative_homography(const Homography& h1, const Homography& h2);

// Applies h to (p.x, p.y, 1) and dehomogenizes. Throws PointAtInfinityError
// if the scale component falls under eps_h.
Vec2 transform_point(const Homography& h, Vec2 p, double eps_h = kEpsHomog);

// Maps a gradient angle through the homography's local linearization at
// (x', y'). Input and output angles live on [0, pi); the fraction follows
// the entry pattern
//
//   theta' = atan[ ((h4 - h7*y')cos t + (h5 - h8*y')sin t)
//               / ((h1 - h7*x')cos t + (h2 - h8*x')sin t) ]
//
// with h1..h8 the row-major entries of the normalized matrix. Throws
// DegenerateAngleError when numerator and denominator both vanish.
double transform_gradient_angle(const Homography& h, double x_prime, double y_prime,
                                double theta, double eps_den = kEpsDenom);

// Camera looking at an upright planar object. Elevation is the angle of
// the camera above the ground plane as seen from the object's base point;
// distance is measured camera-center to base point.
struct CameraPose {
    double elevation = 0.0;       // radians, [0, pi/2)
    double distance = 1.0;        // meters
    double focal_length = 1.0;    // pixels
    Vec2 principal_point{0, 0};   // pixels
    int image_width = 0;
    int image_height = 0;

    void validate() const;
};

// Planar object standing on the ground plane (z = 0), extending `height`
// meters up and `width` meters across, base at base_point.
struct ObjectPlaneSpec {
    double height = 1.0;   // meters
    double width = 1.0;    // meters
    Vec3 base_point{0, 0, 0};

    void validate() const;
};

// World-space pinhole camera: center, world->camera rotation (rows are the
// camera axes), intrinsics.
struct WorldCamera {
    Vec3 center;
    std::array<Vec3, 3> rot;  // rows: right, down, forward
    double focal_length = 1.0;
    Vec2 principal_point{0, 0};
    int image_width = 0;
    int image_height = 0;
};

// Camera placed at `pose.distance` from `aim` (a ground-plane point),
// raised by `pose.elevation`, looking straight at `aim`. The camera sits on
// the -y side so +y is scene depth.
WorldCamera camera_for_pose(const CameraPose& pose, Vec3 aim);

// Homography from object-plane coordinates (meters; origin at `base`,
// +u rightward as seen by the camera, +v up) to image pixels. The plane is
// vertical and faces the camera: its normal is the horizontal projection of
// the base-to-camera direction. Throws NonInvertibleError for degenerate
// configurations (camera in the plane, base under the camera, ...).
Homography object_plane_homography(const WorldCamera& cam, Vec3 base);

// Convenience: place the camera for `pose` relative to obj.base_point and
// build the plane-to-image homography.
Homography build_object_plane_homography(const CameraPose& pose, const ObjectPlaneSpec& obj);

// The fixed detector window: 64x128 pixels with the object spanning the
// central 96 rows. Window pixel coordinates are continuous; pixel (i, j)
// covers [i, i+1) x [j, j+1).
struct CanonicalWindow {
    int width_px = 64;
    int height_px = 128;
    int object_height_px = 96;
    double object_height_m = 1.75;

    double meters_per_pixel() const { return object_height_m / object_height_px; }

    // Window pixels -> object-plane meters. The object's base midpoint sits
    // at window point (width/2, height - margin) with margin = 16 px.
    Homography window_to_plane() const;
};

// Similarity (uniform scale + translation) mapping canonical window pixels
// to image pixels so that the projected object is `object_height_px` tall
// with its base midpoint at the canonical base position. This is the crop
// rule used for dataset examples: it preserves the view's foreshortening.
Homography canonical_crop_similarity(const Homography& plane_to_image, const CanonicalWindow& canon);

// Canonical model-view pixels -> object-plane meters for a model trained on
// crops taken at `pose`. For elevation 0 this equals window_to_plane().
Homography model_view_to_plane(const CameraPose& pose, const ObjectPlaneSpec& obj,
                               const CanonicalWindow& canon);

// Map from source-view crop pixels to target-view crop pixels for the same
// object seen from two poses (both crops taken with the canonical rule).
// This is the viewpoint-change homography that drives feature remapping
// between crop-level views.
Homography crop_relative_homography(const CameraPose& source_pose, const CameraPose& target_pose,
                                    const ObjectPlaneSpec& obj, const CanonicalWindow& canon);

} // namespace va
