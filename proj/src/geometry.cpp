#include "va/geometry.hpp"

#include <cmath>

namespace va {

Homography make_homography(const std::array<double, 9>& raw, double eps_norm) {
    Homography h;
    h.m = raw;
    double w = raw[8];
    if (std::abs(w) > eps_norm) {
        for (auto& v : h.m) v /= w;
        h.m[8] = 1.0;
        h.normalized = true;
    } else {
        h.normalized = false;
    }
    return h;
}

Homography multiply(const Homography& a, const Homography& b) {
    std::array<double, 9> r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            r[static_cast<size_t>(3 * i + j)] = s;
        }
    return make_homography(r);
}

Homography invert(const Homography& h) {
    const auto& m = h.m;
    double d = h.det();
    // Scale-aware singularity test: compare against the matrix magnitude.
    double scale = 0.0;
    for (double v : m) scale = std::max(scale, std::abs(v));
    if (std::abs(d) < 1e-14 * scale * scale * scale || scale == 0.0)
        throw NonInvertibleError("homography is singular");
    std::array<double, 9> a{};
    a[0] = (m[4] * m[8] - m[5] * m[7]) / d;
    a[1] = (m[2] * m[7] - m[1] * m[8]) / d;
    a[2] = (m[1] * m[5] - m[2] * m[4]) / d;
    a[3] = (m[5] * m[6] - m[3] * m[8]) / d;
    a[4] = (m[0] * m[8] - m[2] * m[6]) / d;
    a[5] = (m[2] * m[3] - m[0] * m[5]) / d;
    a[6] = (m[3] * m[7] - m[4] * m[6]) / d;
    a[7] = (m[1] * m[6] - m[0] * m[7]) / d;
    a[8] = (m[0] * m[4] - m[1] * m[3]) / d;
    return make_homography(a);
}

Homography relative_homography(const Homography& h1, const Homography& h2) {
    return multiply(h1, invert(h2));
}

Vec2 transform_point(const Homography& h, Vec2 p, double eps_h) {
    const auto& m = h.m;
    double u = m[0] * p.x + m[1] * p.y + m[2];
    double v = m[3] * p.x + m[4] * p.y + m[5];
    double w = m[6] * p.x + m[7] * p.y + m[8];
    if (std::abs(w) < eps_h)
        throw PointAtInfinityError("point maps to infinity");
    return {u / w, v / w};
}

double transform_gradient_angle(const Homography& h, double x_prime, double y_prime,
                                double theta, double eps_den) {
    const auto& m = h.m;
    double c = std::cos(theta);
    double s = std::sin(theta);
    double num = (m[3] - m[6] * y_prime) * c + (m[4] - m[7] * y_prime) * s;
    double den = (m[0] - m[6] * x_prime) * c + (m[1] - m[7] * x_prime) * s;
    if (std::abs(num) < eps_den && std::abs(den) < eps_den)
        throw DegenerateAngleError("gradient angle undefined at this point");
    double out = std::atan2(num, den);
    // fold into [0, pi)
    out = std::fmod(out, kPi);
    if (out < 0) out += kPi;
    if (out >= kPi) out -= kPi;
    return out;
}

void CameraPose::validate() const {
    if (!(elevation >= 0.0 && elevation < kPi / 2))
        throw Error("camera elevation must lie in [0, pi/2)");
    if (!(distance > 0.0)) throw Error("camera distance must be positive");
    if (!(focal_length > 0.0)) throw Error("focal length must be positive");
    if (image_width <= 0 || image_height <= 0)
        throw Error("image size components must be positive");
}

void ObjectPlaneSpec::validate() const {
    if (!(height > 0.0)) throw Error("object height must be positive");
    if (!(width > 0.0)) throw Error("object width must be positive");
    if (base_point.z != 0.0) throw Error("object base must lie on the ground plane");
}

WorldCamera camera_for_pose(const CameraPose& pose, Vec3 aim) {
    pose.validate();
    WorldCamera cam;
    cam.center = aim + Vec3{0.0, -pose.distance * std::cos(pose.elevation),
                            pose.distance * std::sin(pose.elevation)};
    Vec3 forward = normalized(aim - cam.center);
    Vec3 up{0, 0, 1};
    Vec3 right = cross(forward, up);
    double rn = norm(right);
    if (rn < 1e-12) throw NonInvertibleError("camera looks straight down");
    right = {right.x / rn, right.y / rn, right.z / rn};
    Vec3 down = cross(forward, right);
    cam.rot = {right, down, forward};
    cam.focal_length = pose.focal_length;
    cam.principal_point = pose.principal_point;
    cam.image_width = pose.image_width;
    cam.image_height = pose.image_height;
    return cam;
}

Homography object_plane_homography(const WorldCamera& cam, Vec3 base) {
    // In-plane axes: v is world-up, u is horizontal and perpendicular to the
    // camera-to-base direction (the plane faces the camera).
    Vec3 horiz{base.x - cam.center.x, base.y - cam.center.y, 0.0};
    double hn = norm(horiz);
    if (hn < 1e-12)
        throw NonInvertibleError("object base directly under the camera");
    horiz = {horiz.x / hn, horiz.y / hn, 0.0};
    Vec3 u_axis = cross(horiz, Vec3{0, 0, 1});  // points camera-right
    Vec3 v_axis{0, 0, 1};
    Vec3 t = base - cam.center;

    // H = K * R * [u | v | t], column per homogeneous plane coordinate.
    std::array<Vec3, 3> cols{u_axis, v_axis, t};
    std::array<double, 9> m{};
    for (int j = 0; j < 3; ++j) {
        Vec3 rc{dot(cam.rot[0], cols[static_cast<size_t>(j)]),
                dot(cam.rot[1], cols[static_cast<size_t>(j)]),
                dot(cam.rot[2], cols[static_cast<size_t>(j)])};
        m[static_cast<size_t>(j)] = cam.focal_length * rc.x + cam.principal_point.x * rc.z;
        m[static_cast<size_t>(3 + j)] = cam.focal_length * rc.y + cam.principal_point.y * rc.z;
        m[static_cast<size_t>(6 + j)] = rc.z;
    }
    Homography h = make_homography(m);
    double scale = 0.0;
    for (double v : h.m) scale = std::max(scale, std::abs(v));
    if (scale == 0.0 || std::abs(h.det()) < 1e-14 * scale * scale * scale)
        throw NonInvertibleError("degenerate object plane projection");
    return h;
}

Homography build_object_plane_homography(const CameraPose& pose, const ObjectPlaneSpec& obj) {
    obj.validate();
    WorldCamera cam = camera_for_pose(pose, obj.base_point);
    return object_plane_homography(cam, obj.base_point);
}

Homography CanonicalWindow::window_to_plane() const {
    double mpp = meters_per_pixel();
    double margin = (height_px - object_height_px) / 2.0;  // 16 px for 64x128
    // u = (x - w/2) * mpp ; v = (height - margin - y) * mpp  (pixel y is down)
    std::array<double, 9> m{mpp, 0, -mpp * width_px / 2.0,
                            0, -mpp, mpp * (height_px - margin),
                            0, 0, 1};
    return make_homography(m);
}

Homography canonical_crop_similarity(const Homography& plane_to_image,
                                     const CanonicalWindow& canon) {
    Vec2 base = transform_point(plane_to_image, {0.0, 0.0});
    Vec2 head = transform_point(plane_to_image, {0.0, canon.object_height_m});
    double span = base.y - head.y;  // head is above base, pixel y is down
    if (!(span > 1e-9))
        throw NonInvertibleError("projected object has no vertical extent");
    double s = span / canon.object_height_px;
    double margin = (canon.height_px - canon.object_height_px) / 2.0;
    double base_x = canon.width_px / 2.0;
    double base_y = canon.height_px - margin;
    std::array<double, 9> m{s, 0, base.x - s * base_x,
                            0, s, base.y - s * base_y,
                            0, 0, 1};
    return make_homography(m);
}

Homography model_view_to_plane(const CameraPose& pose, const ObjectPlaneSpec& obj,
                               const CanonicalWindow& canon) {
    Homography plane_to_image = build_object_plane_homography(pose, obj);
    Homography crop = canonical_crop_similarity(plane_to_image, canon);
    return multiply(invert(plane_to_image), crop);
}

Homography crop_relative_homography(const CameraPose& source_pose, const CameraPose& target_pose,
                                    const ObjectPlaneSpec& obj, const CanonicalWindow& canon) {
    Homography src_view = model_view_to_plane(source_pose, obj, canon);
    Homography tgt_plane_to_image = build_object_plane_homography(target_pose, obj);
    Homography tgt_crop = canonical_crop_similarity(tgt_plane_to_image, canon);
    return multiply(invert(tgt_crop), multiply(tgt_plane_to_image, src_view));
}

} // namespace va
