#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace msrf {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

enum class Spectrum : uint8_t { Rgb, Thermal };

// Rigid world-to-camera transform: x_cam = R * x_world + t.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return Pose{}; }

  Vec3 apply(const Vec3& world_point) const {
    return rotation * world_point + translation;
  }
  // Camera center in world coordinates.
  Vec3 center() const { return -(rotation.transpose() * translation); }

  bool is_valid(double tol = 1e-9) const;
};

// compose(a, b).apply(x) == a.apply(b.apply(x))
Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& a);

// Builds a pose for a camera at `position` looking at `target`, world-up
// `up`. Camera convention: +X right, +Y down, +Z forward (right-handed).
Pose look_at(const Vec3& position, const Vec3& target,
             const Vec3& up = Vec3(0, 0, 1));

struct Intrinsics {
  double fx = 0, fy = 0;  // focal lengths, pixels
  double cx = 0, cy = 0;  // principal point, pixels
  double k1 = 0, k2 = 0;  // radial distortion
  double p1 = 0, p2 = 0;  // tangential distortion
  int width = 0, height = 0;
};

struct Camera {
  Intrinsics intrinsics;
  Pose pose;
  Spectrum spectrum = Spectrum::Rgb;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit norm
  double t_near = 0.0;
  double t_far = 1.0;

  Vec3 point_at(double t) const { return origin + t * direction; }
};

// Applies the Brown-Conrady polynomial to normalized image coordinates.
Vec2 distort_normalized(const Intrinsics& intr, const Vec2& normalized);

// Inverse of distort_normalized by fixed-point iteration (20 iterations,
// tolerance 1e-10). Throws DistortionInversionDiverged if the residual stays
// above 1e-8.
Vec2 undistort_normalized(const Intrinsics& intr, const Vec2& distorted);

// World point -> pixel. Throws PointBehindCamera when Z_c <= 1e-9. The
// result may lie outside the image rectangle; callers clip.
Vec2 project(const Vec3& world_point, const Camera& camera);

// Pixel -> world-space ray with unit direction.
Ray pixel_to_ray(const Vec2& pixel, const Camera& camera,
                 double t_near = 1e-3, double t_far = 1e6);

// Intersects a ray with an axis-aligned box; returns false on miss.
// On hit, [*t0, *t1] is the in-box range clipped to [ray.t_near, ray.t_far].
bool intersect_aabb(const Ray& ray, const Vec3& box_min, const Vec3& box_max,
                    double* t0, double* t1);

}  // namespace msrf
