#include "msrf/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "msrf/errors.hpp"

namespace msrf {

bool Pose::is_valid(double tol) const {
  Mat3 gram = rotation.transpose() * rotation;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Pose invert(const Pose& a) {
  Pose out;
  out.rotation = a.rotation.transpose();
  out.translation = -(a.rotation.transpose() * a.translation);
  return out;
}

Pose look_at(const Vec3& position, const Vec3& target, const Vec3& up) {
  Vec3 forward = (target - position).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-12) {
    // Looking straight along `up`; pick an arbitrary perpendicular.
    right = forward.cross(Vec3(1, 0, 0));
    if (right.norm() < 1e-12) right = forward.cross(Vec3(0, 1, 0));
  }
  right.normalize();
  Vec3 down = forward.cross(right);
  Pose pose;
  pose.rotation.row(0) = right.transpose();
  pose.rotation.row(1) = down.transpose();
  pose.rotation.row(2) = forward.transpose();
  pose.translation = -(pose.rotation * position);
  return pose;
}

Vec2 distort_normalized(const Intrinsics& intr, const Vec2& n) {
  const double x = n.x(), y = n.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + intr.k1 * r2 + intr.k2 * r2 * r2;
  const double xd = x * radial + 2.0 * intr.p1 * x * y +
                    intr.p2 * (r2 + 2.0 * x * x);
  const double yd = y * radial + intr.p1 * (r2 + 2.0 * y * y) +
                    2.0 * intr.p2 * x * y;
  return {xd, yd};
}

Vec2 undistort_normalized(const Intrinsics& intr, const Vec2& distorted) {
  constexpr int kMaxIterations = 20;
  constexpr double kTol = 1e-10;
  Vec2 n = distorted;
  for (int i = 0; i < kMaxIterations; ++i) {
    Vec2 delta = distort_normalized(intr, n) - n;
    Vec2 next = distorted - delta;
    if ((next - n).cwiseAbs().maxCoeff() < kTol) {
      n = next;
      break;
    }
    n = next;
  }
  double residual = (distort_normalized(intr, n) - distorted).norm();
  if (residual > 1e-8) {
    throw DistortionInversionDiverged(
        "fixed-point residual " + std::to_string(residual) +
        " after iteration cap");
  }
  return n;
}

Vec2 project(const Vec3& world_point, const Camera& camera) {
  Vec3 cam = camera.pose.apply(world_point);
  if (cam.z() <= 1e-9) {
    throw PointBehindCamera("Z_c = " + std::to_string(cam.z()));
  }
  Vec2 normalized(cam.x() / cam.z(), cam.y() / cam.z());
  Vec2 d = distort_normalized(camera.intrinsics, normalized);
  return {camera.intrinsics.fx * d.x() + camera.intrinsics.cx,
          camera.intrinsics.fy * d.y() + camera.intrinsics.cy};
}

Ray pixel_to_ray(const Vec2& pixel, const Camera& camera, double t_near,
                 double t_far) {
  const Intrinsics& intr = camera.intrinsics;
  Vec2 distorted((pixel.x() - intr.cx) / intr.fx,
                 (pixel.y() - intr.cy) / intr.fy);
  Vec2 n = undistort_normalized(intr, distorted);
  Vec3 dir_cam(n.x(), n.y(), 1.0);
  Mat3 cam_to_world = camera.pose.rotation.transpose();
  Ray ray;
  ray.origin = camera.pose.center();
  ray.direction = (cam_to_world * dir_cam).normalized();
  ray.t_near = t_near;
  ray.t_far = t_far;
  return ray;
}

bool intersect_aabb(const Ray& ray, const Vec3& box_min, const Vec3& box_max,
                    double* t0, double* t1) {
  double lo = ray.t_near;
  double hi = ray.t_far;
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    const double d = ray.direction[axis];
    if (std::abs(d) < 1e-15) {
      if (o < box_min[axis] || o > box_max[axis]) return false;
      continue;
    }
    double ta = (box_min[axis] - o) / d;
    double tb = (box_max[axis] - o) / d;
    if (ta > tb) std::swap(ta, tb);
    lo = std::max(lo, ta);
    hi = std::min(hi, tb);
    if (lo > hi) return false;
  }
  *t0 = lo;
  *t1 = hi;
  return true;
}

}  // namespace msrf
