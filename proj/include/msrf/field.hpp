#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msrf/geometry.hpp"

namespace msrf {

enum class Coupling : uint8_t { Separate, Shared, Independent };

const char* coupling_name(Coupling c);
Coupling coupling_from_name(const std::string& name);

// Numerically stable softplus / logistic pair used for density and emission.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}
inline double softplus_inverse(double y) { return std::log(std::expm1(y)); }
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logistic_inverse(double y) { return std::log(y / (1.0 - y)); }
inline double sigmoid(double x) { return logistic(x); }

struct FieldSample {
  double sigma_rgb = 0.0;
  double sigma_therm = 0.0;
  Vec3 color_rgb = Vec3::Zero();
  double color_therm = 0.0;
};

// Gradient of some scalar loss with respect to one FieldSample.
struct FieldSampleGrad {
  double sigma_rgb = 0.0;
  double sigma_therm = 0.0;
  Vec3 color_rgb = Vec3::Zero();
  double color_therm = 0.0;
};

// Explicit voxel lattice over an axis-aligned box. Raw (pre-activation)
// values live at lattice points; resolution counts lattice points per axis
// and the lattice spans the box inclusively. Queries are trilinear in raw
// space followed by softplus (densities) and logistic (emissions). Points
// outside the box sample as empty space: zero density, emission 0.5.
//
// Parameters are stored in one flat vector in grid-slot order
// [sigma_rgb, sigma_therm, r, g, b, tau]; in Shared coupling the two sigma
// slots alias the same storage range, so there are 5 grids instead of 6.
class MultispectralField {
 public:
  MultispectralField(const Vec3& bbox_min, const Vec3& bbox_max,
                     const Vec3i& resolution, Coupling coupling);

  const Vec3& bbox_min() const { return bbox_min_; }
  const Vec3& bbox_max() const { return bbox_max_; }
  const Vec3i& resolution() const { return resolution_; }
  Coupling coupling() const { return coupling_; }

  int64_t voxel_count() const { return n_voxels_; }
  int64_t parameter_count() const {
    return static_cast<int64_t>(params_.size());
  }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  // Offsets of each raw grid inside the parameter vector. In Shared mode
  // sigma_therm_offset() == sigma_rgb_offset().
  int64_t sigma_rgb_offset() const { return 0; }
  int64_t sigma_therm_offset() const { return sigma_therm_offset_; }
  int64_t color_rgb_offset() const { return color_rgb_offset_; }
  int64_t color_therm_offset() const { return color_therm_offset_; }

  FieldSample query(const Vec3& x) const;

  // Chain rule through activation and trilinear weights: adds
  // upstream * d(FieldSample)/d(raw) into `grads` (same layout as the
  // parameter vector). Points outside the box contribute nothing.
  void query_backward(const Vec3& x, const FieldSampleGrad& upstream,
                      std::span<double> grads) const;

  // Raw (pre-activation) trilinear interpolants; sigma_* in [0], [1],
  // rgb in [2..4], therm in [5]. Used by the renderer to avoid a second
  // weight computation.
  void set_constant_raw(double sigma_rgb_raw, double sigma_therm_raw,
                        const Vec3& color_rgb_raw, double color_therm_raw);

  // Trilinear upsampling of all raw grids to a new lattice resolution.
  MultispectralField upsampled(const Vec3i& new_resolution) const;

  void save_checkpoint(const std::string& path) const;
  static MultispectralField load_checkpoint(const std::string& path);

  // Lattice-point raw value accessors (x-fastest index).
  int64_t lattice_index(int ix, int iy, int iz) const {
    return (static_cast<int64_t>(iz) * resolution_.y() + iy) * resolution_.x() +
           ix;
  }
  double& raw_at(int64_t grid_offset, int ix, int iy, int iz) {
    return params_[grid_offset + lattice_index(ix, iy, iz)];
  }
  double raw_at(int64_t grid_offset, int ix, int iy, int iz) const {
    return params_[grid_offset + lattice_index(ix, iy, iz)];
  }

  // Initialization constants: densities start near-transparent, colors at
  // mid-range (raw 0 -> 0.5 after logistic).
  static constexpr double kInitialSigma = 0.01;

 private:
  struct Stencil {
    int64_t corner[8];
    double weight[8];
    bool inside = false;
  };
  Stencil stencil_at(const Vec3& x) const;

  Vec3 bbox_min_, bbox_max_;
  Vec3i resolution_;
  Coupling coupling_;
  int64_t n_voxels_ = 0;
  int64_t sigma_therm_offset_ = 0;
  int64_t color_rgb_offset_ = 0;
  int64_t color_therm_offset_ = 0;
  std::vector<double> params_;
};

}  // namespace msrf
