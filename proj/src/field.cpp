#include "msrf/field.hpp"

#include <cstdio>
#include <cstring>
#include <memory>

#include "msrf/errors.hpp"

namespace msrf {

const char* coupling_name(Coupling c) {
  switch (c) {
    case Coupling::Separate: return "separate";
    case Coupling::Shared: return "shared";
    case Coupling::Independent: return "independent";
  }
  return "separate";
}

Coupling coupling_from_name(const std::string& name) {
  if (name == "separate") return Coupling::Separate;
  if (name == "shared") return Coupling::Shared;
  if (name == "independent") return Coupling::Independent;
  throw SchemaViolation("unknown coupling mode '" + name + "'");
}

MultispectralField::MultispectralField(const Vec3& bbox_min,
                                       const Vec3& bbox_max,
                                       const Vec3i& resolution,
                                       Coupling coupling)
    : bbox_min_(bbox_min), bbox_max_(bbox_max), resolution_(resolution),
      coupling_(coupling) {
  for (int a = 0; a < 3; ++a) {
    if (!(bbox_min_[a] < bbox_max_[a])) {
      throw SchemaViolation("field bbox_min must be < bbox_max per axis");
    }
    if (resolution_[a] < 1) {
      throw SchemaViolation("field resolution must be >= 1 per axis");
    }
  }
  n_voxels_ = static_cast<int64_t>(resolution_.x()) * resolution_.y() *
              resolution_.z();
  const bool shared = coupling_ == Coupling::Shared;
  sigma_therm_offset_ = shared ? 0 : n_voxels_;
  color_rgb_offset_ = shared ? n_voxels_ : 2 * n_voxels_;
  color_therm_offset_ = color_rgb_offset_ + 3 * n_voxels_;
  params_.assign(color_therm_offset_ + n_voxels_, 0.0);

  const double sigma_raw = softplus_inverse(kInitialSigma);
  for (int64_t i = 0; i < n_voxels_; ++i) params_[i] = sigma_raw;
  if (!shared) {
    for (int64_t i = 0; i < n_voxels_; ++i) {
      params_[sigma_therm_offset_ + i] = sigma_raw;
    }
  }
}

MultispectralField::Stencil MultispectralField::stencil_at(const Vec3& x) const {
  Stencil st;
  for (int a = 0; a < 3; ++a) {
    if (x[a] < bbox_min_[a] || x[a] > bbox_max_[a]) return st;
  }
  int idx[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    const int n = resolution_[a];
    if (n == 1) {
      idx[a] = 0;
      frac[a] = 0.0;
      continue;
    }
    double g = (x[a] - bbox_min_[a]) / (bbox_max_[a] - bbox_min_[a]) * (n - 1);
    int i = static_cast<int>(g);
    if (i > n - 2) i = n - 2;
    idx[a] = i;
    frac[a] = g - i;
  }
  const int nx = resolution_.x();
  const int64_t nxy = static_cast<int64_t>(nx) * resolution_.y();
  const int64_t base = idx[0] + static_cast<int64_t>(idx[1]) * nx +
                       static_cast<int64_t>(idx[2]) * nxy;
  const int64_t sx = resolution_.x() > 1 ? 1 : 0;
  const int64_t sy = resolution_.y() > 1 ? nx : 0;
  const int64_t sz = resolution_.z() > 1 ? nxy : 0;
  const double fx = frac[0], fy = frac[1], fz = frac[2];
  const double gx = 1.0 - fx, gy = 1.0 - fy, gz = 1.0 - fz;
  st.corner[0] = base;
  st.corner[1] = base + sx;
  st.corner[2] = base + sy;
  st.corner[3] = base + sx + sy;
  st.corner[4] = base + sz;
  st.corner[5] = base + sx + sz;
  st.corner[6] = base + sy + sz;
  st.corner[7] = base + sx + sy + sz;
  st.weight[0] = gx * gy * gz;
  st.weight[1] = fx * gy * gz;
  st.weight[2] = gx * fy * gz;
  st.weight[3] = fx * fy * gz;
  st.weight[4] = gx * gy * fz;
  st.weight[5] = fx * gy * fz;
  st.weight[6] = gx * fy * fz;
  st.weight[7] = fx * fy * fz;
  st.inside = true;
  return st;
}

FieldSample MultispectralField::query(const Vec3& x) const {
  FieldSample out;
  Stencil st = stencil_at(x);
  if (!st.inside) {
    // Empty space: fully transparent, mid-range emission.
    out.color_rgb = Vec3(0.5, 0.5, 0.5);
    out.color_therm = 0.5;
    return out;
  }
  double raw[6] = {0, 0, 0, 0, 0, 0};
  const double* p = params_.data();
  const int64_t off_sr = sigma_rgb_offset();
  const int64_t off_st = sigma_therm_offset_;
  const int64_t off_c = color_rgb_offset_;
  const int64_t off_t = color_therm_offset_;
  for (int k = 0; k < 8; ++k) {
    const int64_t c = st.corner[k];
    const double w = st.weight[k];
    raw[0] += w * p[off_sr + c];
    raw[1] += w * p[off_st + c];
    raw[2] += w * p[off_c + c];
    raw[3] += w * p[off_c + n_voxels_ + c];
    raw[4] += w * p[off_c + 2 * n_voxels_ + c];
    raw[5] += w * p[off_t + c];
  }
  out.sigma_rgb = softplus(raw[0]);
  out.sigma_therm =
      coupling_ == Coupling::Shared ? out.sigma_rgb : softplus(raw[1]);
  out.color_rgb = Vec3(logistic(raw[2]), logistic(raw[3]), logistic(raw[4]));
  out.color_therm = logistic(raw[5]);
  return out;
}

void MultispectralField::query_backward(const Vec3& x,
                                        const FieldSampleGrad& upstream,
                                        std::span<double> grads) const {
  Stencil st = stencil_at(x);
  if (!st.inside) return;
  double raw[6] = {0, 0, 0, 0, 0, 0};
  const double* p = params_.data();
  const int64_t off_sr = sigma_rgb_offset();
  const int64_t off_st = sigma_therm_offset_;
  const int64_t off_c = color_rgb_offset_;
  const int64_t off_t = color_therm_offset_;
  for (int k = 0; k < 8; ++k) {
    const int64_t c = st.corner[k];
    const double w = st.weight[k];
    raw[0] += w * p[off_sr + c];
    raw[1] += w * p[off_st + c];
    raw[2] += w * p[off_c + c];
    raw[3] += w * p[off_c + n_voxels_ + c];
    raw[4] += w * p[off_c + 2 * n_voxels_ + c];
    raw[5] += w * p[off_t + c];
  }
  // d(activated)/d(raw interpolant), then distribute over the 8 corners.
  const double d_sr = upstream.sigma_rgb * sigmoid(raw[0]);
  const double d_st = upstream.sigma_therm * sigmoid(raw[1]);
  const double lr = logistic(raw[2]), lg = logistic(raw[3]),
               lb = logistic(raw[4]), lt = logistic(raw[5]);
  const double d_r = upstream.color_rgb.x() * lr * (1.0 - lr);
  const double d_g = upstream.color_rgb.y() * lg * (1.0 - lg);
  const double d_b = upstream.color_rgb.z() * lb * (1.0 - lb);
  const double d_t = upstream.color_therm * lt * (1.0 - lt);
  double* g = grads.data();
  for (int k = 0; k < 8; ++k) {
    const int64_t c = st.corner[k];
    const double w = st.weight[k];
    g[off_sr + c] += w * d_sr;
    g[off_st + c] += w * d_st;
    g[off_c + c] += w * d_r;
    g[off_c + n_voxels_ + c] += w * d_g;
    g[off_c + 2 * n_voxels_ + c] += w * d_b;
    g[off_t + c] += w * d_t;
  }
}

void MultispectralField::set_constant_raw(double sigma_rgb_raw,
                                          double sigma_therm_raw,
                                          const Vec3& color_rgb_raw,
                                          double color_therm_raw) {
  for (int64_t i = 0; i < n_voxels_; ++i) {
    params_[sigma_rgb_offset() + i] = sigma_rgb_raw;
    params_[sigma_therm_offset_ + i] = sigma_therm_raw;
    params_[color_rgb_offset_ + i] = color_rgb_raw.x();
    params_[color_rgb_offset_ + n_voxels_ + i] = color_rgb_raw.y();
    params_[color_rgb_offset_ + 2 * n_voxels_ + i] = color_rgb_raw.z();
    params_[color_therm_offset_ + i] = color_therm_raw;
  }
}

MultispectralField MultispectralField::upsampled(
    const Vec3i& new_resolution) const {
  MultispectralField out(bbox_min_, bbox_max_, new_resolution, coupling_);
  const int grids = coupling_ == Coupling::Shared ? 5 : 6;
  const int64_t offsets_src[6] = {sigma_rgb_offset(),  sigma_therm_offset_,
                                  color_rgb_offset_,
                                  color_rgb_offset_ + n_voxels_,
                                  color_rgb_offset_ + 2 * n_voxels_,
                                  color_therm_offset_};
  const int64_t offsets_dst[6] = {out.sigma_rgb_offset(),
                                  out.sigma_therm_offset_,
                                  out.color_rgb_offset_,
                                  out.color_rgb_offset_ + out.n_voxels_,
                                  out.color_rgb_offset_ + 2 * out.n_voxels_,
                                  out.color_therm_offset_};
  // In shared mode slot 1 aliases slot 0; iterate distinct grids only.
  const int slot_of_grid_shared[5] = {0, 2, 3, 4, 5};
  for (int g = 0; g < grids; ++g) {
    const int slot = coupling_ == Coupling::Shared ? slot_of_grid_shared[g] : g;
    for (int iz = 0; iz < new_resolution.z(); ++iz) {
      for (int iy = 0; iy < new_resolution.y(); ++iy) {
        for (int ix = 0; ix < new_resolution.x(); ++ix) {
          Vec3 pos;
          const int ni[3] = {ix, iy, iz};
          for (int a = 0; a < 3; ++a) {
            const int n = new_resolution[a];
            const double t = n == 1 ? 0.0 : static_cast<double>(ni[a]) / (n - 1);
            pos[a] = bbox_min_[a] + t * (bbox_max_[a] - bbox_min_[a]);
          }
          Stencil st = stencil_at(pos);
          double v = 0.0;
          for (int k = 0; k < 8; ++k) {
            v += st.weight[k] * params_[offsets_src[slot] + st.corner[k]];
          }
          out.params_[offsets_dst[slot] + out.lattice_index(ix, iy, iz)] = v;
        }
      }
    }
  }
  return out;
}

namespace {
constexpr char kMagic[5] = {'M', 'S', 'R', 'F', '1'};

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};

void write_exact(FILE* f, const void* data, size_t bytes,
                 const std::string& path) {
  if (std::fwrite(data, 1, bytes, f) != bytes) {
    throw IoError("short write to " + path);
  }
}

void read_exact(FILE* f, void* data, size_t bytes, const std::string& path) {
  if (std::fread(data, 1, bytes, f) != bytes) {
    throw IoError("short read from " + path);
  }
}
}  // namespace

void MultispectralField::save_checkpoint(const std::string& path) const {
  std::unique_ptr<FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path + " for writing");
  FILE* f = fp.get();
  write_exact(f, kMagic, sizeof(kMagic), path);
  uint8_t mode = static_cast<uint8_t>(coupling_);
  write_exact(f, &mode, 1, path);
  uint32_t res[3] = {static_cast<uint32_t>(resolution_.x()),
                     static_cast<uint32_t>(resolution_.y()),
                     static_cast<uint32_t>(resolution_.z())};
  write_exact(f, res, sizeof(res), path);
  double bbox[6] = {bbox_min_.x(), bbox_min_.y(), bbox_min_.z(),
                    bbox_max_.x(), bbox_max_.y(), bbox_max_.z()};
  write_exact(f, bbox, sizeof(bbox), path);
  // Raw grids as little-endian float32, x-fastest. Shared mode stores the
  // aliased sigma grid once.
  std::vector<float> buf(static_cast<size_t>(n_voxels_));
  const int grids = coupling_ == Coupling::Shared ? 5 : 6;
  const int64_t offsets[6] = {sigma_rgb_offset(),  sigma_therm_offset_,
                              color_rgb_offset_,
                              color_rgb_offset_ + n_voxels_,
                              color_rgb_offset_ + 2 * n_voxels_,
                              color_therm_offset_};
  const int slot_of_grid_shared[5] = {0, 2, 3, 4, 5};
  for (int g = 0; g < grids; ++g) {
    const int slot = coupling_ == Coupling::Shared ? slot_of_grid_shared[g] : g;
    for (int64_t i = 0; i < n_voxels_; ++i) {
      buf[static_cast<size_t>(i)] =
          static_cast<float>(params_[offsets[slot] + i]);
    }
    write_exact(f, buf.data(), buf.size() * sizeof(float), path);
  }
}

MultispectralField MultispectralField::load_checkpoint(
    const std::string& path) {
  std::unique_ptr<FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw MissingFile("cannot open " + path);
  FILE* f = fp.get();
  char magic[5];
  read_exact(f, magic, sizeof(magic), path);
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw SchemaViolation("bad checkpoint magic in " + path);
  }
  uint8_t mode = 0;
  read_exact(f, &mode, 1, path);
  if (mode > 2) throw SchemaViolation("bad coupling mode in " + path);
  uint32_t res[3];
  read_exact(f, res, sizeof(res), path);
  double bbox[6];
  read_exact(f, bbox, sizeof(bbox), path);
  MultispectralField field(Vec3(bbox[0], bbox[1], bbox[2]),
                           Vec3(bbox[3], bbox[4], bbox[5]),
                           Vec3i(static_cast<int>(res[0]),
                                 static_cast<int>(res[1]),
                                 static_cast<int>(res[2])),
                           static_cast<Coupling>(mode));
  std::vector<float> buf(static_cast<size_t>(field.n_voxels_));
  const int grids = field.coupling_ == Coupling::Shared ? 5 : 6;
  const int64_t offsets[6] = {field.sigma_rgb_offset(),
                              field.sigma_therm_offset_,
                              field.color_rgb_offset_,
                              field.color_rgb_offset_ + field.n_voxels_,
                              field.color_rgb_offset_ + 2 * field.n_voxels_,
                              field.color_therm_offset_};
  const int slot_of_grid_shared[5] = {0, 2, 3, 4, 5};
  for (int g = 0; g < grids; ++g) {
    const int slot =
        field.coupling_ == Coupling::Shared ? slot_of_grid_shared[g] : g;
    read_exact(f, buf.data(), buf.size() * sizeof(float), path);
    for (int64_t i = 0; i < field.n_voxels_; ++i) {
      field.params_[offsets[slot] + i] = buf[static_cast<size_t>(i)];
    }
  }
  return field;
}

}  // namespace msrf
