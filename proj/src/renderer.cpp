#include "msrf/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "msrf/errors.hpp"
#include "msrf/parallel.hpp"

namespace msrf {

RenderResult render_ray(const MultispectralField& field, const Ray& ray,
                        Spectrum spectrum, const RenderOptions& options,
                        Rng& rng) {
  RenderResult out;
  out.spectrum = spectrum;
  out.ray = ray;
  out.n_samples = options.n_samples;
  const int n = options.n_samples;
  if (n < 2 || !(ray.t_near < ray.t_far)) return out;

  out.samples.reserve(static_cast<size_t>(n));
  const double span = ray.t_far - ray.t_near;
  const double bin = span / n;
  double trans = 1.0;
  double color_r = 0.0, color_g = 0.0, color_b = 0.0;
  double depth_acc = 0.0;
  const bool rgb = spectrum == Spectrum::Rgb;

  for (int i = 0; i < n; ++i) {
    const double t = ray.t_near + (i + rng.uniform()) * bin;
    const double t_next = ray.t_near + (i + 1) * bin;
    const double delta = t_next - t;
    FieldSample s = field.query(ray.point_at(t));
    double sigma = rgb ? s.sigma_rgb : s.sigma_therm;
    if (options.reveal_epsilon &&
        std::abs(s.sigma_rgb - s.sigma_therm) >= *options.reveal_epsilon) {
      sigma = 0.0;
    }
    const double alpha = 1.0 - std::exp(-sigma * delta);
    const double weight = trans * alpha;
    trans *= 1.0 - alpha;

    RaySampleRecord rec;
    rec.t = t;
    rec.delta = delta;
    rec.sigma = sigma;
    rec.emission = rgb ? s.color_rgb : Vec3(s.color_therm, 0.0, 0.0);
    rec.weight = weight;
    rec.trans_after = trans;
    out.samples.push_back(rec);

    color_r += weight * rec.emission.x();
    color_g += weight * rec.emission.y();
    color_b += weight * rec.emission.z();
    depth_acc += weight * t;

    if (trans < options.early_stop_transmittance) break;
  }

  out.color = Vec3(color_r, color_g, color_b);
  out.opacity = 1.0 - trans;
  out.depth = depth_acc / std::max(out.opacity, 1e-8);
  out.revealed = options.reveal_epsilon.has_value();
  return out;
}

void render_ray_backward(const MultispectralField& field,
                         const RenderResult& result, const Vec3& upstream,
                         std::span<double> grads) {
  if (static_cast<int>(result.samples.size()) > result.n_samples) {
    throw CacheMismatch("cached sample count exceeds requested n_samples");
  }
  if (result.revealed) {
    throw CacheMismatch("reveal rendering is inference-only");
  }
  const bool rgb = result.spectrum == Spectrum::Rgb;
  const int m = static_cast<int>(result.samples.size());
  // d(color)/d(sigma_i) = delta_i * (T_{i+1} c_i - sum_{j>i} w_j c_j);
  // accumulate the suffix sum back to front.
  Vec3 suffix = Vec3::Zero();
  std::vector<double> grad_sigma(static_cast<size_t>(m));
  for (int i = m - 1; i >= 0; --i) {
    const RaySampleRecord& rec = result.samples[static_cast<size_t>(i)];
    const double up_dot_c = upstream.dot(rec.emission);
    const double up_dot_suffix = upstream.dot(suffix);
    grad_sigma[static_cast<size_t>(i)] =
        rec.delta * (rec.trans_after * up_dot_c - up_dot_suffix);
    suffix += rec.weight * rec.emission;
  }
  for (int i = 0; i < m; ++i) {
    const RaySampleRecord& rec = result.samples[static_cast<size_t>(i)];
    FieldSampleGrad g;
    if (rgb) {
      g.sigma_rgb = grad_sigma[static_cast<size_t>(i)];
      g.color_rgb = rec.weight * upstream;
    } else {
      g.sigma_therm = grad_sigma[static_cast<size_t>(i)];
      g.color_therm = rec.weight * upstream.x();
    }
    field.query_backward(result.ray.point_at(rec.t), g, grads);
  }
}

Ray camera_pixel_ray(const MultispectralField& field, const Camera& camera,
                     int x, int y, const ImageRenderOptions& options) {
  Ray ray = pixel_to_ray(Vec2(x + 0.5, y + 0.5), camera, options.t_near,
                         options.t_far);
  double t0 = 0.0, t1 = 0.0;
  if (intersect_aabb(ray, field.bbox_min(), field.bbox_max(), &t0, &t1) &&
      t1 > t0) {
    ray.t_near = t0;
    ray.t_far = t1;
  } else {
    ray.t_far = ray.t_near;  // degenerate: renders as background
  }
  return ray;
}

namespace {

int decimated_extent(int full, int stride) {
  return (full + stride - 1) / stride;
}

// Shared pixel loop. fn(out_x, out_y, ray, rng) runs for every output pixel;
// with stride > 1 output pixel (ox, oy) samples source pixel
// (ox*stride, oy*stride), so preview pixels match the full render bit-exactly.
template <typename Fn>
void for_each_pixel(const MultispectralField& field, const Camera& camera,
                    const ImageRenderOptions& options, Fn&& fn) {
  const int stride = std::max(1, options.stride);
  const int ow = decimated_extent(camera.intrinsics.width, stride);
  const int oh = decimated_extent(camera.intrinsics.height, stride);
  ThreadPool pool(ThreadPool::default_worker_count());
  pool.parallel_for(oh, [&](int, int64_t r0, int64_t r1) {
    for (int64_t oy = r0; oy < r1; ++oy) {
      const int sy = static_cast<int>(oy) * stride;
      for (int ox = 0; ox < ow; ++ox) {
        const int sx = ox * stride;
        Ray ray = camera_pixel_ray(field, camera, sx, sy, options);
        Rng rng(derive_seed(options.seed, static_cast<uint64_t>(sx),
                            static_cast<uint64_t>(sy)));
        fn(ox, static_cast<int>(oy), sx, sy, ray, rng);
      }
    }
  });
}

}  // namespace

RgbtImage render_image(const MultispectralField& field, const Camera& camera,
                       const ImageRenderOptions& options, bool all_channels) {
  const int stride = std::max(1, options.stride);
  RgbtImage out(decimated_extent(camera.intrinsics.width, stride),
                decimated_extent(camera.intrinsics.height, stride));
  const bool want_rgb = all_channels || camera.spectrum == Spectrum::Rgb;
  const bool want_therm = all_channels || camera.spectrum == Spectrum::Thermal;
  RenderOptions ropt;
  ropt.n_samples = options.n_samples;
  ropt.reveal_epsilon = options.reveal_epsilon;
  for_each_pixel(field, camera, options,
                 [&](int x, int y, int sx, int sy, const Ray& ray, Rng& rng) {
    if (want_rgb) {
      RenderResult r = render_ray(field, ray, Spectrum::Rgb, ropt, rng);
      out.rgb.at(x, y, 0) = static_cast<float>(r.color.x());
      out.rgb.at(x, y, 1) = static_cast<float>(r.color.y());
      out.rgb.at(x, y, 2) = static_cast<float>(r.color.z());
    }
    if (want_therm) {
      Rng trng(derive_seed(options.seed, static_cast<uint64_t>(sx),
                           static_cast<uint64_t>(sy), 0x7468u));
      RenderResult r = render_ray(field, ray, Spectrum::Thermal, ropt, trng);
      out.thermal.at(x, y, 0) = static_cast<float>(r.color.x());
    }
  });
  out.set_rgb_valid(want_rgb);
  out.set_thermal_valid(want_therm);
  return out;
}

RgbtImage render_revealed(const MultispectralField& field,
                          const Camera& camera, Spectrum spectrum,
                          double epsilon, const ImageRenderOptions& options) {
  if (!(epsilon > 0.0)) {
    throw SchemaViolation("reveal epsilon must be > 0");
  }
  ImageRenderOptions opt = options;
  opt.reveal_epsilon = epsilon;
  Camera cam = camera;
  cam.spectrum = spectrum;
  return render_image(field, cam, opt, /*all_channels=*/false);
}

Image render_depth(const MultispectralField& field, const Camera& camera,
                   Spectrum spectrum, const ImageRenderOptions& options) {
  const int stride = std::max(1, options.stride);
  Image out(decimated_extent(camera.intrinsics.width, stride),
            decimated_extent(camera.intrinsics.height, stride), 2);
  RenderOptions ropt;
  ropt.n_samples = options.n_samples;
  ropt.reveal_epsilon = options.reveal_epsilon;
  for_each_pixel(field, camera, options,
                 [&](int x, int y, int, int, const Ray& ray, Rng& rng) {
    RenderResult r = render_ray(field, ray, spectrum, ropt, rng);
    // Zero-opacity pixels report depth 0 rather than the guard ratio.
    out.at(x, y, 0) = r.opacity > 1e-6 ? static_cast<float>(r.depth) : 0.0f;
    out.at(x, y, 1) = static_cast<float>(r.opacity);
  });
  return out;
}

Image render_opacity(const MultispectralField& field, const Camera& camera,
                     Spectrum spectrum, const ImageRenderOptions& options) {
  const int stride = std::max(1, options.stride);
  Image out(decimated_extent(camera.intrinsics.width, stride),
            decimated_extent(camera.intrinsics.height, stride), 1);
  RenderOptions ropt;
  ropt.n_samples = options.n_samples;
  ropt.reveal_epsilon = options.reveal_epsilon;
  for_each_pixel(field, camera, options,
                 [&](int x, int y, int, int, const Ray& ray, Rng& rng) {
    RenderResult r = render_ray(field, ray, spectrum, ropt, rng);
    out.at(x, y, 0) = static_cast<float>(r.opacity);
  });
  return out;
}

}  // namespace msrf
