#pragma once

#include <optional>
#include <span>
#include <vector>

#include "msrf/field.hpp"
#include "msrf/geometry.hpp"
#include "msrf/image.hpp"
#include "msrf/rng.hpp"

namespace msrf {

struct RenderOptions {
  int n_samples = 128;
  // Forward-only speedup; the backward pass replays the cached samples.
  double early_stop_transmittance = 1e-4;
  // When set, each density sample is gated by 1(|sigma_rgb - sigma_therm|
  // < epsilon); inference-only (no backward support).
  std::optional<double> reveal_epsilon;
};

// One quadrature sample retained for the backward pass.
struct RaySampleRecord {
  double t = 0.0;
  double delta = 0.0;
  double sigma = 0.0;        // density used for this spectrum
  Vec3 emission = Vec3::Zero();  // thermal uses component 0
  double weight = 0.0;
  double trans_after = 0.0;  // transmittance after absorbing this sample
};

struct RenderResult {
  Spectrum spectrum = Spectrum::Rgb;
  Vec3 color = Vec3::Zero();  // thermal result lives in color[0]
  double opacity = 0.0;
  double depth = 0.0;
  Ray ray;
  int n_samples = 0;  // as requested at render time
  bool revealed = false;
  std::vector<RaySampleRecord> samples;  // may be short of n_samples
};

// Renders one ray by stratified sampling of [t_near, t_far]: one jittered
// sample per bin, composited front to back with the requested spectrum's
// density. Black background behind residual transmittance.
RenderResult render_ray(const MultispectralField& field, const Ray& ray,
                        Spectrum spectrum, const RenderOptions& options,
                        Rng& rng);

// Accumulates d(loss)/d(parameters) into `grads` given d(loss)/d(color).
// For thermal rays only upstream[0] is used. Throws CacheMismatch if the
// result's cache is inconsistent with its recorded sample count.
void render_ray_backward(const MultispectralField& field,
                         const RenderResult& result, const Vec3& upstream,
                         std::span<double> grads);

struct ImageRenderOptions {
  int n_samples = 128;
  int stride = 1;        // > 1 renders a decimated preview
  uint64_t seed = 0;     // per-pixel streams derive from this
  double t_near = 1e-3;  // used when the ray misses the field bbox clip
  double t_far = 1e6;
  std::optional<double> reveal_epsilon;
};

// Builds the ray for one pixel (center at x+0.5, y+0.5), clipped to the
// field bounding box.
Ray camera_pixel_ray(const MultispectralField& field, const Camera& camera,
                     int x, int y, const ImageRenderOptions& options);

// Per-pixel deterministic rendering of the camera's own spectrum, or of
// both when `all_channels` is set. Channel validity flags mark what was
// rendered.
RgbtImage render_image(const MultispectralField& field, const Camera& camera,
                       const ImageRenderOptions& options,
                       bool all_channels = false);

// As render_image but with the reveal indicator applied (options.reveal_epsilon
// must be set); returns the single requested spectrum.
RgbtImage render_revealed(const MultispectralField& field,
                          const Camera& camera, Spectrum spectrum,
                          double epsilon, const ImageRenderOptions& options);

// Expected termination distance per pixel (0 where opacity ~ 0), plus the
// opacity map in channel 1.
Image render_depth(const MultispectralField& field, const Camera& camera,
                   Spectrum spectrum, const ImageRenderOptions& options);

// Opacity map of the requested spectrum (used for silhouette extraction).
Image render_opacity(const MultispectralField& field, const Camera& camera,
                     Spectrum spectrum, const ImageRenderOptions& options);

}  // namespace msrf
