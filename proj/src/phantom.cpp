#include "gbdl/phantom.hpp"

#include <cmath>
#include <vector>

#include "gbdl/rng.hpp"

namespace gbdl {

namespace {

struct Ellipse {
  double cy, cx;      // center, in [0,1] image coordinates
  double ay, ax;      // semi-axes
  double angle;       // rotation
  double intensity;   // value painted inside (later regions overwrite)
};

// 4x4 supersampled coverage so edges move smoothly between frames.
double coverage(const Ellipse& e, double y, double x, double inv_side) {
  const double ca = std::cos(e.angle), sa = std::sin(e.angle);
  int hits = 0;
  for (int sy = 0; sy < 4; ++sy) {
    for (int sx = 0; sx < 4; ++sx) {
      const double py = y + (sy + 0.5) / 4.0 * inv_side - e.cy;
      const double px = x + (sx + 0.5) / 4.0 * inv_side - e.cx;
      const double ry = ca * py + sa * px;
      const double rx = -sa * py + ca * px;
      const double q = (ry * ry) / (e.ay * e.ay) + (rx * rx) / (e.ax * e.ax);
      if (q <= 1.0) ++hits;
    }
  }
  return hits / 16.0;
}

void paint(RealImage& img, const Ellipse& e) {
  const int side = static_cast<int>(img.rows());
  const double inv_side = 1.0 / side;
  // Bounding box keeps the supersampling cheap.
  const double reach = std::max(e.ay, e.ax);
  const int r0 = std::max(0, static_cast<int>(std::floor((e.cy - reach) * side)) - 1);
  const int r1 = std::min(side - 1, static_cast<int>(std::ceil((e.cy + reach) * side)) + 1);
  const int c0 = std::max(0, static_cast<int>(std::floor((e.cx - reach) * side)) - 1);
  const int c1 = std::min(side - 1, static_cast<int>(std::ceil((e.cx + reach) * side)) + 1);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const double cov = coverage(e, r * inv_side, c * inv_side, inv_side);
      if (cov > 0.0) img(r, c) = (1.0 - cov) * img(r, c) + cov * e.intensity;
    }
  }
}

}  // namespace

Dataset generate_phantom(int side, int frames, double motion_amplitude, uint64_t seed) {
  if (!is_power_of_two(side)) throw DataError("phantom: side must be a power of two");
  if (frames < 1) throw DataError("phantom: need at least one frame");
  Rng rng(seed, 0x7068616eULL);
  // Seeded jitter so different seeds give different geometry.
  const double j1 = 0.02 * (rng.uniform() - 0.5);
  const double j2 = 0.02 * (rng.uniform() - 0.5);
  const double j3 = 0.1 * (rng.uniform() - 0.5);

  // Static clutter: repeated small ellipses in a few shared shape/intensity
  // classes, scattered inside the torso. Drawn once per seed.
  struct Blob {
    double cy, cx, ay, ax, angle, intensity;
  };
  std::vector<Blob> clutter;
  const double class_ay[4] = {0.030, 0.052, 0.024, 0.040};
  const double class_ax[4] = {0.046, 0.030, 0.024, 0.062};
  const double class_in[4] = {0.92, 0.12, 0.70, 0.55};
  for (int b = 0; b < 22; ++b) {
    const int cls = b % 4;
    const double r = 0.05 + 0.26 * std::sqrt(rng.uniform());
    const double th = rng.uniform() * 2.0 * M_PI;
    clutter.push_back({0.5 + r * std::sin(th), 0.5 + r * std::cos(th),
                       class_ay[cls], class_ax[cls], rng.uniform() * M_PI,
                       class_in[cls]});
  }

  std::vector<ComplexImage> out;
  out.reserve(static_cast<size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    const double phase = frames > 1 ? 2.0 * M_PI * t / frames : 0.0;
    const double sway = motion_amplitude * std::sin(phase);
    const double pulse = motion_amplitude * std::sin(phase + 1.3);

    RealImage img = RealImage::Zero(side, side);
    // torso with a rim (bright shell behind a darker interior)
    paint(img, {0.50 + j1, 0.50 + j2, 0.46, 0.42, 0.15 + j3, 0.85});
    paint(img, {0.50 + j1, 0.50 + j2, 0.43, 0.39, 0.15 + j3, 0.30});
    // two rings
    paint(img, {0.28, 0.70, 0.085, 0.085, 0.0, 0.95});
    paint(img, {0.28, 0.70, 0.055, 0.055, 0.0, 0.40});
    paint(img, {0.74, 0.26, 0.095, 0.075, 0.5, 0.95});
    paint(img, {0.74, 0.26, 0.060, 0.046, 0.5, 0.25});
    // scattered repeated structures
    for (const Blob& b : clutter)
      paint(img, {b.cy, b.cx, b.ay, b.ax, b.angle, b.intensity});
    // moving, dilating "heart" with an inner chamber
    const double hy = 0.44 + 0.010 * sway, hx = 0.42 + 0.006 * sway;
    paint(img, {hy, hx, 0.130 * (1.0 + 0.06 * sway), 0.105 * (1.0 - 0.05 * sway),
                0.2, 0.88});
    paint(img, {hy + 0.015, hx - 0.01, 0.055 * (1.0 + 0.08 * sway), 0.045, 0.2, 0.35});
    // pulsating-intensity region
    paint(img, {0.62, 0.62, 0.085, 0.085, 0.0,
                std::min(1.0, std::max(0.0, 0.55 + 0.12 * pulse))});

    out.emplace_back(img.cast<cd>());
  }
  Dataset ds = dataset_from_frames(out, "real32");
  return ds;
}

}  // namespace gbdl
