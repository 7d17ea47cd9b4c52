#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "odigen/image.hpp"

namespace odigen::geom {

inline constexpr double kPi = std::numbers::pi_v<double>;

// Fill value written outside the embedded snapshot region (mid-gray,
// symmetric about zero after the [-1,1] network rescale).
inline constexpr float kBlankFill = 0.5f;

// Rays closer than this to the image plane are treated as behind it.
inline constexpr double kFrontEpsilon = 1e-9;

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    double n = norm();
    if (n == 0.0) throw std::invalid_argument("Vec3: zero-norm vector");
    return {x / n, y / n, z / n};
  }
};

// Camera direction in radians: theta_c is longitude in [-pi, pi),
// phi_c is latitude in [-pi/2, pi/2].
struct CameraPose {
  double theta_c = 0.0;
  double phi_c = 0.0;

  void validate() const {
    if (!std::isfinite(theta_c) || !std::isfinite(phi_c))
      throw std::invalid_argument("CameraPose: non-finite component");
    if (theta_c < -kPi || theta_c >= kPi)
      throw std::invalid_argument("CameraPose: theta_c out of [-pi, pi)");
    if (phi_c < -kPi / 2 || phi_c > kPi / 2)
      throw std::invalid_argument("CameraPose: phi_c out of [-pi/2, pi/2]");
  }
};

// Perspective frame of the snapshot: pixel dimensions and focal distance
// in pixel units.
struct SnapshotGeometry {
  int w1 = 0;
  int h1 = 0;
  double l = 0.0;

  void validate() const {
    if (w1 <= 0 || h1 <= 0 || !(l > 0.0))
      throw std::invalid_argument("SnapshotGeometry: non-positive field");
  }
};

// Orthonormal snapshot-image frame in world coordinates. x_n spans image
// columns, y_n spans rows (toward -v), z_n = x_n x y_n is the viewing
// direction.
struct Basis3 {
  Vec3 x_n, y_n, z_n;
};

inline Basis3 camera_basis(const CameraPose& pose) {
  pose.validate();
  double st = std::sin(pose.theta_c), ct = std::cos(pose.theta_c);
  double sp = std::sin(pose.phi_c), cp = std::cos(pose.phi_c);
  Basis3 b;
  b.x_n = {-st, -ct, 0.0};
  b.y_n = {-sp * ct, sp * st, cp};
  b.z_n = b.x_n.cross(b.y_n);
  return b;
}

// Horizontal and vertical view angles of the perspective frame.
inline std::array<double, 2> view_angles(const SnapshotGeometry& g) {
  g.validate();
  return {2.0 * std::atan(g.w1 / (2.0 * g.l)), 2.0 * std::atan(g.h1 / (2.0 * g.l))};
}

// Equirect pixel convention: theta(u) = 2*pi*u/width - pi,
// phi(v) = pi*v/height - pi/2. Row 0 is phi = -pi/2 (the zenith direction
// +z under the world convention below).
inline Vec3 dir_from_angles(double theta, double phi) {
  double cp = std::cos(phi);
  return {-std::cos(theta) * cp, std::sin(theta) * cp, -std::sin(phi)};
}

inline Vec3 dir_from_equirect(double u, double v, int width, int height) {
  if (!(u >= 0.0 && u < width && v >= 0.0 && v <= height))
    throw std::invalid_argument("dir_from_equirect: coordinate out of range");
  double theta = 2.0 * kPi * u / width - kPi;
  double phi = kPi * v / height - kPi / 2;
  return dir_from_angles(theta, phi);
}

inline std::array<double, 2> equirect_from_dir(const Vec3& d, int width, int height) {
  double n = d.norm();
  if (n < 1e-12) throw std::invalid_argument("equirect_from_dir: zero-norm vector");
  double theta = std::atan2(d.y, -d.x);
  double phi = std::asin(std::clamp(-d.z / n, -1.0, 1.0));
  double u = (theta + kPi) * width / (2.0 * kPi);
  double v = (phi + kPi / 2) * height / kPi;
  return {u, v};
}

// Bilinear sample of an equirect image at continuous pixel coordinates.
// Longitude wraps across the seam; latitude clamps at the poles. The
// (u, v) origin is the corner convention used by dir_from_equirect, so
// pixel centers sit at half-integer offsets.
inline float sample_equirect(const Image& img, int c, double u, double v) {
  double x = u - 0.5, y = v - 0.5;
  double fx = std::floor(x), fy = std::floor(y);
  double ax = x - fx, ay = y - fy;
  int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  auto wrap_x = [&](int xi) {
    int m = xi % img.width;
    return m < 0 ? m + img.width : m;
  };
  auto clamp_y = [&](int yi) { return std::clamp(yi, 0, img.height - 1); };
  float v00 = img.at(c, clamp_y(y0), wrap_x(x0));
  float v01 = img.at(c, clamp_y(y0), wrap_x(x0 + 1));
  float v10 = img.at(c, clamp_y(y0 + 1), wrap_x(x0));
  float v11 = img.at(c, clamp_y(y0 + 1), wrap_x(x0 + 1));
  return static_cast<float>((1 - ay) * ((1 - ax) * v00 + ax * v01) +
                            ay * ((1 - ax) * v10 + ax * v11));
}

// Plain bilinear sample of a perspective image; borders clamp.
inline float sample_clamped(const Image& img, int c, double x, double y) {
  double px = x - 0.5, py = y - 0.5;
  double fx = std::floor(px), fy = std::floor(py);
  double ax = px - fx, ay = py - fy;
  int x0 = std::clamp(static_cast<int>(fx), 0, img.width - 1);
  int x1 = std::clamp(static_cast<int>(fx) + 1, 0, img.width - 1);
  int y0 = std::clamp(static_cast<int>(fy), 0, img.height - 1);
  int y1 = std::clamp(static_cast<int>(fy) + 1, 0, img.height - 1);
  float v00 = img.at(c, y0, x0), v01 = img.at(c, y0, x1);
  float v10 = img.at(c, y1, x0), v11 = img.at(c, y1, x1);
  return static_cast<float>((1 - ay) * ((1 - ax) * v00 + ax * v01) +
                            ay * ((1 - ax) * v10 + ax * v11));
}

// World position of a snapshot pixel center (a, b) on the image plane:
// P = l*z_n + (a - (w1-1)/2)*x_n + ((h1-1)/2 - b)*y_n.
inline Vec3 snapshot_pixel_point(const Basis3& basis, const SnapshotGeometry& g,
                                 double a, double b) {
  double dx = a - (g.w1 - 1) / 2.0;
  double dy = (g.h1 - 1) / 2.0 - b;
  return basis.z_n * g.l + basis.x_n * dx + basis.y_n * dy;
}

// Resample a perspective snapshot out of an ODI.
inline Image extract_snapshot(const Image& odi, const CameraPose& pose,
                              const SnapshotGeometry& g) {
  pose.validate();
  g.validate();
  if (!odi.is_equirect()) throw std::invalid_argument("extract_snapshot: ODI not 2:1");
  Basis3 basis = camera_basis(pose);
  Image snap(g.w1, g.h1, odi.channels);
  for (int b = 0; b < g.h1; ++b)
    for (int a = 0; a < g.w1; ++a) {
      Vec3 d = snapshot_pixel_point(basis, g, a, b).normalized();
      auto [u, v] = equirect_from_dir(d, odi.width, odi.height);
      for (int c = 0; c < odi.channels; ++c)
        snap.at(c, b, a) = sample_equirect(odi, c, u, v);
    }
  return snap;
}

// Write a snapshot into a blank equirect canvas. A canvas pixel belongs to
// the embedded region iff its center ray hits the snapshot plane strictly
// in front of the camera and strictly in bounds.
inline EmbeddedPair embed_snapshot(const Image& snap, const CameraPose& pose,
                                   const SnapshotGeometry& g, int width, int height) {
  pose.validate();
  g.validate();
  if (snap.width != g.w1 || snap.height != g.h1)
    throw std::invalid_argument("embed_snapshot: snapshot size mismatch");
  Basis3 basis = camera_basis(pose);
  EmbeddedPair out;
  out.canvas = Image(width, height, snap.channels, kBlankFill);
  out.mask = Mask(width, height, 0.0f);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      Vec3 d = dir_from_equirect(x + 0.5, y + 0.5, width, height);
      double dz = d.dot(basis.z_n);
      if (dz <= kFrontEpsilon) continue;
      double t = g.l / dz;
      double a = t * d.dot(basis.x_n) + (g.w1 - 1) / 2.0;
      double b = (g.h1 - 1) / 2.0 - t * d.dot(basis.y_n);
      if (a < 0.0 || a > g.w1 - 1 || b < 0.0 || b > g.h1 - 1) continue;
      for (int c = 0; c < snap.channels; ++c)
        out.canvas.at(c, y, x) = sample_clamped(snap, c, a + 0.5, b + 0.5);
      out.mask.at(y, x) = 1.0f;
    }
  return out;
}

}  // namespace odigen::geom
