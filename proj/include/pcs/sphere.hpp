#pragma once

// Closed oriented paths on the Poincare sphere. Points carry an unwrapped
// azimuth so that a loop around the polar axis accumulates 2*pi per turn.

#include <array>
#include <vector>

namespace pcs {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kPoleGuard = 1e-9;

struct SpherePoint {
  double theta = 0;  // polar angle from the P0 axis, [0, pi]
  double phi = 0;    // azimuth, not reduced mod 2*pi

  std::array<double, 3> unit_vector() const;
};

enum class SegmentKind { latitude, geodesic, linear_in_angles };

struct Segment {
  SegmentKind kind = SegmentKind::geodesic;
  SpherePoint start;
  SpherePoint end;
  int samples = 0;  // quadrature intervals along the segment

  double length() const;
};

/// One quadrature node; tangents are derivatives with respect to the
/// segment parameter u in [0, 1].
struct PathSample {
  int segment = 0;
  double u = 0;
  double arc = 0;  // cumulative arc length from the path start
  double theta = 0;
  double phi = 0;
  double dtheta = 0;
  double dphi = 0;
};

struct SpherePath {
  std::vector<Segment> segments;
  bool closed = false;

  /// Samples of each segment, samples + 1 nodes per segment, endpoints
  /// included.
  std::vector<std::vector<PathSample>> sample() const;

  /// Throws path_not_closed unless consecutive endpoints and the closing
  /// junction coincide on the sphere.
  void require_closed() const;
  /// Net revolutions about the polar axis recorded by the unwrapped azimuth.
  int winding() const;
  double length() const;
  int total_samples() const;

  SpherePath reversed() const;
  /// Same geometry with every segment resampled to `samples`.
  SpherePath with_samples_per_segment(int samples) const;
  /// Distributes about `total` intervals over segments in proportion to length.
  SpherePath with_total_samples(int total) const;
};

/// Samples from a density of `per_unit` intervals per radian of arc.
int default_samples(double length, int per_unit);

SpherePath latitude_loop(double theta0, int winding = 1, int samples = 2000);
SpherePath geodesic_polygon(const std::vector<SpherePoint>& vertices, int samples = 1000);
/// Piecewise path linear in (theta, phi) through `points`; `closed` marks an
/// intended loop (the caller repeats the first point at the end).
SpherePath linear_path(const std::vector<SpherePoint>& points, bool closed, int samples = 1000);
SpherePath concatenate(const SpherePath& a, const SpherePath& b);

/// State-independent loop integrals:
///   half_cap = oint sin^2(theta/2) dphi
///   c1       = oint [sin(theta) cos(phi) dphi + sin(phi) dtheta]
///   c2       = oint [sin(theta) sin(phi) dphi - cos(phi) dtheta]
struct ContourIntegrals {
  double half_cap = 0;
  double c1 = 0;
  double c2 = 0;
  std::vector<std::array<double, 3>> per_segment;
};

/// Latitude segments in closed form, other segments by composite
/// Gauss-Legendre quadrature (independent of the segment sample counts).
ContourIntegrals contour_integrals(const SpherePath& path);

/// Oriented solid angle oint (1 - cos theta) dphi.
double solid_angle(const SpherePath& path);

}  // namespace pcs
