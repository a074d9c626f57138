#include "pcs/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcs/error.hpp"
#include "pcs/quadrature.hpp"

namespace pcs {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kJunctionTol = 1e-9;
constexpr int kSegmentNodes = 24;

double dot(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double distance(const SpherePoint& a, const SpherePoint& b) {
  const auto x = a.unit_vector(), y = b.unit_vector();
  return std::sqrt((x[0] - y[0]) * (x[0] - y[0]) + (x[1] - y[1]) * (x[1] - y[1]) +
                   (x[2] - y[2]) * (x[2] - y[2]));
}

bool at_pole(double theta) { return std::sin(theta) < 1e-12; }
bool at_south_pole(double theta) { return theta > kPi / 2 && at_pole(theta); }

double principal(double angle) {
  double a = std::remainder(angle, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  return a;
}

double unwrap_near(double raw, double reference) {
  return raw + kTwoPi * std::round((reference - raw) / kTwoPi);
}

void check_point(const SpherePoint& p) {
  if (!std::isfinite(p.theta) || !std::isfinite(p.phi) || p.theta < 0 || p.theta > kPi) {
    throw Error(ErrorCode::invalid_path, "sphere point outside 0 <= theta <= pi");
  }
}

struct Node {
  double theta, phi, dtheta, dphi;
};

Node evaluate(const Segment& seg, double u) {
  const double dth = seg.end.theta - seg.start.theta;
  const double dph = seg.end.phi - seg.start.phi;
  switch (seg.kind) {
    case SegmentKind::latitude:
    case SegmentKind::linear_in_angles:
      return {seg.start.theta + u * dth, seg.start.phi + u * dph, dth, dph};
    case SegmentKind::geodesic: {
      // Meridian when an endpoint sits on a pole: azimuth of the other end.
      if (at_pole(seg.start.theta)) return {seg.start.theta + u * dth, seg.end.phi, dth, 0.0};
      if (at_pole(seg.end.theta)) return {seg.start.theta + u * dth, seg.start.phi, dth, 0.0};
      const auto a = seg.start.unit_vector(), b = seg.end.unit_vector();
      const double omega = std::acos(std::clamp(dot(a, b), -1.0, 1.0));
      const double so = std::sin(omega);
      const double wa = std::sin((1 - u) * omega) / so, wb = std::sin(u * omega) / so;
      const double va = -omega * std::cos((1 - u) * omega) / so, vb = omega * std::cos(u * omega) / so;
      std::array<double, 3> r{}, dr{};
      for (int i = 0; i < 3; ++i) {
        r[i] = wa * a[i] + wb * b[i];
        dr[i] = va * a[i] + vb * b[i];
      }
      const double rho = std::hypot(r[0], r[1]);
      const double theta = std::atan2(rho, r[2]);
      const double drho = (r[0] * dr[0] + r[1] * dr[1]) / rho;
      const double dtheta = (r[2] * drho - rho * dr[2]) / (rho * rho + r[2] * r[2]);
      const double dphi = (r[0] * dr[1] - r[1] * dr[0]) / (rho * rho);
      return {theta, std::atan2(r[1], r[0]), dtheta, dphi};
    }
  }
  return {};
}

double speed(const Node& n) {
  const double s = std::sin(n.theta);
  return std::sqrt(n.dtheta * n.dtheta + s * s * n.dphi * n.dphi);
}

std::vector<PathSample> sample_segment(const Segment& seg, int index, double arc0) {
  const int intervals = std::max(1, seg.samples);
  std::vector<PathSample> out;
  out.reserve(intervals + 1);
  double arc = arc0;
  double prev_speed = 0;
  double prev_phi = seg.start.phi;
  for (int k = 0; k <= intervals; ++k) {
    const double u = static_cast<double>(k) / intervals;
    Node n = evaluate(seg, u);
    if (seg.kind == SegmentKind::geodesic) {
      n.phi = unwrap_near(n.phi, prev_phi);
      prev_phi = n.phi;
    }
    const double sp = speed(n);
    if (k > 0) arc += 0.5 * (sp + prev_speed) / intervals;
    prev_speed = sp;
    out.push_back({index, u, arc, n.theta, n.phi, n.dtheta, n.dphi});
  }
  return out;
}

void check_junctions(const SpherePath& path) {
  for (std::size_t k = 0; k + 1 < path.segments.size(); ++k) {
    if (distance(path.segments[k].end, path.segments[k + 1].start) > kJunctionTol) {
      throw Error(ErrorCode::invalid_path, "consecutive segments do not share an endpoint");
    }
  }
}

// Azimuth jump across the junction ending at segment `next`. Only a jump at
// the south pole carries weight in the integrals.
double south_pole_jump(const std::vector<PathSample>& prev, const std::vector<PathSample>& next) {
  const PathSample& a = prev.back();
  const PathSample& b = next.front();
  if (!at_south_pole(a.theta) || !at_south_pole(b.theta)) return 0.0;
  return principal(b.phi - a.phi);
}

}  // namespace

std::array<double, 3> SpherePoint::unit_vector() const {
  const double s = std::sin(theta);
  return {s * std::cos(phi), s * std::sin(phi), std::cos(theta)};
}

double Segment::length() const {
  switch (kind) {
    case SegmentKind::latitude:
      return std::sin(start.theta) * std::abs(end.phi - start.phi);
    case SegmentKind::geodesic:
      return std::acos(std::clamp(dot(start.unit_vector(), end.unit_vector()), -1.0, 1.0));
    case SegmentKind::linear_in_angles: {
      constexpr int kNodes = 256;
      double total = 0, prev = 0;
      for (int k = 0; k <= kNodes; ++k) {
        const double sp = speed(evaluate(*this, static_cast<double>(k) / kNodes));
        if (k > 0) total += 0.5 * (sp + prev) / kNodes;
        prev = sp;
      }
      return total;
    }
  }
  return 0;
}

int default_samples(double length, int per_unit) {
  return std::max(8, static_cast<int>(std::ceil(length * per_unit)));
}

std::vector<std::vector<PathSample>> SpherePath::sample() const {
  std::vector<std::vector<PathSample>> out;
  out.reserve(segments.size());
  double arc = 0;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    out.push_back(sample_segment(segments[k], static_cast<int>(k), arc));
    arc = out.back().back().arc;
  }
  return out;
}

void SpherePath::require_closed() const {
  if (segments.empty()) throw Error(ErrorCode::invalid_path, "empty path");
  check_junctions(*this);
  if (!closed || distance(segments.back().end, segments.front().start) > kJunctionTol) {
    throw Error(ErrorCode::path_not_closed, "path not closed");
  }
}

int SpherePath::winding() const {
  const auto samples = sample();
  double total = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    total += samples[k].back().phi - samples[k].front().phi;
    const auto& next = samples[(k + 1) % samples.size()];
    if (k + 1 < samples.size() || closed) {
      const PathSample& a = samples[k].back();
      const PathSample& b = next.front();
      if (at_pole(a.theta)) total += principal(b.phi - a.phi);
    }
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

double SpherePath::length() const {
  double total = 0;
  for (const auto& s : segments) total += s.length();
  return total;
}

int SpherePath::total_samples() const {
  int total = 0;
  for (const auto& s : segments) total += std::max(1, s.samples);
  return total;
}

SpherePath SpherePath::reversed() const {
  SpherePath out;
  out.closed = closed;
  for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
    Segment s = *it;
    std::swap(s.start, s.end);
    out.segments.push_back(s);
  }
  return out;
}

SpherePath SpherePath::with_samples_per_segment(int samples) const {
  if (samples < 1) throw Error(ErrorCode::invalid_argument, "samples must be positive");
  SpherePath out = *this;
  for (auto& s : out.segments) s.samples = samples;
  return out;
}

SpherePath SpherePath::with_total_samples(int total) const {
  if (total < static_cast<int>(segments.size())) {
    throw Error(ErrorCode::invalid_argument, "fewer samples than segments");
  }
  SpherePath out = *this;
  const double len = length();
  for (auto& s : out.segments) {
    const double share = len > 0 ? s.length() / len : 1.0 / static_cast<double>(segments.size());
    s.samples = std::max(1, static_cast<int>(std::lround(share * total)));
  }
  return out;
}

SpherePath latitude_loop(double theta0, int winding, int samples) {
  if (!(theta0 > 0 && theta0 < kPi)) {
    throw Error(ErrorCode::invalid_path, "latitude loop must stay off the poles (0 < theta0 < pi)");
  }
  if (winding == 0) throw Error(ErrorCode::invalid_path, "latitude loop needs a nonzero winding");
  if (samples < 1) throw Error(ErrorCode::invalid_argument, "samples must be positive");
  SpherePath path;
  path.closed = true;
  path.segments.push_back({SegmentKind::latitude, {theta0, 0.0}, {theta0, kTwoPi * winding}, samples});
  return path;
}

SpherePath geodesic_polygon(const std::vector<SpherePoint>& vertices, int samples) {
  if (vertices.size() < 3) throw Error(ErrorCode::invalid_path, "geodesic polygon needs at least 3 vertices");
  if (samples < 1) throw Error(ErrorCode::invalid_argument, "samples must be positive");
  SpherePath path;
  path.closed = true;
  const std::size_t n = vertices.size();
  for (std::size_t k = 0; k < n; ++k) {
    const SpherePoint& a = vertices[k];
    const SpherePoint& b = vertices[(k + 1) % n];
    check_point(a);
    const auto va = a.unit_vector(), vb = b.unit_vector();
    const double c = dot(va, vb);
    if (distance(a, b) < 1e-12) throw Error(ErrorCode::invalid_path, "repeated vertex in geodesic polygon");
    if (c < -1.0 + 1e-12) throw Error(ErrorCode::invalid_path, "antipodal consecutive vertices");
    if (!at_pole(a.theta) && !at_pole(b.theta)) {
      // Reject arcs whose interior runs through a pole: the azimuth is
      // undefined there.
      const auto normal = cross(va, vb);
      const double nn = std::sqrt(dot(normal, normal));
      if (std::abs(normal[2]) / nn < kPoleGuard) {
        const double omega = std::acos(std::clamp(c, -1.0, 1.0));
        for (double pole_z : {1.0, -1.0}) {
          const double to_a = std::acos(std::clamp(va[2] * pole_z, -1.0, 1.0));
          const double to_b = std::acos(std::clamp(vb[2] * pole_z, -1.0, 1.0));
          if (std::abs(to_a + to_b - omega) < 1e-9) {
            throw Error(ErrorCode::invalid_path, "geodesic edge passes through a pole; split it at the pole");
          }
        }
      }
    }
    path.segments.push_back({SegmentKind::geodesic, a, b, samples});
  }
  return path;
}

SpherePath linear_path(const std::vector<SpherePoint>& points, bool closed, int samples) {
  if (points.size() < 2) throw Error(ErrorCode::invalid_path, "path needs at least 2 points");
  if (samples < 1) throw Error(ErrorCode::invalid_argument, "samples must be positive");
  SpherePath path;
  path.closed = closed;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    check_point(points[k]);
    check_point(points[k + 1]);
    path.segments.push_back({SegmentKind::linear_in_angles, points[k], points[k + 1], samples});
  }
  return path;
}

SpherePath concatenate(const SpherePath& a, const SpherePath& b) {
  if (a.segments.empty() || b.segments.empty()) throw Error(ErrorCode::invalid_path, "empty path");
  if (distance(a.segments.back().end, b.segments.front().start) > kJunctionTol) {
    throw Error(ErrorCode::invalid_path, "paths do not join");
  }
  SpherePath out = a;
  out.segments.insert(out.segments.end(), b.segments.begin(), b.segments.end());
  out.closed = distance(b.segments.back().end, a.segments.front().start) <= kJunctionTol;
  return out;
}

ContourIntegrals contour_integrals(const SpherePath& path) {
  path.require_closed();
  const auto samples = path.sample();
  std::vector<double> gl_x, gl_w;
  gauss_legendre_rule(kSegmentNodes, gl_x, gl_w);
  ContourIntegrals out;
  for (std::size_t k = 0; k < path.segments.size(); ++k) {
    const Segment& seg = path.segments[k];
    std::array<double, 3> part{};
    if (seg.kind == SegmentKind::latitude) {
      const double th = seg.start.theta, p1 = seg.start.phi, p2 = seg.end.phi;
      const double st = std::sin(th), sh = std::sin(th / 2);
      part = {sh * sh * (p2 - p1), st * (std::sin(p2) - std::sin(p1)), st * (std::cos(p1) - std::cos(p2))};
    } else {
      // Composite Gauss-Legendre in the segment parameter, independent of
      // the path sampling.
      const int panels = std::max(1, static_cast<int>(std::ceil(seg.length() / 0.25)));
      for (int pnl = 0; pnl < panels; ++pnl) {
        const double a = static_cast<double>(pnl) / panels, b = static_cast<double>(pnl + 1) / panels;
        for (std::size_t i = 0; i < gl_x.size(); ++i) {
          const Node n = evaluate(seg, a + (b - a) * 0.5 * (1.0 - gl_x[i]));
          const double w = 0.5 * (b - a) * gl_w[i];
          const double sh = std::sin(n.theta / 2), st = std::sin(n.theta);
          const double cp = std::cos(n.phi), sp = std::sin(n.phi);
          part[0] += w * sh * sh * n.dphi;
          part[1] += w * (st * cp * n.dphi + sp * n.dtheta);
          part[2] += w * (st * sp * n.dphi - cp * n.dtheta);
        }
      }
    }
    part[0] += south_pole_jump(samples[(k + samples.size() - 1) % samples.size()], samples[k]);
    out.half_cap += part[0];
    out.c1 += part[1];
    out.c2 += part[2];
    out.per_segment.push_back(part);
  }
  return out;
}

double solid_angle(const SpherePath& path) {
  // 1 - cos(theta) = 2 sin^2(theta/2)
  return 2.0 * contour_integrals(path).half_cap;
}

}  // namespace pcs
