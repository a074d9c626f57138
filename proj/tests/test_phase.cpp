#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pcs/phase.hpp"

using namespace pcs;

namespace {

ReferenceSpec fock(double p, Helicity h = Helicity::plus) {
  ReferenceSpec s;
  s.p = p;
  s.helicity = h;
  return s;
}

ReferenceSpec glauber(std::vector<ModeAmplitudes> a) {
  ReferenceSpec s;
  s.kind = ReferenceKind::glauber;
  s.alphas = std::move(a);
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::io;
}

double half_cap(double t0) { return 2 * kPi * std::pow(std::sin(t0 / 2), 2); }

const std::vector<SpherePoint> kTri = {{0.4, 0.1}, {1.2, 0.3}, {0.9, 1.4}};

}  // namespace

TEST_CASE("connection of the single-mode family") {
  std::mt19937_64 rng(51);
  for (double p : {0.5, 1.0, 2.5}) {
    const StateFamily fam = rotation_family(fock(p));
    for (int k = 0; k < 5; ++k) {
      const SpherePoint at{oracle::uniform(rng, 0.1, 3.0), oracle::uniform(rng, 0, 2 * kPi)};
      CHECK(berry_connection(fam, at, {0, 0}) == 0.0);
      // Amplitudes of |k photons flipped> carry e^{i k phi}, so
      // Im<psi|d_phi psi> = sum_k k |c_k|^2 = 2p sin^2(theta/2).
      const double expected = -2 * p * std::pow(std::sin(at.theta / 2), 2);
      CHECK(berry_connection(fam, at, {0, 1}) == doctest::Approx(expected).epsilon(1e-8));
      CHECK(std::abs(berry_connection(fam, at, {1, 0})) < 1e-9);
    }
  }
  const StateFamily minus = rotation_family(fock(1, Helicity::minus));
  CHECK(berry_connection(minus, {1.0, 0.2}, {0, 1}) == doctest::Approx(2 * std::pow(std::sin(0.5), 2)));
}

TEST_CASE("Glauber connection against the explicit gauge potential") {
  std::mt19937_64 rng(52);
  const std::vector<ModeAmplitudes> a = {{cplx(0.6, -0.2), cplx(0.1, 0.4)}, {cplx(-0.3, 0), cplx(0.2, -0.5)}};
  const StateFamily fam = rotation_family(glauber(a));
  for (int k = 0; k < 10; ++k) {
    const SpherePoint at{oracle::uniform(rng, 0.1, 3.0), oracle::uniform(rng, 0, 2 * kPi)};
    const std::array<double, 2> tangent{oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1)};
    CHECK(std::abs(berry_connection(fam, at, tangent) - glauber_gauge_potential(a, at, tangent)) < 1e-6);
  }
}

TEST_CASE("poles and normalization guards") {
  const StateFamily fam = rotation_family(fock(1));
  CHECK_NOTHROW(berry_connection(fam, {0, 0.3}, {1, 0}));
  CHECK(code_of([&] { berry_connection(fam, {kPi, 0}, {1, 0}); }) == ErrorCode::pole_contact);
  const StateFamily bloated(fam.spec(), fam.reference(), [&](const SpherePoint& at) {
    StateVector s = fam(at);
    s.amp *= 1.01;
    return s;
  });
  CHECK(code_of([&] { berry_connection(bloated, {1, 1}, {0, 1}); }) == ErrorCode::unnormalized_state);
}

TEST_CASE("latitude loops for spin families") {
  for (double p : {0.5, 1.0, 2.0}) {
    const StateFamily fam = rotation_family(fock(p));
    for (double t0 : {0.4, kPi / 3, kPi / 2, 2.4}) {
      const SpherePath path = latitude_loop(t0);
      const double oracle = 2 * p * half_cap(t0);
      CHECK(phase_by_connection(fam, path).gamma == doctest::Approx(oracle).epsilon(1e-9));
      CHECK(phase_closed_pcs(path, p, Helicity::plus) == doctest::Approx(oracle).epsilon(1e-14));
      CHECK(phase_closed_pcs(path, p, Helicity::minus) == doctest::Approx(-oracle).epsilon(1e-14));
      CHECK(std::abs(phase_by_overlaps(fam, path.with_total_samples(8000)).gamma - oracle) < 1e-6);
    }
  }
}

TEST_CASE("trivial loops carry no phase") {
  const SpherePath p = linear_path({{0.5, 0.2}, {1.3, 1.1}, {0.5, 0.2}}, true);
  const StateFamily fam = rotation_family(fock(1.5));
  CHECK(std::abs(phase_by_connection(fam, p).gamma) < 1e-8);
  CHECK(std::abs(phase_by_overlaps(fam, p).gamma) < 1e-12);
  CHECK(std::abs(phase_closed_pcs(p, 1.5, Helicity::plus)) < 1e-14);
  const StateFamily vac = rotation_family(glauber({{0.0, 0.0}}));
  CHECK(std::abs(phase_by_connection(vac, latitude_loop(1)).gamma) < 1e-12);
}

TEST_CASE("reversal, winding and thread count") {
  const StateFamily fam = rotation_family(fock(1));
  const SpherePath g = geodesic_polygon(kTri);
  const double fwd = phase_by_connection(fam, g).gamma;
  CHECK(phase_by_connection(fam, g.reversed()).gamma == doctest::Approx(-fwd).epsilon(1e-9));
  CHECK(phase_by_overlaps(fam, g.reversed()).gamma == doctest::Approx(-phase_by_overlaps(fam, g).gamma));
  CHECK(phase_by_connection(fam, latitude_loop(1, 2)).gamma ==
        doctest::Approx(2 * phase_by_connection(fam, latitude_loop(1)).gamma));
  PhaseOptions many;
  many.threads = 3;
  const ConnectionPhase a = phase_by_connection(fam, g), b = phase_by_connection(fam, g, many);
  CHECK(a.gamma == b.gamma);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) CHECK(a.samples[k].a_s == b.samples[k].a_s);
  CHECK(phase_by_overlaps(fam, g).gamma == phase_by_overlaps(fam, g, many).gamma);
}

TEST_CASE("connection integral records running samples") {
  const StateFamily fam = rotation_family(fock(0.5));
  const ConnectionPhase r = phase_by_connection(fam, latitude_loop(kPi / 2, 1, 100));
  REQUIRE(r.samples.size() == 101);
  CHECK(r.samples.front().running_gamma == 0.0);
  CHECK(r.samples.back().running_gamma == doctest::Approx(r.gamma));
  CHECK(r.samples.back().s == doctest::Approx(2 * kPi).epsilon(1e-6));
  CHECK(r.per_segment.size() == 1);
  CHECK(r.max_abs_connection == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("Richardson steps agree with plain differences") {
  const StateFamily fam = rotation_family(fock(2));
  const SpherePath g = geodesic_polygon(kTri);
  PhaseOptions rich;
  rich.richardson = true;
  CHECK(phase_by_connection(fam, g, rich).gamma == doctest::Approx(phase_by_connection(fam, g).gamma).epsilon(1e-9));
}

TEST_CASE("under-sampled overlaps and open paths are reported") {
  const StateFamily fam = rotation_family(fock(3));
  CHECK(code_of([&] { phase_by_overlaps(fam, latitude_loop(kPi / 2, 1, 3)); }) == ErrorCode::under_sampled);
  const SpherePath open = linear_path({{0.5, 0}, {1.0, 1.0}}, false);
  CHECK(code_of([&] { phase_by_connection(fam, open); }) == ErrorCode::path_not_closed);
  CHECK(code_of([&] { phase_by_overlaps(fam, open); }) == ErrorCode::path_not_closed);
  CHECK(code_of([&] { phase_closed_pcs(open, 1, Helicity::plus); }) == ErrorCode::path_not_closed);
}

TEST_CASE("closed-form overlaps") {
  CHECK(std::abs(overlap_pcs_closed(1.1, 0.4, 1, 1, 2.5, Helicity::plus) - 1.0) < 1e-15);
  CHECK(std::abs(overlap_pcs_closed(kPi / 2, 0.9, 0, 1, 1, Helicity::plus) - 0.5) < 1e-15);
  CHECK(std::abs(overlap_glauber_closed({{0.0, 0.0}, {0.0, 0.0}}, 1.0, 2.0, 0.3, 0.7) - 1.0) < 1e-15);
  CHECK(std::abs(overlap_glauber_closed({{1.0, 0.5}}, 1.0, 2.0, 1, 1) - 1.0) < 1e-15);
  std::mt19937_64 rng(53);
  const std::vector<ModeAmplitudes> a = {{1.0, 0.0}};
  const StateFamily fam = rotation_family(glauber(a));
  for (int k = 0; k < 10; ++k) {
    const double t = oracle::uniform(rng, 0, kPi), f = oracle::uniform(rng, 0, 2 * kPi);
    const double u = oracle::uniform(rng, 0, 2), v = oracle::uniform(rng, 0, 2);
    CHECK(std::abs(overlap_glauber_closed(a, t, f, u, v) - inner(fam({u * t, v * f}), fam({t, f}))) < 1e-9);
  }
}

TEST_CASE("Stokes-weighted closed forms") {
  const std::vector<ModeAmplitudes> a = {{cplx(0.6, -0.2), cplx(0.1, 0.4)}, {cplx(-0.3, 0), cplx(0.2, -0.5)}};
  const auto amp = glauber_stokes(a);
  const auto fock_side = stokes_vector(rotation_family(glauber(a)).reference());
  CHECK(amp.p0 == doctest::Approx(fock_side.p0));
  CHECK(amp.p1 == doctest::Approx(fock_side.p1));
  CHECK(amp.p2 == doctest::Approx(fock_side.p2));

  const SpherePath g = geodesic_polygon(kTri);
  const PhaseComponents c = phase_closed_glauber(g, a);
  CHECK(c.total == doctest::Approx(c.gamma0 + c.gamma1 + c.gamma2));
  CHECK(c.gamma0 == doctest::Approx(2 * amp.p0 * c.integrals.half_cap));
  const StateFamily fam = rotation_family(glauber(a));
  CHECK(std::abs(phase_by_connection(fam, g).gamma - c.total) < 1e-6);

  // A reference whose Stokes vector points at the pole behaves like a spin
  // of length |<P0>|.
  const PhaseComponents polar = phase_closed_glauber(latitude_loop(1.0), {{0.8, 0.0}});
  CHECK(polar.gamma1 == 0.0);
  CHECK(polar.gamma2 == 0.0);
  CHECK(polar.total == doctest::Approx(0.64 * half_cap(1.0)));
}

TEST_CASE("closed form dispatch by reference kind") {
  const SpherePath g = geodesic_polygon(kTri);
  ReferenceSpec ind;
  ind.kind = ReferenceKind::independent;
  ind.n_list = {1, 2};
  const StateFamily fam = rotation_family(ind);
  const PhaseComponents c = closed_form_for(fam, g);
  CHECK(c.total == doctest::Approx(3 * c.integrals.half_cap));
  CHECK(std::abs(phase_by_connection(fam, g).gamma - c.total) < 1e-6);

  ReferenceSpec tm;
  tm.kind = ReferenceKind::two_mode;
  tm.p = 1;
  tm.n = 4;
  tm.t = 0;
  const StateFamily two = rotation_family(tm);
  CHECK(closed_form_for(two, g).total == doctest::Approx(2 * c.integrals.half_cap));
  CHECK(std::abs(phase_by_connection(two, g).gamma - 2 * c.integrals.half_cap) < 1e-6);
}

TEST_CASE("Hannay angle") {
  const SpherePath path = latitude_loop(kPi / 3);
  const double omega = solid_angle(path);
  CHECK(hannay_numeric(path, 1.5) == doctest::Approx(-omega / 2));
  CHECK(hannay_numeric(path, 1.5, 3) == doctest::Approx(-omega / 2));
  CHECK(hannay_closed(path, 0, 0) == doctest::Approx(2 * half_cap(kPi / 3)));
  CHECK(std::abs(hannay_closed(latitude_loop(1.0), kPi / 2, 0)) < 1e-14);
  const HannayReport r = hannay_report(path, 1.5, 0, 0);
  CHECK(r.discrepancy == doctest::Approx(r.closed - r.numeric));
  CHECK_FALSE(r.note.empty());
}

TEST_CASE("phase wrapping") {
  CHECK(wrap_phase(3 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(kPi / 2 + 4 * kPi) == doctest::Approx(kPi / 2));
  CHECK(wrap_phase(-0.25) == doctest::Approx(-0.25));
}

TEST_CASE("combined result") {
  const StateFamily fam = rotation_family(fock(0.5));
  const auto r = compute_geometric_phase(fam, latitude_loop(kPi / 2),
                                         {PhaseMethod::connection, PhaseMethod::overlaps, PhaseMethod::closed_form});
  REQUIRE(r.gamma_connection);
  REQUIRE(r.gamma_overlap);
  REQUIRE(r.gamma_closed);
  CHECK(*r.gamma_closed == doctest::Approx(kPi));
  CHECK(std::abs(*r.gamma_connection - kPi) < 1e-6);
  CHECK(std::abs(*r.gamma_overlap - kPi) < 1e-6);
  CHECK(r.omega == doctest::Approx(2 * kPi));
  CHECK(r.diagnostics.basis_dim == 3);
  const auto only = compute_geometric_phase(fam, latitude_loop(1), {PhaseMethod::closed_form});
  CHECK_FALSE(only.gamma_connection);
  CHECK_FALSE(only.gamma_overlap);
}
