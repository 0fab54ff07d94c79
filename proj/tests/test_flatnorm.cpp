#include <doctest.h>

#include <cmath>
#include <random>

#include "branchpath/flatnorm.hpp"
#include "branchpath/lp.hpp"
#include "support.hpp"

using namespace branchpath;
using testing_support::pt;

namespace {

// The primal program written out densely: variables R+, R-, S+, S- >= 0.
double dense_flat_norm(const Chain& chain, const TriComplex& c) {
  const Eigen::Index ne = c.edge_count(), nt = c.triangle_count();
  const Eigen::MatrixXd b = Eigen::MatrixXd(c.boundary_matrix());
  Eigen::MatrixXd A(ne, 2 * ne + 2 * nt);
  A << Eigen::MatrixXd::Identity(ne, ne), -Eigen::MatrixXd::Identity(ne, ne), b, -b;
  Eigen::VectorXd cost(2 * ne + 2 * nt);
  for (Eigen::Index e = 0; e < ne; ++e) cost(e) = cost(ne + e) = c.edge_length(e);
  cost.tail(2 * nt).setConstant(c.triangle_area());
  return lp::minimize(A, chain, cost).value;
}

PolyhedralCurrent seg(const Point& a, const Point& b, double theta = 1.0) {
  return canonicalize(std::vector<Segment>{{a, b, theta}});
}

void check_certificate(const Chain& chain, const TriComplex& c, const FlatNormResult& r) {
  const Chain identity = r.r + c.boundary_matrix() * r.s - chain;
  CHECK(identity.cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(r.value == doctest::Approx(chain_mass(r.r, c) + c.triangle_area() * r.s.cwiseAbs().sum()).epsilon(1e-12));
  CHECK(std::abs(r.value - r.dual_value) <= 1e-9 * (1 + r.value));
}

}  // namespace

TEST_CASE("complex structure") {
  const TriComplex c(Cube::from_lower(Point::Zero(2), 1.0), 0.25);
  CHECK(c.cells_per_axis() == 4);
  CHECK(c.edge_count() == 3 * 16 + 8);
  CHECK(c.triangle_count() == 32);
  // Every triangle's boundary is a closed loop.
  const Eigen::MatrixXd b(c.boundary_matrix());
  for (Eigen::Index t = 0; t < c.triangle_count(); ++t) {
    Chain col = b.col(t);
    CHECK(col.cwiseAbs().sum() == 3.0);
    CHECK(chain_boundary(col, c).empty());
  }
  // Interior edges border two triangles with opposite signs.
  for (Eigen::Index e = 0; e < c.edge_count(); ++e) CHECK(std::abs(b.row(e).sum()) <= 1.0);
  CHECK_THROWS_AS(TriComplex(Cube::from_lower(Point::Zero(2), 1.0), 0.3), Error);
}

TEST_CASE("rasterize") {
  const TriComplex c(Cube::from_lower(Point::Zero(2), 1.0), 0.125);
  SUBCASE("unit segment") {
    const Chain ch = rasterize(seg(pt(0, 0.5), pt(1, 0.5)), c);
    CHECK((ch.array() != 0).count() == 8);
    CHECK(ch.cwiseAbs().maxCoeff() == 1.0);
    CHECK(ch.sum() == 8.0);
  }
  SUBCASE("empty") { CHECK(rasterize(PolyhedralCurrent{}, c).isZero()); }
  SUBCASE("negative multiplicity") {
    const Chain ch = rasterize(seg(pt(0, 0.5), pt(1, 0.5), -2.0), c);
    for (Eigen::Index e = 0; e < ch.size(); ++e)
      if (ch(e) != 0) CHECK(std::abs(ch(e)) == 2.0);
    CHECK(ch.sum() == -16.0);
  }
  SUBCASE("boundary is preserved") {
    const auto t = canonicalize(std::vector<Segment>{{pt(0, 0), pt(0.625, 0.25), 1.5}, {pt(0.625, 0.25), pt(0.125, 1), -0.5}});
    CHECK(atomwise_distance(chain_boundary(rasterize(t, c), c), boundary(t)) <= 1e-15);
  }
  SUBCASE("off-lattice endpoint") {
    try {
      rasterize(seg(pt(0, 0), pt(0.3, 0.5)), c);
      FAIL("expected SnapError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SnapError);
    }
    const auto snapped = snap_to_lattice(seg(pt(0, 0), pt(0.3, 0.5)), c);
    CHECK(edgewise_distance(snapped, seg(pt(0, 0), pt(0.25, 0.5))) == 0.0);
  }
}

TEST_CASE("flat norm examples") {
  const TriComplex c(Cube::from_lower(Point::Zero(2), 1.0), 0.125);
  SUBCASE("zero chain") {
    const auto r = flat_norm(Chain::Zero(c.edge_count()), c);
    CHECK(r.value == 0.0);
  }
  SUBCASE("unit segment") {
    const Chain ch = rasterize(seg(pt(0, 0.5), pt(1, 0.5)), c);
    const auto r = flat_norm(ch, c);
    CHECK(r.value <= 1.0 + 1e-12);
    // Any filling has to pay the boundary of the segment; the segment itself is optimal here.
    CHECK(r.value == doctest::Approx(1.0));
    check_certificate(ch, c, r);
  }
  SUBCASE("parallel opposite segments") {
    // Unit segments at distance 1/4, mesh 1/16: the filling rectangle costs 1/4 + 2/4.
    const TriComplex fine(Cube(pt(0.5, 0.125), 2.0), 1.0 / 16);
    const auto t = seg(pt(0, 0), pt(1, 0)) + seg(pt(1, 0.25), pt(0, 0.25));
    const Chain ch = rasterize(t, fine);
    const auto r = flat_norm(ch, fine);
    CHECK(r.value == doctest::Approx(0.75).epsilon(1e-12));
    check_certificate(ch, fine, r);
  }
  SUBCASE("parallel segments against the dense program") {
    const auto t = seg(pt(0, 0), pt(1, 0)) + seg(pt(1, 0.5), pt(0, 0.5));
    const Chain ch = rasterize(t, c);
    const double oracle = dense_flat_norm(ch, c);
    CHECK(oracle == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(flat_norm(ch, c).value == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("flat norm agrees with the dense program") {
  std::mt19937_64 rng(7);
  const TriComplex c(Cube::from_lower(Point::Zero(2), 1.0), 0.25);
  for (int i = 0; i < 20; ++i) {
    const Chain ch = rasterize(testing_support::random_lattice_current(rng, c, 3), c);
    const auto r = flat_norm(ch, c);
    CHECK(r.value == doctest::Approx(dense_flat_norm(ch, c)).epsilon(1e-9));
    check_certificate(ch, c, r);
  }
}

TEST_CASE("flat norm properties") {
  std::mt19937_64 rng(13);
  const TriComplex c(Cube::from_lower(Point::Zero(2), 2.0), 0.125);
  for (int i = 0; i < 20; ++i) {
    const Chain a = rasterize(testing_support::random_lattice_current(rng, c, 4), c);
    const Chain b = rasterize(testing_support::random_lattice_current(rng, c, 4), c);
    const auto fa = flat_norm(a, c), fb = flat_norm(b, c), fab = flat_norm(a + b, c);
    CHECK(fa.value <= chain_mass(a, c) + 1e-12);
    CHECK(fab.value <= fa.value + fb.value + 1e-9);
    check_certificate(a + b, c, fab);
  }
}

TEST_CASE("flat norm does not grow under mesh refinement") {
  std::mt19937_64 rng(31);
  const Cube domain = Cube::from_lower(Point::Zero(2), 1.0);
  const TriComplex coarse(domain, 0.125), fine(domain, 0.0625);
  for (int i = 0; i < 20; ++i) {
    const auto t = testing_support::random_lattice_current(rng, coarse, 4);
    const double fc = flat_norm(rasterize(t, coarse), coarse).value;
    const double ff = flat_norm(rasterize(t, fine), fine).value;
    CHECK(ff <= fc + 1e-9);
  }
}
