#include <gtest/gtest.h>

#include <random>

#include "screwdisloc/operators.hpp"

using namespace screwdisloc;

namespace {

CVector basis(const DislocatedLattice& lat, int x, int y) {
  CVector v = CVector::Zero(lat.size());
  v[lat.index_of(x, y)] = 1.0;
  return v;
}

}  // namespace

TEST(ShiftX, MovesOneSiteRight) {
  const auto lat = build_lattice(2, Boundary::open());
  const SparseC sx = shift_x(lat, 0.7).matrix;
  const CVector out = sx * basis(lat, 0, 0);
  EXPECT_NEAR((out - basis(lat, 1, 0)).norm(), 0.0, 0.0);
  EXPECT_EQ((sx * basis(lat, 2, 0)).norm(), 0.0);
}

TEST(ShiftY, AmplitudesOnAndOffTheCut) {
  const auto lat = build_lattice(3, Boundary::open());
  const CMatrix sy0 = shift_y(lat, 0.0).dense();
  EXPECT_EQ((sy0 - flat_shift(lat, 0, 1).dense()).norm(), 0.0);
  const CMatrix sypi = shift_y(lat, kPi).dense();
  const cplx on_cut = sypi(lat.index_of(-1, 1), lat.index_of(-1, 0));
  EXPECT_NEAR(on_cut.real(), -1.0, 1e-15);
  EXPECT_NEAR(on_cut.imag(), 0.0, 1e-15);
  const CMatrix syh = shift_y(lat, kPi / 2).dense();
  EXPECT_EQ(syh(lat.index_of(1, 1), lat.index_of(1, 0)), cplx(1.0, 0.0));
}

TEST(Commutator, ClosedFormHolds) {
  const auto lat = build_lattice(6, Boundary::open());
  EXPECT_EQ(commutator_check(lat, 0.0), 0.0);
  EXPECT_LE(commutator_check(lat, kPi), 1e-12);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int t = 0; t < 20; ++t) EXPECT_LE(commutator_check(lat, u(rng)), 1e-12);
}

TEST(Commutator, RejectsTinyLattices) {
  EXPECT_THROW(commutator_check(build_lattice(2, Boundary::open()), 0.3), std::invalid_argument);
}

TEST(Projections, Ranks) {
  const auto lat = build_lattice(2, Boundary::open());
  auto rank = [](const MomentumOperator& p) { return static_cast<int>(std::lround(p.dense().trace().real())); };
  EXPECT_EQ(rank(cut_projection(lat)), 2);
  EXPECT_EQ(rank(core_projection(lat, 0.0)), 1);
  EXPECT_EQ(rank(ring_projection(lat, 1.5)), 16);
  const CMatrix p = cut_projection(lat).dense();
  EXPECT_EQ((p * p - p).norm(), 0.0);
  EXPECT_EQ(p(lat.index_of(-1, 0), lat.index_of(-1, 0)), cplx(1.0, 0.0));
  EXPECT_EQ(p(lat.index_of(-2, 0), lat.index_of(-2, 0)), cplx(1.0, 0.0));
}

TEST(Propagation, GraphDistance) {
  const auto lat = build_lattice(4, Boundary::open());
  const MomentumOperator id = monomial(lat, 0.3, 0, 0);
  EXPECT_EQ(propagation(id), 0);
  EXPECT_EQ(propagation(shift_x(lat, 0.3)), 1);
  MomentumOperator xy = shift_x(lat, 0.3);
  xy.matrix = shift_x(lat, 0.3).matrix * shift_y(lat, 0.3).matrix;
  EXPECT_EQ(propagation(xy), 2);
}

TEST(Gauge, GeometricShiftsAreGaugeEquivalent) {
  // The nearest-lift shifts differ from the cut-bond ones by the diagonal
  // gauge that is e^{i kz} on the negative x half-line.
  const auto lat = build_lattice(4, Boundary::open());
  for (double kz : {0.4, 1.9, -2.6}) {
    const CVector g = half_line_gauge(lat, kz);
    for (auto [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
      const CMatrix geo = geometric_shift(lat, kz, dx, dy).dense();
      const CMatrix alg = monomial(lat, kz, dx, dy).dense();
      const CMatrix conj = g.asDiagonal() * geo * g.conjugate().asDiagonal();
      EXPECT_LE((conj - alg).cwiseAbs().maxCoeff(), 1e-14) << "kz=" << kz << " d=(" << dx << "," << dy << ")";
    }
  }
}

TEST(Layer, PhaseConvention) {
  EXPECT_NEAR(std::abs(layer_phase(0.8, 1) - std::exp(cplx(0.0, -0.8))), 0.0, 1e-15);
  EXPECT_EQ(layer_phase(0.8, 0), cplx(1.0, 0.0));
}
