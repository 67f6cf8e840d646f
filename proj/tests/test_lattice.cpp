#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "screwdisloc/lattice.hpp"

using namespace screwdisloc;

TEST(Height, OffsetOnTheAxes) {
  EXPECT_DOUBLE_EQ(height_offset(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(height_offset(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(height_offset(-1, 0), -0.5);
  EXPECT_DOUBLE_EQ(height_offset(0, 0), 0.0);
  EXPECT_TRUE(is_axis(0, 0));
}

TEST(Height, OffsetStaysInHalfOpenUnitInterval) {
  for (int x = -7; x <= 7; ++x) {
    for (int y = -7; y <= 7; ++y) {
      const double h = height_offset(x, y);
      EXPECT_GE(h, -0.5);
      EXPECT_LT(h, 0.5);
    }
  }
}

TEST(NearestLift, Examples) {
  EXPECT_EQ(nearest_lift(1, 0, 5.0), (Site{1, 0, 5}));
  EXPECT_EQ(nearest_lift(0, 1, 0.0), (Site{0, 1, 0}));
  // height -0.5 and +0.5 are equidistant from 0; the upper one wins
  const Site s = nearest_lift(-3, 0, 0.0);
  EXPECT_DOUBLE_EQ(embedded_height(s), 0.5);
}

TEST(NearestLift, IsNearestEverywhere) {
  for (int x = -4; x <= 4; ++x) {
    for (int y = -4; y <= 4; ++y) {
      for (double z : {-1.3, -0.2, 0.0, 0.49, 2.71}) {
        const Site s = nearest_lift(x, y, z);
        const double best = std::abs(embedded_height(s) - z);
        for (int dz : {-1, 1}) {
          EXPECT_LE(best, std::abs(embedded_height(Site{x, y, s.z_index + dz}) - z) + 1e-15);
        }
      }
    }
  }
}

TEST(BuildLattice, SmallOpenLattice) {
  const auto lat = build_lattice(2, Boundary::open());
  EXPECT_EQ(lat.size(), 25);
  ASSERT_EQ(lat.cut_bonds().size(), 2u);
  std::set<std::pair<int, int>> from;
  for (const CutBond& c : lat.cut_bonds()) {
    const Site& a = lat.site(c.from);
    const Site& b = lat.site(c.to);
    EXPECT_EQ(b.x, a.x);
    EXPECT_EQ(b.y, a.y + 1);
    from.insert({a.x, a.y});
  }
  EXPECT_EQ(from, (std::set<std::pair<int, int>>{{-2, 0}, {-1, 0}}));
}

TEST(BuildLattice, CoreRemovalCountsSites) {
  const auto lat = build_lattice(2, Boundary::open(), 1.5);
  EXPECT_EQ(lat.size(), 16);
  for (const Site& s : lat.sites()) EXPECT_GT(s.x * s.x + s.y * s.y, 2.25);
  EXPECT_EQ(lat.removed_sites().size(), 9u);
  EXPECT_EQ(lat.without_core_removal().size(), 25);
}

TEST(BuildLattice, RejectsSwallowedTruncation) {
  EXPECT_THROW(build_lattice(3, Boundary::open(), 3.0), std::invalid_argument);
}

TEST(BuildLattice, DipoleTorusCutsMatchBruteForce) {
  const auto lat = build_lattice(3, Boundary::dipole(3));
  EXPECT_EQ(lat.size(), 49);
  EXPECT_TRUE(lat.is_torus());
  ASSERT_EQ(lat.cores().size(), 2u);
  // Brute force: a vertical bond (x,y) -> (x,y+1) crosses the segment joining
  // the two cores at height 1/2 iff x lies strictly between their abscissae.
  const double a = std::min(lat.cores()[0].x, lat.cores()[1].x);
  const double b = std::max(lat.cores()[0].x, lat.cores()[1].x);
  int expected = 0;
  for (int x = -3; x <= 3; ++x) {
    if (x > a && x < b) ++expected;
  }
  EXPECT_EQ(expected, 3);
  EXPECT_EQ(static_cast<int>(lat.cut_bonds().size()), expected);
  for (const CutBond& c : lat.cut_bonds()) {
    EXPECT_GT(lat.site(c.from).x, a);
    EXPECT_LT(lat.site(c.from).x, b);
  }
}

TEST(BuildLattice, StepAcrossTheCut) {
  const auto lat = build_lattice(3, Boundary::open());
  const Neighbor up = lat.step(lat.index_of(-1, 0), 0, 1);
  EXPECT_EQ(up.layer_shift, 1);
  const Neighbor down = lat.step(lat.index_of(-1, 1), 0, -1);
  EXPECT_EQ(down.layer_shift, -1);
  EXPECT_EQ(lat.step(lat.index_of(1, 0), 0, 1).layer_shift, 0);
  EXPECT_LT(lat.step(lat.index_of(3, 0), 1, 0).site, 0);  // leaves the box
}

TEST(BuildLattice, TorusWrapsAround) {
  const auto lat = build_lattice(3, Boundary::dipole(2));
  const Neighbor n = lat.step(lat.index_of(3, 0), 1, 0);
  ASSERT_GE(n.site, 0);
  EXPECT_EQ(lat.site(n.site).x, -3);
}

TEST(Frame, IdentityForTheZAxis) {
  EXPECT_TRUE(burgers_frame({0, 0, 1}).is_identity());
}

TEST(Frame, RejectsNonPrimitive) {
  EXPECT_THROW(burgers_frame({0, 0, 2}), std::invalid_argument);
  EXPECT_THROW(burgers_frame({2, 4, 6}), std::invalid_argument);
  EXPECT_THROW(burgers_frame({0, 0, 0}), std::invalid_argument);
}

TEST(Frame, UnimodularWithBurgersColumn) {
  for (const IntVec3& b : std::vector<IntVec3>{{1, 0, 1}, {0, 0, -1}, {2, 3, 5}, {-1, 4, 0}, {1, 1, 1}, {3, -2, 7}}) {
    const BurgersFrame f = burgers_frame(b);
    EXPECT_EQ(det3(f.T), 1);
    EXPECT_EQ(apply3(f.T, {0, 0, 1}), b);
    EXPECT_EQ(matmul3(f.T, inverse_unimodular(f.T)), identity3());
  }
}

TEST(NearestLift, LayerShiftEquivariance) {
  for (int x = -3; x <= 3; ++x) {
    for (int y = -3; y <= 3; ++y) {
      for (double z : {-0.5, 0.1, 0.77}) {
        const Site base = nearest_lift(x, y, z);
        for (int n : {-2, 1, 5}) {
          const Site moved = nearest_lift(x, y, z + n);
          EXPECT_EQ(moved, (Site{base.x, base.y, base.z_index + n}));
        }
      }
    }
  }
}
