#include <gtest/gtest.h>

#include "screwdisloc/models.hpp"

using namespace screwdisloc;

namespace {

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST(Bloch, QwzAtHighSymmetryPoints) {
  const HoppingModel m = qwz_stack(-1.0, Plane::xy);
  EXPECT_LE(max_abs(bloch(m, {0.0, 0.0, 0.4}).matrix() - pauli::z()), 1e-15);
  // (m + cos kx + cos ky) sigma_z = (-1 - 1 + 1) sigma_z at (pi, 0)
  EXPECT_LE(max_abs(bloch(m, {kPi, 0.0, 1.1}).matrix() + pauli::z()), 1e-15);
  EXPECT_LE(max_abs(bloch(m, {0.3, 0.2, 0.0}).matrix() - bloch(m, {0.3, 0.2, 2.0}).matrix()), 1e-15);
}

TEST(Bloch, TrivialIsSigmaZ) {
  const HoppingModel t = trivial(2, 1.0);
  for (double k : {0.0, 0.7, 3.0}) EXPECT_EQ(max_abs(bloch(t, {k, -k, 2 * k}).matrix() - pauli::z()), 0.0);
}

TEST(Qwz, PlanarHopsOnly) {
  for (Plane p : {Plane::xy, Plane::yz, Plane::zx}) {
    const HoppingModel m = qwz_stack(-1.0, p);
    EXPECT_LE(m.hermiticity_defect(), 0.0);
    const auto [a, b] = plane_axes(p);
    const int off = 3 - a - b;
    for (const auto& [r, A] : m.hops) EXPECT_EQ(r[static_cast<std::size_t>(off)], 0);
  }
  EXPECT_THROW(qwz_stack(2.0, Plane::xy), std::invalid_argument);
}

TEST(Models, ValidateRejectsNonHermitian) {
  HoppingModel m = qwz_stack(-1.0, Plane::xy);
  m.hops[Hop{1, 0, 0}](0, 1) += 0.1;
  EXPECT_GT(m.hermiticity_defect(), 0.0);
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(Models, InFrameTransformsHops) {
  const HoppingModel m = qwz_stack(-1.0, Plane::xy);
  const IntMat3 T = burgers_frame({1, 0, 1}).T;
  const HoppingModel f = in_frame(m, T);
  for (const auto& [r, A] : f.hops) {
    const IntVec3 back = apply3(T, {r[0], r[1], r[2]});
    const Hop orig{static_cast<int>(back[0]), static_cast<int>(back[1]), static_cast<int>(back[2])};
    EXPECT_EQ(max_abs(A - m.hop(orig)), 0.0);
  }
  EXPECT_EQ(f.hops.size(), m.hops.size());
}

TEST(Assembly, TrivialSpectrumOnEveryKz) {
  const auto lat = build_lattice(4, Boundary::open());
  const HoppingModel t = trivial(2, 1.0);
  for (double kz : {0.1, 2.0}) {
    const auto s = assemble_dislocated(t, lat, kz);
    const RVector e = linalg::eigvalsh(s.H);
    for (Index i = 0; i < e.size(); ++i) EXPECT_NEAR(std::abs(e[i]), 1.0, 1e-14);
  }
}

TEST(Assembly, NoCutPhaseAtZeroKz) {
  const auto lat = build_lattice(4, Boundary::open());
  const HoppingModel m = qwz_stack(-1.0, Plane::xy);
  const auto d = assemble_dislocated(m, lat, 0.0);
  const auto f = assemble_flat(m, lat, 0.0);
  EXPECT_EQ(max_abs(d.H.matrix() - f.H.matrix()), 0.0);
}

TEST(Assembly, CutPhasesAppearAwayFromZero) {
  const auto lat = build_lattice(4, Boundary::open());
  const HoppingModel m = qwz_stack(-1.0, Plane::xy);
  const auto d = assemble_dislocated(m, lat, 1.3);
  const auto f = assemble_flat(m, lat, 1.3);
  EXPECT_GT(max_abs(d.H.matrix() - f.H.matrix()), 0.1);
}

TEST(Assembly, DerivativeMatchesFiniteDifference) {
  const auto lat = build_lattice(4, Boundary::open());
  HoppingModel m = qwz_stack(-1.0, Plane::xy);
  m.hops[Hop{0, 0, 1}] = 0.3 * pauli::x();
  m.hops[Hop{0, 0, -1}] = 0.3 * pauli::x();
  const double kz = 0.9, h = 1e-6;
  const auto s = assemble_dislocated(m, lat, kz);
  const CMatrix fd =
      (assemble_dislocated(m, lat, kz + h).H.matrix() - assemble_dislocated(m, lat, kz - h).H.matrix()) / (2 * h);
  EXPECT_LE(max_abs(fd - CMatrix(s.dH)), 1e-8);
}

TEST(Assembly, CoreRemovalWithZeroRadiusIsPlain) {
  const auto lat = build_lattice(4, Boundary::open(), 0.0);
  const HoppingModel m = qwz_stack(-1.0, Plane::xy);
  const auto a = assemble_dislocated(m, lat, 0.8);
  const auto b = assemble_core_removed(m, lat, 0.8);
  EXPECT_EQ(max_abs(a.H.matrix() - b.H.matrix()), 0.0);
}

TEST(Assembly, RemovedSitesCarryIdentity) {
  const auto lat = build_lattice(5, Boundary::open(), 2.0);
  const HoppingModel m = qwz_stack(-1.0, Plane::xy);
  const auto s = assemble_dislocated(m, lat, 0.8);
  const Index retained = lat.size() * 2;
  EXPECT_EQ(s.retained_dim, retained);
  const Index extra = s.dim() - retained;
  EXPECT_EQ(extra, static_cast<Index>(lat.removed_sites().size()) * 2);
  EXPECT_EQ(max_abs(s.H.matrix().bottomRightCorner(extra, extra) - CMatrix::Identity(extra, extra)), 0.0);
  EXPECT_EQ(max_abs(s.H.matrix().topRightCorner(retained, extra)), 0.0);
}

TEST(Assembly, RejectsRangeBeyondTruncation) {
  HoppingModel m = trivial(1, 1.0);
  m.hops[Hop{3, 0, 0}] = CMatrix::Constant(1, 1, 0.1);
  m.hops[Hop{-3, 0, 0}] = CMatrix::Constant(1, 1, 0.1);
  EXPECT_THROW(assemble_dislocated(m, build_lattice(4, Boundary::open()), 0.2), std::invalid_argument);
}

TEST(Disorder, ReproducibleAndBounded) {
  const Disorder d{0.4, 99};
  const auto a = onsite_disorder(d, 2, 3, -1);
  const auto b = onsite_disorder(d, 2, 3, -1);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, onsite_disorder(d, 2, -1, 3));
  for (double v : a) EXPECT_LE(std::abs(v), 0.4);
  EXPECT_NE(a, onsite_disorder(Disorder{0.4, 100}, 2, 3, -1));
}

TEST(Disorder, LayerIndependent) {
  // The onsite term depends on (x, y) only, so H(kz) stays Hermitian with
  // kz-independent diagonal shifts.
  const auto lat = build_lattice(4, Boundary::open());
  HoppingModel m = qwz_stack(-1.0, Plane::xy);
  m.disorder = {0.3, 4};
  const auto a = assemble_dislocated(m, lat, 0.2);
  const auto b = assemble_dislocated(m, lat, 2.2);
  EXPECT_LE(max_abs(CMatrix(a.H.matrix().diagonal().asDiagonal()) - CMatrix(b.H.matrix().diagonal().asDiagonal())),
            1e-15);
}

TEST(Symmetry, QwzPassesClassA) {
  const HoppingModel m = qwz_stack(-1.0, Plane::xy);
  EXPECT_TRUE(check_symmetry(m, SymmetryData{kalgebra::AZClass::A, {}, {}, {}}).passed());
}

TEST(Symmetry, QwzFailsPlainTimeReversal) {
  const HoppingModel m = qwz_stack(-1.0, Plane::xy);
  SymmetryData s{kalgebra::AZClass::AI, AntiUnitary{CMatrix::Identity(2, 2), 1}, {}, {}};
  const auto rep = check_symmetry(m, s);
  EXPECT_FALSE(rep.passed());
  EXPECT_FALSE(rep.hamiltonian_symmetric);
}

TEST(Symmetry, TrivialPassesClassAI) {
  SymmetryData s{kalgebra::AZClass::AI, AntiUnitary{CMatrix::Identity(2, 2), 1}, {}, {}};
  EXPECT_TRUE(check_symmetry(trivial(2, 1.0), s).passed());
}

TEST(Symmetry, LabelMismatchIsReported) {
  SymmetryData s{kalgebra::AZClass::AII, AntiUnitary{CMatrix::Identity(2, 2), 1}, {}, {}};
  const auto rep = check_symmetry(trivial(2, 1.0), s);
  EXPECT_FALSE(rep.consistent_with_class);
}

TEST(Symmetry, QwzParticleHole) {
  // sigma_x K maps H(k) to -H(-k) for the planar model.
  SymmetryData s{kalgebra::AZClass::D, {}, AntiUnitary{pauli::x(), 1}, {}};
  EXPECT_TRUE(check_symmetry(qwz_stack(-1.0, Plane::xy), s).passed());
}
