#pragma once

// Bookkeeping for the K-groups of the three-torus: the eight Bott generators,
// the GL3(Z) action on them through exterior powers, the dislocation boundary
// map for an arbitrary Burgers frame, and the tenfold-way lookup.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "screwdisloc/lattice.hpp"

namespace screwdisloc::kalgebra {

enum class Generator : int { empty = 0, x, y, z, xy, yz, zx, xyz };
enum class Parity { even, odd };

inline constexpr std::array<std::string_view, 8> kGeneratorNames{"", "x", "y", "z", "xy", "yz", "zx", "xyz"};

inline int degree(Generator g) {
  switch (g) {
    case Generator::empty: return 0;
    case Generator::x:
    case Generator::y:
    case Generator::z: return 1;
    case Generator::xy:
    case Generator::yz:
    case Generator::zx: return 2;
    case Generator::xyz: return 3;
  }
  return -1;
}

struct KClass {
  std::array<long long, 8> coefficients{};
  Parity parity = Parity::even;

  [[nodiscard]] long long operator[](Generator g) const { return coefficients[static_cast<std::size_t>(g)]; }
  long long& operator[](Generator g) { return coefficients[static_cast<std::size_t>(g)]; }

  static KClass generator(Generator g) {
    KClass c;
    c.parity = degree(g) % 2 == 0 ? Parity::even : Parity::odd;
    c[g] = 1;
    return c;
  }
  /// Even class with weak part (c_yz, c_zx, c_xy) and no strong part.
  static KClass weak(long long c_yz, long long c_zx, long long c_xy) {
    KClass c;
    c[Generator::yz] = c_yz;
    c[Generator::zx] = c_zx;
    c[Generator::xy] = c_xy;
    return c;
  }

  /// True when no coefficient sits outside the parity's generators.
  [[nodiscard]] bool consistent() const {
    for (int i = 0; i < 8; ++i) {
      if (coefficients[static_cast<std::size_t>(i)] != 0 &&
          (degree(static_cast<Generator>(i)) % 2 == 0) != (parity == Parity::even)) {
        return false;
      }
    }
    return true;
  }

  friend KClass operator+(KClass a, const KClass& b) {
    if (a.parity != b.parity) throw std::invalid_argument("KClass: adding classes of different parity");
    for (std::size_t i = 0; i < 8; ++i) a.coefficients[i] += b.coefficients[i];
    return a;
  }
  friend bool operator==(const KClass&, const KClass&) = default;
};

/// Image of c under the map induced by M on the exterior algebra of Z^3.
/// Degree 2 uses the basis (yz, zx, xy) = (e_y^e_z, e_z^e_x, e_x^e_y).
inline KClass exterior_action(const KClass& c, const IntMat3& M) {
  KClass out;
  out.parity = c.parity;
  out[Generator::empty] = c[Generator::empty];
  const std::array<Generator, 3> deg1{Generator::x, Generator::y, Generator::z};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[deg1[i]] += M[i][j] * c[deg1[j]];
  // e_p ^ e_q with (p, q) cyclic: index 0 -> yz, 1 -> zx, 2 -> xy
  const std::array<Generator, 3> deg2{Generator::yz, Generator::zx, Generator::xy};
  const std::array<std::array<int, 2>, 3> pair{{{1, 2}, {2, 0}, {0, 1}}};
  for (int a = 0; a < 3; ++a) {
    const auto [p, q] = pair[a];
    for (int b = 0; b < 3; ++b) {
      const auto [i, j] = pair[b];
      const long long minor = M[p][i] * M[q][j] - M[p][j] * M[q][i];
      out[deg2[a]] += minor * c[deg2[b]];
    }
  }
  out[Generator::xyz] = det3(M) * c[Generator::xyz];
  return out;
}

/// Class in the frame coordinates: the action of T^{-1}.
inline KClass pullback(const KClass& c, const IntMat3& T) { return exterior_action(c, inverse_unimodular(T)); }

/// Index of the dislocation with frame T (third column b) on the class c:
/// the xy-coefficient of the class pulled back to frame coordinates. Odd
/// classes have no dislocation index.
inline long long boundary_map(const KClass& c, const IntMat3& T) {
  if (!c.consistent()) throw std::invalid_argument("boundary_map: class has coefficients of the wrong parity");
  if (c.parity == Parity::odd) return 0;
  return pullback(c, T)[Generator::xy];
}

inline long long boundary_map(const KClass& c, const BurgersFrame& frame) { return boundary_map(c, frame.T); }

/// Closed form for even classes: b . (c_yz, c_zx, c_xy) / det T.
inline long long boundary_map_closed_form(const KClass& c, const BurgersFrame& frame) {
  const long long dot = frame.b[0] * c[Generator::yz] + frame.b[1] * c[Generator::zx] + frame.b[2] * c[Generator::xy];
  return det3(frame.T) * dot;
}

// ---------------------------------------------------------------------------
// Tenfold way

enum class AZClass { A, AIII, AI, BDI, D, DIII, AII, CII, C, CI };
enum class InvariantGroup { Z, Z2, Zero };

inline constexpr std::array<std::string_view, 10> kAZNames{"A", "AIII", "AI", "BDI", "D", "DIII", "AII", "CII", "C", "CI"};

inline std::string_view to_string(InvariantGroup g) {
  switch (g) {
    case InvariantGroup::Z: return "Z";
    case InvariantGroup::Z2: return "Z2";
    case InvariantGroup::Zero: return "0";
  }
  return "?";
}

inline AZClass parse_az(std::string_view label) {
  for (std::size_t i = 0; i < kAZNames.size(); ++i) {
    if (kAZNames[i] == label) return static_cast<AZClass>(i);
  }
  throw std::invalid_argument("unknown Altland-Zirnbauer label: " + std::string(label));
}

inline std::string_view to_string(AZClass c) { return kAZNames[static_cast<std::size_t>(c)]; }

/// Squares of time reversal and particle-hole (0 if absent) and presence of
/// the chiral symmetry.
struct AZSignature {
  int t_square = 0;
  int c_square = 0;
  bool chiral = false;
};

inline AZSignature signature(AZClass c) {
  switch (c) {
    case AZClass::A: return {0, 0, false};
    case AZClass::AIII: return {0, 0, true};
    case AZClass::AI: return {1, 0, false};
    case AZClass::BDI: return {1, 1, true};
    case AZClass::D: return {0, 1, false};
    case AZClass::DIII: return {-1, 1, true};
    case AZClass::AII: return {-1, 0, false};
    case AZClass::CII: return {-1, -1, true};
    case AZClass::C: return {0, -1, false};
    case AZClass::CI: return {1, -1, true};
  }
  return {};
}

/// Strong invariant group in two dimensions.
inline InvariantGroup az_lookup(AZClass c) {
  switch (c) {
    case AZClass::A:
    case AZClass::D:
    case AZClass::C: return InvariantGroup::Z;
    case AZClass::DIII:
    case AZClass::AII: return InvariantGroup::Z2;
    default: return InvariantGroup::Zero;
  }
}
inline InvariantGroup az_lookup(std::string_view label) { return az_lookup(parse_az(label)); }

/// Order of the degree-l generator of the real K-theory of a point.
inline InvariantGroup real_generator_order(long long l) {
  const long long r = ((l % 8) + 8) % 8;
  if (r == 0 || r == 4) return InvariantGroup::Z;
  if (r == 1 || r == 2) return InvariantGroup::Z2;
  return InvariantGroup::Zero;
}

}  // namespace screwdisloc::kalgebra
