#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <vector>

#include "dlharmonic/tree_geometry.hpp"

namespace dlh {

/// Which factor tree of DL(q,r) = T_q x_hor T_r.
enum class Side : int { One = 1, Two = 2 };

inline Side other(Side s) { return s == Side::One ? Side::Two : Side::One; }

/// A vertex (eta, k) of DL(q,r) in lamplighter form.
///
/// Lamps sit at the half-integers m - 1/2 and are keyed by the integer m.
/// Lamps at codes m <= pos are green (states 0..q-1), lamps at codes
/// m >= pos + 1 are red (states 0..r-1). Zero states are not stored.
struct DLVertex {
  std::int64_t pos = 0;
  std::map<std::int64_t, Symbol> lamps;

  Symbol lamp(std::int64_t code) const {
    auto it = lamps.find(code);
    return it == lamps.end() ? 0 : it->second;
  }
  void set_lamp(std::int64_t code, Symbol state) {
    if (state == 0) {
      lamps.erase(code);
    } else {
      lamps[code] = state;
    }
  }

  friend bool operator==(const DLVertex&, const DLVertex&) = default;
  friend auto operator<=>(const DLVertex&, const DLVertex&) = default;
};

/// The identity o = (zero configuration, 0).
inline DLVertex dl_root() { return {}; }

/// Throws InvalidInput if a lamp state violates the colour rule.
void validate_vertex(const DLVertex& x, int q, int r);

/// pi_1 x = (eta_k^-, k) in T_q, pi_2 x = (eta_k^+, -k) in T_r.
TreeVertex project(const DLVertex& x, Side side);

/// The vertex x1 x2; throws HorocycleMismatch unless hor(x1) + hor(x2) == 0.
DLVertex compose(const TreeVertex& x1, const TreeVertex& x2);

/// The q + r neighbours: q moves right (new green lamp at k + 1/2), r moves
/// left (new red lamp at k - 1/2).
std::vector<DLVertex> neighbors(const DLVertex& x, int q, int r);

struct FlagData {
  std::int64_t fl1 = 0;
  std::int64_t fl2 = 0;
  std::int64_t up1 = 0;  // k - fl1
  std::int64_t up2 = 0;  // fl2 - k
};

/// Left and right flags of the ordered pair (x, y) from a scan of the two
/// configurations: a lamp differing at m - 1/2 lies on the edge [m-1, m], so
/// the lamplighter must visit both m - 1 and m.
FlagData flags(const DLVertex& x, const DLVertex& y);

/// The up-quadruple (up(x1,y1), up(y1,x1), up(x2,y2), up(y2,x2)).
struct UpQuadruple {
  std::int64_t k1 = 0, l1 = 0, k2 = 0, l2 = 0;
  friend bool operator==(const UpQuadruple&, const UpQuadruple&) = default;
  friend auto operator<=>(const UpQuadruple&, const UpQuadruple&) = default;
};
UpQuadruple up_quadruple(const DLVertex& x, const DLVertex& y);

/// d(x1,y1) + d(x2,y2) - |hor(x1) - hor(y1)|.
std::int64_t dl_distance(const DLVertex& x, const DLVertex& y);

/// Lamplighter group law (eta, k)(eta', k') = (eta + T_k eta', k + k') on
/// Z_q wr Z. Throws ColorMismatch when q != r.
DLVertex group_multiply(const DLVertex& x, const DLVertex& y, int q, int r);
DLVertex group_inverse(const DLVertex& x, int q, int r);

/// The isometry of the factor tree induced by left multiplication with g,
/// i.e. pi_side(g x) for any lift x of v.
TreeVertex induced_tree_action(const DLVertex& g, const TreeVertex& v, Side side, int q, int r);

/// Image of a boundary point of the factor tree under the induced isometry.
/// The anchor is pushed below the support of g first, so the canonical zero
/// continuation is carried to the canonical zero continuation.
BoundaryPoint induced_boundary_action(const DLVertex& g, const BoundaryPoint& xi, Side side, int q, int r);

}  // namespace dlh
