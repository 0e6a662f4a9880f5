#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

namespace dlh {

using Symbol = std::uint32_t;
using Level = std::int64_t;

/// A vertex (sigma, k) of the homogeneous tree T_q, drawn with a distinguished
/// end omega so that every vertex has one predecessor and q successors.
///
/// The word sigma is a finitely supported sequence sigma(0), sigma(1), ...;
/// sigma(0) is the symbol chosen on the edge from the predecessor. Internally
/// the symbols are kept in a dense vector with sigma(0) last and no leading
/// zeros, so equality and hashing are O(support) and moving one step up or
/// down the tree is O(1).
class TreeVertex {
 public:
  /// The root o = (zero word, 0).
  TreeVertex() = default;

  /// Builds a vertex from a sparse word {m -> sigma(m)}; zero entries are dropped.
  TreeVertex(Level hor, const std::map<std::int64_t, Symbol>& word);

  /// Builds a vertex from symbols ordered from the most ancestral to sigma(0).
  static TreeVertex from_digits(Level hor, std::vector<Symbol> digits);

  Level hor() const noexcept { return hor_; }

  /// sigma(m); zero outside the support.
  Symbol symbol(std::int64_t m) const noexcept;

  /// The symbol on the edge entering level j of the ancestral line (j <= hor).
  Symbol level_symbol(Level j) const noexcept;

  /// Length of the stored word (one past the largest nonzero index).
  std::size_t word_length() const noexcept { return digits_.size(); }

  std::map<std::int64_t, Symbol> sparse_word() const;
  std::span<const Symbol> digits() const noexcept { return digits_; }

  /// Mutating moves used in simulation hot loops.
  void move_up() noexcept;
  void move_down(Symbol s);

  TreeVertex predecessor() const;
  TreeVertex child(Symbol s) const;

  /// Ancestor at horocycle `level` (level <= hor()).
  TreeVertex ancestor_at(Level level) const;

  friend bool operator==(const TreeVertex&, const TreeVertex&) = default;
  friend std::strong_ordering operator<=>(const TreeVertex& a, const TreeVertex& b) {
    if (auto c = a.hor_ <=> b.hor_; c != 0) return c;
    return a.digits_ <=> b.digits_;
  }

  std::size_t hash() const noexcept;

 private:
  Level hor_ = 0;
  std::vector<Symbol> digits_;  // digits_.back() == sigma(0); front nonzero
};

/// Throws InvalidInput unless every stored symbol is below q and q >= 2.
void validate_vertex(const TreeVertex& v, int q);

TreeVertex predecessor(const TreeVertex& v);
std::vector<TreeVertex> successors(const TreeVertex& v, int q);

/// Maximal common ancestor x ^ y.
TreeVertex confluent(const TreeVertex& x, const TreeVertex& y);
Level confluent_level(const TreeVertex& x, const TreeVertex& y);

/// up(x, y) = hor(x) - hor(x ^ y).
std::int64_t up(const TreeVertex& x, const TreeVertex& y);

std::int64_t tree_distance(const TreeVertex& x, const TreeVertex& y);

/// True when a is an ancestor of (or equal to) v.
bool is_ancestor(const TreeVertex& a, const TreeVertex& v);

/// |T_{k,r}(x)|: 1 if r = 0, q^r if k = 0, (q-1) q^(r-1) otherwise.
/// Throws InvalidInput on q < 2 or negative k, r and std::overflow_error if the
/// count does not fit in 64 bits.
std::uint64_t cone_count(int q, std::int64_t k, std::int64_t r);

/// Same count as a double; usable far beyond the 64-bit range.
double cone_size(int q, std::int64_t k, std::int64_t r);

/// T_{k,r}(base) = { y : up(base,y) = k, up(y,base) = r }.
struct ConeSpec {
  TreeVertex base;
  std::int64_t k = 0;
  std::int64_t r = 0;
};

/// All vertices of T_{k,r}(base), in lexicographic order of the new symbols.
std::vector<TreeVertex> enumerate_cone(const ConeSpec& spec, int q);

/// Calls f(y) for every y in T_{k,r}(base) without materializing the list.
void for_each_in_cone(const ConeSpec& spec, int q, const std::function<void(const TreeVertex&)>& f);

/// How the geodesic continues below the anchor of a boundary point.
enum class Continuation {
  Zero,     // canonical: keep appending symbol 0 forever
  Unknown,  // only the prefix down to the anchor is known
};

/// An end xi of T other than omega, given by a vertex on the geodesic
/// <omega, xi> plus a continuation rule below it.
struct BoundaryPoint {
  TreeVertex anchor;
  Continuation continuation = Continuation::Zero;

  friend bool operator==(const BoundaryPoint&, const BoundaryPoint&) = default;
};

/// The vertex at horocycle hor(anchor) + n on <omega, xi>.
/// Throws InsufficientDepth for n > 0 when the continuation is unknown.
TreeVertex geodesic_toward(const BoundaryPoint& xi, std::int64_t n);

/// x ^ xi. Throws InsufficientDepth if the answer depends on an unknown
/// continuation.
TreeVertex confluent_with_boundary(const TreeVertex& x, const BoundaryPoint& xi);

/// up(x, xi) = hor(x) - hor(x ^ xi).
std::int64_t up_to_boundary(const TreeVertex& x, const BoundaryPoint& xi);

/// Membership of xi in Omega_l(v) = { xi : up(v, xi) = l }.
bool in_cylinder(const BoundaryPoint& xi, const TreeVertex& v, std::int64_t l);

}  // namespace dlh

template <>
struct std::hash<dlh::TreeVertex> {
  std::size_t operator()(const dlh::TreeVertex& v) const noexcept { return v.hash(); }
};
