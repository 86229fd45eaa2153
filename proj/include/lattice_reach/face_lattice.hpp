#pragma once

// Face lattice of a convex polytope: vertex coordinates plus every face of
// dimension 1..d with downward (children) and upward (parents) containment
// links between adjacent levels. The empty face is not stored.
//
// Level 0 holds the vertices, level d holds the single top face. Face ids are
// dense per level. Lattices are immutable; copies share storage.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lattice_reach/errors.hpp"
#include "lattice_reach/hyperplane.hpp"
#include "lattice_reach/lp.hpp"

namespace lattice_reach {

using FaceId = std::uint32_t;

/// Compressed adjacency list: entry i owns ids[offsets[i], offsets[i+1]).
class Incidence {
 public:
  Incidence() : offsets_{0} {}

  FaceId size() const { return static_cast<FaceId>(offsets_.size() - 1); }

  std::span<const FaceId> operator[](FaceId i) const {
    return {ids_.data() + offsets_[i], ids_.data() + offsets_[i + 1]};
  }

  void push(FaceId id) { ids_.push_back(id); }
  void close_entry() { offsets_.push_back(static_cast<FaceId>(ids_.size())); }

  void add_empty_entries(FaceId n) {
    offsets_.insert(offsets_.end(), n, static_cast<FaceId>(ids_.size()));
  }

  void reserve(std::size_t entries, std::size_t ids) {
    offsets_.reserve(entries + 1);
    ids_.reserve(ids);
  }

  std::size_t link_count() const { return ids_.size(); }

  /// Transpose: `targets` is the number of entries in the other level.
  Incidence transposed(FaceId targets) const {
    Incidence out;
    out.offsets_.assign(static_cast<std::size_t>(targets) + 1, 0);
    for (FaceId id : ids_) ++out.offsets_[id + 1];
    for (std::size_t i = 1; i < out.offsets_.size(); ++i) out.offsets_[i] += out.offsets_[i - 1];
    out.ids_.resize(ids_.size());
    std::vector<FaceId> cursor(out.offsets_.begin(), out.offsets_.end() - 1);
    for (FaceId f = 0; f < size(); ++f) {
      for (FaceId id : (*this)[f]) out.ids_[cursor[id]++] = f;
    }
    return out;
  }

  bool operator==(const Incidence&) const = default;

 private:
  std::vector<FaceId> offsets_;
  std::vector<FaceId> ids_;
};

class FaceLattice {
 public:
  FaceLattice() = default;

  /// `children[k]` (k = 1..d) lists, for every face at level k, its child
  /// faces at level k-1; `children[0]` is ignored. Parents are derived.
  FaceLattice(Eigen::MatrixXd vertices, std::vector<Incidence> children) {
    auto s = std::make_shared<Storage>();
    s->vertices = std::move(vertices);
    const auto levels = std::max<std::size_t>(children.size(), 1);
    s->children = std::move(children);
    s->children.resize(levels);
    s->children[0] = Incidence();
    s->children[0].add_empty_entries(static_cast<FaceId>(s->vertices.cols()));
    s->parents.resize(levels);
    for (std::size_t k = 0; k + 1 < levels; ++k) {
      s->parents[k] = s->children[k + 1].transposed(s->children[k].size());
    }
    s->parents[levels - 1] = Incidence();
    s->parents[levels - 1].add_empty_entries(s->children[levels - 1].size());
    storage_ = std::move(s);
  }

  bool empty() const { return storage_ == nullptr; }

  std::size_t ambient_dim() const { return static_cast<std::size_t>(storage_->vertices.rows()); }
  /// Combinatorial dimension d (top level index).
  std::size_t dim() const { return storage_->children.size() - 1; }

  std::size_t vertex_count() const { return static_cast<std::size_t>(storage_->vertices.cols()); }
  FaceId face_count(std::size_t level) const { return storage_->children.at(level).size(); }

  /// Per-level face counts, index 0 = vertices.
  std::vector<std::size_t> face_counts() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k <= dim(); ++k) out.push_back(face_count(k));
    return out;
  }

  const Eigen::MatrixXd& vertices() const { return storage_->vertices; }
  Eigen::VectorXd vertex(FaceId i) const { return storage_->vertices.col(i); }

  std::span<const FaceId> children(std::size_t level, FaceId f) const {
    return storage_->children[level][f];
  }
  std::span<const FaceId> parents(std::size_t level, FaceId f) const {
    return storage_->parents[level][f];
  }

  const Incidence& children_of_level(std::size_t level) const { return storage_->children[level]; }

  /// Sorted vertex ids reachable below face f at `level`.
  std::vector<FaceId> face_vertices(std::size_t level, FaceId f) const {
    std::vector<FaceId> current{f};
    for (std::size_t k = level; k > 0; --k) {
      std::vector<FaceId> next;
      for (FaceId g : current) {
        auto ch = children(k, g);
        next.insert(next.end(), ch.begin(), ch.end());
      }
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      current = std::move(next);
    }
    return current;
  }

  Eigen::VectorXd centroid() const { return storage_->vertices.rowwise().mean(); }

  bool same_structure(const FaceLattice& other) const {
    if (dim() != other.dim() || vertex_count() != other.vertex_count()) return false;
    for (std::size_t k = 1; k <= dim(); ++k) {
      if (!(storage_->children[k] == other.storage_->children[k])) return false;
    }
    return true;
  }

  friend bool operator==(const FaceLattice& a, const FaceLattice& b) {
    if (a.storage_ == b.storage_) return true;
    if (a.empty() || b.empty()) return false;
    return a.same_structure(b) && a.vertices() == b.vertices();
  }

  /// Same combinatorics, vertices replaced (column count must match).
  FaceLattice with_vertices(Eigen::MatrixXd vertices) const {
    FaceLattice out;
    auto s = std::make_shared<Storage>(*storage_);
    s->vertices = std::move(vertices);
    out.storage_ = std::move(s);
    return out;
  }

 private:
  struct Storage {
    Eigen::MatrixXd vertices;  // ambient_dim x vertex_count
    std::vector<Incidence> children;
    std::vector<Incidence> parents;
  };
  std::shared_ptr<const Storage> storage_;
};

// ---------------------------------------------------------------------------
// Construction

/// Face lattice of the axis-aligned box [lower, upper]. Dimensions with
/// lower == upper stay in the coordinates but add no combinatorial dimension.
inline FaceLattice box_lattice(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  detail::require_dim(static_cast<std::size_t>(upper.size()),
                      static_cast<std::size_t>(lower.size()), "box_lattice upper bound");
  if (lower.size() == 0) throw InvalidArgument("box_lattice: empty bounds");
  std::vector<Eigen::Index> free_dims;
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower(i) <= upper(i))) {
      throw InvalidArgument("box_lattice: lower[" + std::to_string(i) + "] > upper[" +
                            std::to_string(i) + "]");
    }
    if (lower(i) < upper(i)) free_dims.push_back(i);
  }
  const std::size_t d = free_dims.size();

  // A face is a word over {0: at lower, 1: at upper, 2: free} per free
  // dimension, read as a base-3 number. Its level is the count of 2s.
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= 3;
  std::vector<std::size_t> pow3(d + 1, 1);
  for (std::size_t i = 1; i <= d; ++i) pow3[i] = pow3[i - 1] * 3;

  std::vector<std::vector<std::size_t>> codes(d + 1);
  std::vector<FaceId> id_of(total);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t level = 0;
    for (std::size_t i = 0, c = code; i < d; ++i, c /= 3) level += (c % 3 == 2);
    id_of[code] = static_cast<FaceId>(codes[level].size());
    codes[level].push_back(code);
  }

  Eigen::MatrixXd verts(lower.size(), static_cast<Eigen::Index>(codes[0].size()));
  for (std::size_t v = 0; v < codes[0].size(); ++v) {
    Eigen::VectorXd x = lower;
    for (std::size_t i = 0, c = codes[0][v]; i < d; ++i, c /= 3) {
      if (c % 3 == 1) x(free_dims[i]) = upper(free_dims[i]);
    }
    verts.col(static_cast<Eigen::Index>(v)) = x;
  }

  std::vector<Incidence> children(d + 1);
  for (std::size_t k = 1; k <= d; ++k) {
    for (std::size_t code : codes[k]) {
      for (std::size_t i = 0; i < d; ++i) {
        if ((code / pow3[i]) % 3 != 2) continue;
        children[k].push(id_of[code - 2 * pow3[i]]);
        children[k].push(id_of[code - pow3[i]]);
      }
      children[k].close_entry();
    }
  }
  return FaceLattice(std::move(verts), std::move(children));
}

// ---------------------------------------------------------------------------
// Classification and split

enum class Side : std::int8_t { Negative = -1, Zero = 0, Positive = 1 };

struct VertexClassification {
  std::vector<FaceId> positive;
  std::vector<FaceId> negative;
  std::vector<FaceId> zero;
  std::vector<double> values;  // normal.v + offset per vertex
  std::vector<Side> sides;     // per vertex
};

/// Values of the functional at every vertex.
inline Eigen::VectorXd evaluate_vertices(const FaceLattice& lattice, const Hyperplane& h) {
  detail::require_dim(h.dim(), lattice.ambient_dim(), "hyperplane");
  Eigen::VectorXd values = lattice.vertices().transpose() * h.normal;
  values.array() += h.offset;
  return values;
}

/// Partition from precomputed vertex values. |value| <= eps is zero.
inline VertexClassification classify_values(const Eigen::VectorXd& values, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("classification tolerance must be positive");
  VertexClassification c;
  const auto n = static_cast<std::size_t>(values.size());
  c.values.assign(values.data(), values.data() + n);
  c.sides.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = c.values[i];
    const auto id = static_cast<FaceId>(i);
    if (v > eps) {
      c.sides[i] = Side::Positive;
      c.positive.push_back(id);
    } else if (v < -eps) {
      c.sides[i] = Side::Negative;
      c.negative.push_back(id);
    } else {
      c.sides[i] = Side::Zero;
      c.zero.push_back(id);
    }
  }
  return c;
}

inline VertexClassification classify_vertices(const FaceLattice& lattice, const Hyperplane& h,
                                              double eps) {
  return classify_values(evaluate_vertices(lattice, h), eps);
}

/// Outcome of dividing a polytope by a hyperplane.
struct PositiveOnly {
  FaceLattice lattice;
};
struct NegativeOnly {
  FaceLattice lattice;
};
struct Divided {
  FaceLattice positive;
  FaceLattice negative;
};
using SplitResult = std::variant<PositiveOnly, NegativeOnly, Divided>;

namespace detail {

inline constexpr std::uint8_t kPositiveBit = 1;
inline constexpr std::uint8_t kNegativeBit = 2;
inline constexpr std::uint8_t kCrossing = kPositiveBit | kNegativeBit;
inline constexpr FaceId kNoFace = static_cast<FaceId>(-1);

// status[k][f] = union of the vertex signs below face f. A face crosses the
// hyperplane iff it has both a positive and a negative vertex; status 0 means
// the face lies inside the hyperplane.
inline std::vector<std::vector<std::uint8_t>> face_status(const FaceLattice& lattice,
                                                          const std::vector<Side>& sides) {
  std::vector<std::vector<std::uint8_t>> status(lattice.dim() + 1);
  status[0].resize(sides.size());
  for (std::size_t v = 0; v < sides.size(); ++v) {
    status[0][v] = sides[v] == Side::Positive   ? kPositiveBit
                   : sides[v] == Side::Negative ? kNegativeBit
                                                : 0;
  }
  for (std::size_t k = 1; k <= lattice.dim(); ++k) {
    status[k].resize(lattice.face_count(k));
    for (FaceId f = 0; f < lattice.face_count(k); ++f) {
      std::uint8_t s = 0;
      for (FaceId c : lattice.children(k, f)) s |= status[k - 1][c];
      status[k][f] = s;
    }
  }
  return status;
}

// Builds the sub-lattice on the `side` of the hyperplane. Kept faces of the
// original lattice come first at each level (ascending old id), followed by
// the new faces cut out of crossing faces one level up (ascending id of the
// crossing face). New faces inherit containment from the faces they were cut
// from; faces inside the hyperplane are shared by both sides.
inline FaceLattice build_side(const FaceLattice& lattice,
                              const std::vector<std::vector<std::uint8_t>>& status,
                              std::uint8_t side, const Eigen::MatrixXd& new_vertices) {
  const std::size_t d = lattice.dim();
  // kept[k][f]: id in the new lattice, or kNoFace.
  std::vector<std::vector<FaceId>> kept(d + 1);
  // cut[k][f]: for a crossing face f at level k, id of its cut at level k-1.
  std::vector<std::vector<FaceId>> cut(d + 1);
  std::vector<FaceId> level_size(d + 1, 0);

  for (std::size_t k = 0; k <= d; ++k) {
    kept[k].assign(status[k].size(), kNoFace);
    for (FaceId f = 0; f < status[k].size(); ++f) {
      const std::uint8_t s = status[k][f];
      if ((s & side) || s == 0) kept[k][f] = level_size[k]++;
    }
  }
  for (std::size_t k = 1; k <= d; ++k) {
    cut[k].assign(status[k].size(), kNoFace);
    for (FaceId f = 0; f < status[k].size(); ++f) {
      if (status[k][f] == kCrossing) cut[k][f] = level_size[k - 1]++;
    }
  }

  Eigen::MatrixXd verts(lattice.ambient_dim(), level_size[0]);
  {
    Eigen::Index col = 0;
    for (FaceId v = 0; v < status[0].size(); ++v) {
      if (kept[0][v] != kNoFace) verts.col(col++) = lattice.vertices().col(v);
    }
    verts.rightCols(new_vertices.cols()) = new_vertices;
  }

  std::vector<Incidence> children(d + 1);
  std::vector<FaceId> stamp;
  for (std::size_t k = 1; k <= d; ++k) {
    Incidence& out = children[k];
    out.reserve(level_size[k], lattice.children_of_level(k).link_count() + level_size[k]);
    for (FaceId f = 0; f < status[k].size(); ++f) {
      if (kept[k][f] == kNoFace) continue;
      if (status[k][f] == kCrossing) {
        for (FaceId c : lattice.children(k, f)) {
          if (status[k - 1][c] & side) out.push(kept[k - 1][c]);
        }
        out.push(cut[k][f]);
      } else {
        for (FaceId c : lattice.children(k, f)) out.push(kept[k - 1][c]);
      }
      out.close_entry();
    }
    if (k == d) continue;
    // Cuts of crossing faces at level k+1 live at level k. Their children are
    // the cuts of crossing children plus the faces of the hyperplane section
    // that were already faces of the polytope (all-zero grandchildren).
    stamp.assign(status[k - 1].size(), kNoFace);
    for (FaceId g = 0; g < status[k + 1].size(); ++g) {
      if (status[k + 1][g] != kCrossing) continue;
      for (FaceId c : lattice.children(k + 1, g)) {
        if (status[k][c] == kCrossing) out.push(cut[k][c]);
      }
      for (FaceId c : lattice.children(k + 1, g)) {
        for (FaceId gc : lattice.children(k, c)) {
          if (status[k - 1][gc] == 0 && stamp[gc] != g) {
            stamp[gc] = g;
            out.push(kept[k - 1][gc]);
          }
        }
      }
      out.close_entry();
    }
  }
  return FaceLattice(std::move(verts), std::move(children));
}

}  // namespace detail

/// Divides the polytope by the hyperplane whose vertex classification is
/// given. Edges joining a positive and a negative vertex receive a new vertex
/// at the linear root; edges touching a zero vertex do not.
inline SplitResult split(const FaceLattice& lattice, const VertexClassification& cls) {
  detail::require_dim(cls.sides.size(), lattice.vertex_count(), "vertex classification");
  if (cls.negative.empty() && cls.positive.empty()) throw DegenerateSplitError();
  if (cls.negative.empty()) return PositiveOnly{lattice};
  if (cls.positive.empty()) return NegativeOnly{lattice};

  const auto status = detail::face_status(lattice, cls.sides);

  std::size_t crossing_edges = 0;
  for (auto s : status[1]) crossing_edges += (s == detail::kCrossing);
  Eigen::MatrixXd new_vertices(lattice.ambient_dim(), static_cast<Eigen::Index>(crossing_edges));
  Eigen::Index col = 0;
  for (FaceId e = 0; e < status[1].size(); ++e) {
    if (status[1][e] != detail::kCrossing) continue;
    auto ends = lattice.children(1, e);
    FaceId pos = ends[0];
    FaceId neg = ends[1];
    if (cls.sides[pos] != Side::Positive) std::swap(pos, neg);
    const double p = cls.values[pos];
    const double q = cls.values[neg];
    const double t = p / (p - q);
    new_vertices.col(col++) =
        lattice.vertices().col(pos) + t * (lattice.vertices().col(neg) - lattice.vertices().col(pos));
  }

  return Divided{detail::build_side(lattice, status, detail::kPositiveBit, new_vertices),
                 detail::build_side(lattice, status, detail::kNegativeBit, new_vertices)};
}

inline SplitResult split(const FaceLattice& lattice, const Hyperplane& h, double eps) {
  return split(lattice, classify_vertices(lattice, h, eps));
}

/// Tolerance a new vertex must meet on the hyperplane.
inline double new_vertex_tolerance(const FaceLattice& lattice, const Hyperplane& h, double eps) {
  const double max_norm = lattice.vertices().colwise().norm().maxCoeff();
  return eps * (1.0 + h.normal.norm() * max_norm);
}

// ---------------------------------------------------------------------------
// Geometry helpers

/// Image of every vertex under x -> M x + d; combinatorics unchanged.
inline FaceLattice affine_map_vertices(const FaceLattice& lattice, const Eigen::MatrixXd& M,
                                       const Eigen::VectorXd& d) {
  detail::require_dim(static_cast<std::size_t>(M.cols()), lattice.ambient_dim(),
                      "affine_map_vertices matrix columns");
  detail::require_dim(static_cast<std::size_t>(d.size()), static_cast<std::size_t>(M.rows()),
                      "affine_map_vertices shift");
  Eigen::MatrixXd image = M * lattice.vertices();
  image.colwise() += d;
  return lattice.with_vertices(std::move(image));
}

/// Whether x is a convex combination of the vertices, up to `tol` total
/// residual.
inline bool contains_point(const FaceLattice& lattice, const Eigen::VectorXd& x, double tol) {
  detail::require_dim(static_cast<std::size_t>(x.size()), lattice.ambient_dim(), "point");
  const auto n = static_cast<Eigen::Index>(lattice.ambient_dim());
  const auto v = static_cast<Eigen::Index>(lattice.vertex_count());
  const Eigen::MatrixXd& V = lattice.vertices();
  // Cheap reject on the bounding box.
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x(i) < V.row(i).minCoeff() - tol || x(i) > V.row(i).maxCoeff() + tol) return false;
  }
  Eigen::MatrixXd A(n + 1, v);
  A.topRows(n) = V;
  A.row(n).setOnes();
  Eigen::VectorXd b(n + 1);
  b << x, 1.0;
  return lp::feasibility_residual(A, b) <= tol;
}

/// Checks every structural invariant; returns the first violation found.
inline std::optional<std::string> find_violation(const FaceLattice& lattice) {
  const std::size_t d = lattice.dim();
  if (lattice.face_count(d) != 1) return "top level must hold exactly one face";
  for (std::size_t k = 1; k <= d; ++k) {
    for (FaceId f = 0; f < lattice.face_count(k); ++f) {
      auto ch = lattice.children(k, f);
      if (k == 1 && ch.size() != 2) {
        return "edge " + std::to_string(f) + " has " + std::to_string(ch.size()) + " vertices";
      }
      if (ch.size() < k + 1) return "face at level " + std::to_string(k) + " has too few children";
      for (FaceId c : ch) {
        if (c >= lattice.face_count(k - 1)) return "child id out of range";
      }
      std::vector<FaceId> sorted(ch.begin(), ch.end());
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        return "duplicate child link at level " + std::to_string(k);
      }
      if (lattice.face_vertices(k, f).size() < k + 1) {
        return "face at level " + std::to_string(k) + " spans fewer than k+1 vertices";
      }
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    for (FaceId f = 0; f < lattice.face_count(k); ++f) {
      if (lattice.parents(k, f).empty()) {
        return "face " + std::to_string(f) + " at level " + std::to_string(k) + " has no parent";
      }
    }
  }
  // Diamond property: any k-face below a (k+2)-face is joined to it through
  // exactly two (k+1)-faces.
  for (std::size_t k = 2; k <= d; ++k) {
    for (FaceId g = 0; g < lattice.face_count(k); ++g) {
      std::vector<FaceId> below;
      for (FaceId c : lattice.children(k, g)) {
        auto gc = lattice.children(k - 1, c);
        below.insert(below.end(), gc.begin(), gc.end());
      }
      std::sort(below.begin(), below.end());
      for (std::size_t i = 0; i < below.size();) {
        std::size_t j = i;
        while (j < below.size() && below[j] == below[i]) ++j;
        if (j - i != 2) {
          return "diamond property fails between level " + std::to_string(k - 2) + " face " +
                 std::to_string(below[i]) + " and level " + std::to_string(k) + " face " +
                 std::to_string(g);
        }
        i = j;
      }
    }
  }
  if (d > 0 && lattice.face_vertices(d, 0).size() != lattice.vertex_count()) {
    return "top face does not contain every vertex";
  }
  return std::nullopt;
}

}  // namespace lattice_reach
