// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <vector>

namespace pilotplan {

/// 2-D point or displacement in meters.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Integer cell coordinate in the oblique basis e1=(1,0), e2=(1/2, sqrt(3)/2),
/// both scaled by the cell spacing. Coordinates live modulo the torus side.
struct AxialCoord {
  int a = 0;
  int b = 0;
  bool operator==(const AxialCoord&) const = default;
};

/// One node of the recursive 3-way partition: `label` indexes the 3^depth
/// cosets at that depth. Labels are hierarchical: the depth-(d-1) label is
/// label / 3.
struct CosetId {
  int depth = 0;
  int label = 0;
  bool operator==(const CosetId&) const = default;
};

/// Wrap-around hexagonal cell grid with 3^m cells on a rhombic torus of side
/// 3^(m/2), plus precomputed coset labels for every partition depth.
///
/// The index-3 sublattice {(a,b) : (a-b) = 0 mod 3} is a sqrt(3)-scaled,
/// 30-degree-rotated copy of the full lattice (basis {(1,1),(2,-1)}), so the
/// partition recurses and the nearest co-coset spacing grows by sqrt(3) per
/// depth. Only even m keeps the coset chain compatible with the torus wrap.
///
/// Immutable after construction; safe for concurrent reads.
class TorusLattice {
 public:
  /// m must be even and in [2,8]; cell_radius_m is center-to-vertex.
  TorusLattice(int exponent, double cell_radius_m);

  int exponent() const { return exponent_; }
  int side() const { return side_; }
  int cell_count() const { return static_cast<int>(cells_.size()); }
  /// Deepest partition with multi-cell cosets; leaves below it are single
  /// cells and are disallowed.
  int max_depth() const { return exponent_ - 1; }

  double cell_radius_m() const { return cell_radius_m_; }
  /// Center-to-center distance of adjacent cells, sqrt(3) * cell_radius_m.
  double cell_spacing_m() const { return spacing_m_; }

  const std::vector<AxialCoord>& cells() const { return cells_; }
  AxialCoord cell(int index) const { return cells_[index]; }
  int cell_index(AxialCoord c) const;
  Vec2 center(int index) const;

  /// Coset of `cell_index` at `depth` in [0, max_depth()]. Depth 0 is the
  /// whole network (label 0); each further depth refines 3-way.
  CosetId coset_id(int cell_index, int depth) const;

  /// All cells sharing the depth-`depth` coset of `cell_index`, including the
  /// cell itself; sorted by index; size cell_count() * 3^-depth.
  std::vector<int> copilot_cells(int cell_index, int depth) const;

  std::vector<int> cells_in_coset(CosetId id) const;

  /// Co-pilot cells of `cell_index` at the minimum center-to-center torus
  /// distance (the cells whose users dominate the interference); excludes the
  /// cell itself. Six cells at depths below max_depth(), two at max_depth().
  std::vector<int> nearest_copilot_cells(int cell_index, int depth) const;

  /// Minimum Euclidean distance between p and q over the 9 torus wrap images.
  double torus_distance(Vec2 p, Vec2 q) const;

  /// Nearest center-to-center distance between distinct cells of one depth-d
  /// coset: sqrt(3)^d * cell_spacing_m.
  double min_copilot_spacing(int depth) const;

  /// Largest possible torus_distance between any two points (the covering
  /// radius of the wrap lattice): side * spacing / sqrt(3).
  double torus_diameter() const;

 private:
  int exponent_ = 0;
  int side_ = 0;
  double cell_radius_m_ = 0.0;
  double spacing_m_ = 0.0;
  std::vector<AxialCoord> cells_;
  // labels_[cell][d] = hierarchical label at depth d+1, d in [0, m-2]
  std::vector<std::vector<int>> labels_;
  // cells per coset, indexed [depth-1][label]
  std::vector<std::vector<std::vector<int>>> coset_members_;
};

inline TorusLattice build_lattice(int exponent, double cell_radius_m) {
  return TorusLattice(exponent, cell_radius_m);
}

/// CSV summary: cell_index,a,b,label_d1,...,label_d{m-1}
void write_lattice_csv(const TorusLattice& lattice, std::ostream& out);

}  // namespace pilotplan
