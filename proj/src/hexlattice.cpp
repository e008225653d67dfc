// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#include "pilotplan/hexlattice.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace pilotplan {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

int pow3(int e) {
  int v = 1;
  while (e-- > 0) v *= 3;
  return v;
}

// Label chain for depths 1..m-1. At each level the coset index is
// (x - y) mod 3; the representative is shifted back onto the sublattice and
// re-expressed in the sublattice basis {(1,1),(2,-1)}. Both divisions below
// are exact after the shift.
std::vector<int> label_chain(int a, int b, int levels) {
  std::vector<int> out;
  out.reserve(levels);
  long long x = a, y = b;
  for (int i = 0; i < levels; ++i) {
    long long c = ((x - y) % 3 + 3) % 3;
    out.push_back(static_cast<int>(c));
    x -= c;
    const long long nx = (x + 2 * y) / 3;
    const long long ny = (x - y) / 3;
    x = nx;
    y = ny;
  }
  return out;
}

}  // namespace

TorusLattice::TorusLattice(int exponent, double cell_radius_m)
    : exponent_(exponent), cell_radius_m_(cell_radius_m) {
  if (exponent < 2 || exponent > 8 || exponent % 2 != 0) {
    throw std::invalid_argument(
        "lattice exponent must be even and in [2,8]; the torus wrap does not "
        "preserve coset labels otherwise");
  }
  if (!(cell_radius_m > 0.0)) {
    throw std::invalid_argument("cell radius must be positive");
  }
  side_ = pow3(exponent / 2);
  spacing_m_ = kSqrt3 * cell_radius_m;

  const int n = side_ * side_;
  cells_.reserve(n);
  labels_.reserve(n);
  for (int b = 0; b < side_; ++b) {
    for (int a = 0; a < side_; ++a) {
      cells_.push_back({a, b});
      const auto chain = label_chain(a, b, exponent_ - 1);
      std::vector<int> hier(chain.size());
      int acc = 0;
      for (size_t d = 0; d < chain.size(); ++d) {
        acc = acc * 3 + chain[d];
        hier[d] = acc;
      }
      labels_.push_back(std::move(hier));
    }
  }

  coset_members_.resize(exponent_ - 1);
  for (int d = 1; d <= exponent_ - 1; ++d) {
    coset_members_[d - 1].resize(pow3(d));
  }
  for (int i = 0; i < n; ++i) {
    for (int d = 1; d <= exponent_ - 1; ++d) {
      coset_members_[d - 1][labels_[i][d - 1]].push_back(i);
    }
  }
}

int TorusLattice::cell_index(AxialCoord c) const {
  const int a = ((c.a % side_) + side_) % side_;
  const int b = ((c.b % side_) + side_) % side_;
  return b * side_ + a;
}

Vec2 TorusLattice::center(int index) const {
  const AxialCoord c = cells_[index];
  return {spacing_m_ * (c.a + 0.5 * c.b), spacing_m_ * c.b * kSqrt3 / 2.0};
}

CosetId TorusLattice::coset_id(int cell_index, int depth) const {
  if (cell_index < 0 || cell_index >= cell_count()) {
    throw std::invalid_argument("cell index out of range");
  }
  if (depth < 0 || depth > max_depth()) {
    throw std::invalid_argument(
        "coset depth out of range: single-cell cosets are disallowed");
  }
  if (depth == 0) return {0, 0};
  return {depth, labels_[cell_index][depth - 1]};
}

std::vector<int> TorusLattice::copilot_cells(int cell_index, int depth) const {
  return cells_in_coset(coset_id(cell_index, depth));
}

std::vector<int> TorusLattice::cells_in_coset(CosetId id) const {
  if (id.depth == 0) {
    std::vector<int> all(cell_count());
    for (int i = 0; i < cell_count(); ++i) all[i] = i;
    return all;
  }
  if (id.depth < 1 || id.depth > max_depth() || id.label < 0 ||
      id.label >= pow3(id.depth)) {
    throw std::invalid_argument("invalid coset id");
  }
  return coset_members_[id.depth - 1][id.label];
}

std::vector<int> TorusLattice::nearest_copilot_cells(int cell_index,
                                                     int depth) const {
  const Vec2 ref = center(cell_index);
  double best = 0.0;
  bool first = true;
  std::vector<int> members = copilot_cells(cell_index, depth);
  std::vector<double> dist(members.size());
  for (size_t i = 0; i < members.size(); ++i) {
    if (members[i] == cell_index) {
      dist[i] = -1.0;
      continue;
    }
    dist[i] = torus_distance(ref, center(members[i]));
    if (first || dist[i] < best) {
      best = dist[i];
      first = false;
    }
  }
  std::vector<int> out;
  for (size_t i = 0; i < members.size(); ++i) {
    if (dist[i] >= 0.0 && dist[i] <= best * (1.0 + 1e-9)) {
      out.push_back(members[i]);
    }
  }
  return out;
}

double TorusLattice::torus_distance(Vec2 p, Vec2 q) const {
  // Wrap translations are integer combinations of side*e1 and side*e2.
  const double ex = side_ * spacing_m_;
  const double fy = side_ * spacing_m_ * kSqrt3 / 2.0;
  const double fx = side_ * spacing_m_ * 0.5;
  const double dx0 = p.x - q.x;
  const double dy0 = p.y - q.y;
  double best = 0.0;
  bool first = true;
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      const double dx = dx0 + i * ex + j * fx;
      const double dy = dy0 + j * fy;
      const double d2 = dx * dx + dy * dy;
      if (first || d2 < best) {
        best = d2;
        first = false;
      }
    }
  }
  return std::sqrt(best);
}

double TorusLattice::min_copilot_spacing(int depth) const {
  if (depth < 0 || depth > max_depth()) {
    throw std::invalid_argument("coset depth out of range");
  }
  return std::pow(kSqrt3, depth) * spacing_m_;
}

double TorusLattice::torus_diameter() const {
  return side_ * spacing_m_ / kSqrt3;
}

void write_lattice_csv(const TorusLattice& lattice, std::ostream& out) {
  out << "cell_index,a,b";
  for (int d = 1; d <= lattice.max_depth(); ++d) out << ",label_d" << d;
  out << "\n";
  for (int i = 0; i < lattice.cell_count(); ++i) {
    const AxialCoord c = lattice.cell(i);
    out << i << ',' << c.a << ',' << c.b;
    for (int d = 1; d <= lattice.max_depth(); ++d) {
      out << ',' << lattice.coset_id(i, d).label;
    }
    out << "\n";
  }
}

}  // namespace pilotplan
