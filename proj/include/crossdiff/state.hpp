#pragma once

#include <vector>

#include "crossdiff/grid.hpp"

namespace crossdiff {

/// The vector of species densities on a grid: one field per species.
struct SpeciesState {
  std::vector<Field> u;

  SpeciesState() = default;
  explicit SpeciesState(std::vector<Field> fields) : u(std::move(fields)) {}

  static SpeciesState constant(const Grid& g, const Eigen::VectorXd& values) {
    SpeciesState s;
    for (int i = 0; i < values.size(); ++i)
      s.u.push_back(Field::Constant(g.cells(), values[i]));
    return s;
  }

  int species() const { return static_cast<int>(u.size()); }

  Eigen::VectorXd cell(int c) const {
    Eigen::VectorXd v(species());
    for (int i = 0; i < species(); ++i) v[i] = u[i][c];
    return v;
  }

  void set_cell(int c, const Eigen::VectorXd& v) {
    for (int i = 0; i < species(); ++i) u[i][c] = v[i];
  }

  double min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (const Field& f : u) m = std::min(m, f.minCoeff());
    return m;
  }

  double max_abs() const {
    double m = 0.0;
    for (const Field& f : u) m = std::max(m, f.abs().maxCoeff());
    return m;
  }

  bool all_finite() const {
    for (const Field& f : u)
      if (!f.isFinite().all()) return false;
    return true;
  }

  double inf_distance(const SpeciesState& o) const {
    double m = 0.0;
    for (size_t i = 0; i < u.size(); ++i)
      m = std::max(m, (u[i] - o.u[i]).abs().maxCoeff());
    return m;
  }
};

}  // namespace crossdiff
