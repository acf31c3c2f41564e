#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <array>

namespace crossdiff {

using Field = Eigen::ArrayXd;

/// Uniform axis-aligned rectangle, cell-centered, homogeneous Neumann
/// boundaries realized by mirror ghost cells.
class Grid {
 public:
  static Grid line(int n, double length);
  static Grid rectangle(int nx, int ny, double lx, double ly);

  int dim() const { return dim_; }
  int extent(int axis) const { return extents_[axis]; }
  double length(int axis) const { return lengths_[axis]; }
  double spacing(int axis) const { return lengths_[axis] / extents_[axis]; }
  int cells() const { return extents_[0] * extents_[1]; }
  double cell_volume() const;
  double volume() const;

  int index(int ix, int iy = 0) const { return ix + extents_[0] * iy; }
  // coordinate of the cell center along one axis
  double center(int axis, int i) const { return (i + 0.5) * spacing(axis); }
  double center_x(int cell) const { return center(0, cell % extents_[0]); }
  double center_y(int cell) const {
    return dim_ == 2 ? center(1, cell / extents_[0]) : 0.0;
  }

  bool same_as(const Grid& other) const;

 private:
  Grid(int dim, std::array<int, 2> extents, std::array<double, 2> lengths);

  int dim_;
  std::array<int, 2> extents_;
  std::array<double, 2> lengths_;
};

// Second-difference Laplacian with mirrored ghost values at the boundary.
// Annihilates constants; symmetric negative semidefinite; the cell-volume
// weighted sum of the output vanishes identically.
Field neumann_laplacian(const Grid& g, const Field& f);

// Sum over interior edges of (df * dg) / h^2 * cell_volume.  Satisfies the
// summation-by-parts identity edge_sum(f,g) == -integrate(f * lap(g)).
double edge_sum(const Grid& g, const Field& f, const Field& h);

double integrate(const Grid& g, const Field& f);
double mean(const Grid& g, const Field& f);

// 1/sqrt(lambda_1) with lambda_1 the smallest nonzero eigenvalue of the
// Neumann Laplacian above; closed form on tensor grids.
double poincare_constant(const Grid& g);

// Norm of the zero-mean dual: solves -lap(phi) = f - <f> and returns
// sqrt(edge_sum(phi, phi)).  Throws on solver nonconvergence.
double hminus1m_norm(const Grid& g, const Field& f, double tol = 1e-12,
                     int max_iter = 0);

Eigen::SparseMatrix<double> laplacian_matrix(const Grid& g);

/// Factored (M*Id - tau*Lap); symmetric positive definite for M > 0.
class ShiftedHelmholtz {
 public:
  ShiftedHelmholtz(const Grid& g, double shift, double tau);

  Field solve(const Field& rhs) const;
  double residual_inf(const Field& rhs, const Field& w) const;
  double shift() const { return shift_; }

 private:
  double shift_;
  Eigen::SparseMatrix<double> op_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;
};

}  // namespace crossdiff
