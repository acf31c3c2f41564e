#include "crossdiff/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace crossdiff {

Grid::Grid(int dim, std::array<int, 2> extents, std::array<double, 2> lengths)
    : dim_(dim), extents_(extents), lengths_(lengths) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("grid dim must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    if (extents_[a] < 2) throw std::invalid_argument("grid extents must be >= 2");
    if (!(lengths_[a] > 0.0)) throw std::invalid_argument("grid lengths must be > 0");
  }
}

Grid Grid::line(int n, double length) { return Grid(1, {n, 1}, {length, 1.0}); }

Grid Grid::rectangle(int nx, int ny, double lx, double ly) {
  return Grid(2, {nx, ny}, {lx, ly});
}

double Grid::cell_volume() const {
  double v = spacing(0);
  if (dim_ == 2) v *= spacing(1);
  return v;
}

double Grid::volume() const {
  double v = lengths_[0];
  if (dim_ == 2) v *= lengths_[1];
  return v;
}

bool Grid::same_as(const Grid& other) const {
  return dim_ == other.dim_ && extents_ == other.extents_ &&
         lengths_ == other.lengths_;
}

static void check_size(const Grid& g, const Field& f, const char* what) {
  if (f.size() != g.cells())
    throw std::invalid_argument(std::string(what) + ": field size does not match grid");
}

Field neumann_laplacian(const Grid& g, const Field& f) {
  check_size(g, f, "neumann_laplacian");
  const int nx = g.extent(0);
  const int ny = g.dim() == 2 ? g.extent(1) : 1;
  const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
  Field out = Field::Zero(f.size());
  for (int iy = 0; iy < ny; ++iy) {
    const int row = iy * nx;
    for (int ix = 0; ix < nx; ++ix) {
      const int i = row + ix;
      const double left = ix > 0 ? f[i - 1] : f[i];       // mirror ghost
      const double right = ix < nx - 1 ? f[i + 1] : f[i];
      out[i] += (left - 2.0 * f[i] + right) * ihx2;
    }
  }
  if (g.dim() == 2) {
    const double ihy2 = 1.0 / (g.spacing(1) * g.spacing(1));
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const int i = iy * nx + ix;
        const double down = iy > 0 ? f[i - nx] : f[i];
        const double up = iy < ny - 1 ? f[i + nx] : f[i];
        out[i] += (down - 2.0 * f[i] + up) * ihy2;
      }
    }
  }
  return out;
}

double edge_sum(const Grid& g, const Field& f, const Field& h) {
  check_size(g, f, "edge_sum");
  check_size(g, h, "edge_sum");
  const int nx = g.extent(0);
  const int ny = g.dim() == 2 ? g.extent(1) : 1;
  const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
  double s = 0.0;
  for (int iy = 0; iy < ny; ++iy) {
    const int row = iy * nx;
    for (int ix = 0; ix + 1 < nx; ++ix) {
      const int i = row + ix;
      s += (f[i + 1] - f[i]) * (h[i + 1] - h[i]) * ihx2;
    }
  }
  if (g.dim() == 2) {
    const double ihy2 = 1.0 / (g.spacing(1) * g.spacing(1));
    for (int iy = 0; iy + 1 < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const int i = iy * nx + ix;
        s += (f[i + nx] - f[i]) * (h[i + nx] - h[i]) * ihy2;
      }
    }
  }
  return s * g.cell_volume();
}

double integrate(const Grid& g, const Field& f) {
  check_size(g, f, "integrate");
  return g.cell_volume() * f.sum();
}

double mean(const Grid& g, const Field& f) { return integrate(g, f) / g.volume(); }

double poincare_constant(const Grid& g) {
  double lambda1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim(); ++a) {
    const double h = g.spacing(a);
    const double lam = 2.0 / (h * h) * (1.0 - std::cos(M_PI / g.extent(a)));
    lambda1 = std::min(lambda1, lam);
  }
  return 1.0 / std::sqrt(lambda1);
}

Eigen::SparseMatrix<double> laplacian_matrix(const Grid& g) {
  const int nx = g.extent(0);
  const int ny = g.dim() == 2 ? g.extent(1) : 1;
  const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
  const double ihy2 =
      g.dim() == 2 ? 1.0 / (g.spacing(1) * g.spacing(1)) : 0.0;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(g.cells()) * 5);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int i = g.index(ix, iy);
      double diag = 0.0;
      if (ix > 0) { trip.emplace_back(i, i - 1, ihx2); diag -= ihx2; }
      if (ix < nx - 1) { trip.emplace_back(i, i + 1, ihx2); diag -= ihx2; }
      if (g.dim() == 2) {
        if (iy > 0) { trip.emplace_back(i, i - nx, ihy2); diag -= ihy2; }
        if (iy < ny - 1) { trip.emplace_back(i, i + nx, ihy2); diag -= ihy2; }
      }
      trip.emplace_back(i, i, diag);
    }
  }
  Eigen::SparseMatrix<double> lap(g.cells(), g.cells());
  lap.setFromTriplets(trip.begin(), trip.end());
  return lap;
}

double hminus1m_norm(const Grid& g, const Field& f, double tol, int max_iter) {
  check_size(g, f, "hminus1m_norm");
  Field b = f - f.mean();  // uniform cells: arithmetic mean == volume mean
  const double bnorm = std::sqrt(b.matrix().squaredNorm());
  if (bnorm == 0.0) return 0.0;
  if (max_iter <= 0) max_iter = 100 + 20 * g.cells();

  // CG on -lap(phi) = b restricted to the zero-mean subspace.
  Field phi = Field::Zero(g.cells());
  Field r = b;
  Field p = r;
  double rs = r.matrix().squaredNorm();
  const double target = tol * bnorm;
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(rs) <= target) { converged = true; break; }
    Field ap = -neumann_laplacian(g, p);
    const double pap = (p * ap).sum();
    if (!(pap > 0.0)) break;  // p drifted into the kernel
    const double alpha = rs / pap;
    phi += alpha * p;
    r -= alpha * ap;
    r -= r.mean();
    const double rs_new = r.matrix().squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  if (!converged && std::sqrt(rs) > target)
    throw std::runtime_error("hminus1m_norm: CG did not reach tolerance");
  phi -= phi.mean();
  return std::sqrt(std::max(0.0, edge_sum(g, phi, phi)));
}

ShiftedHelmholtz::ShiftedHelmholtz(const Grid& g, double shift, double tau)
    : shift_(shift) {
  if (!(shift > 0.0)) throw std::invalid_argument("ShiftedHelmholtz: shift must be > 0");
  if (!(tau >= 0.0)) throw std::invalid_argument("ShiftedHelmholtz: tau must be >= 0");
  Eigen::SparseMatrix<double> id(g.cells(), g.cells());
  id.setIdentity();
  op_ = shift * id - tau * laplacian_matrix(g);
  factor_.compute(op_);
  if (factor_.info() != Eigen::Success)
    throw std::runtime_error("ShiftedHelmholtz: factorization failed");
}

Field ShiftedHelmholtz::solve(const Field& rhs) const {
  Eigen::VectorXd w = factor_.solve(rhs.matrix());
  if (factor_.info() != Eigen::Success)
    throw std::runtime_error("ShiftedHelmholtz: solve failed");
  return w.array();
}

double ShiftedHelmholtz::residual_inf(const Field& rhs, const Field& w) const {
  return (op_ * w.matrix() - rhs.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace crossdiff
