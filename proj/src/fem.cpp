#include "tileplate/fem.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>

#include "tileplate/quadrature.hpp"

namespace tileplate {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) { g_threads = std::max(1, n); }
int thread_count() { return g_threads.load(); }

void parallel_chunks(int n, int chunks, const std::function<void(int, int, int)>& fn) {
  chunks = std::max(1, std::min(chunks, std::max(n, 1)));
  if (chunks == 1) {
    fn(0, 0, n);
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
#pragma omp parallel for schedule(static, 1) num_threads(chunks)
  for (int c = 0; c < chunks; ++c) {
    const int b = static_cast<int>(static_cast<long long>(n) * c / chunks);
    const int e = static_cast<int>(static_cast<long long>(n) * (c + 1) / chunks);
    try {
      fn(c, b, e);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------- kernels

std::array<double, 8> hex8_shape(const std::array<double, 3>& xi) {
  std::array<double, 8> N{};
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a)
        N[a + 2 * b + 4 * c] = (a ? xi[0] : 1 - xi[0]) * (b ? xi[1] : 1 - xi[1]) * (c ? xi[2] : 1 - xi[2]);
  return N;
}

namespace {

// dN_a/dx_j for the box.
Eigen::Matrix<double, 8, 3> hex8_dshape(const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                                        const std::array<double, 3>& xi) {
  Eigen::Matrix<double, 8, 3> d;
  const double h[3] = {hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]};
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a) {
        const double fx = a ? xi[0] : 1 - xi[0], gx = a ? 1.0 : -1.0;
        const double fy = b ? xi[1] : 1 - xi[1], gy = b ? 1.0 : -1.0;
        const double fz = c ? xi[2] : 1 - xi[2], gz = c ? 1.0 : -1.0;
        const int n = a + 2 * b + 4 * c;
        d(n, 0) = gx * fy * fz / h[0];
        d(n, 1) = fx * gy * fz / h[1];
        d(n, 2) = fx * fy * gz / h[2];
      }
  return d;
}

// Mandel strain rows for one node with gradient g = (d1, d2, d3).
template <class B>
void strain_rows(B& Bm, int col, const double g[3]) {
  const double r = std::sqrt(0.5);
  Bm(0, col + 0) = g[0];
  Bm(1, col + 1) = g[1];
  Bm(2, col + 2) = g[2];
  Bm(3, col + 1) = r * g[2];
  Bm(3, col + 2) = r * g[1];
  Bm(4, col + 0) = r * g[2];
  Bm(4, col + 2) = r * g[0];
  Bm(5, col + 0) = r * g[1];
  Bm(5, col + 1) = r * g[0];
}

}  // namespace

Eigen::Matrix<double, 6, 24> hex8_strain(const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                                         const std::array<double, 3>& xi) {
  const auto d = hex8_dshape(lo, hi, xi);
  Eigen::Matrix<double, 6, 24> B = Eigen::Matrix<double, 6, 24>::Zero();
  for (int n = 0; n < 8; ++n) {
    const double g[3] = {d(n, 0), d(n, 1), d(n, 2)};
    strain_rows(B, 3 * n, g);
  }
  return B;
}

Eigen::Matrix3d hex8_gradient(const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                              const std::array<double, 3>& xi, const Eigen::Matrix<double, 8, 3>& v) {
  const auto d = hex8_dshape(lo, hi, xi);
  return v.transpose() * d;
}

Eigen::Matrix<double, 24, 24> hex8_stiffness(const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                                             const Hooke& A) {
  const Gauss1D g = gauss_rule(2);
  const double vol = (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]);
  Eigen::Matrix<double, 24, 24> K = Eigen::Matrix<double, 24, 24>::Zero();
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a) {
        const auto B = hex8_strain(lo, hi, {g.x[a], g.x[b], g.x[c]});
        K.noalias() += (g.w[a] * g.w[b] * g.w[c] * vol) * (B.transpose() * A.voigt * B);
      }
  return 0.5 * (K + K.transpose());
}

Eigen::Matrix<double, 6, 12> cell_quad_strain(int alpha, double h, double sc, double s3) {
  Eigen::Matrix<double, 6, 12> B = Eigen::Matrix<double, 6, 12>::Zero();
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i) {
      const double fc = i ? sc : 1 - sc, gc = i ? 1.0 : -1.0;
      const double f3 = k ? s3 : 1 - s3, g3 = k ? 1.0 : -1.0;
      const double dc = gc * f3 / h, d3 = fc * g3 / h;
      double g[3] = {0, 0, d3};
      g[alpha == 1 ? 1 : 0] = dc;
      strain_rows(B, 3 * (i + 2 * k), g);
    }
  return B;
}

HermiteBasis hermite_basis(double t, double h) {
  HermiteBasis b;
  const double t2 = t * t, t3 = t2 * t;
  b.N << 1 - 3 * t2 + 2 * t3, h * (t - 2 * t2 + t3), 3 * t2 - 2 * t3, h * (t3 - t2);
  b.dN << (6 * t2 - 6 * t) / h, 1 - 4 * t + 3 * t2, (6 * t - 6 * t2) / h, 3 * t2 - 2 * t;
  b.d2N << (12 * t - 6) / (h * h), (6 * t - 4) / h, (6 - 12 * t) / (h * h), (6 * t - 2) / h;
  return b;
}

// -------------------------------------------------------------- assembly

SpMat compress_triplets(int n_rows, int n_cols, std::vector<Triplet> t) {
  std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
  });
  std::vector<Triplet> merged;
  merged.reserve(t.size() / 4 + 1);
  for (const Triplet& x : t) {
    if (!merged.empty() && merged.back().row() == x.row() && merged.back().col() == x.col())
      merged.back() = Triplet(x.row(), x.col(), merged.back().value() + x.value());
    else
      merged.push_back(x);
  }
  SpMat A(n_rows, n_cols);
  A.setFromTriplets(merged.begin(), merged.end());
  A.makeCompressed();
  return A;
}

SpMat assemble_matrix(int n, int n_elements, const ElementKernel& kernel) {
  const int chunks = std::max(1, std::min(thread_count(), n_elements));
  std::vector<std::vector<Triplet>> buffers(chunks);
  parallel_chunks(n_elements, chunks, [&](int c, int b, int e) {
    for (int el = b; el < e; ++el) kernel(el, buffers[c]);
  });
  std::size_t total = 0;
  for (const auto& buf : buffers) total += buf.size();
  std::vector<Triplet> all;
  all.reserve(total);
  for (auto& buf : buffers) all.insert(all.end(), buf.begin(), buf.end());
  return compress_triplets(n, n, std::move(all));
}

double max_asymmetry(const SpMat& A) {
  SpMat At = A.transpose();
  SpMat D = A - At;
  double m = 0.0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (SpMat::InnerIterator it(D, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

// -------------------------------------------------------------- constraints

Eigen::Matrix<double, 6, 1> Reduction::link_masters(int l, const Vec& x) const {
  const Eigen::MatrixXd& Z = link_basis[l];
  if (Z.cols() == 0) return Eigen::Matrix<double, 6, 1>::Zero();
  return Z * x.segment(link_offset[l], Z.cols());
}

namespace {

// u = a + R x xbar as a 3 x 6 map acting on (a, R).
Eigen::Matrix<double, 3, 6> rigid_map(const Eigen::Vector3d& xb) {
  Eigen::Matrix<double, 3, 6> G;
  G << 1, 0, 0, 0, xb(2), -xb(1),
       0, 1, 0, -xb(2), 0, xb(0),
       0, 0, 1, xb(1), -xb(0), 0;
  return G;
}

}  // namespace

Reduction build_reduction(int full_dofs, const ConstraintSet& c,
                          const std::function<std::array<double, 3>(int)>& node_coord) {
  Reduction r;
  r.full_dofs = full_dofs;
  std::vector<char> pinned(full_dofs, 0);
  for (int d : c.dirichlet) {
    if (d < 0 || d >= full_dofs) throw ConstraintError("dirichlet dof out of range");
    pinned[d] = 1;
  }
  std::vector<int> slave_link(full_dofs, -1);
  for (int l = 0; l < static_cast<int>(c.rigid_links.size()); ++l)
    for (int n : c.rigid_links[l].nodes)
      for (int k = 0; k < 3; ++k) {
        const int d = 3 * n + k;
        if (d < 0 || d >= full_dofs) throw ConstraintError("rigid link node out of range");
        if (slave_link[d] >= 0 && slave_link[d] != l)
          throw ConstraintError("conflicting constraints: dof slaved by two rigid links");
        slave_link[d] = l;
      }

  std::vector<int> col(full_dofs, -1);
  int next = 0;
  for (int d = 0; d < full_dofs; ++d)
    if (!pinned[d] && slave_link[d] < 0) col[d] = next++;
  r.free_dofs = next;

  const int nl = static_cast<int>(c.rigid_links.size());
  r.link_offset.resize(nl);
  r.link_basis.resize(nl);
  for (int l = 0; l < nl; ++l) {
    const RigidLink& link = c.rigid_links[l];
    std::vector<Eigen::Matrix<double, 1, 6>> rows;
    for (int n : link.nodes) {
      const auto x = node_coord(n);
      const Eigen::Vector3d xb = Eigen::Vector3d(x[0], x[1], x[2]) - link.center;
      const auto G = rigid_map(xb);
      for (int k = 0; k < 3; ++k)
        if (pinned[3 * n + k]) rows.push_back(G.row(k));
    }
    if (rows.empty()) {
      r.link_basis[l] = Eigen::MatrixXd::Identity(6, 6);
    } else {
      Eigen::MatrixXd C(rows.size(), 6);
      for (std::size_t i = 0; i < rows.size(); ++i) C.row(i) = rows[i];
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
      const auto& s = svd.singularValues();
      const double tol = 1e-12 * std::max(1.0, s(0));
      int rank = 0;
      for (int i = 0; i < s.size(); ++i)
        if (s(i) > tol) ++rank;
      r.link_basis[l] = svd.matrixV().rightCols(6 - rank);
    }
    r.link_offset[l] = next;
    next += static_cast<int>(r.link_basis[l].cols());
  }
  r.reduced_dofs = next;

  std::vector<Triplet> t;
  for (int d = 0; d < full_dofs; ++d)
    if (col[d] >= 0) t.emplace_back(d, col[d], 1.0);
  for (int l = 0; l < nl; ++l) {
    const RigidLink& link = c.rigid_links[l];
    const Eigen::MatrixXd& Z = r.link_basis[l];
    if (Z.cols() == 0) continue;
    for (int n : link.nodes) {
      const auto x = node_coord(n);
      const Eigen::Vector3d xb = Eigen::Vector3d(x[0], x[1], x[2]) - link.center;
      const Eigen::Matrix<double, 3, Eigen::Dynamic> GZ = rigid_map(xb) * Z;
      for (int k = 0; k < 3; ++k) {
        if (pinned[3 * n + k]) continue;
        for (int j = 0; j < GZ.cols(); ++j)
          if (GZ(k, j) != 0.0) t.emplace_back(3 * n + k, r.link_offset[l] + j, GZ(k, j));
      }
    }
  }
  // Link nodes are listed once per link; duplicates within a link collapse here.
  std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
  });
  t.erase(std::unique(t.begin(), t.end(),
                      [](const Triplet& a, const Triplet& b) { return a.row() == b.row() && a.col() == b.col(); }),
          t.end());
  r.T.resize(full_dofs, r.reduced_dofs);
  r.T.setFromTriplets(t.begin(), t.end());
  r.T.makeCompressed();
  return r;
}

ReducedSystem apply_constraints(const SymmetricSparseSystem& sys, const ConstraintSet& c,
                                const std::function<std::array<double, 3>(int)>& node_coord) {
  ReducedSystem out;
  out.map = build_reduction(sys.dof_count(), c, node_coord);
  const SpMat& T = out.map.T;
  SpMat KT = sys.matrix * T;
  SpMat Kr = SpMat(T.transpose()) * KT;
  SpMat Krt = Kr.transpose();
  out.sys.matrix = 0.5 * (Kr + Krt);
  out.sys.matrix.makeCompressed();
  out.sys.rhs = T.transpose() * sys.rhs;
  return out;
}

}  // namespace tileplate
