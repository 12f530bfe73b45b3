#pragma once

// Test-only helpers: dense materialization of operators and random inputs.

#include <Eigen/Dense>
#include <vector>

#include "mrca/linear_op.hpp"
#include "mrca/random.hpp"

namespace mrca::test {

/// Column c of the matrix is op(e_c).
inline Eigen::MatrixXd dense_forward(const LinearOp& op)
{
  const auto n = op.input().size(), m = op.output().size();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  std::vector<double> e(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    e[c] = 1.0;
    const auto col = op.apply(e);
    e[c] = 0.0;
    for (std::size_t r = 0; r < m; ++r)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col[r];
  }
  return a;
}

/// Row r of the matrix is op*(e_r)^T.
inline Eigen::MatrixXd dense_adjoint(const LinearOp& op)
{
  const auto n = op.input().size(), m = op.output().size();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  std::vector<double> e(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    e[r] = 1.0;
    const auto row = op.adjoint(e);
    e[r] = 0.0;
    for (std::size_t c = 0; c < n; ++c)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return a;
}

inline double largest_singular_value(const Eigen::MatrixXd& a)
{
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

/// Operator from a dense matrix acting on flat buffers.
inline LinearOp matrix_op(const Eigen::MatrixXd& a, const std::string& name = "matrix")
{
  const Shape in{static_cast<std::size_t>(a.cols()), 1, 1, 1};
  const Shape out{static_cast<std::size_t>(a.rows()), 1, 1, 1};
  auto fwd = [a](std::span<const double> x, std::span<double> y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())) = a * xv;
  };
  auto adj = [a](std::span<const double> y, std::span<double> x) {
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) = a.transpose() * yv;
  };
  return LinearOp(name, in, out, fwd, adj, a.norm());  // Frobenius >= spectral
}

inline Eigen::VectorXd as_vector(std::span<const double> v)
{
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

} // namespace mrca::test
