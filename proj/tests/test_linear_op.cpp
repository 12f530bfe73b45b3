#include <gtest/gtest.h>

#include "mrca/formation.hpp"
#include "mrca/linear_op.hpp"
#include "support.hpp"

using namespace mrca;
using mrca::test::dense_adjoint;
using mrca::test::dense_forward;
using mrca::test::largest_singular_value;
using mrca::test::matrix_op;

namespace {

LinearOp random_matrix_op(std::size_t m, std::size_t n, std::uint64_t seed)
{
  Rng rng(seed);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = rng.normal();
  return matrix_op(a);
}

/// Correct forward, adjoint with the sign flipped.
LinearOp sign_flipped(const LinearOp& op)
{
  auto fwd = [op](std::span<const double> x, std::span<double> y) { op.apply_into(x, y); };
  auto adj = [op](std::span<const double> y, std::span<double> x) {
    op.adjoint_into(y, x);
    for (auto& v : x) v = -v;
  };
  return LinearOp("flipped", op.input(), op.output(), fwd, adj, op.norm_bound());
}

} // namespace

TEST(Compose, IdentityIsNeutral)
{
  const auto a = random_matrix_op(5, 4, 1);
  const auto ia = compose(identity_op(a.output()), a);
  const auto ai = compose(a, identity_op(a.input()));
  Rng rng(2);
  const auto x = rng.normal_vector(4);
  EXPECT_EQ(ia.apply(x), a.apply(x));
  EXPECT_EQ(ai.apply(x), a.apply(x));
}

TEST(Compose, NormBoundIsProduct)
{
  const Domain d = Shape{3, 1, 1, 1};
  EXPECT_DOUBLE_EQ(compose(scaling_op(d, 2.0), scaling_op(d, 3.0)).norm_bound(), 6.0);
}

TEST(Compose, DenseMatrixIsProductAndAdjointIsTranspose)
{
  const auto a = random_matrix_op(6, 4, 3);
  const auto b = random_matrix_op(3, 6, 4);
  const auto ba = compose(b, a);
  const Eigen::MatrixXd expect = dense_forward(b) * dense_forward(a);
  EXPECT_LT((dense_forward(ba) - expect).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((dense_adjoint(ba) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Compose, ShapeMismatchThrows)
{
  EXPECT_THROW(compose(random_matrix_op(2, 3, 1), random_matrix_op(4, 2, 2)),
               std::invalid_argument);
}

TEST(Compose, AssociativeOnApply)
{
  const auto a = random_matrix_op(5, 4, 5), b = random_matrix_op(6, 5, 6), c = random_matrix_op(2, 6, 7);
  Rng rng(8);
  const auto x = rng.normal_vector(4);
  const auto l = compose(c, compose(b, a)).apply(x);
  const auto r = compose(compose(c, b), a).apply(x);
  for (std::size_t i = 0; i < l.size(); ++i) EXPECT_NEAR(l[i], r[i], 1e-12);
}

TEST(Compose, SumOfMaskedChannelsPassesDotTest)
{
  Rng rng(10);
  const Shape s{5, 6, 3, 1};
  const Mask h(5, 6, 3, rng.uniform_vector(s.size()));
  const auto op = compose(sum_channels(s), mask_apply(h));
  EXPECT_LT(adjoint_dot_test(op, 20, 1), 1e-10);
}

TEST(Stack, AdjointOfIdentityAndZero)
{
  const Domain d = Shape{4, 1, 1, 1};
  const auto op = stack(identity_op(d), zero_op(d, d));
  const std::vector<double> y{1.0, 2.0, 3.0, 4.0, 0.0, 0.0, 0.0, 0.0};
  EXPECT_EQ(op.adjoint(y), std::vector<double>(y.begin(), y.begin() + 4));
  EXPECT_EQ(op.output().part_count(), 2u);
}

TEST(Stack, TwoIdentitiesHaveBoundSqrt2)
{
  const Domain d = Shape{3, 1, 1, 1};
  const auto op = stack(identity_op(d), identity_op(d));
  EXPECT_DOUBLE_EQ(op.norm_bound(), std::sqrt(2.0));
  EXPECT_NEAR(largest_singular_value(dense_forward(op)), std::sqrt(2.0), 1e-12);
}

TEST(Stack, SpectralAndConvolutionPassDotTest)
{
  Rng rng(11);
  const std::size_t rows = 6, cols = 5, nk = 3;
  const SpectralWeights w(1, nk, rng.uniform_vector(nk));
  const auto bank = BlurBank::uniform(gaussian_kernel(1.0, 5), nk);
  const auto op = stack(spectral_degrade(w, rows, cols), spatial_convolve(bank, rows, cols));
  EXPECT_LT(adjoint_dot_test(op, 20, 2), 1e-10);
  EXPECT_THROW(stack(identity_op(Shape{2, 1, 1, 1}), identity_op(Shape{3, 1, 1, 1})),
               std::invalid_argument);
}

TEST(Add, DenseIsSumAndBoundIsTriangle)
{
  const auto a = random_matrix_op(4, 3, 12), b = random_matrix_op(4, 3, 13);
  const auto s = add(a, b);
  EXPECT_LT((dense_forward(s) - dense_forward(a) - dense_forward(b)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(s.norm_bound(), a.norm_bound() + b.norm_bound());
  EXPECT_LT(adjoint_dot_test(s), 1e-10);
}

TEST(Linearity, RandomTriples)
{
  const auto op = compose(random_matrix_op(7, 5, 14), random_matrix_op(5, 6, 15));
  Rng rng(16);
  for (int t = 0; t < 10; ++t) {
    const auto u = rng.normal_vector(6), v = rng.normal_vector(6);
    const double alpha = rng.normal(), beta = rng.normal();
    std::vector<double> mix(6);
    for (std::size_t i = 0; i < 6; ++i) mix[i] = alpha * u[i] + beta * v[i];
    const auto lhs = op.apply(mix);
    const auto au = op.apply(u), av = op.apply(v);
    for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_NEAR(lhs[i], alpha * au[i] + beta * av[i], 1e-12);
  }
}

TEST(AdjointDotTest, IdentityIsExact)
{
  EXPECT_EQ(adjoint_dot_test(identity_op(Shape{10, 1, 1, 1})), 0.0);
}

TEST(AdjointDotTest, SignFlipIsOrderOne)
{
  const auto op = random_matrix_op(30, 20, 17);
  EXPECT_LT(adjoint_dot_test(op), 1e-10);
  EXPECT_GT(adjoint_dot_test(sign_flipped(op)), 0.1);
  EXPECT_GT(adjoint_dot_test(sign_flipped(identity_op(Shape{64, 1, 1, 1}))), 0.1);
}

TEST(AdjointDotTest, DeterministicForSeed)
{
  const auto op = random_matrix_op(9, 9, 18);
  EXPECT_EQ(adjoint_dot_test(op, 5, 3), adjoint_dot_test(op, 5, 3));
  EXPECT_THROW(adjoint_dot_test(op, 0), std::invalid_argument);
}

TEST(PowerIteration, ScalingByThree)
{
  EXPECT_NEAR(power_iteration_norm(scaling_op(Shape{16, 1, 1, 1}, 3.0), 20), 3.0, 1e-9);
}

TEST(PowerIteration, DenseMatrixMatchesSvdOracle)
{
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto op = random_matrix_op(8, 8, 100 + seed);
    const double exact = largest_singular_value(dense_forward(op));
    const auto res = power_iteration(op, 500, seed);
    EXPECT_LE(res.estimate, exact * (1.0 + 1e-12));
    EXPECT_NEAR(res.estimate, exact, 1e-6 * exact);
    for (std::size_t q = 1; q < res.history.size(); ++q) EXPECT_GE(res.history[q], res.history[q - 1]);
  }
}

TEST(PowerIteration, ZeroOperator)
{
  const Domain d = Shape{4, 1, 1, 1};
  EXPECT_EQ(power_iteration_norm(zero_op(d, d), 10), 0.0);
  EXPECT_THROW(power_iteration(zero_op(d, d), 0), std::invalid_argument);
}

TEST(LinearOp, SizeChecksAndBoundValidation)
{
  const auto op = random_matrix_op(3, 2, 19);
  EXPECT_THROW(op.apply(std::vector<double>(3)), std::invalid_argument);
  EXPECT_THROW(op.adjoint(std::vector<double>(2)), std::invalid_argument);
  EXPECT_THROW(op.with_norm_bound(-1.0), std::invalid_argument);
  EXPECT_THROW(op.with_norm_bound(INFINITY), std::invalid_argument);
}
