#pragma once

// Linear operators with an exact adjoint and a certified operator-norm bound.
//
// A LinearOp is an immutable value (shared state), so copies are cheap and
// safe to share between threads. Operators only act on flat buffers; the
// Domain carried by each operator describes the array layout of those buffers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mrca/random.hpp"
#include "mrca/tensor.hpp"

namespace mrca {

class LinearOp
{
public:
  /// Writes the full output buffer from the input buffer.
  using Kernel = std::function<void(std::span<const double>, std::span<double>)>;

  LinearOp(std::string name, Domain input, Domain output, Kernel forward, Kernel adjoint,
           double norm_bound)
    : state_(std::make_shared<const State>(State{std::move(name), std::move(input),
                                                 std::move(output), std::move(forward),
                                                 std::move(adjoint), norm_bound}))
  {
    if (!(norm_bound >= 0.0) || !std::isfinite(norm_bound))
      throw std::invalid_argument("LinearOp " + state_->name + ": invalid norm bound");
  }

  const std::string& name() const noexcept { return state_->name; }
  const Domain& input() const noexcept { return state_->input; }
  const Domain& output() const noexcept { return state_->output; }
  double norm_bound() const noexcept { return state_->norm_bound; }

  void apply_into(std::span<const double> x, std::span<double> y) const
  {
    check(x.size(), input().size(), "apply input");
    check(y.size(), output().size(), "apply output");
    state_->forward(x, y);
  }

  void adjoint_into(std::span<const double> y, std::span<double> x) const
  {
    check(y.size(), output().size(), "adjoint input");
    check(x.size(), input().size(), "adjoint output");
    state_->adjoint(y, x);
  }

  std::vector<double> apply(std::span<const double> x) const
  {
    std::vector<double> y(output().size());
    apply_into(x, y);
    return y;
  }

  std::vector<double> adjoint(std::span<const double> y) const
  {
    std::vector<double> x(input().size());
    adjoint_into(y, x);
    return x;
  }

  /// Same maps, different certified bound (must still be an upper bound).
  LinearOp with_norm_bound(double bound, std::string name = {}) const
  {
    return LinearOp(name.empty() ? state_->name : std::move(name), input(), output(),
                    state_->forward, state_->adjoint, bound);
  }

private:
  struct State
  {
    std::string name;
    Domain input;
    Domain output;
    Kernel forward;
    Kernel adjoint;
    double norm_bound;
  };

  void check(std::size_t got, std::size_t want, const char* what) const
  {
    if (got != want)
      throw std::invalid_argument("LinearOp " + name() + ": " + what + " has " +
                                  std::to_string(got) + " values, expected " +
                                  std::to_string(want));
  }

  std::shared_ptr<const State> state_;
};

inline LinearOp identity_op(const Domain& d)
{
  auto copy = [](std::span<const double> in, std::span<double> out) {
    std::copy(in.begin(), in.end(), out.begin());
  };
  return LinearOp("identity", d, d, copy, copy, 1.0);
}

inline LinearOp scaling_op(const Domain& d, double factor)
{
  auto scale = [factor](std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = factor * in[i];
  };
  return LinearOp("scale(" + std::to_string(factor) + ")", d, d, scale, scale, std::abs(factor));
}

inline LinearOp zero_op(const Domain& in, const Domain& out)
{
  auto zero = [](std::span<const double>, std::span<double> o) {
    std::fill(o.begin(), o.end(), 0.0);
  };
  return LinearOp("zero", in, out, zero, zero, 0.0);
}

/// outer o inner. Adjoint applies the block adjoints in reverse order; the
/// bound is the product of the block bounds.
inline LinearOp compose(const LinearOp& outer, const LinearOp& inner)
{
  if (!(inner.output() == outer.input()))
    throw std::invalid_argument("compose: " + inner.name() + " outputs " + inner.output().str() +
                                " but " + outer.name() + " expects " + outer.input().str());
  auto fwd = [outer, inner](std::span<const double> x, std::span<double> y) {
    std::vector<double> mid(inner.output().size());
    inner.apply_into(x, mid);
    outer.apply_into(mid, y);
  };
  auto adj = [outer, inner](std::span<const double> y, std::span<double> x) {
    std::vector<double> mid(outer.input().size());
    outer.adjoint_into(y, mid);
    inner.adjoint_into(mid, x);
  };
  return LinearOp(outer.name() + "*" + inner.name(), inner.input(), outer.output(), fwd, adj,
                  outer.norm_bound() * inner.norm_bound());
}

/// Right-to-left composition of a chain: compose_all({C, B, A}) = C o B o A.
inline LinearOp compose_all(const std::vector<LinearOp>& chain)
{
  if (chain.empty()) throw std::invalid_argument("compose_all: empty chain");
  LinearOp acc = chain.back();
  for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) acc = compose(*it, acc);
  return acc;
}

/// [a; b]: concatenated outputs, adjoint sums the block adjoints,
/// bound sqrt(|a|^2 + |b|^2).
inline LinearOp stack(const LinearOp& a, const LinearOp& b)
{
  if (!(a.input() == b.input()))
    throw std::invalid_argument("stack: input domains differ (" + a.input().str() + " vs " +
                                b.input().str() + ")");
  const std::size_t na = a.output().size();
  auto fwd = [a, b, na](std::span<const double> x, std::span<double> y) {
    a.apply_into(x, y.subspan(0, na));
    b.apply_into(x, y.subspan(na));
  };
  auto adj = [a, b, na](std::span<const double> y, std::span<double> x) {
    a.adjoint_into(y.subspan(0, na), x);
    std::vector<double> tmp(x.size());
    b.adjoint_into(y.subspan(na), tmp);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += tmp[i];
  };
  return LinearOp("[" + a.name() + ";" + b.name() + "]", a.input(),
                  Domain::concat(a.output(), b.output()), fwd, adj,
                  std::hypot(a.norm_bound(), b.norm_bound()));
}

/// a + b on a common output (triangle inequality bound).
inline LinearOp add(const LinearOp& a, const LinearOp& b)
{
  if (!(a.input() == b.input()) || !(a.output() == b.output()))
    throw std::invalid_argument("add: domains differ (" + a.input().str() + "->" +
                                a.output().str() + " vs " + b.input().str() + "->" +
                                b.output().str() + ")");
  auto fwd = [a, b](std::span<const double> x, std::span<double> y) {
    a.apply_into(x, y);
    std::vector<double> tmp(y.size());
    b.apply_into(x, tmp);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += tmp[i];
  };
  auto adj = [a, b](std::span<const double> y, std::span<double> x) {
    a.adjoint_into(y, x);
    std::vector<double> tmp(x.size());
    b.adjoint_into(y, tmp);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += tmp[i];
  };
  return LinearOp("(" + a.name() + "+" + b.name() + ")", a.input(), a.output(), fwd, adj,
                  a.norm_bound() + b.norm_bound());
}

/// Max over trials of |<Ax, y> - <x, A*y>| / (|A x| |y| + |x| |A* y|) for
/// seeded Gaussian x, y. Zero for an exact adjoint up to rounding.
inline double adjoint_dot_test(const LinearOp& op, std::size_t trials = 20,
                               std::uint64_t seed = 0)
{
  if (trials == 0) throw std::invalid_argument("adjoint_dot_test: trials must be >= 1");
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    auto x = rng.normal_vector(op.input().size());
    auto y = rng.normal_vector(op.output().size());
    const double nx = norm2(x), ny = norm2(y);
    for (auto& v : x) v /= nx;
    for (auto& v : y) v /= ny;
    const auto ax = op.apply(x);
    // Tilt y towards A x so that <Ax, y> is O(|Ax||y|): a wrong adjoint then
    // shows up as an O(1) error instead of O(1/sqrt(n)).
    if (const double nax = norm2(ax); nax > 0.0)
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += ax[i] / nax;
    const auto aty = op.adjoint(y);
    const double lhs = dot(ax, y);
    const double rhs = dot(x, aty);
    const double scale = norm2(ax) * norm2(y) + norm2(x) * norm2(aty);
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

struct PowerIterationResult
{
  double estimate = 0.0;
  std::vector<double> history;  // non-decreasing
};

/// Largest singular value of op by power iteration on A*A from a seeded
/// Gaussian start. Each estimate sqrt(|A*A x_q|) with |x_q| = 1 is a lower
/// bound on the true value, and the sequence is kept non-decreasing.
inline PowerIterationResult power_iteration(const LinearOp& op, std::size_t iters,
                                            std::uint64_t seed = 0)
{
  if (iters == 0) throw std::invalid_argument("power_iteration: iters must be >= 1");
  Rng rng(seed);
  auto x = rng.normal_vector(op.input().size());
  double nx = norm2(x);
  if (nx == 0.0) return {};
  for (auto& v : x) v /= nx;

  PowerIterationResult res;
  res.history.reserve(iters);
  std::vector<double> ax(op.output().size());
  std::vector<double> z(op.input().size());
  double best = 0.0;
  for (std::size_t q = 0; q < iters; ++q) {
    op.apply_into(x, ax);
    op.adjoint_into(ax, z);
    const double nz = norm2(z);
    // sqrt(<x, A*A x>) = |A x| is also a valid lower bound; keep the larger.
    best = std::max({best, std::sqrt(nz), norm2(ax)});
    res.history.push_back(best);
    if (nz == 0.0) break;
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] / nz;
  }
  res.estimate = best;
  return res;
}

inline double power_iteration_norm(const LinearOp& op, std::size_t iters,
                                   std::uint64_t seed = 0)
{
  return power_iteration(op, iters, seed).estimate;
}

} // namespace mrca
