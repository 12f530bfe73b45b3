#pragma once

// JoDeFu: over-relaxed Loris-Verhoeven primal-dual iteration for
//   min_X  1/2 |A(X) - y|^2 + lambda g(L(X)).

#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrca/linear_op.hpp"
#include "mrca/regularizers.hpp"

namespace mrca {

class DivergenceError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig
{
  double lambda = 1e-3;           // absolute weight; see from_normalized
  double over_relaxation = 1.9;   // rho_o in (0, 2)
  std::size_t max_iterations = 250;
  std::optional<double> tau;      // defaults to 0.99 / |A|^2
  std::optional<double> sigma;    // defaults to 1 / (tau |L|^2)
  std::size_t cost_stride = 1;    // record the objective every n iterations (0 = never)
  double early_exit_tol = 0.0;    // stop when |dX| <= tol |X|; 0 disables

  /// lambda = lambda_bar * rho_y.
  static SolverConfig from_normalized(double lambda_bar, double rho_y)
  {
    SolverConfig c;
    c.lambda = lambda_bar * rho_y;
    return c;
  }

  void validate() const
  {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("SolverConfig: lambda must be finite and >= 0");
    if (!(over_relaxation > 0.0 && over_relaxation < 2.0))
      throw std::invalid_argument("SolverConfig: over-relaxation must be in (0, 2)");
    if (max_iterations == 0) throw std::invalid_argument("SolverConfig: q_max must be >= 1");
    if (tau && !(*tau > 0.0)) throw std::invalid_argument("SolverConfig: tau must be positive");
    if (sigma && !(*sigma > 0.0)) throw std::invalid_argument("SolverConfig: sigma must be positive");
    if (!(early_exit_tol >= 0.0)) throw std::invalid_argument("SolverConfig: tolerance must be >= 0");
  }
};

struct StepSizes
{
  double tau = 0.0;
  double sigma = 0.0;
};

inline StepSizes step_sizes(const LinearOp& a, const LinearOp& l, const SolverConfig& cfg)
{
  StepSizes s;
  if (cfg.tau) {
    s.tau = *cfg.tau;
  } else {
    if (!(a.norm_bound() > 0.0))
      throw std::invalid_argument("solver: operator " + a.name() + " has a zero norm bound");
    s.tau = 0.99 / (a.norm_bound() * a.norm_bound());
  }
  if (cfg.sigma) {
    s.sigma = *cfg.sigma;
  } else {
    if (!(l.norm_bound() > 0.0))
      throw std::invalid_argument("solver: operator " + l.name() + " has a zero norm bound");
    s.sigma = 1.0 / (s.tau * l.norm_bound() * l.norm_bound());
  }
  return s;
}

struct SolverTrace
{
  std::vector<std::size_t> iteration;  // iteration index of each cost sample (1-based)
  std::vector<double> cost;
  std::vector<double> primal_change;   // |X^(q+1) - X^(q)| per iteration
  std::vector<double> wall_seconds;    // cumulative, per iteration
  double initial_cost = 0.0;
  std::size_t iterations = 0;
  StepSizes steps;

  double best_cost() const
  {
    double b = initial_cost;
    for (double c : cost) b = std::min(b, c);
    return b;
  }
};

struct SolveResult
{
  std::vector<double> x;
  SolverTrace trace;
};

namespace detail {

inline void check_conformable(const LinearOp& a, const LinearOp& l, std::size_t ny)
{
  if (ny != a.output().size())
    throw std::invalid_argument("solver: y has " + std::to_string(ny) + " samples, " + a.name() +
                                " produces " + std::to_string(a.output().size()));
  if (!(a.input() == l.input()))
    throw std::invalid_argument("solver: " + a.name() + " acts on " + a.input().str() + " but " +
                                l.name() + " acts on " + l.input().str());
  if (!l.output().single())
    throw std::invalid_argument("solver: gradient operator must have a single output block");
}

inline double data_term(std::span<const double> ax, std::span<const double> y)
{
  double e = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) e += (ax[i] - y[i]) * (ax[i] - y[i]);
  return 0.5 * e;
}

inline void dual_prox(NormKind g, std::span<double> w, const Shape& s, double lambda)
{
  if (lambda == 0.0)
    std::fill(w.begin(), w.end(), 0.0);
  else
    prox_conj_inplace(g, w, s, lambda);
}

} // namespace detail

/// 1/2 |A(X) - y|^2 + lambda g(L(X)).
inline double objective(const LinearOp& a, const LinearOp& l, NormKind g, double lambda,
                        std::span<const double> y, std::span<const double> x)
{
  detail::check_conformable(a, l, y.size());
  const auto ax = a.apply(x);
  double cost = detail::data_term(ax, y);
  if (lambda != 0.0) cost += lambda * g_eval(g, l.apply(x), l.output().shape());
  return cost;
}

/// Algorithm iterations from an explicit starting pair (X0, W0).
inline SolveResult jodefu_iterate(const LinearOp& a, const LinearOp& l, NormKind g,
                                  std::span<const double> y, const SolverConfig& cfg,
                                  std::vector<double> x, std::vector<double> w)
{
  cfg.validate();
  detail::check_conformable(a, l, y.size());
  if (x.size() != a.input().size() || w.size() != l.output().size())
    throw std::invalid_argument("solver: starting point has the wrong size");

  const Shape wshape = l.output().shape();
  const double lambda = cfg.lambda, rho = cfg.over_relaxation;
  SolveResult res;
  SolverTrace& tr = res.trace;
  tr.steps = step_sizes(a, l, cfg);
  const double tau = tr.steps.tau, sigma = tr.steps.sigma;

  const std::size_t nx = x.size(), nw = w.size();
  std::vector<double> ax = a.apply(x);
  std::vector<double> resid(y.size()), v(nx), ltw(nx), xh(nx), lxh(nw), wh(nw), xn(nx), lx(nw);

  auto cost_of = [&](std::span<const double> xs, std::span<const double> axs) {
    double c = detail::data_term(axs, y);
    if (lambda != 0.0) {
      l.apply_into(xs, lx);
      c += lambda * g_eval(g, lx, wshape);
    }
    return c;
  };
  auto diverged = [&](const char* where, std::size_t q) {
    return DivergenceError("solver diverged at iteration " + std::to_string(q + 1) + " (" + where +
                           " non-finite); check the certified bounds |" + a.name() +
                           "| <= " + std::to_string(a.norm_bound()) + " and |" + l.name() +
                           "| <= " + std::to_string(l.norm_bound()) + ", tau = " +
                           std::to_string(tau) + ", sigma = " + std::to_string(sigma));
  };

  tr.initial_cost = cost_of(x, ax);
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t q = 0; q < cfg.max_iterations; ++q) {
    // V = A*(A X - y)
    for (std::size_t i = 0; i < y.size(); ++i) resid[i] = ax[i] - y[i];
    a.adjoint_into(resid, v);
    // X_half = X - tau (V + L* W)
    l.adjoint_into(w, ltw);
    for (std::size_t i = 0; i < nx; ++i) xh[i] = x[i] - tau * (v[i] + ltw[i]);
    // W_half = prox_{sigma (lambda g)^*}(W + sigma L X_half)
    l.apply_into(xh, lxh);
    for (std::size_t i = 0; i < nw; ++i) wh[i] = w[i] + sigma * lxh[i];
    detail::dual_prox(g, wh, wshape, lambda);
    // X+ = X - rho tau (V + L* W_half)
    l.adjoint_into(wh, ltw);
    for (std::size_t i = 0; i < nx; ++i) xn[i] = x[i] - rho * tau * (v[i] + ltw[i]);
    // W+ = W + rho (W_half - W)
    for (std::size_t i = 0; i < nw; ++i) w[i] += rho * (wh[i] - w[i]);

    double change = 0.0;
    for (std::size_t i = 0; i < nx; ++i) change += (xn[i] - x[i]) * (xn[i] - x[i]);
    change = std::sqrt(change);
    x.swap(xn);
    if (!std::isfinite(change) || !all_finite(x)) throw diverged("primal", q);
    if (!all_finite(w)) throw diverged("dual", q);
    a.apply_into(x, ax);

    tr.iterations = q + 1;
    tr.primal_change.push_back(change);
    tr.wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    const bool last = q + 1 == cfg.max_iterations;
    const bool stop = cfg.early_exit_tol > 0.0 && change <= cfg.early_exit_tol * norm2(x);
    if (cfg.cost_stride > 0 && ((q + 1) % cfg.cost_stride == 0 || last || stop)) {
      const double c = cost_of(x, ax);
      if (!std::isfinite(c)) throw diverged("cost", q);
      tr.iteration.push_back(q + 1);
      tr.cost.push_back(c);
    }
    if (stop) break;
  }
  res.x = std::move(x);
  return res;
}

/// Starts from X0 = A*(y), W0 = L(X0).
inline SolveResult jodefu_solve(const LinearOp& a, const LinearOp& l, NormKind g,
                                std::span<const double> y, const SolverConfig& cfg)
{
  detail::check_conformable(a, l, y.size());
  auto x0 = a.adjoint(y);
  auto w0 = l.apply(x0);
  return jodefu_iterate(a, l, g, y, cfg, std::move(x0), std::move(w0));
}

// ---------------------------------------------------------------------------

struct JodefuVariant
{
  std::string name;
  std::string gradient = "tv";  // only classic TV is provided
  NormKind norm = NormKind::l221;
  double rho_b = 0.0;           // Butterworth diameter of A_b, 0 = identity
};

inline JodefuVariant jodefu_preset(const std::string& name)
{
  if (name == "v1") return {"v1", "tv", NormKind::l221, 0.0};
  if (name == "v2") return {"v2", "tv", NormKind::s1l1, 1.4};
  throw std::invalid_argument("unknown JoDeFu preset '" + name + "' (v1, v2)");
}

} // namespace mrca
