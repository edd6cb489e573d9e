#pragma once

// Estimators, error bounds, and curve fits for the interferometer counts.
//
// The count fraction k_minus/shots estimates P(-) = (1 - cos(N^2 A + phi0))/2,
// which inverts in closed form on the identifiability window
// N^2 A + phi0 in (0, pi):
//     A_hat = (arccos(1 - 2 k/shots) - phi0) / N^2.
// This is the maximum-likelihood estimate because the binomial likelihood in
// p is maximized at p_hat = k/shots and A is a monotone reparametrization of
// p on the window (invariance of the MLE).  Saturated tallies (k = 0 or
// k = shots) sit at the boundary of the window, where the estimate is clamped
// and flagged.  By the same reparametrization, the Cramer-Rao bound for A is
// independent of the phase point: delta A = 1/(sqrt(nu) N^2).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "switchmet/phase_algebra.hpp"
#include "switchmet/random.hpp"

namespace switchmet {

struct MleEstimate {
  double estimate_a{0.0};
  bool saturated{false};
};

// Total-phase estimate arccos(1 - 2 k/shots) in [0, pi].  Equals
// N^2 A_hat + phi0 on the identifiability window; at N = 0 it estimates the
// bare offset phi0 itself.
inline double total_phase_estimate(long k_minus, long shots) {
  if (shots < 1) {
    throw std::invalid_argument("total_phase_estimate: shots must be >= 1");
  }
  if (k_minus < 0 || k_minus > shots) {
    throw std::invalid_argument("total_phase_estimate: k_minus outside [0, shots]");
  }
  const double ratio = static_cast<double>(k_minus) / static_cast<double>(shots);
  return std::acos(std::clamp(1.0 - 2.0 * ratio, -1.0, 1.0));
}

// Closed-form MLE of the regularized area from one tally.  Valid when the
// true phase N^2 A + phi0 lies in (0, pi); the estimate is clamped to the
// window boundary and flagged when the tally saturates.
inline MleEstimate mle_phase(long k_minus, long shots, int n, double phi0) {
  if (n < 1) throw std::invalid_argument("mle_phase: n must be >= 1");
  if (shots < 1) throw std::invalid_argument("mle_phase: shots must be >= 1");
  if (k_minus < 0 || k_minus > shots) {
    throw std::invalid_argument("mle_phase: k_minus outside [0, shots]");
  }
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  MleEstimate out;
  out.saturated = (k_minus == 0 || k_minus == shots);
  out.estimate_a = (total_phase_estimate(k_minus, shots) - phi0) / nn;
  return out;
}

// One estimation trial at a given depth.
struct TrialResult {
  int n{0};
  double estimate_a{0.0};
  bool saturated{false};
};

inline double mean_of(const std::vector<double>& values) {
  if (values.empty()) throw std::domain_error("mean_of: empty input");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

// Root-mean-square error about a fixed reference (the true value, by
// default convention throughout this library).
inline double rmse_about(const std::vector<double>& estimates, double reference) {
  if (estimates.empty()) throw std::domain_error("rmse_about: empty input");
  double s = 0.0;
  for (double e : estimates) {
    const double d = e - reference;
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(estimates.size()));
}

// Spread about the sample mean (the error-bar convention some plots use);
// exposed alongside rmse_about so callers can pick either definition.
inline double rmse_about_mean(const std::vector<double>& estimates) {
  return rmse_about(estimates, mean_of(estimates));
}

// Cramer-Rao bound for the switch strategy: delta A = 1/(sqrt(nu) N^2).
inline double crb_switch(long nu, int n) {
  if (nu < 1) throw std::invalid_argument("crb_switch: nu must be >= 1");
  if (n < 1) throw std::invalid_argument("crb_switch: n must be >= 1");
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return 1.0 / (std::sqrt(static_cast<double>(nu)) * nn);
}

// Bound for the sequential fixed-order strategy that measures the two
// quadratures separately: delta A >= sqrt(xbar^2 + pbar^2) / (sqrt(2 nu) N).
inline double crb_fixed_order(double xbar, double pbar, long nu, int n) {
  if (nu < 1) throw std::invalid_argument("crb_fixed_order: nu must be >= 1");
  if (n < 1) throw std::invalid_argument("crb_fixed_order: n must be >= 1");
  if (!std::isfinite(xbar) || !std::isfinite(pbar)) {
    throw std::domain_error("crb_fixed_order: non-finite quadrature mean");
  }
  return std::sqrt(xbar * xbar + pbar * pbar) /
         (std::sqrt(2.0 * static_cast<double>(nu)) * n);
}

// Simulates the fixed-order reference strategy once: nu/2 homodyne samples of
// each quadrature (x gets the extra sample when nu is odd, and is drawn
// first), each distributed Normal(mean, 1/(N sqrt(2))), estimator
// A_hat = mean(x samples) * mean(p samples).  noise_scale = 0 is the
// noise-free hook used by tests.
inline double fixed_order_baseline(const std::vector<double>& xs_prime,
                                   const std::vector<double>& ps_prime,
                                   long nu, RandomStream& rng,
                                   double noise_scale = 1.0) {
  if (xs_prime.empty() || xs_prime.size() != ps_prime.size()) {
    throw std::invalid_argument(
        "fixed_order_baseline: quadrature lists must be nonempty and equal-length");
  }
  if (nu < 2) throw std::invalid_argument("fixed_order_baseline: nu must be >= 2");
  if (!(noise_scale >= 0.0)) {
    throw std::domain_error("fixed_order_baseline: negative noise_scale");
  }
  const auto n = static_cast<double>(xs_prime.size());
  const double stddev = noise_scale / (n * std::sqrt(2.0));

  double xbar = 0.0, pbar = 0.0;
  for (double x : xs_prime) xbar += x;
  for (double p : ps_prime) pbar += p;
  xbar /= n;
  pbar /= n;

  const long shots_x = nu - nu / 2;
  const long shots_p = nu / 2;
  double sx = 0.0, sp = 0.0;
  for (long i = 0; i < shots_x; ++i) sx += rng.gaussian(xbar, stddev);
  for (long i = 0; i < shots_p; ++i) sp += rng.gaussian(pbar, stddev);
  return (sx / static_cast<double>(shots_x)) * (sp / static_cast<double>(shots_p));
}

// Generic fit report: named parameters, L2 residual norm, convergence flag.
struct FitResult {
  std::vector<std::pair<std::string, double>> parameters;
  double residual_norm{0.0};
  bool converged{false};

  double parameter(std::string_view name) const {
    for (const auto& [key, value] : parameters) {
      if (key == name) return value;
    }
    throw std::invalid_argument("FitResult: no parameter named " + std::string(name));
  }
};

// Least-squares fit of (N, pMinus) points to (1 - cos(N^2 A + phi0))/2 over
// (A, phi0): coarse grid seed (A in [0, pi/Nmax^2], phi0 in [0, pi), ties
// resolved toward smaller A by scan order), then damped Gauss-Newton,
// converged when the step norm drops below 1e-10.
inline FitResult fit_cosine(const std::vector<std::pair<int, double>>& points) {
  std::vector<int> distinct;
  for (const auto& [n, p] : points) {
    if (n < 0) throw std::invalid_argument("fit_cosine: n must be >= 0");
    if (!std::isfinite(p)) throw std::domain_error("fit_cosine: non-finite point");
    if (std::find(distinct.begin(), distinct.end(), n) == distinct.end()) {
      distinct.push_back(n);
    }
  }
  if (points.size() < 3 || distinct.size() < 3) {
    throw std::invalid_argument("fit_cosine: need >= 3 points at >= 3 distinct n");
  }
  const int n_max = *std::max_element(distinct.begin(), distinct.end());

  const auto sum_sq = [&points](double a, double phi) {
    double s = 0.0;
    for (const auto& [n, p] : points) {
      const double nn = static_cast<double>(n) * static_cast<double>(n);
      const double r = p - 0.5 * (1.0 - std::cos(nn * a + phi));
      s += r * r;
    }
    return s;
  };

  // Grid seed.
  const double a_hi = pi / (static_cast<double>(n_max) * n_max);
  constexpr int a_steps = 256;
  constexpr int phi_steps = 64;
  double best_a = 0.0, best_phi = 0.0;
  double best_ss = sum_sq(0.0, 0.0);
  for (int ia = 0; ia <= a_steps; ++ia) {
    const double a = a_hi * ia / a_steps;
    for (int ip = 0; ip < phi_steps; ++ip) {
      const double phi = pi * ip / phi_steps;
      const double ss = sum_sq(a, phi);
      if (ss < best_ss) {
        best_ss = ss;
        best_a = a;
        best_phi = phi;
      }
    }
  }

  // Damped Gauss-Newton refinement.
  double a = best_a, phi = best_phi, ss = best_ss;
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
    for (const auto& [n, p] : points) {
      const double nn = static_cast<double>(n) * static_cast<double>(n);
      const double theta = nn * a + phi;
      const double r = p - 0.5 * (1.0 - std::cos(theta));
      const double ja = -0.5 * std::sin(theta) * nn;  // d r / d A
      const double jp = -0.5 * std::sin(theta);       // d r / d phi0
      jtj00 += ja * ja;
      jtj01 += ja * jp;
      jtj11 += jp * jp;
      jtr0 += ja * r;
      jtr1 += jp * r;
    }
    const double det = jtj00 * jtj11 - jtj01 * jtj01;
    if (!(std::abs(det) > 1e-300)) {
      break;  // singular Jacobian: degenerate ridge, report unconverged
    }
    double step_a = (jtj11 * jtr0 - jtj01 * jtr1) / det;
    double step_phi = (jtj00 * jtr1 - jtj01 * jtr0) / det;

    // Step halving keeps the iteration inside the basin the grid found.
    double scale = 1.0;
    bool improved = false;
    for (int half = 0; half < 20; ++half) {
      const double trial_ss = sum_sq(a - scale * step_a, phi - scale * step_phi);
      if (trial_ss <= ss) {
        a -= scale * step_a;
        phi -= scale * step_phi;
        ss = trial_ss;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    const double step_norm =
        scale * std::sqrt(step_a * step_a + step_phi * step_phi);
    if (step_norm < 1e-10) {
      converged = true;
      break;
    }
    if (!improved) {
      break;
    }
  }
  if (a < 0.0) {  // cos is even: (A, phi) and (-A, -phi) are the same model
    a = -a;
    phi = -phi;
  }

  FitResult out;
  out.parameters = {{"A", a}, {"phi0", phi}};
  out.residual_norm = std::sqrt(ss);
  out.converged = converged;
  return out;
}

// Power-law scaling fits for an error curve deltaA(N) > 0, N >= 1.
//  - constrained: deltaA = 1/(c N^2), relative-error weighted least squares
//    (weights 1/deltaA^2, so all decades of the curve count equally);
//  - free: log-log regression deltaA = amplitude * N^(-exponent).
inline FitResult fit_power_scaling(const std::vector<std::pair<int, double>>& points) {
  if (points.size() < 2) {
    throw std::invalid_argument("fit_power_scaling: need >= 2 points");
  }
  double swx = 0.0, swxx = 0.0;
  double slx = 0.0, sly = 0.0, slxx = 0.0, slxy = 0.0;
  for (const auto& [n, y] : points) {
    if (n < 1) throw std::invalid_argument("fit_power_scaling: n must be >= 1");
    if (!(y > 0.0) || !std::isfinite(y)) {
      throw std::domain_error("fit_power_scaling: deltaA must be positive and finite");
    }
    const double x = 1.0 / (static_cast<double>(n) * n);
    swx += x / y;
    swxx += (x / y) * (x / y);
    const double lx = std::log(static_cast<double>(n));
    const double ly = std::log(y);
    slx += lx;
    sly += ly;
    slxx += lx * lx;
    slxy += lx * ly;
  }
  const auto m = static_cast<double>(points.size());

  // Constrained slope k of deltaA ~ k/N^2 under relative-error weighting.
  const double k = swx / swxx;
  double res = 0.0;
  for (const auto& [n, y] : points) {
    const double x = 1.0 / (static_cast<double>(n) * n);
    const double r = (y - k * x) / y;
    res += r * r;
  }

  // Free-exponent log-log regression.
  const double denom = m * slxx - slx * slx;
  if (!(std::abs(denom) > 0.0)) {
    throw std::invalid_argument("fit_power_scaling: need >= 2 distinct n");
  }
  const double slope = (m * slxy - slx * sly) / denom;
  const double intercept = (sly - slope * slx) / m;

  FitResult out;
  out.parameters = {{"c", 1.0 / k},
                    {"exponent", -slope},
                    {"amplitude", std::exp(intercept)}};
  out.residual_norm = std::sqrt(res);
  out.converged = true;
  return out;
}

struct LinearFit {
  double slope{0.0};
  double intercept{0.0};
  double residual_norm{0.0};
};

// Ordinary least squares y = slope * x + intercept.
inline LinearFit linear_fit(const std::vector<double>& xs,
                            const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("linear_fit: need >= 2 paired points");
  }
  const auto m = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = m * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) {
    throw std::invalid_argument("linear_fit: x values must not be constant");
  }
  LinearFit out;
  out.slope = (m * sxy - sx * sy) / denom;
  out.intercept = (sy - out.slope * sx) / m;
  double res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - out.slope * xs[i] - out.intercept;
    res += r * r;
  }
  out.residual_norm = std::sqrt(res);
  return out;
}

}  // namespace switchmet
