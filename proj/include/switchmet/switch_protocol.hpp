#pragma once

// Simulation of the order-superposition interferometer: physical displacement
// parameters, realized per-pass quadrature shifts, outcome probabilities of
// the +/- measurement, and count sampling with optional per-pass loss.
//
// The measured interference pattern for N displacement pairs of regularized
// area A and interferometer offset phi0 is
//     P(+/-) = (1 +/- cos(N^2 A + phi0)) / 2,
// with A = mean(x') * mean(p') in dimensionless quadrature units.  That A is
// the quadrature-plane regularized area; it equals |loop phase| / N^2 of the
// amplitude-plane algebra in phase_algebra.hpp (see the factor-2 note there).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "switchmet/phase_algebra.hpp"
#include "switchmet/random.hpp"

namespace switchmet {

// Hardware constants of the displacement stage.  Defaults correspond to the
// reference experiment: 18.6 um transverse shift per pass, 0.28 mrad
// effective tilt at 780 nm, and a 989.9 um beam waist.  sigma_p is tied to
// sigma_x by the minimum-uncertainty relation sigma_x * sigma_p = 1/2.
struct PhysicalParams {
  double x_ref_m = 18.6e-6;
  double theta_eff_rad = 2.8e-4;
  double wavelength_m = 780e-9;
  double sigma_x_m = 989.9e-6;
  double fluctuation = 0.05;  // fractional half-width of the uniform jitter

  double sigma_p_per_m() const { return 1.0 / (2.0 * sigma_x_m); }

  // Dimensionless reference quadrature shifts, x' = x/(sqrt(2) sigma_x) and
  // p' = p/(sqrt(2) sigma_p) with p = 2 pi theta / lambda.
  double x_ref_dimless() const {
    return x_ref_m / (std::sqrt(2.0) * sigma_x_m);
  }
  double p_ref_dimless() const {
    const double p = two_pi * theta_eff_rad / wavelength_m;
    return p / (std::sqrt(2.0) * sigma_p_per_m());
  }

  // Jitter-free regularized area.
  double reference_area() const { return x_ref_dimless() * p_ref_dimless(); }

  void validate() const {
    if (!(x_ref_m > 0.0) || !(theta_eff_rad > 0.0) || !(wavelength_m > 0.0) ||
        !(sigma_x_m > 0.0)) {
      throw std::invalid_argument("PhysicalParams: lengths and tilt must be positive");
    }
    if (!(fluctuation >= 0.0 && fluctuation < 1.0)) {
      throw std::invalid_argument("PhysicalParams: fluctuation outside [0, 1)");
    }
  }
};

// One interferometer setting.
struct SwitchConfig {
  int n = 1;           // displacement pairs per arm
  long nu = 1000;      // shots
  double phi0 = 0.307; // interferometer offset, radians
  double eta = 1.0;    // per-pass transmission

  void validate() const {
    if (n < 0) throw std::invalid_argument("SwitchConfig: n must be >= 0");
    if (nu < 1) throw std::invalid_argument("SwitchConfig: nu must be >= 1");
    if (!(phi0 >= 0.0 && phi0 < pi)) {
      throw std::invalid_argument("SwitchConfig: phi0 outside [0, pi)");
    }
    if (!(eta > 0.0 && eta <= 1.0)) {
      throw std::invalid_argument("SwitchConfig: eta outside (0, 1]");
    }
  }
};

// Dimensionless quadrature shifts actually applied in one run.
struct RealizedDisplacements {
  std::vector<double> xs;
  std::vector<double> ps;

  std::size_t size() const { return xs.size(); }

  double mean_x() const { return mean_of(xs); }
  double mean_p() const { return mean_of(ps); }

  // Regularized area A = mean(xs) * mean(ps); zero for an empty realization.
  double a() const { return xs.empty() ? 0.0 : mean_x() * mean_p(); }

  DisplacementSequence x_sequence() const {
    DisplacementSequence s;
    for (double x : xs) s.push_back(quadrature_to_amplitude(x, 0.0));
    return s;
  }
  DisplacementSequence p_sequence() const {
    DisplacementSequence s;
    for (double p : ps) s.push_back(quadrature_to_amplitude(0.0, p));
    return s;
  }

  // Truncation to the first n pairs; models removing trailing passes while
  // keeping the same plates in place.
  RealizedDisplacements prefix(std::size_t n) const {
    if (n > xs.size()) {
      throw std::invalid_argument("RealizedDisplacements::prefix: n too large");
    }
    return {std::vector<double>(xs.begin(), xs.begin() + n),
            std::vector<double>(ps.begin(), ps.begin() + n)};
  }

 private:
  static double mean_of(const std::vector<double>& v) {
    if (v.empty()) {
      throw std::domain_error("RealizedDisplacements: mean of empty list");
    }
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  }
};

// Draws n displacement pairs with independent uniform fractional jitter:
// x_j = x_ref' (1 + u_j), p_j = p_ref' (1 + v_j), u, v ~ U[-f, f).
// All n x-jitters are drawn before the n p-jitters; that order is part of
// the reproducibility contract.
inline RealizedDisplacements realize_displacements(const PhysicalParams& params,
                                                   int n, RandomStream& rng) {
  params.validate();
  if (n < 0) {
    throw std::invalid_argument("realize_displacements: n must be >= 0");
  }
  RealizedDisplacements out;
  out.xs.reserve(n);
  out.ps.reserve(n);
  const double xr = params.x_ref_dimless();
  const double pr = params.p_ref_dimless();
  for (int j = 0; j < n; ++j) {
    out.xs.push_back(xr * (1.0 + rng.uniform_symmetric(params.fluctuation)));
  }
  for (int j = 0; j < n; ++j) {
    out.ps.push_back(pr * (1.0 + rng.uniform_symmetric(params.fluctuation)));
  }
  return out;
}

struct OutcomeProbabilities {
  double p_plus{0.0};
  double p_minus{0.0};
};

// Probabilities for a given total interferometer phase.  Constructed so the
// two values sum to exactly 1 in double arithmetic.
inline OutcomeProbabilities probabilities_from_phase(double total_phase) {
  if (!std::isfinite(total_phase)) {
    throw std::domain_error("probabilities_from_phase: non-finite phase");
  }
  OutcomeProbabilities out;
  out.p_minus = 0.5 - 0.5 * std::cos(total_phase);
  out.p_plus = 1.0 - out.p_minus;
  return out;
}

// P(+/-) = (1 +/- cos(n^2 a + phi0)) / 2.  n = 0 collapses to the bare
// interferometer offset regardless of a.
inline OutcomeProbabilities outcome_probabilities(double a, int n, double phi0) {
  if (!std::isfinite(a) || !std::isfinite(phi0)) {
    throw std::domain_error("outcome_probabilities: non-finite input");
  }
  if (n < 0) {
    throw std::invalid_argument("outcome_probabilities: n must be >= 0");
  }
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return probabilities_from_phase(nn * a + phi0);
}

// Total output phase probed by running seqA against seqB in both orders:
// the commutator-loop phase plus the interferometer offset.  Unwrapped.
inline double switch_output_phase(const DisplacementSequence& seqA,
                                  const DisplacementSequence& seqB,
                                  double phi0) {
  if (!std::isfinite(phi0)) {
    throw std::domain_error("switch_output_phase: non-finite phi0");
  }
  return commutator_loop_phase(seqA, seqB) + phi0;
}

// Tally of one acquisition.
struct CountRecord {
  int n{0};
  long nu{0};
  long k_plus{0};
  long k_minus{0};
  long lost{0};

  long effective_shots() const { return k_plus + k_minus; }

  void validate() const {
    if (k_plus < 0 || k_minus < 0 || lost < 0 || k_plus + k_minus + lost != nu) {
      throw std::domain_error("CountRecord: counts do not tally");
    }
  }
};

// Per-shot survival probability across n lossy passes.
inline double survival_probability(double eta, int n) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("survival_probability: eta outside (0, 1]");
  }
  if (n < 0) {
    throw std::invalid_argument("survival_probability: n must be >= 0");
  }
  return std::pow(eta, n);
}

// Samples nu shots at the given outcome distribution.  Each shot first draws
// survival (skipped entirely when survival == 1, i.e. eta == 1), then the
// outcome if it survived; the draw order is part of the reproducibility
// contract.
inline CountRecord sample_counts_at(long nu, int n, double survival,
                                    double p_minus, RandomStream& rng) {
  if (nu < 1) throw std::invalid_argument("sample_counts_at: nu must be >= 1");
  if (!(survival > 0.0 && survival <= 1.0)) {
    throw std::domain_error("sample_counts_at: survival outside (0, 1]");
  }
  if (!(p_minus >= 0.0 && p_minus <= 1.0)) {
    throw std::domain_error("sample_counts_at: p_minus outside [0, 1]");
  }
  CountRecord rec;
  rec.n = n;
  rec.nu = nu;
  const bool lossless = survival >= 1.0;
  for (long shot = 0; shot < nu; ++shot) {
    if (!lossless && !rng.bernoulli(survival)) {
      ++rec.lost;
      continue;
    }
    if (rng.bernoulli(p_minus)) {
      ++rec.k_minus;
    } else {
      ++rec.k_plus;
    }
  }
  rec.validate();
  return rec;
}

// Samples one acquisition of the switch protocol at regularized area a.
inline CountRecord sample_counts(const SwitchConfig& config, double a,
                                 RandomStream& rng) {
  config.validate();
  const OutcomeProbabilities probs = outcome_probabilities(a, config.n, config.phi0);
  const double survival = survival_probability(config.eta, config.n);
  return sample_counts_at(config.nu, config.n, survival, probs.p_minus, rng);
}

}  // namespace switchmet
