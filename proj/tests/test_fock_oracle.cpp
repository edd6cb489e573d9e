#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "switchmet/fock_oracle.hpp"
#include "switchmet/random.hpp"

using namespace switchmet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent construction: exponentiate the truncated generator
// alpha * a^dag - conj(alpha) * a directly.
Eigen::MatrixXcd displacement_by_expm(complex alpha, int cutoff) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  const Eigen::MatrixXcd gen =
      alpha * a.adjoint() - std::conj(alpha) * a;
  return gen.exp();
}

}  // namespace

TEST_CASE("displacement matrix validates its arguments") {
  CHECK_THROWS_AS(displacement_matrix(complex(0.1, 0), 0), std::invalid_argument);
  CHECK_THROWS_AS(displacement_matrix(complex(0.1, 0), 257), std::invalid_argument);
  CHECK_THROWS_AS(displacement_matrix(complex(std::nan(""), 0), 16),
                  std::domain_error);
}

TEST_CASE("zero displacement is the identity") {
  const FockMatrix m = displacement_matrix(complex(0, 0), 24);
  CHECK_THAT((m.entries - Eigen::MatrixXcd::Identity(24, 24)).cwiseAbs().maxCoeff(),
             WithinAbs(0.0, 1e-15));
}

TEST_CASE("pinned matrix elements") {
  const complex alpha(0.3, -0.4);
  const double x = std::norm(alpha);
  const FockMatrix m = displacement_matrix(alpha, 32);
  const double pref = std::exp(-0.5 * x);
  // <0|D|0> = e^{-|a|^2/2}
  CHECK_THAT(std::abs(m.entries(0, 0) - pref), WithinAbs(0.0, 1e-14));
  // <1|D|0> = a e^{-|a|^2/2}
  CHECK_THAT(std::abs(m.entries(1, 0) - alpha * pref), WithinAbs(0.0, 1e-14));
  // <0|D|1> = -conj(a) e^{-|a|^2/2}
  CHECK_THAT(std::abs(m.entries(0, 1) + std::conj(alpha) * pref),
             WithinAbs(0.0, 1e-14));
  // <1|D|1> = (1-|a|^2) e^{-|a|^2/2}
  CHECK_THAT(std::abs(m.entries(1, 1) - (1.0 - x) * pref), WithinAbs(0.0, 1e-14));
  // <2|D|0> = a^2/sqrt(2) e^{-|a|^2/2}
  CHECK_THAT(std::abs(m.entries(2, 0) - alpha * alpha / std::sqrt(2.0) * pref),
             WithinAbs(0.0, 1e-14));

  const FockMatrix unit = displacement_matrix(complex(1, 0), 48);
  CHECK_THAT(unit.entries(0, 0).real(), WithinRel(std::exp(-0.5), 1e-12));
  CHECK(unit.entries(0, 0).imag() == 0.0);
}

TEST_CASE("matrix agrees with direct exponentiation of the generator") {
  RandomStream rng(mix64(11));
  for (int it = 0; it < 10; ++it) {
    const complex alpha = std::polar(0.1 + 0.6 * rng.uniform(),
                                     two_pi * rng.uniform());
    const FockMatrix built = displacement_matrix(alpha, 32);
    const Eigen::MatrixXcd ref = displacement_by_expm(alpha, 32);
    // Truncating the generator corrupts the bottom corner, so compare the
    // well-converged upper block only.
    const double dev =
        (built.entries.topLeftCorner(8, 8) - ref.topLeftCorner(8, 8))
            .cwiseAbs()
            .maxCoeff();
    INFO("alpha = " << alpha.real() << "+" << alpha.imag() << "i");
    REQUIRE_THAT(dev, WithinAbs(0.0, 1e-9));
  }
}

TEST_CASE("truncation behaves like a contraction") {
  const FockMatrix m = displacement_matrix(complex(0.7, 0.2), 40);
  for (int c = 0; c < 40; ++c) {
    REQUIRE(m.entries.col(c).norm() <= 1.0 + 1e-9);
  }
  const FockMatrix inv = displacement_matrix(complex(-0.7, -0.2), 40);
  const double dev = ((inv.entries * m.entries).topLeftCorner(20, 20) -
                      Eigen::MatrixXcd::Identity(20, 20))
                         .cwiseAbs()
                         .maxCoeff();
  CHECK_THAT(dev, WithinAbs(0.0, 1e-10));
}

TEST_CASE("unitarity defect shrinks as the cutoff grows") {
  const complex alpha(0.9, -0.3);
  const double d16 = unitarity_defect(displacement_matrix(alpha, 16));
  const double d32 = unitarity_defect(displacement_matrix(alpha, 32));
  const double d64 = unitarity_defect(displacement_matrix(alpha, 64));
  CHECK(d32 < d16);
  CHECK(d64 < d32);
  CHECK(d64 < 1e-10);
}

TEST_CASE("oracle reproduces the closed-form loop phase") {
  RandomStream rng(mix64(22));
  for (int it = 0; it < 50; ++it) {
    DisplacementSequence a, b;
    const int na = 1 + static_cast<int>(rng.uniform() * 3);
    const int nb = 1 + static_cast<int>(rng.uniform() * 3);
    for (int j = 0; j < na; ++j) {
      a.push_back(Displacement(std::polar(0.5 * std::sqrt(rng.uniform()),
                                          two_pi * rng.uniform())));
    }
    for (int j = 0; j < nb; ++j) {
      b.push_back(Displacement(std::polar(0.5 * std::sqrt(rng.uniform()),
                                          two_pi * rng.uniform())));
    }
    const OracleVerdict v =
        sequence_phase_oracle(commutator_loop_sequence(a, b));
    INFO("iteration " << it);
    REQUIRE(v.amplitude_retention >= 0.999);
    REQUIRE(phase_distance(v.phase, wrap_phase(commutator_loop_phase(a, b))) <
            1e-9);
  }
}

TEST_CASE("oracle composition phase for a displacement pair") {
  // D(b) D(a) |0> = e^{i Im(b conj(a))} D(a+b) |0>; the oracle's phase for
  // the two-step sequence must match Im(b conj(a)) plus the phase of
  // <0|D(a+b)|0> (which is zero since that element is real positive).
  const complex a(0.3, 0.1), b(-0.2, 0.4);
  DisplacementSequence seq;
  seq.push_back(Displacement(a));
  seq.push_back(Displacement(b));
  // Not a closed loop, so retention is genuinely below one and cutoff
  // growth must be disabled; the phase is still exact.
  const OracleVerdict v = sequence_phase_oracle(seq, 64, false);
  CHECK(phase_distance(v.phase, std::imag(b * std::conj(a))) < 1e-10);
  // Retention equals |<0|D(a+b)|0>| = e^{-|a+b|^2/2}.
  CHECK_THAT(v.amplitude_retention, WithinRel(std::exp(-0.5 * std::norm(a + b)), 1e-9));
}

TEST_CASE("oracle doubles the cutoff when retention is poor") {
  DisplacementSequence a, b;
  a.push_back(Displacement(complex(5.0, 0.0)));
  b.push_back(Displacement(complex(0.0, 5.0)));
  const DisplacementSequence loop = commutator_loop_sequence(a, b);
  const OracleVerdict grown = sequence_phase_oracle(loop, 64, true);
  CHECK(grown.cutoff_used > 64);
  CHECK(grown.amplitude_retention >= 0.999);
  CHECK(phase_distance(grown.phase, wrap_phase(commutator_loop_phase(a, b))) <
        1e-6);

  const OracleVerdict pinned = sequence_phase_oracle(loop, 64, false);
  CHECK(pinned.cutoff_used == 64);
  CHECK(pinned.amplitude_retention < 0.999);
}

TEST_CASE("oracle reports truncation failure beyond the largest cutoff") {
  DisplacementSequence a, b;
  a.push_back(Displacement(complex(12.0, 0.0)));
  b.push_back(Displacement(complex(0.0, 12.0)));
  CHECK_THROWS_AS(
      sequence_phase_oracle(commutator_loop_sequence(a, b), 64, true),
      truncation_error);
  CHECK_THROWS_AS(sequence_phase_oracle(DisplacementSequence{}, 64, true),
                  std::domain_error);
  CHECK_THROWS_AS(
      sequence_phase_oracle(DisplacementSequence{complex(0.1, 0.0)}, 0, true),
      std::invalid_argument);
}
