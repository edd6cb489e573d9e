#pragma once

// Scalar phase algebra of ordered phase-space displacements.
//
// A displacement by complex amplitude g maps the oscillator as
// D(g) = exp(g a+ - g* a).  Products of displacements stay displacements up
// to a scalar phase:
//
//     D(later) D(earlier) = D(earlier + later) * exp(i Im(later * conj(earlier)))
//
// so an ordered sequence reduces to (net amplitude, accumulated phase), and a
// closed loop reduces to a pure phase.  Everything here is exact complex
// arithmetic; the numeric cross-check against truncated Fock-space matrices
// lives in fock_oracle.hpp.
//
// Two area conventions appear in this library and must not be conflated.
// In the amplitude plane the loop of N x-steps against N p-steps (with
// quadrature_to_amplitude below) encloses area N^2*x*p/2 and the loop phase
// is twice that, N^2*x*p.  Quadrature-plane (x,p) areas are 2x larger because
// alpha = (x + i p)/sqrt(2) shrinks each axis by sqrt(2); the protocol-level
// regularized area A = mean(x)*mean(p) is the quadrature-plane quantity and
// equals |loop phase| / N^2.

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace switchmet {

using complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline bool is_finite(complex z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Maps an angle to (-pi, pi].
inline double wrap_phase(double radians) {
  if (!std::isfinite(radians)) {
    throw std::domain_error("wrap_phase: non-finite angle");
  }
  double r = std::remainder(radians, two_pi);
  if (r <= -pi) {
    r = pi;
  }
  return r;
}

// Absolute angular separation, folded to [0, pi].
inline double phase_distance(double a, double b) {
  return std::abs(wrap_phase(a - b));
}

// One phase-space displacement.  The amplitude must be finite.
struct Displacement {
  complex amplitude{0.0, 0.0};

  Displacement() = default;
  Displacement(complex a) : amplitude(a) {  // NOLINT: implicit by design
    if (!is_finite(a)) {
      throw std::domain_error("Displacement: amplitude must be finite");
    }
  }
  Displacement(double re, double im) : Displacement(complex(re, im)) {}

  Displacement inverse() const { return Displacement(-amplitude); }

  friend bool operator==(const Displacement& a, const Displacement& b) {
    return a.amplitude == b.amplitude;
  }
};

// Ordered run of displacements; the first element is applied first.
class DisplacementSequence {
 public:
  DisplacementSequence() = default;
  explicit DisplacementSequence(std::vector<Displacement> items)
      : items_(std::move(items)) {}
  DisplacementSequence(std::initializer_list<complex> amplitudes) {
    items_.reserve(amplitudes.size());
    for (complex a : amplitudes) {
      items_.emplace_back(a);
    }
  }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Displacement& operator[](std::size_t i) const { return items_[i]; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  void push_back(Displacement d) { items_.push_back(d); }

  complex sum() const {
    complex s{0.0, 0.0};
    for (const Displacement& d : items_) {
      s += d.amplitude;
    }
    return s;
  }

  complex mean() const {
    if (items_.empty()) {
      throw std::domain_error("DisplacementSequence::mean: empty sequence");
    }
    return sum() / static_cast<double>(items_.size());
  }

  // Elementwise inverses in reversed order; applying `reversed_inverse()`
  // after the sequence itself undoes the net displacement.
  DisplacementSequence reversed_inverse() const {
    std::vector<Displacement> out;
    out.reserve(items_.size());
    for (auto it = items_.rbegin(); it != items_.rend(); ++it) {
      out.push_back(it->inverse());
    }
    return DisplacementSequence(std::move(out));
  }

 private:
  std::vector<Displacement> items_;
};

// Net displacement plus the scalar phase accumulated along the way.
// The phase is always reported wrapped to (-pi, pi].
struct PhasedDisplacement {
  complex net{0.0, 0.0};
  double phase{0.0};

  static PhasedDisplacement identity() { return {}; }
};

// Composition phase of one displacement applied after another.
inline PhasedDisplacement compose(const Displacement& earlier,
                                  const Displacement& later) {
  if (!is_finite(earlier.amplitude) || !is_finite(later.amplitude)) {
    throw std::domain_error("compose: non-finite amplitude");
  }
  PhasedDisplacement out;
  out.net = earlier.amplitude + later.amplitude;
  out.phase = wrap_phase(std::imag(later.amplitude * std::conj(earlier.amplitude)));
  return out;
}

// Grouped composition: the `later` group applied after the `earlier` group.
// Associativity of the underlying operator product means any bracketing of a
// sequence yields the same net and the same phase mod 2*pi.
inline PhasedDisplacement compose(const PhasedDisplacement& earlier,
                                  const PhasedDisplacement& later) {
  if (!is_finite(earlier.net) || !is_finite(later.net)) {
    throw std::domain_error("compose: non-finite amplitude");
  }
  PhasedDisplacement out;
  out.net = earlier.net + later.net;
  out.phase = wrap_phase(earlier.phase + later.phase +
                         std::imag(later.net * std::conj(earlier.net)));
  return out;
}

// Left fold of `compose` in application order.
inline PhasedDisplacement compose_sequence(const DisplacementSequence& seq) {
  PhasedDisplacement acc = PhasedDisplacement::identity();
  for (const Displacement& d : seq) {
    acc = compose(acc, PhasedDisplacement{d.amplitude, 0.0});
  }
  return acc;
}

// The 4N-element loop probing the order commutator of two runs: seqB, then
// seqA, then seqB undone, then seqA undone.  Defined for unequal lengths too.
inline DisplacementSequence commutator_loop_sequence(
    const DisplacementSequence& seqA, const DisplacementSequence& seqB) {
  std::vector<Displacement> loop;
  loop.reserve(2 * (seqA.size() + seqB.size()));
  for (const Displacement& d : seqB) loop.push_back(d);
  for (const Displacement& d : seqA) loop.push_back(d);
  for (const Displacement& d : seqB.reversed_inverse()) loop.push_back(d);
  for (const Displacement& d : seqA.reversed_inverse()) loop.push_back(d);
  return DisplacementSequence(std::move(loop));
}

// Scalar phase of the commutator loop, unwrapped.  Closed form: the loop is
// the identity displacement times exp(2 i Im(sum(seqA) * conj(sum(seqB)))).
// Folding commutator_loop_sequence must agree with this mod 2*pi; that cross
// check is enforced by the property suite rather than recomputed per call.
inline double commutator_loop_phase(const DisplacementSequence& seqA,
                                    const DisplacementSequence& seqB) {
  if (seqA.empty() || seqB.empty()) {
    throw std::domain_error("commutator_loop_phase: empty sequence");
  }
  return 2.0 * std::imag(seqA.sum() * std::conj(seqB.sum()));
}

// Half-weighted ordered double sum over a segment path:
//   area = 1/2 * sum_j sum_{l >= j} Im(z_j) * Re(z_l).
// Antisymmetrized over the order of two equal-length runs this yields
// (1/2) N^2 Im(mean(A) * conj(mean(B))), half the enclosed loop area, which
// is why enclosed_area() below carries the compensating factor 2.
inline double signed_path_area(const DisplacementSequence& seq) {
  const std::size_t n = seq.size();
  double area = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double tail_re = 0.0;
    for (std::size_t l = j; l < n; ++l) {
      tail_re += std::real(seq[l].amplitude);
    }
    area += std::imag(seq[j].amplitude) * tail_re;
  }
  return 0.5 * area;
}

// Geometry of the closed loop traced by running seqA-then-seqB one way and
// seqB-then-seqA back.
struct LoopGeometry {
  double enclosed_area{0.0};     // amplitude-plane area, >= 0
  double regularized_area{0.0};  // enclosed_area / N^2
  double loop_phase{0.0};        // signed, = 2 * enclosed_area in magnitude
};

// Enclosed area of the order-commutator loop of two equal-length runs.
// enclosed_area = |loop_phase|/2 = N^2 |Im(mean(A) * conj(mean(B)))| exactly;
// it also equals twice the signed_path_area difference of the two orderings
// (see signed_path_area), a relation the tests assert to 1e-12.
inline LoopGeometry enclosed_area(const DisplacementSequence& seqA,
                                  const DisplacementSequence& seqB) {
  if (seqA.empty() || seqB.empty()) {
    throw std::domain_error("enclosed_area: zero-length loop");
  }
  if (seqA.size() != seqB.size()) {
    throw std::domain_error("enclosed_area: sequences must have equal length");
  }
  LoopGeometry g;
  g.loop_phase = commutator_loop_phase(seqA, seqB);
  g.enclosed_area = 0.5 * std::abs(g.loop_phase);
  const double n = static_cast<double>(seqA.size());
  g.regularized_area = g.enclosed_area / (n * n);
  return g;
}

// Amplitude of a displacement specified by dimensionless quadrature shifts,
// with X = (a + a+)/sqrt(2), P = -i(a - a+)/sqrt(2):
//   exp(-i x P) = D(x/sqrt(2)),  exp(i p X) = D(i p/sqrt(2)).
// Under this convention the commutator loop of N x-steps (first argument)
// against N p-steps (second argument) has phase -N^2*x*p.
inline Displacement quadrature_to_amplitude(double x, double p) {
  if (!std::isfinite(x) || !std::isfinite(p)) {
    throw std::domain_error("quadrature_to_amplitude: non-finite quadrature");
  }
  return Displacement(complex(x, p) / std::sqrt(2.0));
}

}  // namespace switchmet
