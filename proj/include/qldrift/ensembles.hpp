#pragma once

// Laws for the complex mode amplitudes alpha_{m,n} = A_{m,n} exp(i phi_{m,n}).
//
// Every law here is symmetric with E A^2 = 1 and a finite fourth moment.
// Draws are keyed by (master_seed, m, n) so a field realization does not
// depend on evaluation order.

#include <complex>
#include <cstdint>
#include <functional>
#include <string>

#include "qldrift/report.hpp"

namespace qldrift {

/// alpha = a * exp(i phi), a >= 0, phi in [0, 2 pi).
struct ComplexAmplitude {
  double a = 0.0;
  double phi = 0.0;

  std::complex<double> value() const { return std::polar(a, phi); }
};

/// Law of the modulus A, given by its quantile function and analytic moments.
struct AmplitudeLaw {
  std::string name;
  std::function<double(double)> quantile;  // u in (0,1) -> A
  double second_moment = 1.0;
  double fourth_moment = 1.0;

  static AmplitudeLaw unit();
  /// A^2 ~ Exp(1), i.e. the modulus of a standard complex normal.
  static AmplitudeLaw rayleigh();
  /// A uniform on [0, sqrt 3].
  static AmplitudeLaw uniform();
};

/// Law of the phase, given by its quantile function.
struct PhaseLaw {
  std::string name;
  std::function<double(double)> quantile;  // u in (0,1) -> phi (any real)
};

enum class EnsembleKind { FourPoint, Steinhaus, ComplexNormal, Custom };

/// Identifies one mode amplitude of one field realization.
struct SeedKey {
  std::uint64_t master_seed = 0;
  int m = 0;
  int n = 1;
};

/// Validated key: throws std::out_of_range unless |m| <= M and 1 <= n <= N.
SeedKey make_seed_key(std::uint64_t master_seed, int m, int n, int M, int N);

class EnsembleSpec {
 public:
  /// alpha = exp(i (c + K pi/2)), K uniform on {1, 2, 3, 4}.
  static EnsembleSpec four_point(double offset = 0.0);
  /// Uniform phase, independent modulus drawn from `amplitude`.
  static EnsembleSpec steinhaus(AmplitudeLaw amplitude = AmplitudeLaw::unit());
  /// Isotropic complex normal with E|alpha|^2 = 1.
  static EnsembleSpec complex_normal();
  /// Throws std::invalid_argument if E A^2 != 1 or E A^4 is not finite.
  static EnsembleSpec custom(PhaseLaw phase, AmplitudeLaw amplitude, bool is_four_symmetric);

  EnsembleKind kind() const { return kind_; }
  double offset() const { return offset_; }
  const AmplitudeLaw& amplitude_law() const { return amplitude_; }
  const PhaseLaw& phase_law() const { return phase_; }
  /// Analytic sup E A^4 of the law (the C4 constant).
  double c4_bound() const { return c4_; }
  bool is_four_symmetric() const { return four_symmetric_; }
  /// Short human-readable label, e.g. "steinhaus(unit)".
  std::string label() const;

 private:
  EnsembleSpec() = default;

  EnsembleKind kind_ = EnsembleKind::Steinhaus;
  double offset_ = 0.0;
  AmplitudeLaw amplitude_;
  PhaseLaw phase_;
  double c4_ = 1.0;
  bool four_symmetric_ = true;
};

/// Deterministic draw for `key`; independent across distinct keys.
ComplexAmplitude sample_alpha(const EnsembleSpec& spec, const SeedKey& key);

/// Empirical E A^2, E A^4, E alpha and E alpha^2 over n_samples keyed draws,
/// compared against the model predictions. Requires n_samples >= 100.
StatReports moment_probe(const EnsembleSpec& spec, std::size_t n_samples, std::uint64_t seed);

double wrap_phase(double phi);

}  // namespace qldrift
