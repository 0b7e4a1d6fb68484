#pragma once

// Estimators and hypothesis tests over sampled paths and Monte Carlo
// ensembles. Every function is pure; randomness enters only through the
// samples passed in.

#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qldrift/dynamics.hpp"
#include "qldrift/report.hpp"
#include "qldrift/wavefield.hpp"

namespace qldrift {

double sample_mean(std::span<const double> x);
/// Unbiased (n - 1) variance.
double sample_variance(std::span<const double> x);
double sample_excess_kurtosis(std::span<const double> x);
double sample_correlation(std::span<const double> x, std::span<const double> y);

/// sup |F_n - Phi((x - mean)/sd)|.
double ks_distance_normal(std::span<const double> samples, double mean, double variance);
/// sup |F_a - F_b|.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

inline constexpr double kKsCritical5 = 1.36;
inline constexpr double kDefaultKsSlack = 1.5;

/// KS test against N(mean, variance); threshold 1.36 / sqrt(n) * slack.
/// Throws std::invalid_argument for n < 50 or variance <= 0; a sample with
/// all values equal yields a failed report with a diagnostic.
StatReport ks_one_sample(std::span<const double> samples, double mean, double variance,
                         double slack = kDefaultKsSlack, std::string name = "ks");

struct GaussianityOptions {
  double mean = 0.0;
  double variance = 1.0;
  /// Relative band on the variance; 0 means |var - target| <= 3 SE.
  double variance_rel_tol = 0.0;
  double kurtosis_threshold = 0.3;
  double ks_slack = kDefaultKsSlack;
  std::optional<double> ks_threshold;  // overrides the slack-based threshold
  bool check_kurtosis = true;
};

/// Mean, variance, excess kurtosis and KS verdicts. Requires n >= 200.
StatReports gaussianity_suite(std::span<const double> samples, const GaussianityOptions& options = {},
                              const std::string& label = "x");

/// Applies the real suite to Re and Im (each with options.variance) and adds
/// Re/Im cross-covariance <= 3 SE and |E Z^2| <= 3 SE.
StatReports gaussianity_suite(std::span<const std::complex<double>> samples, const GaussianityOptions& options = {},
                              const std::string& label = "z");

struct IndependenceOptions {
  double corr_threshold = 0.15;
  // variance is set to t per particle
  GaussianityOptions marginal = [] {
    GaussianityOptions g;
    g.variance_rel_tol = 0.10;
    return g;
  }();
  bool marginals = true;
};

/// Pairwise correlations of P_l(t) - p0_l across realizations plus per-particle
/// marginal checks. Throws std::invalid_argument for fewer than 2 particles or
/// fewer than 100 realizations.
StatReports independence_suite(const TrajectoryEnsemble& ensemble, double t, const IndependenceOptions& options = {});

/// Momentum increments P(t) - p0 of one particle across realizations.
std::vector<double> momentum_increments(const TrajectoryEnsemble& ensemble, std::size_t particle, double t);

/// Sum of squared increments over the coarse grid of spacing stride * dt.
/// Throws std::invalid_argument when stride * dt > 0.2, or < 20/M when M is
/// given.
double quadratic_variation(std::span<const double> path, std::size_t coarse_stride, double dt,
                           std::optional<int> M = std::nullopt);

/// max |y(t') - y(t)| over grid pairs with |t - t'| <= h. Requires h >= 4 dt.
double modulus_of_continuity(std::span<const double> path, double dt, double h);
double modulus_of_continuity(std::span<const std::complex<double>> path, double dt, double h);

struct HolderFit {
  double exponent = 0.0;
  double intercept = 0.0;
  std::vector<double> h;
  std::vector<double> omega;
};

/// Least-squares slope of log omega(h) against log h. Needs at least 4
/// scales, all >= 4 dt; throws std::domain_error on a zero modulus.
HolderFit holder_exponent(std::span<const double> path, double dt, std::span<const double> h_set);
HolderFit holder_exponent(std::span<const std::complex<double>> path, double dt, std::span<const double> h_set);

/// 2^-hi_exp, ..., 2^-lo_exp (increasing h).
std::vector<double> dyadic_scales(int lo_exp, int hi_exp);

struct DiffusionCoefficient {
  double D = 0.0;
  bool in_range = false;
  bool near_edge = false;
};

/// Reference coefficient in rescaled momentum units: 1/2 when a p lies in the
/// covered phase-velocity range, 0 outside; near_edge within dv_box.
DiffusionCoefficient quasilinear_D(const SpectrumConfig& config, double p);

/// Chi-square p-value of `values` against the uniform law on [lo, hi).
double chi_square_uniform_pvalue(std::span<const double> values, double lo, double hi, std::size_t bins);

/// Extremes of R = sin^2 x + y^2 over every node of a set of paths.
struct PairExtremes {
  double r_min = std::numeric_limits<double>::infinity();
  double r_max = 0.0;
  bool finite = true;

  void include(const PairPath& path);
  void merge(const PairExtremes& other);
};

/// Positivity of R and the two-sided drift bounds on the mean of Z at the
/// given times. Extremes default to the nodes of `paths`; pass full-resolution
/// extremes when the paths are subsampled.
StatReports pair_bound_reports(std::span<const PairPath> paths, std::span<const double> times,
                               const PairExtremes* extremes = nullptr);

}  // namespace qldrift
