#include "qldrift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace qldrift {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double central_moment(std::span<const double> x, double mu, int k) {
  double s = 0.0;
  for (double v : x) s += std::pow(v - mu, k);
  return s / static_cast<double>(x.size());
}

bool all_equal(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

std::size_t window_steps(double dt, double h) {
  if (!(dt > 0.0)) throw std::invalid_argument("path dt must be > 0");
  if (h < 4.0 * dt * (1.0 - 1e-9)) {
    std::ostringstream os;
    os << "scale h=" << h << " is below the resolution 4 dt=" << 4.0 * dt;
    throw std::invalid_argument(os.str());
  }
  return static_cast<std::size_t>(std::floor(h / dt + 1e-9));
}

HolderFit fit_holder(std::vector<double> h, std::vector<double> omega) {
  if (h.size() < 4) throw std::invalid_argument("Hoelder fit needs at least 4 scales");
  std::vector<double> lx(h.size()), ly(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(omega[i] > 0.0)) throw std::domain_error("zero modulus of continuity; Hoelder fit is degenerate");
    lx[i] = std::log(h[i]);
    ly[i] = std::log(omega[i]);
  }
  const double mx = sample_mean(lx), my = sample_mean(ly);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  HolderFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  fit.h = std::move(h);
  fit.omega = std::move(omega);
  return fit;
}

}  // namespace

double sample_mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("variance needs at least 2 samples");
  const double mu = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return s / static_cast<double>(x.size() - 1);
}

double sample_excess_kurtosis(std::span<const double> x) {
  const double mu = sample_mean(x);
  const double m2 = central_moment(x, mu, 2);
  return central_moment(x, mu, 4) / (m2 * m2) - 3.0;
}

double sample_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("correlation needs paired samples");
  const double mx = sample_mean(x), my = sample_mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double ks_distance_normal(std::span<const double> samples, double mean, double variance) {
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double sd = std::sqrt(variance);
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = normal_cdf((s[i] - mean) / sd);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("two-sample KS needs non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

StatReport ks_one_sample(std::span<const double> samples, double mean, double variance, double slack,
                         std::string name) {
  if (samples.size() < 50) throw std::invalid_argument("KS test needs n >= 50 samples");
  if (!(variance > 0.0)) throw std::invalid_argument("KS reference variance must be > 0");
  const double threshold = kKsCritical5 / std::sqrt(static_cast<double>(samples.size())) * slack;
  if (all_equal(samples)) {
    auto r = StatReport::make(std::move(name), 1.0, threshold, Comparison::AtMost, samples.size());
    r.passed = false;
    return r.with_detail("degenerate sample: all values equal");
  }
  return StatReport::make(std::move(name), ks_distance_normal(samples, mean, variance), threshold,
                          Comparison::AtMost, samples.size());
}

StatReports gaussianity_suite(std::span<const double> x, const GaussianityOptions& o, const std::string& label) {
  if (x.size() < 200) throw std::invalid_argument("gaussianity suite needs n >= 200 samples");
  const std::size_t n = x.size();
  const double dn = static_cast<double>(n);
  const double mu = sample_mean(x);
  const double var = sample_variance(x);
  StatReports out;

  const double mean_se = std::sqrt(var / dn);
  out.push_back(StatReport::make("mean(" + label + ") - target", mu - o.mean, 3.0 * mean_se, Comparison::AbsAtMost, n,
                                 mean_se));

  const double m2 = central_moment(x, mu, 2);
  const double var_se = std::sqrt(std::max(0.0, central_moment(x, mu, 4) - m2 * m2) / dn);
  if (o.variance_rel_tol > 0.0) {
    out.push_back(StatReport::within("var(" + label + ")", var, o.variance * (1.0 - o.variance_rel_tol),
                                     o.variance * (1.0 + o.variance_rel_tol), n, var_se));
  } else {
    auto r = StatReport::make("var(" + label + ") - target", var - o.variance, 3.0 * var_se, Comparison::AbsAtMost, n,
                              var_se);
    if (var_se == 0.0 && var != o.variance) r.passed = false;
    out.push_back(r);
  }

  const double kurt = m2 > 0.0 ? sample_excess_kurtosis(x) : std::numeric_limits<double>::quiet_NaN();
  if (o.check_kurtosis) {
    out.push_back(StatReport::make("excess_kurtosis(" + label + ")", kurt, o.kurtosis_threshold,
                                   Comparison::AbsAtMost, n, std::sqrt(24.0 / dn)));
  } else {
    out.push_back(StatReport::info("excess_kurtosis(" + label + ")", kurt, n, std::sqrt(24.0 / dn)));
  }

  auto ks = ks_one_sample(x, o.mean, o.variance, o.ks_slack, "ks(" + label + ")");
  if (o.ks_threshold) {
    ks.threshold = *o.ks_threshold;
    if (ks.detail.empty()) ks.passed = ks.value <= ks.threshold;
  }
  out.push_back(ks);
  return out;
}

StatReports gaussianity_suite(std::span<const std::complex<double>> z, const GaussianityOptions& o,
                              const std::string& label) {
  if (z.size() < 200) throw std::invalid_argument("gaussianity suite needs n >= 200 samples");
  const std::size_t n = z.size();
  const double dn = static_cast<double>(n);
  std::vector<double> re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = z[i].real();
    im[i] = z[i].imag();
  }
  StatReports out = gaussianity_suite(re, o, "Re " + label);
  for (auto& r : gaussianity_suite(im, o, "Im " + label)) out.push_back(std::move(r));

  const double mr = sample_mean(re), mi = sample_mean(im);
  std::vector<double> prod(n);
  for (std::size_t i = 0; i < n; ++i) prod[i] = (re[i] - mr) * (im[i] - mi);
  const double cov = sample_mean(prod);
  const double cov_se = std::sqrt(sample_variance(prod) / dn);
  out.push_back(
      StatReport::make("cov(Re " + label + ", Im " + label + ")", cov, 3.0 * cov_se, Comparison::AbsAtMost, n, cov_se));

  std::complex<double> ez2{};
  for (auto v : z) ez2 += v * v;
  ez2 /= dn;
  double spread = 0.0;
  for (auto v : z) spread += std::norm(v * v - ez2);
  const double ez2_se = std::sqrt(spread / (dn - 1.0) / dn);
  out.push_back(
      StatReport::make("|E " + label + "^2|", std::abs(ez2), 3.0 * ez2_se, Comparison::AtMost, n, ez2_se));
  return out;
}

std::vector<double> momentum_increments(const TrajectoryEnsemble& ensemble, std::size_t particle, double t) {
  std::vector<double> out;
  out.reserve(ensemble.realizations.size());
  const double p0 = ensemble.initial.at(particle).p;
  for (const auto& tr : ensemble.realizations) out.push_back(tr.at(particle, tr.node_at(t)).p - p0);
  return out;
}

StatReports independence_suite(const TrajectoryEnsemble& ensemble, double t, const IndependenceOptions& options) {
  if (ensemble.particles < 2) throw std::invalid_argument("independence suite needs at least 2 particles");
  if (ensemble.realizations.size() < 100)
    throw std::invalid_argument("independence suite needs at least 100 realizations");
  const std::size_t reps = ensemble.realizations.size();
  std::vector<std::vector<double>> inc;
  for (std::size_t l = 0; l < ensemble.particles; ++l) inc.push_back(momentum_increments(ensemble, l, t));

  StatReports out;
  for (std::size_t i = 0; i < ensemble.particles; ++i) {
    for (std::size_t j = i + 1; j < ensemble.particles; ++j) {
      const double c = sample_correlation(inc[i], inc[j]);
      out.push_back(StatReport::make("corr(P" + std::to_string(i) + ", P" + std::to_string(j) + ")", c,
                                     options.corr_threshold, Comparison::AbsAtMost, reps,
                                     1.0 / std::sqrt(static_cast<double>(reps))));
    }
  }
  if (options.marginals) {
    GaussianityOptions g = options.marginal;
    g.mean = 0.0;
    g.variance = t;
    for (std::size_t l = 0; l < ensemble.particles; ++l)
      for (auto& r : gaussianity_suite(inc[l], g, "P" + std::to_string(l) + " - p0")) out.push_back(std::move(r));
  }
  return out;
}

double quadratic_variation(std::span<const double> path, std::size_t coarse_stride, double dt, std::optional<int> M) {
  if (coarse_stride == 0) throw std::invalid_argument("coarse stride must be >= 1");
  const double delta = static_cast<double>(coarse_stride) * dt;
  if (delta > 0.2 * (1.0 + 1e-12)) throw std::invalid_argument("coarse spacing must be <= 0.2");
  if (M && *M > 0 && delta < 20.0 / *M * (1.0 - 1e-12))
    throw std::invalid_argument("coarse spacing must be >= 20/M to average out the mode structure");
  double qv = 0.0;
  for (std::size_t i = coarse_stride; i < path.size(); i += coarse_stride) {
    const double d = path[i] - path[i - coarse_stride];
    qv += d * d;
  }
  return qv;
}

double modulus_of_continuity(std::span<const double> path, double dt, double h) {
  const std::size_t w = window_steps(dt, h);
  double best = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::size_t end = std::min(path.size(), i + w + 1);
    for (std::size_t j = i + 1; j < end; ++j) best = std::max(best, std::abs(path[j] - path[i]));
  }
  return best;
}

double modulus_of_continuity(std::span<const std::complex<double>> path, double dt, double h) {
  const std::size_t w = window_steps(dt, h);
  double best = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::size_t end = std::min(path.size(), i + w + 1);
    const double xr = path[i].real(), xi = path[i].imag();
    for (std::size_t j = i + 1; j < end; ++j) {
      const double dr = path[j].real() - xr, di = path[j].imag() - xi;
      best = std::max(best, dr * dr + di * di);
    }
  }
  return std::sqrt(best);
}

std::vector<double> dyadic_scales(int lo_exp, int hi_exp) {
  std::vector<double> h;
  for (int e = hi_exp; e >= lo_exp; --e) h.push_back(std::ldexp(1.0, -e));
  return h;
}

HolderFit holder_exponent(std::span<const double> path, double dt, std::span<const double> h_set) {
  std::vector<double> h(h_set.begin(), h_set.end()), om;
  for (double x : h) om.push_back(modulus_of_continuity(path, dt, x));
  return fit_holder(std::move(h), std::move(om));
}

HolderFit holder_exponent(std::span<const std::complex<double>> path, double dt, std::span<const double> h_set) {
  std::vector<double> h(h_set.begin(), h_set.end()), om;
  for (double x : h) om.push_back(modulus_of_continuity(path, dt, x));
  return fit_holder(std::move(h), std::move(om));
}

DiffusionCoefficient quasilinear_D(const SpectrumConfig& config, double p) {
  const auto d = diagnostics(config);
  const double v = config.amp_scale * p;
  DiffusionCoefficient out;
  out.in_range = v >= d.v_min && v <= d.v_max;
  out.D = out.in_range ? 0.5 : 0.0;
  out.near_edge = std::min(std::abs(v - d.v_min), std::abs(v - d.v_max)) <= d.dv_box;
  return out;
}

double chi_square_uniform_pvalue(std::span<const double> values, double lo, double hi, std::size_t bins) {
  if (bins < 2 || values.empty() || !(hi > lo)) throw std::invalid_argument("chi-square needs >= 2 bins and data");
  std::vector<double> counts(bins, 0.0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    counts[std::min(b, bins - 1)] += 1.0;
  }
  const double expected = static_cast<double>(values.size()) / static_cast<double>(bins);
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  return boost::math::gamma_q(0.5 * static_cast<double>(bins - 1), 0.5 * chi2);
}

void PairExtremes::include(const PairPath& path) {
  for (double z : path.z) {
    if (!std::isfinite(z)) {
      finite = false;
      continue;
    }
    const double r = std::exp(z);
    r_min = std::min(r_min, r);
    r_max = std::max(r_max, r);
  }
}

void PairExtremes::merge(const PairExtremes& other) {
  r_min = std::min(r_min, other.r_min);
  r_max = std::max(r_max, other.r_max);
  finite = finite && other.finite;
}

StatReports pair_bound_reports(std::span<const PairPath> paths, std::span<const double> times,
                               const PairExtremes* extremes) {
  if (paths.size() < 2) throw std::invalid_argument("pair bounds need at least 2 paths");
  const std::size_t n = paths.size();
  PairExtremes ex;
  if (extremes) {
    ex = *extremes;
  } else {
    for (const auto& p : paths) ex.include(p);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  StatReports out;
  out.push_back(StatReport::make("min R_t", ex.finite ? ex.r_min : nan, std::numeric_limits<double>::min(),
                                 Comparison::AtLeast, n));
  out.push_back(StatReport::make("max R_t", ex.finite ? ex.r_max : nan, std::numeric_limits<double>::max(),
                                 Comparison::AtMost, n));

  std::vector<double> z0(n);
  for (std::size_t i = 0; i < n; ++i) z0[i] = paths[i].z.front();
  const double z0_mean = sample_mean(z0);
  for (double t : times) {
    std::vector<double> zt(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& g = paths[i].grid;
      const auto k = static_cast<std::size_t>(std::llround((t - g.t0) / g.dt));
      if (k >= paths[i].z.size()) throw std::invalid_argument("pair bound time beyond the simulated horizon");
      zt[i] = paths[i].z[k];
    }
    const double m = sample_mean(zt);
    const double se = std::sqrt(sample_variance(zt) / static_cast<double>(n));
    std::ostringstream name;
    name << "mean Z(" << t << ")";
    out.push_back(StatReport::within(name.str(), m, z0_mean - 1.5 * t - 3.0 * se, z0_mean + 2.0 * t + 3.0 * se, n, se));
  }
  return out;
}

}  // namespace qldrift
