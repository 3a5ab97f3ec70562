#include "gpa/synthdata.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "gpa/quadrature.hpp"

namespace gpa {

namespace {

// =============================================================================
// Built-in curves and densities (closed-form derivatives)
// =============================================================================

// Shared bump term: e(u) = exp(-128 u^2) with u = x - 1/2.
//   d/dx 2e = -512 u e
//   d2/dx2 2e = (131072 u^2 - 512) e
double bump(double u) { return std::exp(-128.0 * u * u); }

double mu1(double x) {
  const double u = x - 0.5;
  return 4.0 * u + 2.0 * bump(u);
}
double mu1_d1(double x) {
  const double u = x - 0.5;
  return 4.0 - 512.0 * u * bump(u);
}
double mu1_d2(double x) {
  const double u = x - 0.5;
  return (131072.0 * u * u - 512.0) * bump(u);
}

double mu2(double x) {
  const double u = x - 0.5;
  return std::sin(8.0 * u) + 2.0 * bump(u);
}
double mu2_d1(double x) {
  const double u = x - 0.5;
  return 8.0 * std::cos(8.0 * u) - 512.0 * u * bump(u);
}
double mu2_d2(double x) {
  const double u = x - 0.5;
  return -64.0 * std::sin(8.0 * u) + (131072.0 * u * u - 512.0) * bump(u);
}

// mu3 = g(x) sin(theta(x)), g = 24 sqrt(q), q = x(1-x), theta = 2.1 pi/(x+.05).
// Since 4q + (1-2x)^2 = 1:  g' = 12(1-2x)/sqrt(q),  g'' = -6 q^{-3/2}.
double mu3(double x) {
  const double q = x * (1.0 - x);
  if (q < 0.0) throw std::domain_error("mu3: x outside [0,1]");
  const double theta = 2.1 * std::numbers::pi / (x + 0.05);
  return 24.0 * std::sqrt(q) * std::sin(theta);
}
double mu3_d1(double x) {
  const double q = x * (1.0 - x);
  if (!(q > 0.0)) throw std::domain_error("mu3 derivative: x outside (0,1)");
  const double theta = 2.1 * std::numbers::pi / (x + 0.05);
  const double dtheta = -2.1 * std::numbers::pi / ((x + 0.05) * (x + 0.05));
  const double g = 24.0 * std::sqrt(q);
  const double dg = 12.0 * (1.0 - 2.0 * x) / std::sqrt(q);
  return dg * std::sin(theta) + g * std::cos(theta) * dtheta;
}
double mu3_d2(double x) {
  const double q = x * (1.0 - x);
  if (!(q > 0.0)) throw std::domain_error("mu3 derivative: x outside (0,1)");
  const double t = x + 0.05;
  const double theta = 2.1 * std::numbers::pi / t;
  const double dtheta = -2.1 * std::numbers::pi / (t * t);
  const double d2theta = 4.2 * std::numbers::pi / (t * t * t);
  const double g = 24.0 * std::sqrt(q);
  const double dg = 12.0 * (1.0 - 2.0 * x) / std::sqrt(q);
  const double d2g = -6.0 / (q * std::sqrt(q));
  return d2g * std::sin(theta) + 2.0 * dg * std::cos(theta) * dtheta +
         g * (std::cos(theta) * d2theta -
              std::sin(theta) * dtheta * dtheta);
}

double beta23(double x) {
  if (x < 0.0 || x > 1.0) return 0.0;
  return 12.0 * x * (1.0 - x) * (1.0 - x);
}
double beta23_d1(double x) {
  if (x < 0.0 || x > 1.0) return 0.0;
  return 12.0 * (1.0 - x) * (1.0 - 3.0 * x);
}

// =============================================================================
// Finite differences for user-supplied functions
// =============================================================================

// Central difference at the primary step, accepted only when the finer step
// agrees to kFdRelTol (plus a cancellation floor for the second difference,
// whose round-off error grows like eps/step^2).
double checked_fd(const std::function<double(double)>& f, double x, int order) {
  const auto diff = [&](double s) {
    if (order == 1) return (f(x + s) - f(x - s)) / (2.0 * s);
    return (f(x + s) - 2.0 * f(x) + f(x - s)) / (s * s);
  };
  const double coarse = diff(config::kFdStep);
  const double fine = diff(config::kFdCheckStep);
  double tol = config::kFdRelTol *
               std::max({1.0, std::abs(coarse), std::abs(fine)});
  if (order == 2) {
    const double eps = std::numeric_limits<double>::epsilon();
    tol += 8.0 * eps * std::max(1.0, std::abs(f(x))) /
           (config::kFdCheckStep * config::kFdCheckStep);
  }
  if (std::abs(coarse - fine) > tol)
    throw std::domain_error(
        "finite difference: steps 1e-5 and 1e-6 disagree; function too rough");
  return coarse;
}

}  // namespace

std::string_view mean_fn_name(MeanFn fn) {
  switch (fn) {
    case MeanFn::Mu1: return "mu1";
    case MeanFn::Mu2: return "mu2";
    case MeanFn::Mu3: return "mu3";
    case MeanFn::Custom: return "custom";
  }
  throw std::invalid_argument("mean_fn_name: unknown enumerator");
}

std::string_view covariate_law_name(CovariateLaw law) {
  switch (law) {
    case CovariateLaw::Uniform01: return "uniform01";
    case CovariateLaw::Beta23: return "beta23";
    case CovariateLaw::CustomDensity: return "custom-density";
  }
  throw std::invalid_argument("covariate_law_name: unknown enumerator");
}

// =============================================================================
// SimSetting
// =============================================================================

void SimSetting::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("SimSetting: sigma must be finite and >= 0");
  if (mean_fn == MeanFn::Custom && !custom_mu)
    throw std::invalid_argument("SimSetting: custom mean function missing");
  if (law == CovariateLaw::CustomDensity && !custom_density)
    throw std::invalid_argument("SimSetting: custom density missing");
}

double SimSetting::mu(double x) const {
  switch (mean_fn) {
    case MeanFn::Mu1: return mu1(x);
    case MeanFn::Mu2: return mu2(x);
    case MeanFn::Mu3: return mu3(x);
    case MeanFn::Custom: return custom_mu(x);
  }
  throw std::invalid_argument("SimSetting: unknown mean function");
}

double SimSetting::mu_d1(double x) const {
  switch (mean_fn) {
    case MeanFn::Mu1: return mu1_d1(x);
    case MeanFn::Mu2: return mu2_d1(x);
    case MeanFn::Mu3: return mu3_d1(x);
    case MeanFn::Custom: return checked_fd(custom_mu, x, 1);
  }
  throw std::invalid_argument("SimSetting: unknown mean function");
}

double SimSetting::mu_d2(double x) const {
  switch (mean_fn) {
    case MeanFn::Mu1: return mu1_d2(x);
    case MeanFn::Mu2: return mu2_d2(x);
    case MeanFn::Mu3: return mu3_d2(x);
    case MeanFn::Custom: return checked_fd(custom_mu, x, 2);
  }
  throw std::invalid_argument("SimSetting: unknown mean function");
}

double SimSetting::density(double x) const {
  switch (law) {
    case CovariateLaw::Uniform01: return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
    case CovariateLaw::Beta23: return beta23(x);
    case CovariateLaw::CustomDensity: return custom_density(x);
  }
  throw std::invalid_argument("SimSetting: unknown covariate law");
}

double SimSetting::density_d1(double x) const {
  switch (law) {
    case CovariateLaw::Uniform01: return 0.0;
    case CovariateLaw::Beta23: return beta23_d1(x);
    case CovariateLaw::CustomDensity: return checked_fd(custom_density, x, 1);
  }
  throw std::invalid_argument("SimSetting: unknown covariate law");
}

SimSetting SimSetting::numbered(int id) {
  SimSetting s;
  switch (id) {
    case 1: s.mean_fn = MeanFn::Mu1; s.law = CovariateLaw::Uniform01; break;
    case 2: s.mean_fn = MeanFn::Mu1; s.law = CovariateLaw::Beta23; break;
    case 3: s.mean_fn = MeanFn::Mu2; s.law = CovariateLaw::Uniform01; break;
    case 4: s.mean_fn = MeanFn::Mu2; s.law = CovariateLaw::Beta23; break;
    default:
      throw std::invalid_argument("SimSetting: numbered settings are 1..4");
  }
  s.label = std::to_string(id);
  return s;
}

SimSetting SimSetting::mu3_uniform() {
  SimSetting s;
  s.mean_fn = MeanFn::Mu3;
  s.law = CovariateLaw::Uniform01;
  s.label = "mu3";
  return s;
}

SimSetting SimSetting::from_name(const std::string& name) {
  if (name == "mu3") return mu3_uniform();
  if (name.size() == 1 && name[0] >= '1' && name[0] <= '4')
    return numbered(name[0] - '0');
  throw std::invalid_argument("SimSetting: unknown setting '" + name +
                              "' (expected 1..4 or mu3)");
}

// =============================================================================
// Generation
// =============================================================================

SimData generate(const SimSetting& setting, std::int64_t n,
                 std::uint64_t seed) {
  setting.validate();
  if (n < 1) throw std::invalid_argument("generate: need n >= 1");
  if (setting.law == CovariateLaw::CustomDensity)
    throw std::invalid_argument(
        "generate: sampling is only provided for the built-in covariate laws");

  std::mt19937_64 rng(seed);
  std::vector<double> xs(static_cast<std::size_t>(n));
  if (setting.law == CovariateLaw::Uniform01) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (auto& x : xs) x = unif(rng);
  } else {
    // Beta(2,3) via the gamma ratio G(2) / (G(2) + G(3)).
    std::gamma_distribution<double> ga(2.0, 1.0);
    std::gamma_distribution<double> gb(3.0, 1.0);
    for (auto& x : xs) {
      const double a = ga(rng);
      const double b = gb(rng);
      x = a / (a + b);
    }
  }

  std::vector<double> truth(xs.size());
  std::vector<double> ys(xs.size());
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    truth[i] = setting.mu(xs[i]);
    ys[i] = truth[i] + setting.sigma * noise(rng);
  }
  return SimData{Sample(std::move(xs), std::move(ys)), std::move(truth)};
}

// =============================================================================
// Asymptotic oracles
// =============================================================================

BiasVarianceFns bias_variance_fns(const SimSetting& setting,
                                  const KernelSpec& kernel) {
  setting.validate();
  const double half_k2 = 0.5 * kernel.moment(2);
  const double nu0 = kernel.square_moment(0);
  const double sigma2 = setting.sigma * setting.sigma;
  const SimSetting s = setting;

  BiasVarianceFns out;
  out.bias = [s, half_k2](double x) {
    const double f = s.density(x);
    if (!(f > 0.0))
      throw std::domain_error("bias_variance_fns: density vanishes");
    return half_k2 * (s.mu_d2(x) + 2.0 * s.mu_d1(x) * s.density_d1(x) / f);
  };
  out.variance = [s, nu0, sigma2](double x) {
    const double f = s.density(x);
    if (!(f > 0.0))
      throw std::domain_error("bias_variance_fns: density vanishes");
    return nu0 * sigma2 / f;
  };
  return out;
}

AmiseConstants amise_constants(const SimSetting& setting,
                               const KernelSpec& kernel,
                               const WeightFn& weight) {
  weight.validate();
  const double a = std::max(weight.trim_lo(), setting.support_lo());
  const double b = std::min(weight.trim_hi(), setting.support_hi());
  if (!(a < b))
    throw std::invalid_argument("amise_constants: weight trims away the support");

  const BiasVarianceFns fns = bias_variance_fns(setting, kernel);
  AmiseConstants out;
  out.b_bar = simpson(
      [&](double x) {
        const double bx = fns.bias(x);
        return bx * bx * setting.density(x);
      },
      a, b, config::kAmiseQuadPanels);
  out.v_bar = simpson(
      [&](double x) { return fns.variance(x) * setting.density(x); }, a, b,
      config::kAmiseQuadPanels);
  return out;
}

double amise_reference_bandwidth(const SimSetting& setting,
                                 const KernelSpec& kernel,
                                 const WeightFn& weight, std::int64_t n) {
  const AmiseConstants c = amise_constants(setting, kernel, weight);
  return amise_optimal(c.b_bar, c.v_bar, n);
}

// =============================================================================
// Metrics
// =============================================================================

namespace {

MetricResult root_mean_square_gap(std::span<const Estimate> estimates,
                                  std::span<const double> reference,
                                  const char* what) {
  if (estimates.size() != reference.size())
    throw std::invalid_argument(std::string(what) + ": length mismatch");
  if (estimates.empty())
    throw std::invalid_argument(std::string(what) + ": empty input");

  MetricResult out;
  long double acc = 0.0L;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (!estimates[i].has_value()) {
      ++out.n_undefined;
      continue;
    }
    const double gap = *estimates[i] - reference[i];
    acc += static_cast<long double>(gap) * gap;
    ++out.n_used;
  }
  if (out.n_used == 0)
    throw std::runtime_error(std::string(what) +
                             ": every estimate is undefined");
  out.value = std::sqrt(
      static_cast<double>(acc / static_cast<long double>(out.n_used)));
  return out;
}

}  // namespace

MetricResult rmse(std::span<const Estimate> estimates,
                  std::span<const double> truth) {
  return root_mean_square_gap(estimates, truth, "rmse");
}

MetricResult rmpe(std::span<const Estimate> estimates,
                  std::span<const double> observed) {
  return root_mean_square_gap(estimates, observed, "rmpe");
}

double mrae(std::span<const double> selected, double h_ref) {
  if (selected.empty()) throw std::invalid_argument("mrae: empty input");
  if (!(h_ref > 0.0) || !std::isfinite(h_ref))
    throw std::invalid_argument("mrae: reference bandwidth must be positive");
  long double acc = 0.0L;
  for (double h : selected) {
    if (!std::isfinite(h))
      throw std::invalid_argument("mrae: selections must be finite");
    acc += std::abs(h - h_ref);
  }
  return static_cast<double>(acc / static_cast<long double>(selected.size())) /
         h_ref;
}

}  // namespace gpa
