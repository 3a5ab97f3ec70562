#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gpa/bandwidth.hpp"
#include "gpa/kernels.hpp"
#include "gpa/synthdata.hpp"

using gpa::CovariateLaw;
using gpa::Estimate;
using gpa::KernelSpec;
using gpa::MeanFn;
using gpa::SimData;
using gpa::SimSetting;
using gpa::WeightFn;

namespace {

// Independent closed forms for the built-in curves, written from scratch so
// the library's versions have something to disagree with.
double mu1_ref(double x) {
  const double u = x - 0.5;
  return 4.0 * u + 2.0 * std::exp(-128.0 * u * u);
}
double mu2_ref(double x) {
  const double u = x - 0.5;
  return std::sin(8.0 * u) + 2.0 * std::exp(-128.0 * u * u);
}
double mu3_ref(double x) {
  return 24.0 * std::sqrt(x * (1.0 - x)) *
         std::sin(2.1 * M_PI / (x + 0.05));
}
double beta23_ref(double x) { return 12.0 * x * (1.0 - x) * (1.0 - x); }

double fd1(double (*f)(double), double x, double step) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}
double fd2(double (*f)(double), double x, double step) {
  return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
}

}  // namespace

// =============================================================================
// Built-in curves and densities
// =============================================================================

TEST_CASE("mean curves match the reference formulas") {
  const SimSetting s1 = SimSetting::numbered(1);
  const SimSetting s3 = SimSetting::numbered(3);
  const SimSetting m3 = SimSetting::mu3_uniform();
  CHECK(s1.mu(0.5) == 2.0);  // 4*0 + 2 e^0
  for (const double x : {0.05, 0.2, 0.37, 0.5, 0.68, 0.9}) {
    CHECK(s1.mu(x) == doctest::Approx(mu1_ref(x)).epsilon(1e-14));
    CHECK(s3.mu(x) == doctest::Approx(mu2_ref(x)).epsilon(1e-14));
    CHECK(m3.mu(x) == doctest::Approx(mu3_ref(x)).epsilon(1e-12));
  }
  CHECK(m3.mu(0.0) == 0.0);
  CHECK(m3.mu(1.0) == 0.0);
}

TEST_CASE("closed-form derivatives agree with central differences") {
  // Step 1e-5, relative tolerance 1e-4, evaluated away from the endpoints.
  for (const SimSetting& s : {SimSetting::numbered(1), SimSetting::numbered(3),
                              SimSetting::mu3_uniform()}) {
    for (const double x : {0.15, 0.3, 0.5, 0.62, 0.85}) {
      const double d1 = s.mu_d1(x);
      const double d2 = s.mu_d2(x);
      const double step = 1e-5;
      const double fd_d1 =
          (s.mu(x + step) - s.mu(x - step)) / (2.0 * step);
      const double fd_d2 =
          (s.mu(x + step) - 2.0 * s.mu(x) + s.mu(x - step)) / (step * step);
      CHECK(std::abs(d1 - fd_d1) <= 1e-4 * std::max(1.0, std::abs(fd_d1)));
      CHECK(std::abs(d2 - fd_d2) <= 1e-4 * std::max(1.0, std::abs(fd_d2)));
    }
  }
  // The boundary-chirp curve has no derivatives at the endpoints.
  const SimSetting m3 = SimSetting::mu3_uniform();
  CHECK_THROWS_AS(m3.mu_d1(0.0), std::domain_error);
  CHECK_THROWS_AS(m3.mu_d2(1.0), std::domain_error);
  CHECK_THROWS_AS(m3.mu(-0.1), std::domain_error);
}

TEST_CASE("densities normalize and differentiate correctly") {
  const SimSetting uni = SimSetting::numbered(1);
  const SimSetting beta = SimSetting::numbered(2);
  // Composite Simpson over [0,1].
  const int panels = 1 << 12;
  for (const SimSetting* s : {&uni, &beta}) {
    double acc = s->density(0.0) + s->density(1.0);
    for (int i = 1; i < panels; ++i) {
      acc += (i % 2 ? 4.0 : 2.0) * s->density(i / static_cast<double>(panels));
    }
    CHECK(acc / (3.0 * panels) == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(uni.density(0.3) == 1.0);
  CHECK(uni.density_d1(0.3) == 0.0);
  for (const double x : {0.1, 0.4, 0.7}) {
    CHECK(beta.density(x) == doctest::Approx(beta23_ref(x)).epsilon(1e-14));
    CHECK(beta.density_d1(x) ==
          doctest::Approx(fd1(beta23_ref, x, 1e-6)).epsilon(1e-6));
  }
}

TEST_CASE("custom functions fall back to checked finite differences") {
  SimSetting s;
  s.mean_fn = MeanFn::Custom;
  s.custom_mu = [](double x) { return std::sin(3.0 * x); };
  CHECK(s.mu_d1(0.4) == doctest::Approx(3.0 * std::cos(1.2)).epsilon(1e-8));
  // Second differences carry ~eps/step^2 rounding noise; match the
  // library's own cross-check tolerance.
  CHECK(s.mu_d2(0.4) == doctest::Approx(-9.0 * std::sin(1.2)).epsilon(1e-4));

  // A kink defeats the two-step cross-check instead of silently passing.
  SimSetting kinked;
  kinked.mean_fn = MeanFn::Custom;
  kinked.custom_mu = [](double x) { return std::abs(x - 0.5); };
  CHECK_THROWS_AS(kinked.mu_d2(0.5), std::domain_error);

  SimSetting missing;
  missing.mean_fn = MeanFn::Custom;
  CHECK_THROWS_AS(missing.validate(), std::invalid_argument);
}

TEST_CASE("setting names and numbering") {
  CHECK(SimSetting::numbered(1).mean_fn == MeanFn::Mu1);
  CHECK(SimSetting::numbered(1).law == CovariateLaw::Uniform01);
  CHECK(SimSetting::numbered(2).mean_fn == MeanFn::Mu1);
  CHECK(SimSetting::numbered(2).law == CovariateLaw::Beta23);
  CHECK(SimSetting::numbered(3).mean_fn == MeanFn::Mu2);
  CHECK(SimSetting::numbered(3).law == CovariateLaw::Uniform01);
  CHECK(SimSetting::numbered(4).mean_fn == MeanFn::Mu2);
  CHECK(SimSetting::numbered(4).law == CovariateLaw::Beta23);
  CHECK(SimSetting::from_name("mu3").mean_fn == MeanFn::Mu3);
  CHECK(SimSetting::from_name("2").label == "2");
  CHECK_THROWS_AS(SimSetting::numbered(5), std::invalid_argument);
  CHECK_THROWS_AS(SimSetting::from_name("setting-1"), std::invalid_argument);
}

// =============================================================================
// Generation
// =============================================================================

TEST_CASE("zero noise reproduces the curve exactly") {
  SimSetting s = SimSetting::numbered(1);
  s.sigma = 0.0;
  const SimData data = gpa::generate(s, 200, 42);
  for (std::int64_t i = 0; i < data.sample.size(); ++i) {
    CHECK(data.sample.y(i) == data.truth[static_cast<std::size_t>(i)]);
    CHECK(data.sample.y(i) == s.mu(data.sample.x(i)));
  }
}

TEST_CASE("generation is seed-deterministic") {
  const SimSetting s = SimSetting::numbered(3);
  const SimData a = gpa::generate(s, 100, 9);
  const SimData b = gpa::generate(s, 100, 9);
  const SimData c = gpa::generate(s, 100, 10);
  for (std::int64_t i = 0; i < 100; ++i) {
    CHECK(a.sample.x(i) == b.sample.x(i));
    CHECK(a.sample.y(i) == b.sample.y(i));
  }
  bool any_diff = false;
  for (std::int64_t i = 0; i < 100; ++i) any_diff |= a.sample.x(i) != c.sample.x(i);
  CHECK(any_diff);
  CHECK_THROWS_AS(gpa::generate(s, 0, 1), std::invalid_argument);
}

TEST_CASE("noise changes responses but not the design") {
  SimSetting quiet = SimSetting::numbered(1);
  quiet.sigma = 0.0;
  SimSetting loud = SimSetting::numbered(1);
  loud.sigma = 2.0;
  const SimData a = gpa::generate(quiet, 50, 4);
  const SimData b = gpa::generate(loud, 50, 4);
  for (std::int64_t i = 0; i < 50; ++i) {
    CHECK(a.sample.x(i) == b.sample.x(i));
  }
}

TEST_CASE("beta-law draws have the beta moments") {
  const SimData data = gpa::generate(SimSetting::numbered(2), 100000, 77);
  double mean = 0.0;
  for (std::int64_t i = 0; i < data.sample.size(); ++i) mean += data.sample.x(i);
  mean /= static_cast<double>(data.sample.size());
  // Mean 2/5, variance 0.04: three standard errors of the sample mean.
  CHECK(std::abs(mean - 0.4) <= 3.0 * std::sqrt(0.04 / 100000.0));
  double lo = 1.0, hi = 0.0;
  for (std::int64_t i = 0; i < data.sample.size(); ++i) {
    lo = std::min(lo, data.sample.x(i));
    hi = std::max(hi, data.sample.x(i));
  }
  CHECK(lo >= 0.0);
  CHECK(hi <= 1.0);
}

// =============================================================================
// Asymptotic oracles
// =============================================================================

TEST_CASE("pointwise bias and variance on the uniform design") {
  const SimSetting s = SimSetting::numbered(1);
  const KernelSpec k = KernelSpec::epanechnikov();
  const gpa::BiasVarianceFns fns = gpa::bias_variance_fns(s, k);
  // Flat density: B(x) = (kappa_2/2) mu''(x); at the bump center
  // mu'' = -512, so B = 0.1 * (-512).
  CHECK(fns.bias(0.5) == doctest::Approx(-51.2).epsilon(1e-12));
  for (const double x : {0.1, 0.5, 0.9}) {
    CHECK(fns.variance(x) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(fns.bias(x) ==
          doctest::Approx(0.1 * fd2(mu1_ref, x, 1e-5)).epsilon(1e-5));
  }
}

TEST_CASE("bias picks up the density-gradient term off the uniform design") {
  const SimSetting s = SimSetting::numbered(2);
  const KernelSpec k = KernelSpec::epanechnikov();
  const gpa::BiasVarianceFns fns = gpa::bias_variance_fns(s, k);
  for (const double x : {0.2, 0.4, 0.6}) {
    const double f = beta23_ref(x);
    const double fdot = fd1(beta23_ref, x, 1e-6);
    const double expect =
        0.1 * (fd2(mu1_ref, x, 1e-5) + 2.0 * fd1(mu1_ref, x, 1e-5) * fdot / f);
    CHECK(fns.bias(x) == doctest::Approx(expect).epsilon(1e-4));
    CHECK(fns.variance(x) == doctest::Approx(0.6 / f).epsilon(1e-10));
  }
  // The beta density vanishes at both endpoints.
  CHECK_THROWS_AS(fns.variance(0.0), std::domain_error);
  CHECK_THROWS_AS(fns.bias(1.0), std::domain_error);
}

TEST_CASE("integrated constants on the trimmed support") {
  const KernelSpec k = KernelSpec::epanechnikov();
  const WeightFn w{0.0, 1.0, 0.05};

  SUBCASE("flat curve has no squared-bias mass") {
    SimSetting flat;
    flat.mean_fn = MeanFn::Custom;
    flat.custom_mu = [](double) { return 3.0; };
    const gpa::AmiseConstants c = gpa::amise_constants(flat, k, w);
    CHECK(std::abs(c.b_bar) <= 1e-10);
  }

  SUBCASE("uniform-design variance integrates to its trimmed mass") {
    const gpa::AmiseConstants c =
        gpa::amise_constants(SimSetting::numbered(1), k, w);
    // V = 0.6 everywhere, weight covers [0.05, 0.95].
    CHECK(c.v_bar == doctest::Approx(0.54).epsilon(1e-10));
  }

  SUBCASE("squared-bias integral matches a fine Riemann oracle") {
    const gpa::AmiseConstants c =
        gpa::amise_constants(SimSetting::numbered(1), k, w);
    const std::int64_t cells = 1000000;
    const double lo = 0.05, hi = 0.95;
    const double dx = (hi - lo) / static_cast<double>(cells);
    long double acc = 0.0L;
    for (std::int64_t i = 0; i < cells; ++i) {
      const double x = lo + (static_cast<double>(i) + 0.5) * dx;
      const double b = 0.1 * fd2(mu1_ref, x, 1e-5);
      acc += static_cast<long double>(b) * b * dx;
    }
    CHECK(c.b_bar ==
          doctest::Approx(static_cast<double>(acc)).epsilon(1e-6));
  }

  SUBCASE("weights that trim the whole support are rejected") {
    CHECK_THROWS_AS(
        gpa::amise_constants(SimSetting::numbered(1), k, WeightFn{2.0, 3.0, 0.1}),
        std::invalid_argument);
  }
}

TEST_CASE("reference bandwidth composes the constants") {
  const SimSetting s = SimSetting::numbered(1);
  const KernelSpec k = KernelSpec::epanechnikov();
  const WeightFn w{0.0, 1.0, 0.05};
  const gpa::AmiseConstants c = gpa::amise_constants(s, k, w);
  const double h = gpa::amise_reference_bandwidth(s, k, w, 10000);
  CHECK(h == gpa::amise_optimal(c.b_bar, c.v_bar, 10000));
  // Frozen value for the n = 10^4 benchmark configuration.
  CHECK(h == doctest::Approx(0.03617891396673175).epsilon(1e-12));
}

// =============================================================================
// Error metrics
// =============================================================================

TEST_CASE("root-mean-square metrics") {
  const std::vector<Estimate> exact{Estimate(1.0), Estimate(-2.0)};
  const std::vector<double> truth{1.0, -2.0};
  CHECK(gpa::rmse(exact, truth).value == 0.0);

  const std::vector<Estimate> off{Estimate(3.0)};
  const std::vector<double> one{1.0};
  CHECK(gpa::rmse(off, one).value == doctest::Approx(2.0).epsilon(1e-15));

  const std::vector<Estimate> mixed{Estimate(2.0), std::nullopt};
  const std::vector<double> obs{1.0, 5.0};
  const gpa::MetricResult r = gpa::rmpe(mixed, obs);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.n_used == 1);
  CHECK(r.n_undefined == 1);

  const std::vector<Estimate> none{std::nullopt};
  CHECK_THROWS_AS(gpa::rmse(none, one), std::runtime_error);
  CHECK_THROWS_AS(gpa::rmse(exact, one), std::invalid_argument);
  CHECK_THROWS_AS(gpa::rmse(std::vector<Estimate>{}, std::vector<double>{}),
                  std::invalid_argument);
}

TEST_CASE("relative bandwidth error") {
  const std::vector<double> selected{0.11, 0.09};
  CHECK(gpa::mrae(selected, 0.1) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(gpa::mrae(std::vector<double>{0.2}, 0.2) == 0.0);
  CHECK_THROWS_AS(gpa::mrae(std::vector<double>{}, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(gpa::mrae(selected, 0.0), std::invalid_argument);
}
