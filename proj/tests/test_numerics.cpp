#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cedr/errors.hpp"
#include "cedr/numerics.hpp"
#include "cedr/rng.hpp"

using namespace cedr;

TEST_CASE("std_normal_cdf known values") {
  CHECK(std_normal_cdf(0.0) == 0.5);  // symmetry of the standard normal
  // High-precision erf oracle.
  CHECK(std_normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
  // Tail oracle, relative tolerance.
  CHECK(std_normal_cdf(-8.0) ==
        doctest::Approx(6.22096057427174e-16).epsilon(1e-6));
  CHECK(std_normal_cdf(8.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(std_normal_cdf(std::nan("")), DomainError);
  CHECK_THROWS_AS(std_normal_cdf(INFINITY), DomainError);
}

TEST_CASE("std_normal_cdf is monotone") {
  double prev = -1.0;
  for (double x = -10.0; x <= 10.0; x += 0.01) {
    double v = std_normal_cdf(x);
    CHECK(v >= prev);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("std_normal_quantile known values") {
  CHECK(std_normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std_normal_quantile(0.75) == doctest::Approx(0.674490).epsilon(1e-6));
  CHECK(std_normal_quantile(0.3) == doctest::Approx(-0.524401).epsilon(1e-6));
  CHECK_THROWS_AS(std_normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(std_normal_quantile(1.0), DomainError);
  CHECK_THROWS_AS(std_normal_quantile(-0.2), DomainError);
}

TEST_CASE("quantile satisfies Phi(result) = p within 1e-10") {
  for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-9}) {
    CHECK(std_normal_cdf(std_normal_quantile(p)) ==
          doctest::Approx(p).epsilon(1e-10));
  }
}

TEST_CASE("std_normal_logcdf stable in the deep tail") {
  // log Phi(-30) = log(phi(30)/30 * (1 + o(1))): compare with the asymptotic
  // expansion log phi(x) - log(-x) - log(1 + 1/x^2 ...) at x = -30.
  double v = std_normal_logcdf(-30.0);
  double asym = -0.5 * 30.0 * 30.0 - 0.5 * std::log(2.0 * M_PI) -
                std::log(30.0) + std::log1p(-1.0 / 900.0);
  CHECK(v == doctest::Approx(asym).epsilon(1e-6));
  CHECK(std_normal_logcdf(5.0) == doctest::Approx(std::log(std_normal_cdf(5.0))));
}

TEST_CASE("inverse_mills matches direct ratio where both are stable") {
  for (double z = -6.0; z <= 6.0; z += 0.25) {
    double direct = std_normal_pdf(z) / std_normal_cdf(z);
    CHECK(inverse_mills(z) == doctest::Approx(direct).epsilon(1e-10));
  }
  // Deep left tail: ratio approaches -z.
  CHECK(inverse_mills(-40.0) == doctest::Approx(40.0).epsilon(1e-2));
  CHECK(std::isfinite(inverse_mills(-300.0)));
}

TEST_CASE("chi2_quantile known values (df = 3)") {
  // Numerical-integration + root-find oracle.
  CHECK(chi2_quantile(0.5, 3) == doctest::Approx(2.365974).epsilon(1e-5));
  CHECK(chi2_quantile(0.95, 3) == doctest::Approx(7.814728).epsilon(1e-5));
  // Lower support boundary.
  CHECK(chi2_quantile(1e-12, 3) < 1e-3);
  CHECK_THROWS_AS(chi2_quantile(0.0, 3), DomainError);
  CHECK_THROWS_AS(chi2_quantile(1.0, 3), DomainError);
}

TEST_CASE("chi2_quantile other degrees of freedom") {
  CHECK(chi2_quantile(0.3, 7) == doctest::Approx(4.671330448981073).epsilon(1e-8));
  CHECK(chi2_quantile(0.975, 999) ==
        doctest::Approx(1088.4870677259353).epsilon(1e-8));
  CHECK(chi2_quantile(0.025, 999) ==
        doctest::Approx(913.3009983021134).epsilon(1e-8));
}

TEST_CASE("chi2 quantile/CDF round trip within 1e-8") {
  for (double df : {1.0, 3.0, 10.0, 250.0}) {
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999}) {
      CHECK(chi2_cdf(chi2_quantile(p, df), df) ==
            doctest::Approx(p).epsilon(1e-8));
    }
  }
}

TEST_CASE("cholesky identity and hand-worked 2x2") {
  Matrix id = Matrix::identity(3);
  CHECK(cholesky(id) == id);  // identity factorization

  Matrix s(2, 2);
  s(0, 0) = 1.0; s(0, 1) = 0.5;
  s(1, 0) = 0.5; s(1, 1) = 1.0;
  Matrix l = cholesky(s);
  CHECK(l(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(l(0, 1) == 0.0);
  CHECK(l(1, 0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(l(1, 1) == doctest::Approx(0.866025).epsilon(1e-6));
}

TEST_CASE("cholesky rejects an indefinite matrix naming the pivot") {
  Matrix s(2, 2);
  s(0, 0) = 1.0; s(0, 1) = 2.0;
  s(1, 0) = 2.0; s(1, 1) = 1.0;  // eigenvalue -1
  try {
    cholesky(s);
    FAIL("expected DecompositionError");
  } catch (const DecompositionError& e) {
    CHECK(e.pivot_index == 1);
  }
}

TEST_CASE("cholesky tolerates an exactly singular PSD matrix") {
  // Rank-1 PSD: pivot 1 is exactly zero.
  Matrix s(2, 2);
  s(0, 0) = 1.0; s(0, 1) = 1.0;
  s(1, 0) = 1.0; s(1, 1) = 1.0;
  Matrix l = cholesky(s);
  CHECK(l(1, 1) == 0.0);
  // Reconstruction still holds.
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double r = 0.0;
      for (std::size_t k = 0; k < 2; ++k) r += l(i, k) * l(j, k);
      CHECK(r == doctest::Approx(s(i, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("mvn_sample: empty sample, determinism, covariance") {
  Matrix l = Matrix::identity(3);

  RngHandle rng(7);
  Matrix empty = mvn_sample(l, 0, rng);
  CHECK(empty.rows() == 0);
  CHECK(empty.cols() == 3);

  RngHandle a(42), b(42);
  CHECK(mvn_sample(l, 100, a) == mvn_sample(l, 100, b));  // bit-identical

  RngHandle big(3);
  const std::size_t n = 1000000;
  Matrix draws = mvn_sample(l, n, big);
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t q = 0; q <= p; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += draws(i, p) * draws(i, q);
      double target = p == q ? 1.0 : 0.0;
      CHECK(s / static_cast<double>(n) == doctest::Approx(target).epsilon(0.01));
    }
  }
}

TEST_CASE("sample_skewness") {
  CHECK(sample_skewness({-1.0, 0.0, 1.0}) == doctest::Approx(0.0));  // symmetric
  CHECK(sample_skewness({0.0, 0.0, 0.0, 1.0}) ==
        doctest::Approx(1.154701).epsilon(1e-6));
  CHECK_THROWS_AS(sample_skewness({1.0, 2.0}), DegenerateInputError);
  CHECK_THROWS_AS(sample_skewness({2.0, 2.0, 2.0, 2.0}), DegenerateInputError);

  // Standardized chi-squared(3) has skewness sqrt(8/3) ~ 1.633.
  RngHandle rng(11);
  std::vector<double> x(100000);
  for (double& v : x) {
    v = (chi2_quantile(rng.uniform(), 3.0) - 3.0) / std::sqrt(6.0);
  }
  CHECK(sample_skewness(x) == doctest::Approx(1.63).epsilon(0.1));
}

TEST_CASE("RngHandle determinism and substreams") {
  RngHandle a(123), b(123);
  for (int i = 0; i < 1000; ++i) CHECK(a.uniform() == b.uniform());

  RngHandle parent(9);
  RngHandle s0 = parent.substream(0);
  RngHandle s1 = parent.substream(1);
  RngHandle p2(9);
  // Substreams differ from each other and from the parent stream.
  CHECK(s0.uniform() != s1.uniform());
  CHECK(p2.uniform() != parent.substream(0).uniform());

  RngHandle u(5);
  for (int i = 0; i < 10000; ++i) {
    double v = u.uniform();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("quantile helper matches linear interpolation") {
  std::vector<double> x{4.0, 1.0, 3.0, 2.0};
  CHECK(quantile(x, 0.0) == 1.0);
  CHECK(quantile(x, 1.0) == 4.0);
  CHECK(quantile(x, 0.5) == doctest::Approx(2.5));
  CHECK(quantile(x, 0.25) == doctest::Approx(1.75));
}
