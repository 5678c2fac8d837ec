#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "realign/random_states.hpp"
#include "realign/spectra.hpp"

namespace {

using namespace realign;

ComplexMatrix random_unitary(Eigen::Index n, std::uint64_t stream) {
  const ComplexMatrix g = sample_gaussian(static_cast<std::size_t>(n), static_cast<std::size_t>(n), {21, stream});
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  return qr.householderQ();
}

// Independent reference: adaptive double-exponential quadrature of the density.
double quadrature(double a, double b, auto&& f) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b);
}

TEST(SingularValues, Examples) {
  const auto id = singular_values(ComplexMatrix::Identity(5, 5));
  ASSERT_EQ(id.size(), 5u);
  for (double v : id.values()) EXPECT_NEAR(v, 1.0, 1e-14);

  ComplexMatrix diag = ComplexMatrix::Zero(2, 2);
  diag(0, 0) = 3.0;
  diag(1, 1) = -4.0;
  const auto dv = singular_values(diag);
  EXPECT_NEAR(dv.values()[0], 4.0, 1e-14);
  EXPECT_NEAR(dv.values()[1], 3.0, 1e-14);

  ComplexVector u = sample_gaussian(4, 1, {1, 0});
  ComplexVector v = sample_gaussian(6, 1, {1, 1});
  u.normalize();
  v.normalize();
  const auto r1 = singular_values(u * v.adjoint());
  ASSERT_EQ(r1.size(), 4u);
  EXPECT_NEAR(r1.values()[0], 1.0, 1e-14);
  for (std::size_t i = 1; i < r1.size(); ++i) EXPECT_LT(r1.values()[i], 1e-14);
}

TEST(SingularValues, SortedNonnegativeWithMinDimension) {
  const auto spec = singular_values(sample_gaussian(7, 4, {2, 0}));
  EXPECT_EQ(spec.size(), 4u);
  EXPECT_EQ(spec.dimension(), 4u);
  for (std::size_t i = 0; i + 1 < spec.size(); ++i) EXPECT_GE(spec.values()[i], spec.values()[i + 1]);
  EXPECT_GE(spec.values().back(), 0.0);
}

TEST(SingularValues, RejectsNonFinite) {
  ComplexMatrix m = ComplexMatrix::Identity(3, 3);
  m(1, 2) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(singular_values(m), domain_error);
  m(1, 2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(singular_values(m), domain_error);
}

TEST(SchattenNorm, FrobeniusIdentity) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    const ComplexMatrix m = sample_gaussian(5 + t, 8, {3, t});
    const double fro2 = m.cwiseAbs2().sum();
    const double s2 = schatten_norm(m, 2.0);
    EXPECT_NEAR(s2 * s2, fro2, 1e-10 * fro2);
  }
}

TEST(SchattenNorm, TraceNormExamples) {
  EXPECT_NEAR(trace_norm(ComplexMatrix::Identity(6, 6)), 6.0, 1e-13);
  const DensityMatrix rho = induced_state(BipartiteShape(2, 3, 4), {4, 0});
  EXPECT_NEAR(trace_norm(rho.matrix()), 1.0, 1e-12);
  EXPECT_THROW(schatten_norm(ComplexMatrix::Identity(2, 2), 0.5), domain_error);
}

TEST(SchattenNorm, UnitarilyInvariant) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    const ComplexMatrix m = sample_gaussian(6, 6, {5, t});
    const ComplexMatrix u = random_unitary(6, 2 * t);
    const ComplexMatrix v = random_unitary(6, 2 * t + 1);
    EXPECT_NEAR(trace_norm(ComplexMatrix(u * m * v)), trace_norm(m), 1e-9);
  }
}

TEST(SchattenNorm, HolderBoundsForQ) {
  const auto shape = BipartiteShape::balanced(10, 20);
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto spec = singular_values(q_matrix(sample_wishart(shape, {6, t})));
    const double n1 = schatten_norm(spec, 1.0);
    const double n2 = schatten_norm(spec, 2.0);
    const double n4 = schatten_norm(spec, 4.0);
    EXPECT_LE(n2 * n2 * n2 / (n4 * n4), n1 * (1.0 + 1e-12));
    EXPECT_LE(n1, 10.0 * n2 * (1.0 + 1e-12));
  }
}

TEST(SpectrumMoment, Examples) {
  const EmpiricalSpectrum spec({2.0, 0.0}, 2);
  EXPECT_DOUBLE_EQ(spectrum_moment(spec, 2), 2.0);
  EXPECT_DOUBLE_EQ(spectrum_moment(spec, 0), 1.0);
  EXPECT_DOUBLE_EQ(spectrum_moment(EmpiricalSpectrum({}, 3), 0), 1.0);
}

TEST(QuarterCircle, DensityIntegratesToOne) {
  EXPECT_NEAR(quadrature(0.0, 2.0, [](double x) { return QuarterCircleLaw::density(x); }), 1.0, 1e-9);
  EXPECT_EQ(QuarterCircleLaw::density(-0.1), 0.0);
  EXPECT_EQ(QuarterCircleLaw::density(2.1), 0.0);
}

TEST(QuarterCircle, MomentsAgainstQuadrature) {
  for (unsigned k = 0; k <= 8; ++k) {
    const double q = quadrature(0.0, 2.0, [k](double x) { return std::pow(x, k) * QuarterCircleLaw::density(x); });
    EXPECT_NEAR(QuarterCircleLaw::moment(k), q, 1e-8) << "k=" << k;
  }
}

TEST(QuarterCircle, CatalanEvenMomentsAndMean) {
  EXPECT_DOUBLE_EQ(QuarterCircleLaw::moment(2), 1.0);
  EXPECT_DOUBLE_EQ(QuarterCircleLaw::moment(4), 2.0);
  EXPECT_DOUBLE_EQ(QuarterCircleLaw::moment(6), 5.0);
  EXPECT_DOUBLE_EQ(QuarterCircleLaw::moment(8), 14.0);
  EXPECT_NEAR(QuarterCircleLaw::mean(), 8.0 / (3.0 * std::numbers::pi), 1e-14);
  EXPECT_NEAR(QuarterCircleLaw::mean(), 0.84883, 1e-5);
}

TEST(QuarterCircle, CdfAgainstQuadrature) {
  for (int i = 0; i <= 40; ++i) {
    const double x = 0.05 * i;
    const double q = x == 0.0 ? 0.0 : quadrature(0.0, x, [](double y) { return QuarterCircleLaw::density(y); });
    EXPECT_NEAR(QuarterCircleLaw::cdf(x), q, 1e-10) << "x=" << x;
  }
  EXPECT_EQ(QuarterCircleLaw::cdf(0.0), 0.0);
  EXPECT_EQ(QuarterCircleLaw::cdf(2.0), 1.0);
  double prev = 0.0;
  for (int i = 1; i <= 200; ++i) {
    const double c = QuarterCircleLaw::cdf(0.01 * i);
    EXPECT_GE(c, prev);
    prev = c;
  }
}

TEST(QuarterCircle, QuantileInvertsCdf) {
  for (int i = 1; i < 100; ++i) {
    const double u = 0.01 * i;
    EXPECT_NEAR(QuarterCircleLaw::cdf(QuarterCircleLaw::quantile(u)), u, 1e-12);
  }
}

TEST(KsDistance, QuantileSampleIsClose) {
  const std::size_t n = 1000;
  std::vector<double> xs;
  for (std::size_t i = 1; i <= n; ++i) xs.push_back(QuarterCircleLaw::quantile((i - 0.5) / n));
  EXPECT_LE(ks_distance(EmpiricalSpectrum(xs), QuarterCircleLaw{}), 1.0 / n + 1e-9);
}

TEST(KsDistance, ConstantSpectrum) {
  const double cdf1 = quadrature(0.0, 1.0, [](double y) { return QuarterCircleLaw::density(y); });
  const EmpiricalSpectrum ones(std::vector<double>(50, 1.0));
  EXPECT_NEAR(ks_distance(ones, QuarterCircleLaw{}), 1.0 - cdf1, 1e-10);
}

TEST(KsDistance, EmptyThrows) {
  EXPECT_THROW(ks_distance(EmpiricalSpectrum({}, 1), QuarterCircleLaw{}), domain_error);
}

TEST(Histogram, BinsCoverAllValues) {
  const EmpiricalSpectrum spec({0.0, 0.5, 1.0, 2.4999, 2.5});
  const Histogram h = histogram(spec);
  EXPECT_EQ(h.counts.size(), histogram_bins);
  EXPECT_DOUBLE_EQ(h.upper, 2.5);
  std::size_t total = 0;
  for (auto c : h.counts) total += c;
  EXPECT_EQ(total, 5u);
  EXPECT_EQ(h.counts.front(), 1u);
  EXPECT_EQ(h.counts.back(), 2u);

  const Histogram wide = histogram(EmpiricalSpectrum({3.2, 0.1}));
  EXPECT_DOUBLE_EQ(wide.upper, 3.2);
}

}  // namespace
