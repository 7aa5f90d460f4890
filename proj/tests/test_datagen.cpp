#include <cmath>

#include "aprox/datagen.hpp"
#include "aprox/errors.hpp"
#include "doctest.h"

using namespace aprox;

namespace {

Vector singular_values(const RowMatrix& a) { return Eigen::JacobiSVD<Matrix>(Matrix(a)).singularValues(); }

GenSpec spec_for(LossTag tag, std::uint64_t seed) {
  GenSpec s;
  s.family = tag;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_SUITE("datagen") {
  TEST_CASE("conditioned matrix singular values") {
    RngStream r1(1, "cond");
    const Vector s1 = singular_values(gen_conditioned_matrix(200, 10, 1.0, r1));
    CHECK((s1.array() - 1.0).abs().maxCoeff() <= 1e-8);
    RngStream r15(2, "cond");
    const Vector s15 = singular_values(gen_conditioned_matrix(1000, 40, 15.0, r15));
    CHECK(s15.maxCoeff() / s15.minCoeff() == doctest::Approx(15.0).epsilon(1e-6));
    RngStream r(3, "cond");
    const RowMatrix one = gen_conditioned_matrix(50, 1, 7.0, r);
    CHECK(one.cols() == 1);
    CHECK(one.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("regression designs") {
    const Dataset clean = generate(spec_for(LossTag::LeastSquares, 4));
    CHECK(std::fabs(objective(clean, *clean.planted_optimum)) <= 1e-12);
    CHECK(clean.noiseless);
    // (1/m) A^T A = D^2 = I for kappa = 1.
    const Matrix gram = Matrix(clean.features.transpose() * clean.features) / 1000.0;
    CHECK((gram - Matrix::Identity(40, 40)).norm() <= 1e-8);

    GenSpec k15 = spec_for(LossTag::LeastSquares, 5);
    k15.kappa = 15;
    const Vector s = singular_values(generate(k15).features);
    CHECK(s.maxCoeff() / s.minCoeff() == doctest::Approx(15.0).epsilon(1e-6));

    GenSpec noisy = spec_for(LossTag::AbsoluteLoss, 6);
    noisy.sigma = 0.5;
    const Dataset nd = generate(noisy);
    const Vector resid = nd.features * *nd.planted_optimum - nd.targets;
    const double sd = std::sqrt(resid.squaredNorm() / 1000.0);
    WARN(std::fabs(sd - 0.5) <= 0.05);
    CHECK(!nd.noiseless);
  }

  TEST_CASE("generation is deterministic") {
    for (const LossTag tag : kAllLosses) {
      GenSpec s = spec_for(tag, 77);
      s.m = 100;
      s.n = 8;
      s.p = 0.05;
      const Dataset a = generate(s);
      const Dataset b = generate(s);
      CHECK(a.features == b.features);
      CHECK(a.targets == b.targets);
      s.seed = 78;
      CHECK(generate(s).features != a.features);
    }
  }

  TEST_CASE("logistic labels") {
    const Dataset d = generate(spec_for(LossTag::Logistic, 7));
    const Vector margins = (d.features * *d.planted_optimum).cwiseProduct(d.targets);
    CHECK(margins.minCoeff() > 0.0);
    CHECK(objective(d, (40.0 / margins.minCoeff()) * *d.planted_optimum) < 1e-6);

    GenSpec noisy = spec_for(LossTag::Logistic, 8);
    noisy.p = 0.01;
    const Dataset nd = generate(noisy);
    const Vector nm = (nd.features * *nd.planted_optimum).cwiseProduct(nd.targets);
    const long flipped = (nm.array() < 0.0).count();
    CHECK(flipped > 0);
    CHECK(flipped <= 60);
  }

  TEST_CASE("hinge labels are the planted argmax and separable") {
    GenSpec s = spec_for(LossTag::MulticlassHinge, 9);
    const Dataset d = generate(s);
    const Vector& u = *d.planted_optimum;
    const Index n = s.n;
    double min_margin = INFINITY;
    for (Index i = 0; i < d.size(); ++i) {
      const int label = static_cast<int>(d.targets(i));
      const double own = d.sample(i).a.dot(u.segment(label * n, n));
      for (Index j = 0; j < s.K; ++j) {
        if (j != label) min_margin = std::min(min_margin, own - d.sample(i).a.dot(u.segment(j * n, n)));
      }
    }
    CHECK(min_margin > 0.0);
    // The loss vanishes once the scaled margin exceeds 1.
    const double t = std::max(1e3, 2.0 / min_margin);
    CHECK(objective(d, Vector(t * u)) == 0.0);
    WARN(objective(d, Vector(1e3 * u)) <= 1e-6);
  }

  TEST_CASE("poisson design") {
    const Dataset d = generate(spec_for(LossTag::Poisson, 10));
    double sq = 0.0;
    for (Index i = 0; i < d.size(); ++i) sq += d.sample(i).a.squaredNorm();
    CHECK(std::fabs(sq / 1000.0 - 1.0) <= 0.15);
    for (Index i = 0; i < d.size(); ++i) {
      CHECK(d.targets(i) >= 0.0);
      CHECK(d.targets(i) == std::floor(d.targets(i)));
    }
    CHECK(d.planted_optimum->norm() == doctest::Approx(std::sqrt(40.0)).epsilon(1e-12));
    CHECK(!d.noiseless);
  }

  TEST_CASE("feasibility design") {
    const Dataset d = generate(spec_for(LossTag::HalfspaceDist, 11));
    const Vector slack = d.targets - d.features * *d.planted_optimum;
    CHECK(slack.minCoeff() >= 0.0);
    CHECK(objective(d, *d.planted_optimum) == 0.0);
    for (Index i = 0; i < d.size(); ++i) CHECK(d.sample(i).a.norm() == doctest::Approx(1.0).epsilon(1e-12));
    // |N(0, 0.1^2)| has mean 0.1 sqrt(2/pi).
    CHECK(slack.mean() == doctest::Approx(0.1 * std::sqrt(2.0 / M_PI)).epsilon(0.1));
  }

  TEST_CASE("interpolation design") {
    GenSpec s = spec_for(LossTag::LeastSquares, 12);
    s.m = 40;
    s.n = 200;
    s.interpolation = true;
    const Dataset d = generate(s);
    CHECK(objective(d, *d.planted_optimum) <= 1e-20);
    for (Index i = 0; i < d.size(); ++i) {
      CHECK(d.sample(i).a.norm() == doctest::Approx(std::sqrt(200.0)).epsilon(1e-12));
    }
    const Vector sv = singular_values(d.features);
    CHECK(sv(39) >= std::sqrt(40.0));
    Eigen::HouseholderQR<Matrix> qr(Matrix(d.features.transpose()));
    const Matrix q = qr.householderQ() * Matrix::Identity(200, 40);
    const Vector& x = *d.planted_optimum;
    CHECK((x - q * (q.transpose() * x)).norm() <= 1e-10);
    CHECK(reference_optimum(d).f_star == 0.0);
  }

  TEST_CASE("spec validation") {
    GenSpec s;
    s.kappa = 0.5;
    CHECK_THROWS_AS(generate(s), ConfigError);
    s = GenSpec{};
    s.m = 10;
    s.n = 40;
    CHECK_THROWS_AS(generate(s), ConfigError);
    s = GenSpec{};
    s.interpolation = true;
    CHECK_THROWS_AS(generate(s), ConfigError);
    s = GenSpec{};
    s.p = 1.5;
    CHECK_THROWS_AS(generate(s), ConfigError);
  }
}
