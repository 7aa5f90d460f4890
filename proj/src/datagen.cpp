#include "aprox/datagen.hpp"

#include <cmath>
#include <string>

#include "aprox/errors.hpp"

namespace aprox {
namespace {

Vector gaussian_vector(Index n, RngStream& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

Vector sphere_point(Index n, double radius, RngStream& rng) {
  for (;;) {
    Vector v = gaussian_vector(n, rng);
    const double norm = v.norm();
    if (norm > 0.0) return radius * v / norm;
  }
}

Dataset empty_dataset(const GenSpec& spec, Index n, Index classes) {
  Dataset data;
  data.family = LossFamily{spec.family, n, classes};
  data.features.resize(spec.m, n);
  data.targets.resize(spec.m);
  return data;
}

RowMatrix scaled_design(const GenSpec& spec, RngStream& rng) {
  return std::sqrt(static_cast<double>(spec.m)) *
         gen_conditioned_matrix(spec.m, spec.n, spec.kappa, rng);
}

}  // namespace

void validate(const GenSpec& spec) {
  if (spec.m < 1 || spec.n < 1) throw ConfigError("gen_spec: m and n must be >= 1");
  if (!(spec.kappa >= 1.0)) throw ConfigError("gen_spec: kappa must be >= 1");
  if (!(spec.sigma >= 0.0)) throw ConfigError("gen_spec: sigma must be >= 0");
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw ConfigError("gen_spec: p must lie in [0, 1]");
  if (spec.family == LossTag::MulticlassHinge && spec.K < 2) {
    throw ConfigError("gen_spec: K must be >= 2 for the multiclass hinge");
  }
  if (!(spec.margin_scale >= 0.0)) throw ConfigError("gen_spec: margin_scale must be >= 0");
  if (spec.interpolation) {
    if (spec.family != LossTag::LeastSquares && spec.family != LossTag::AbsoluteLoss) {
      throw ConfigError("gen_spec: interpolation applies to LeastSquares or AbsoluteLoss");
    }
    if (spec.n <= spec.m) throw ConfigError("gen_spec: interpolation requires n > m");
  } else if ((spec.family == LossTag::LeastSquares || spec.family == LossTag::AbsoluteLoss ||
              spec.family == LossTag::Logistic) &&
             spec.m < spec.n) {
    throw ConfigError("gen_spec: conditioned designs require m >= n");
  }
}

RowMatrix gen_conditioned_matrix(Index m, Index n, double kappa, RngStream& rng) {
  if (m < n) throw ConfigError("gen_conditioned_matrix: requires m >= n");
  Vector diag(n);
  for (Index j = 0; j < n; ++j) {
    diag(j) = n == 1 ? 1.0 : 1.0 + (kappa - 1.0) * static_cast<double>(j) / static_cast<double>(n - 1);
  }
  for (int attempt = 0; attempt < 8; ++attempt) {
    Matrix g(m, n);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < n; ++j) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    bool full_rank = true;
    for (Index j = 0; j < n; ++j) full_rank = full_rank && std::fabs(r(j, j)) > 1e-10;
    if (!full_rank) continue;
    Matrix q = qr.householderQ() * Matrix::Identity(m, n);
    for (Index j = 0; j < n; ++j) {
      if (r(j, j) < 0.0) q.col(j) *= -1.0;
    }
    return RowMatrix(q * diag.asDiagonal());
  }
  throw RankDeficient("gen_conditioned_matrix: Gaussian draw was rank deficient");
}

Dataset gen_regression(const GenSpec& spec, RngStream& rng) {
  Dataset data = empty_dataset(spec, spec.n, 1);
  data.features = scaled_design(spec, rng);
  const Vector x_star = gaussian_vector(spec.n, rng);
  data.targets = data.features * x_star;
  for (Index i = 0; i < spec.m; ++i) data.targets(i) += spec.sigma * rng.normal();
  data.planted_optimum = x_star;
  data.noiseless = spec.sigma == 0.0;
  data.noise_level = spec.sigma;
  return data;
}

Dataset gen_logistic(const GenSpec& spec, RngStream& rng) {
  Dataset data = empty_dataset(spec, spec.n, 1);
  data.features = scaled_design(spec, rng);
  const Vector u_star = gaussian_vector(spec.n, rng);
  const Vector margin = data.features * u_star;
  for (Index i = 0; i < spec.m; ++i) {
    double label = margin(i) >= 0.0 ? 1.0 : -1.0;
    if (rng.bernoulli(spec.p)) label = -label;
    data.targets(i) = label;
  }
  data.planted_optimum = u_star;
  data.noiseless = spec.p == 0.0;
  data.noise_level = spec.p;
  return data;
}

Dataset gen_hinge(const GenSpec& spec, RngStream& rng) {
  Dataset data = empty_dataset(spec, spec.n, spec.K);
  for (Index i = 0; i < spec.m; ++i) data.features.row(i) = gaussian_vector(spec.n, rng).transpose();
  Matrix u_star(spec.n, spec.K);
  for (Index j = 0; j < spec.K; ++j) u_star.col(j) = gaussian_vector(spec.n, rng);
  const Matrix scores = data.features * u_star;
  for (Index i = 0; i < spec.m; ++i) {
    Index label = 0;
    scores.row(i).maxCoeff(&label);
    if (rng.bernoulli(spec.p)) label = static_cast<Index>(rng.index(static_cast<std::uint64_t>(spec.K)));
    data.targets(i) = static_cast<double>(label);
  }
  data.planted_optimum = Eigen::Map<const Vector>(u_star.data(), u_star.size());
  data.noiseless = spec.p == 0.0;
  data.noise_level = spec.p;
  return data;
}

Dataset gen_poisson(const GenSpec& spec, RngStream& rng) {
  Dataset data = empty_dataset(spec, spec.n, 1);
  const double n = static_cast<double>(spec.n);
  const Vector u = sphere_point(spec.n, std::sqrt(n), rng);
  for (Index i = 0; i < spec.m; ++i) {
    data.features.row(i) = (gaussian_vector(spec.n, rng) / std::sqrt(n)).transpose();
  }
  const Vector eta = data.features * u;
  for (Index i = 0; i < spec.m; ++i) data.targets(i) = static_cast<double>(rng.poisson(std::exp(eta(i))));
  data.planted_optimum = u;
  data.noiseless = false;
  data.noise_level = 0.0;
  return data;
}

Dataset gen_feasibility(const GenSpec& spec, RngStream& rng) {
  Dataset data = empty_dataset(spec, spec.n, 1);
  const Vector x_star = gaussian_vector(spec.n, rng);
  for (Index i = 0; i < spec.m; ++i) {
    const Vector a = sphere_point(spec.n, 1.0, rng);
    data.features.row(i) = a.transpose();
    data.targets(i) = a.dot(x_star) + std::fabs(spec.margin_scale * rng.normal());
  }
  data.planted_optimum = x_star;
  data.noiseless = true;
  data.noise_level = 0.0;
  return data;
}

Dataset gen_interpolation(const GenSpec& spec, RngStream& rng) {
  if (spec.n <= spec.m) throw ConfigError("gen_interpolation: requires n > m");
  const double n = static_cast<double>(spec.n);
  const double sqrt_m = std::sqrt(static_cast<double>(spec.m));
  for (int attempt = 0; attempt < 100; ++attempt) {
    Dataset data = empty_dataset(spec, spec.n, 1);
    for (Index i = 0; i < spec.m; ++i) data.features.row(i) = sphere_point(spec.n, std::sqrt(n), rng).transpose();
    const Vector sv = Eigen::JacobiSVD<Matrix>(Matrix(data.features)).singularValues();
    const Vector z = gaussian_vector(spec.n, rng);
    if (sv(spec.m - 1) < sqrt_m) continue;
    // Orthogonal projection of z onto the row span.
    Eigen::HouseholderQR<Matrix> qr(Matrix(data.features.transpose()));
    const Matrix q = qr.householderQ() * Matrix::Identity(spec.n, spec.m);
    const Vector x_star = q * (q.transpose() * z);
    data.targets = data.features * x_star;
    data.planted_optimum = x_star;
    data.noiseless = true;
    data.noise_level = 0.0;
    return data;
  }
  throw RankDeficient("gen_interpolation: sigma_m(A) >= sqrt(m) not reached in 100 draws");
}

Dataset generate(const GenSpec& spec) {
  validate(spec);
  RngStream rng(spec.seed, "datagen", {static_cast<std::uint64_t>(spec.family), spec.interpolation ? 1u : 0u});
  if (spec.interpolation) return gen_interpolation(spec, rng);
  switch (spec.family) {
    case LossTag::LeastSquares:
    case LossTag::AbsoluteLoss: return gen_regression(spec, rng);
    case LossTag::Logistic: return gen_logistic(spec, rng);
    case LossTag::MulticlassHinge: return gen_hinge(spec, rng);
    case LossTag::Poisson: return gen_poisson(spec, rng);
    case LossTag::HalfspaceDist: return gen_feasibility(spec, rng);
  }
  throw ConfigError("generate: unknown family");
}

}  // namespace aprox
