#pragma once

#include <cstdint>

#include "aprox/problems.hpp"
#include "aprox/rng.hpp"

namespace aprox {

struct GenSpec {
  LossTag family = LossTag::LeastSquares;
  Index m = 1000;
  Index n = 40;
  double kappa = 1.0;   // condition number of the planted design
  double sigma = 0.0;   // regression noise std
  double p = 0.0;       // label corruption probability
  Index K = 10;         // hinge class count
  std::uint64_t seed = 0;
  // Underdetermined least-squares/absolute-loss recipe with rows on the
  // sqrt(n)-sphere (requires n > m).
  bool interpolation = false;
  // Feasibility margins are |N(0, margin_scale^2)|.
  double margin_scale = 0.1;
};

// Throws ConfigError when a field is out of range.
void validate(const GenSpec& spec);

// A = Q D with Q the sign-fixed thin QR factor of an m x n Gaussian draw and
// D = diag(linspace(1, kappa, n)). Requires m >= n.
RowMatrix gen_conditioned_matrix(Index m, Index n, double kappa, RngStream& rng);

// Regression and logistic recipes use the rows of sqrt(m) * Q D, so that
// (1/m) A^T A = D^2 and each row has squared norm about sum_j d_j^2.
Dataset gen_regression(const GenSpec& spec, RngStream& rng);
Dataset gen_logistic(const GenSpec& spec, RngStream& rng);
Dataset gen_hinge(const GenSpec& spec, RngStream& rng);
Dataset gen_poisson(const GenSpec& spec, RngStream& rng);
Dataset gen_feasibility(const GenSpec& spec, RngStream& rng);
Dataset gen_interpolation(const GenSpec& spec, RngStream& rng);

// Dispatches on spec.family (and spec.interpolation) with a stream keyed by
// spec.seed, so identical specs give bit-identical datasets.
Dataset generate(const GenSpec& spec);

}  // namespace aprox
