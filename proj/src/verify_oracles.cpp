#include <quadmath.h>

#include <algorithm>
#include <cmath>

#include "aprox/errors.hpp"
#include "aprox/verify.hpp"

namespace aprox::verify {
namespace {

using quad = __float128;

quad to_quad(double v) { return static_cast<quad>(v); }

quad dot_quad(const Eigen::Map<const Vector>& a, const Vector& x) {
  quad acc = 0;
  for (Index i = 0; i < a.size(); ++i) acc += to_quad(a(i)) * to_quad(x(i));
  return acc;
}

// Scalar link loss l(eta) of each single-direction family, in quad precision.
quad link_loss(LossTag tag, quad eta, double target, quad norm_a) {
  const quad b = to_quad(target);
  switch (tag) {
    case LossTag::LeastSquares: {
      const quad r = eta - b;
      return r * r / 2;
    }
    case LossTag::AbsoluteLoss: return fabsq(eta - b);
    case LossTag::Logistic: {
      const quad u = -b * eta;
      return u > 0 ? u + log1pq(expq(-u)) : log1pq(expq(u));
    }
    case LossTag::Poisson: return expq(eta) - b * eta + lgammaq(b + 1);
    case LossTag::HalfspaceDist: return eta > b ? (eta - b) / norm_a : quad(0);
    case LossTag::MulticlassHinge: break;
  }
  return 0;
}

// Golden-section minimizer of a convex function on [lo, hi].
template <class F>
quad golden_section(F&& h, quad lo, quad hi, quad width) {
  const quad inv_phi = (sqrtq(quad(5)) - 1) / 2;
  quad c = hi - inv_phi * (hi - lo);
  quad d = lo + inv_phi * (hi - lo);
  quad hc = h(c);
  quad hd = h(d);
  for (int it = 0; it < 400 && hi - lo > width; ++it) {
    if (hc <= hd) {
      hi = d;
      d = c;
      hd = hc;
      c = hi - inv_phi * (hi - lo);
      hc = h(c);
    } else {
      lo = c;
      c = d;
      hc = hd;
      d = lo + inv_phi * (hi - lo);
      hd = h(d);
    }
  }
  return (lo + hi) / 2;
}

Vector hinge_oracle(const LossFamily& family, const SampleView& s, const Vector& x, double alpha,
                    double radius) {
  if (family.dim != 1 || family.classes != 2) {
    throw Error("hinge prox oracle supports K = 2, n = 1 only");
  }
  const int label = static_cast<int>(s.target);
  const int other = 1 - label;
  const quad a = to_quad(s.a(0));
  const quad x0 = to_quad(x(0));
  const quad x1 = to_quad(x(1));
  const quad inv2a = 1 / (2 * to_quad(alpha));
  const quad r = to_quad(radius);
  const auto h = [&](quad y0, quad y1) {
    const quad y[2] = {y0, y1};
    const quad margin = 1 + a * (y[other] - y[label]);
    const quad loss = margin > 0 ? margin : quad(0);
    return loss + ((y0 - x0) * (y0 - x0) + (y1 - x1) * (y1 - x1)) * inv2a;
  };
  const auto inner = [&](quad y0) {
    return golden_section([&](quad y1) { return h(y0, y1); }, x1 - r, x1 + r, quad(1e-13));
  };
  const quad y0 = golden_section([&](quad t) { return h(t, inner(t)); }, x0 - r, x0 + r,
                                 quad(1e-11));
  const quad y1 = inner(y0);
  Vector y(2);
  y << static_cast<double>(y0), static_cast<double>(y1);
  return y;
}

}  // namespace

Vector grid_prox_oracle(const LossFamily& family, const SampleView& s, const Vector& x,
                        double alpha) {
  const double gnorm = subgrad(family, s, x).norm();
  if (gnorm == 0.0) return x;
  const double radius = 2.0 * alpha * gnorm;
  if (family.tag == LossTag::MulticlassHinge) return hinge_oracle(family, s, x, alpha, radius);

  quad a2 = 0;
  for (Index i = 0; i < s.a.size(); ++i) a2 += to_quad(s.a(i)) * to_quad(s.a(i));
  const quad norm_a = sqrtq(a2);
  const quad eta0 = dot_quad(s.a, x);
  const quad inv2a = 1 / (2 * to_quad(alpha));
  const auto h = [&](quad t) {
    return link_loss(family.tag, eta0 - t * norm_a, s.target, norm_a) + t * t * inv2a;
  };
  const quad t = golden_section(h, -to_quad(radius), to_quad(radius), quad(1e-11));
  const double shift = static_cast<double>(t / norm_a);
  return x - shift * s.a;
}

double model_value(ModelKind kind, const Vector& x, const SampleOracle& f, double alpha,
                   const Vector& y) {
  const FirstOrderInfo info = f.first_order(x);
  const AffineMinorant l1 = AffineMinorant::tangent(x, info);
  switch (kind) {
    case ModelKind::SGM: return l1(y);
    case ModelKind::Truncated: return std::max(l1(y), info.inf_value);
    case ModelKind::FullProx: return f.value(y);
    case ModelKind::Bundle2: {
      const Vector x1 = sgm_step(x, info, alpha);
      const AffineMinorant l2 = AffineMinorant::tangent(x1, f.first_order(x1));
      return std::max(l1(y), l2(y));
    }
  }
  return 0.0;
}

RandomInstance random_instance(LossTag tag, RngStream& rng, bool oracle_sized) {
  RandomInstance inst;
  inst.family.tag = tag;
  inst.family.dim = oracle_sized && tag == LossTag::MulticlassHinge
                        ? 1
                        : 1 + static_cast<Index>(rng.index(5));
  if (tag == LossTag::MulticlassHinge) {
    inst.family.classes = oracle_sized ? 2 : 2 + static_cast<Index>(rng.index(4));
  }
  const Index n = inst.family.dim;
  const double feature_scale = tag == LossTag::Poisson ? 1.0 / std::sqrt(static_cast<double>(n))
                                                       : std::pow(10.0, rng.uniform() - 0.5);
  inst.a.resize(n);
  for (Index i = 0; i < n; ++i) inst.a(i) = feature_scale * rng.normal();
  const double x_scale = tag == LossTag::Poisson ? 1.0 : std::pow(10.0, 2.0 * rng.uniform() - 1.0);
  inst.x.resize(inst.family.param_dim());
  for (Index i = 0; i < inst.x.size(); ++i) inst.x(i) = x_scale * rng.normal();
  inst.alpha = std::pow(10.0, 5.0 * rng.uniform() - 3.0);
  switch (tag) {
    case LossTag::LeastSquares:
    case LossTag::AbsoluteLoss: inst.target = 2.0 * rng.normal(); break;
    case LossTag::Logistic: inst.target = rng.bernoulli(0.5) ? 1.0 : -1.0; break;
    case LossTag::MulticlassHinge:
      inst.target = static_cast<double>(rng.index(static_cast<std::uint64_t>(inst.family.classes)));
      break;
    case LossTag::Poisson:
      inst.target = static_cast<double>(rng.poisson(std::exp(rng.normal())));
      break;
    case LossTag::HalfspaceDist: inst.target = rng.normal(); break;
  }
  return inst;
}

double QuarticLoss::value(const Vector& x) const {
  const double v = x(0);
  return v * v * v * v / 4.0;
}

FirstOrderInfo QuarticLoss::first_order(const Vector& x) const {
  Vector g(1);
  g(0) = x(0) * x(0) * x(0);
  return FirstOrderInfo{value(x), g, 0.0};
}

// Root of y + alpha y^3 = x by Newton from y = x; the cubic is convex on the
// side of the root that contains x, so the iterates move monotonically.
Vector QuarticLoss::prox(const Vector& x, double alpha) const {
  const double target = x(0);
  double y = target;
  for (int it = 0; it < 200 && y != 0.0; ++it) {
    const double phi = y + alpha * y * y * y - target;
    const double next = y - phi / (1.0 + 3.0 * alpha * y * y);
    if (next == y || std::fabs(next) >= std::fabs(y)) break;
    y = next;
  }
  Vector out(1);
  out(0) = y;
  return out;
}

}  // namespace aprox::verify
