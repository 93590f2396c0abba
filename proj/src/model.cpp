#include "stdg/model.hpp"

#include <cmath>

namespace stdg {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(std::string("model.") + name + " must be a finite positive number");
  }
}

void require_unit(const Vec2& normal) {
  if (std::abs(normal.norm() - 1.0) > 1e-12) {
    throw InvalidArgument("flux matrix requires a unit normal");
  }
}

}  // namespace

void ModelParams::validate(bool linear_mode) const {
  require_positive(alpha, "alpha");
  require_positive(beta, "beta");
  require_positive(epsilon, "epsilon");
  require_positive(zeta, "zeta");
  require_positive(c_sigma, "c_sigma");
  if (!linear_mode) {
    require_positive(gamma, "gamma");
    require_positive(delta, "delta");
    require_positive(eta, "eta");
    require_positive(theta, "theta");
  }
  if (!linear_mode && gamma == delta) {
    throw InvalidArgument("model.gamma must differ from model.delta");
  }
  if (theta_ip != 1 && theta_ip != -1 && theta_ip != 0) {
    throw InvalidArgument("model.theta_ip must be one of 1, -1, 0");
  }
}

double ModelParams::impedance() const { return std::sqrt(epsilon / alpha); }

FluxMatrix ModelParams::mass() const { return Vec3(alpha, epsilon, epsilon).asDiagonal(); }

FluxMatrix ModelParams::diffusion() const { return Vec3(beta, zeta, zeta).asDiagonal(); }

StateValue eval_N(const PointState& u, const StateValue& z, const ModelParams& params) {
  StateValue out;
  out.p = params.gamma * z.p * u.grad.div_v() + params.delta * u.grad.grad_p.dot(z.v);
  out.v = params.eta * (u.grad.grad_v.transpose() * z.v) - params.theta * z.p * u.grad.grad_p;
  return out;
}

StateValue eval_N_prime(const PointState& u, const PointState& tilde, const ModelParams& params) {
  const StateValue a = eval_N(u, tilde.value, params);
  const StateValue b = eval_N(tilde, u.value, params);
  return {a.p + b.p, a.v + b.v};
}

FluxMatrix flux_An(const Vec2& normal) {
  require_unit(normal);
  FluxMatrix m = FluxMatrix::Zero();
  m(0, 1) = m(1, 0) = normal.x();
  m(0, 2) = m(2, 0) = normal.y();
  return m;
}

FluxMatrix flux_AD(const Vec2& normal, const ModelParams& params) {
  require_unit(normal);
  const double z0 = params.impedance();
  FluxMatrix m = FluxMatrix::Zero();
  m(0, 0) = -0.5 / z0;
  m.block<2, 2>(1, 1) = -0.5 * z0 * normal * normal.transpose();
  return m;
}

FluxMatrix flux_upwind(const Vec2& normal, const ModelParams& params) {
  require_unit(normal);
  // Printed form: 1/2 [[-sqrt(alpha/eps), n^T], [n, -sqrt(eps/alpha) n n^T]].
  FluxMatrix m;
  m(0, 0) = -0.5 * std::sqrt(params.alpha / params.epsilon);
  m(0, 1) = m(1, 0) = 0.5 * normal.x();
  m(0, 2) = m(2, 0) = 0.5 * normal.y();
  m.block<2, 2>(1, 1) = -0.5 * std::sqrt(params.epsilon / params.alpha) * normal * normal.transpose();
  return m;
}

ManufacturedState manufactured_solution(double t, double x, double y, const ManufacturedConfig& cfg) {
  const double a = cfg.psi_a;
  const double w = cfg.phi;
  const double k = cfg.k;
  const double st = std::sin(w * t), ct = std::cos(w * t);
  const double sx = std::sin(k * x), cx = std::cos(k * x);
  const double sy = std::sin(k * y), cy = std::cos(k * y);

  ManufacturedState s;
  auto& u = s.u;
  u.value.p = a * w * ct * sx * sy;
  u.value.v = Vec2(a * k * st * cx * sy, a * k * st * sx * cy);

  u.grad.grad_p = Vec2(a * w * k * ct * cx * sy, a * w * k * ct * sx * cy);
  u.grad.grad_v(0, 0) = -a * k * k * st * sx * sy;
  u.grad.grad_v(0, 1) = a * k * k * st * cx * cy;
  u.grad.grad_v(1, 0) = a * k * k * st * cx * cy;
  u.grad.grad_v(1, 1) = -a * k * k * st * sx * sy;

  s.dt.p = -a * w * w * st * sx * sy;
  s.dt.v = Vec2(a * k * w * ct * cx * sy, a * k * w * ct * sx * cy);
  return s;
}

StateValue manufactured_source(double t, double x, double y, const ModelParams& params,
                               const ManufacturedConfig& cfg, bool nonlinear) {
  const ManufacturedState s = manufactured_solution(t, x, y, cfg);
  const auto& u = s.u;
  // Every component is a product of sines/cosines in k x and k y, so lap = -2 k^2 (.).
  const double lap_factor = -2.0 * cfg.k * cfg.k;

  StateValue f;
  f.p = params.alpha * s.dt.p + u.grad.div_v() - params.beta * lap_factor * u.value.p;
  f.v = params.epsilon * s.dt.v + u.grad.grad_p - params.zeta * lap_factor * u.value.v;
  if (nonlinear) {
    const StateValue n = eval_N(u, u.value, params);
    f.p += n.p;
    f.v += n.v;
  }
  return f;
}

double bump_source(double t, double x, double y, const BumpConfig& cfg) {
  const double r2 = (x * x + y * y) / (cfg.r_a * cfg.r_a);
  if (!(r2 < 1.0)) {
    return 0.0;
  }
  const double denom = 1.0 - r2;
  // exp(-1/denom) underflows to 0 at the rim, which is the removable limit.
  return cfg.a * std::exp(1.0) * std::sin(2.0 * std::numbers::pi * cfg.a_f * t) * std::exp(-1.0 / denom);
}

}  // namespace stdg
