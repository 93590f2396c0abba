#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>

namespace stdg {

inline constexpr int kDim = 2;
inline constexpr int kComponents = 1 + kDim;

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec3 = Eigen::Vector3d;
using FluxMatrix = Eigen::Matrix3d;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Rejected input: invalid parameters, malformed meshes, bad indices.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Pressure and velocity fluctuation at one point.
struct StateValue {
  double p = 0.0;
  Vec2 v = Vec2::Zero();

  [[nodiscard]] Vec3 as_vector() const { return {p, v.x(), v.y()}; }
  [[nodiscard]] static StateValue from_vector(const Vec3& u) { return {u(0), Vec2(u(1), u(2))}; }
};

/// Spatial derivatives of a state. grad_v(i, j) = d v_i / d x_j.
struct StateGradient {
  Vec2 grad_p = Vec2::Zero();
  Mat2 grad_v = Mat2::Zero();

  [[nodiscard]] double div_v() const { return grad_v(0, 0) + grad_v(1, 1); }
};

struct PointState {
  StateValue value;
  StateGradient grad;
};

/// Nondimensional PDE coefficients plus the interior penalty configuration.
struct ModelParams {
  double alpha = 1.0;
  double beta = 1e-4;
  double gamma = 6.0;
  double delta = 1.0;
  double epsilon = 1.0;
  double zeta = 1e-4;
  double eta = 1.0;
  double theta = 1.0;
  double c_sigma = 50.0;
  /// 1 symmetric, -1 asymmetric (non-symmetric), 0 incomplete interior penalty.
  int theta_ip = 1;

  /// Throws InvalidArgument naming the offending field. The linear model ignores the
  /// nonlinear coefficients, so linear_mode skips their checks.
  void validate(bool linear_mode = false) const;

  /// Acoustic impedance sqrt(epsilon / alpha).
  [[nodiscard]] double impedance() const;
  [[nodiscard]] FluxMatrix mass() const;
  [[nodiscard]] FluxMatrix diffusion() const;
};

/// N(u, z) = (gamma z_p div u_v + delta grad u_p . z_v,
///            eta (grad u_v)^T z_v - theta z_p grad u_p).
/// Only the value of z enters.
[[nodiscard]] StateValue eval_N(const PointState& u, const StateValue& z, const ModelParams& params);

/// N(u, tilde) + N(tilde, u): the derivative of u -> N(u, u) at tilde applied to u.
[[nodiscard]] StateValue eval_N_prime(const PointState& u, const PointState& tilde, const ModelParams& params);

/// A_n = n_1 A_1 + n_2 A_2.
[[nodiscard]] FluxMatrix flux_An(const Vec2& normal);

/// Dissipative part of the upwind flux, 1/2 diag(-1/Z0, -Z0 n n^T).
[[nodiscard]] FluxMatrix flux_AD(const Vec2& normal, const ModelParams& params);

/// Upwind flux matrix A_n^up = A_D + A_n / 2 for the acoustic subsystem.
[[nodiscard]] FluxMatrix flux_upwind(const Vec2& normal, const ModelParams& params);

/// psi(t, x, y) = psi_a sin(phi t) sin(k x) sin(k y); the state is (psi_t, psi_x, psi_y).
struct ManufacturedConfig {
  double psi_a = 0.01;
  double phi = 6.0 * std::numbers::pi;
  double k = std::numbers::pi;
};

struct ManufacturedState {
  PointState u;
  StateValue dt;
};

[[nodiscard]] ManufacturedState manufactured_solution(double t, double x, double y, const ManufacturedConfig& cfg);

/// f = M u_t + A u - D lap(u) + N(u, u) for the manufactured state, in closed form.
/// With nonlinear == false the N term is dropped.
[[nodiscard]] StateValue manufactured_source(double t, double x, double y, const ModelParams& params,
                                             const ManufacturedConfig& cfg, bool nonlinear = true);

/// Compactly supported pressure excitation oscillating at frequency a_f.
struct BumpConfig {
  double a = 2.0;
  double a_f = 3.0;
  double r_a = 0.2;
};

[[nodiscard]] double bump_source(double t, double x, double y, const BumpConfig& cfg);

}  // namespace stdg
