#pragma once

#include "stdg/adapt.hpp"

#include <complex>
#include <vector>

namespace stdg {

/// P(t) = int_Omega p_h(t) dx, using the slab that owns t (right-continuous).
[[nodiscard]] double functional_P(const DiscreteField& u, double t);
/// E(t) = int_Omega v_h(t) . v_h(t) dx.
[[nodiscard]] double functional_E(const DiscreteField& u, double t);

struct FunctionalErrors {
  double p_l1 = 0.0;  ///< 1e4 int_0^T |P(u) - P(ref)| dt
  double e_l2 = 0.0;  ///< 1e4 (int_0^T (E(u) - E(ref))^2 dt)^{1/2}
};

/// Integrates over the merged slab breakpoints of both fields. Throws on differing T.
[[nodiscard]] FunctionalErrors functional_errors(const DiscreteField& u, const DiscreteField& reference);

struct EocResult {
  /// log(e_i / e_{i+1}) / log(h_i / h_{i+1}); NaN when an error is not positive.
  std::vector<double> orders;
  /// Order of the finest consecutive pair.
  double extrapolated = 0.0;
};

[[nodiscard]] EocResult eoc(const std::vector<double>& errors, const std::vector<double>& h);

/// ||u_h - u||_{L2(Q)} with extra_points above the local degree in every direction.
[[nodiscard]] double l2q_error(const DiscreteField& u, const ExactSolution& exact, int extra_points = 4);

/// ||u_h - u||_{Z_h}.
[[nodiscard]] double dg_error(const DiscreteField& u, const ExactSolution& exact, const ModelParams& params,
                              const FormOptions& opts = {});

/// 2^ceil(log2(8 k)) midpoints of a uniform grid on [0, T], k the number of slabs.
[[nodiscard]] std::vector<double> spectrum_sample_times(double T, int slabs);

/// Pressure p_h(t, x) for each t, from the cell that owns (t, x).
[[nodiscard]] std::vector<double> probe_pressure(const DiscreteField& u, const Vec2& x, const std::vector<double>& times);

/// Unnormalized DFT F_m = sum_n s_n exp(-2 pi i m n / N).
[[nodiscard]] std::vector<std::complex<double>> dft(const std::vector<double>& signal);

struct Spectrum {
  std::vector<double> frequency;  ///< m / T
  std::vector<double> magnitude;  ///< |F_m|
};

/// One-sided magnitude spectrum (m = 0 .. N/2) of samples spanning a window of length T.
/// Throws InvalidArgument with fewer than 8 samples.
[[nodiscard]] Spectrum spectrum(const std::vector<double>& signal, double T);

}  // namespace stdg
