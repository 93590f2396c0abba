#include "stdg/analysis.hpp"

#include "stdg/parallel.hpp"
#include "stdg/quadrature.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>

namespace stdg {

namespace {

constexpr double kFunctionalWeight = 1e4;
// Points per merged time interval; |P - P_ref| is only piecewise smooth.
constexpr int kFunctionalPoints = 16;

/// Orthonormal time modes of cell r at time t.
std::vector<double> time_modes(const Space& space, int r, double t) {
  const CellDegree d = space.degree(r);
  const CellFrame f = space.frame(r);
  std::vector<double> m(static_cast<std::size_t>(d.p + 1));
  legendre_orthonormal(d.p, (t - f.t0) / f.tau, m.data());
  const double scale = 1.0 / std::sqrt(f.tau);
  for (double& v : m) v *= scale;
  return m;
}

/// Spatial coefficient of component c, mode (a, b) at time t.
double spatial_coeff(const Space& space, const double* local, int r, const std::vector<double>& tm, int c, int a, int b) {
  const CellDegree d = space.degree(r);
  const int ns = scalar_count(d);
  double s = 0.0;
  for (int i = 0; i <= d.p; ++i) s += local[c * ns + scalar_index(d, i, a, b)] * tm[static_cast<std::size_t>(i)];
  return s;
}

}  // namespace

double functional_P(const DiscreteField& u, double t) {
  const Space& space = u.space();
  const SpaceTimeMesh& mesh = space.mesh();
  const int j = mesh.time().slab_of(t);
  double sum = 0.0;
  for (int k = 0; k < mesh.num_space_cells(); ++k) {
    const int r = mesh.cell_index(j, k);
    const CellFrame f = space.frame(r);
    const auto tm = time_modes(space, r, t);
    // int_K X_0 Y_0 = sqrt(hx hy); higher modes integrate to zero.
    sum += spatial_coeff(space, u.local(r), r, tm, 0, 0, 0) * std::sqrt(f.hx * f.hy);
  }
  return sum;
}

double functional_E(const DiscreteField& u, double t) {
  const Space& space = u.space();
  const SpaceTimeMesh& mesh = space.mesh();
  const int j = mesh.time().slab_of(t);
  double sum = 0.0;
  for (int k = 0; k < mesh.num_space_cells(); ++k) {
    const int r = mesh.cell_index(j, k);
    const int q = space.degree(r).q;
    const auto tm = time_modes(space, r, t);
    for (int c = 1; c < kComponents; ++c)
      for (int a = 0; a <= q; ++a)
        for (int b = 0; b <= q; ++b) {
          const double s = spatial_coeff(space, u.local(r), r, tm, c, a, b);
          sum += s * s;
        }
  }
  return sum;
}

FunctionalErrors functional_errors(const DiscreteField& u, const DiscreteField& reference) {
  const TimePartition& tu = u.space().mesh().time();
  const TimePartition& tr = reference.space().mesh().time();
  if (std::abs(tu.final_time() - tr.final_time()) > 1e-12 * std::max(1.0, tu.final_time())) {
    throw InvalidArgument("functional_errors: fields have different final times");
  }
  std::vector<double> breaks = tu.points();
  breaks.insert(breaks.end(), tr.points().begin(), tr.points().end());
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> merged;
  for (double b : breaks) {
    if (merged.empty() || b - merged.back() > 1e-12) merged.push_back(b);
  }
  merged.back() = tu.final_time();

  const auto& rule = gauss_legendre(kFunctionalPoints);
  FunctionalErrors out;
  double e2 = 0.0;
  for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
    const double a = merged[i], len = merged[i + 1] - merged[i];
    for (int k = 0; k < rule.size(); ++k) {
      const double t = a + len * rule.points[static_cast<std::size_t>(k)];
      const double w = len * rule.weights[static_cast<std::size_t>(k)];
      out.p_l1 += w * std::abs(functional_P(u, t) - functional_P(reference, t));
      const double de = functional_E(u, t) - functional_E(reference, t);
      e2 += w * de * de;
    }
  }
  out.p_l1 *= kFunctionalWeight;
  out.e_l2 = kFunctionalWeight * std::sqrt(e2);
  return out;
}

EocResult eoc(const std::vector<double>& errors, const std::vector<double>& h) {
  if (errors.size() != h.size() || errors.size() < 2) {
    throw InvalidArgument("eoc needs at least two levels with matching error and h counts");
  }
  EocResult out;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double e0 = errors[i], e1 = errors[i + 1];
    if (!(e0 > 0.0) || !(e1 > 0.0) || !(h[i] > 0.0) || !(h[i + 1] > 0.0) || h[i] == h[i + 1]) {
      out.orders.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      out.orders.push_back(std::log(e0 / e1) / std::log(h[i] / h[i + 1]));
    }
  }
  out.extrapolated = out.orders.back();
  return out;
}

double l2q_error(const DiscreteField& u, const ExactSolution& exact, int extra_points) {
  const Space& space = u.space();
  TableCache cache;
  std::vector<double> per_cell(static_cast<std::size_t>(space.num_cells()));
  parallel_for(space.num_cells(), [&](int r) {
    const CellDegree d = space.degree(r);
    const CellFrame f = space.frame(r);
    const int nqt = d.p + extra_points, nqs = d.q + extra_points;
    const BasisTable& tb = cache.volume(d, f, nqt, nqs);
    const Matrix vals = tb.val * Eigen::Map<const Matrix>(u.local(r), scalar_count(d), kComponents);
    const auto& rt = gauss_legendre(nqt);
    const auto& rs = gauss_legendre(nqs);
    double s = 0.0;
    int k = 0;
    for (int it = 0; it < nqt; ++it) {
      const double t = f.t0 + f.tau * rt.points[static_cast<std::size_t>(it)];
      for (int ix = 0; ix < nqs; ++ix) {
        const double x = f.x0 + f.hx * rs.points[static_cast<std::size_t>(ix)];
        for (int iy = 0; iy < nqs; ++iy, ++k) {
          const double y = f.y0 + f.hy * rs.points[static_cast<std::size_t>(iy)];
          const Vec3 e = Vec3(vals(k, 0), vals(k, 1), vals(k, 2)) - exact(t, x, y).u.value.as_vector();
          s += tb.weights(k) * e.squaredNorm();
        }
      }
    }
    per_cell[static_cast<std::size_t>(r)] = s;
  });
  double sum = 0.0;
  for (double s : per_cell) sum += s;
  return std::sqrt(sum);
}

double dg_error(const DiscreteField& u, const ExactSolution& exact, const ModelParams& params, const FormOptions& opts) {
  return std::sqrt(dg_norm_parts(u, params, opts, &exact).total());
}

std::vector<double> spectrum_sample_times(double T, int slabs) {
  if (slabs < 1) throw InvalidArgument("spectrum sampling needs at least one slab");
  const int n = 1 << static_cast<int>(std::ceil(std::log2(8.0 * slabs) - 1e-12));
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = (i + 0.5) * T / n;
  return t;
}

std::vector<double> probe_pressure(const DiscreteField& u, const Vec2& x, const std::vector<double>& times) {
  const SpaceTimeMesh& mesh = u.space().mesh();
  const int k = mesh.space().locate(x);
  if (k < 0) throw InvalidArgument("probe point lies outside the domain");
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    const int r = mesh.cell_index(mesh.time().slab_of(t), k);
    out.push_back(eval(u, r, t, x).p);
  }
  return out;
}

std::vector<std::complex<double>> dft(const std::vector<double>& signal) {
  if (signal.empty()) return {};
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> out;
  fft.fwd(out, signal);
  return out;
}

Spectrum spectrum(const std::vector<double>& signal, double T) {
  if (signal.size() < 8) throw InvalidArgument("spectrum needs at least 8 samples");
  if (!(T > 0.0)) throw InvalidArgument("spectrum window length must be positive");
  const auto f = dft(signal);
  Spectrum s;
  const std::size_t half = signal.size() / 2;
  for (std::size_t m = 0; m <= half; ++m) {
    s.frequency.push_back(static_cast<double>(m) / T);
    s.magnitude.push_back(std::abs(f[m]));
  }
  return s;
}

}  // namespace stdg
