#include "stdg/problems.hpp"

namespace stdg {

Problem manufactured_problem(const ModelParams& params, const ManufacturedConfig& cfg, bool nonlinear) {
  Problem pb;
  pb.domain = {0.0, 1.0, 0.0, 1.0};
  pb.final_time = 1.0;
  pb.exact = [cfg](double t, double x, double y) { return manufactured_solution(t, x, y, cfg); };
  pb.data.source = [params, cfg, nonlinear](double t, double x, double y) {
    return manufactured_source(t, x, y, params, cfg, nonlinear);
  };
  pb.data.initial = [cfg](double x, double y) { return manufactured_solution(0.0, x, y, cfg).u.value; };
  pb.data.dirichlet = [cfg](double t, double x, double y) { return manufactured_solution(t, x, y, cfg).u.value; };
  return pb;
}

Problem bump_problem(const BumpConfig& cfg) {
  Problem pb;
  pb.domain = {-0.5, 0.5, -0.5, 0.5};
  pb.final_time = 1.0;
  pb.data.source = [cfg](double t, double x, double y) {
    StateValue f;
    f.p = bump_source(t, x, y, cfg);
    return f;
  };
  return pb;
}

}  // namespace stdg
