#include "stdg/experiments.hpp"

#include "stdg/parallel.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

namespace stdg {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string side_of_normal(const Vec2& n) {
  if (n.x() < -0.5) return "left";
  if (n.x() > 0.5) return "right";
  if (n.y() < -0.5) return "bottom";
  return "top";
}

std::string degree_label(CellDegree d) { return "p" + std::to_string(d.p) + "q" + std::to_string(d.q); }

class Csv {
public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

private:
  std::ofstream out_;
};

std::string num(double x) { return format_real(x); }
std::string num(int x) { return std::to_string(x); }
std::string num(long long x) { return std::to_string(x); }

void prepare(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw Error("cannot create output directory " + out.string());
}

void write_newton_rows(Csv& csv, const SolveRecord& rec, CellDegree d) {
  for (const auto& s : rec.newton.history) {
    csv.row({rec.run, num(d.p), num(d.q), num(rec.n_r), num(s.iteration), num(s.residual), num(s.linear_iterations),
             num(s.inner_iterations), num(s.oracle_difference)});
  }
}

const std::vector<std::string> kNewtonHeader{"run", "p", "q", "n_r", "iteration", "residual",
                                             "linear_iterations", "inner_iterations", "oracle_difference"};

Json run_summary(const SolveRecord& rec) {
  Json j;
  j["run"] = rec.run;
  j["n_r"] = rec.n_r;
  j["dofs"] = rec.space ? static_cast<long long>(rec.space->dofs().total()) : 0LL;
  j["newton_iterations"] = rec.newton.iterations();
  j["converged"] = rec.newton.converged;
  j["final_residual"] = rec.newton.history.empty() ? kNaN : rec.newton.history.back().residual;
  j["seconds"] = rec.seconds;
  return j;
}

Json metadata(const std::string& command, const RunConfig& cfg) {
  Json j;
  j["command"] = command;
  j["threads"] = num_threads();
  j["linear"] = cfg.experiment.linear;
  if (cfg.experiment.linear) j["linear_model"] = "gamma=delta=eta=theta=0";
  j["config"] = serialize_config(cfg);
  return j;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

struct Series {
  std::vector<double> times;
  std::vector<double> probe;
  std::vector<double> P, E;
};

Series sample(const DiscreteField& u, const RunConfig& cfg) {
  const TimePartition& tp = u.space().mesh().time();
  Series s;
  s.times = spectrum_sample_times(tp.final_time(), tp.num_slabs());
  s.probe = probe_pressure(u, Vec2(cfg.experiment.probe_x, cfg.experiment.probe_y), s.times);
  s.P.resize(s.times.size());
  s.E.resize(s.times.size());
  parallel_for(static_cast<int>(s.times.size()), [&](int i) {
    s.P[static_cast<std::size_t>(i)] = functional_P(u, s.times[static_cast<std::size_t>(i)]);
    s.E[static_cast<std::size_t>(i)] = functional_E(u, s.times[static_cast<std::size_t>(i)]);
  });
  return s;
}

/// probe.csv, functionals.csv and spectrum.csv for one or more runs on a shared sampling grid.
void write_series(const fs::path& out, const std::vector<std::pair<std::string, Series>>& runs, double T) {
  std::vector<std::string> probe_h{"t"}, func_h{"t"}, spec_h{"frequency"};
  std::vector<Spectrum> spectra;
  for (const auto& [name, s] : runs) {
    probe_h.push_back("p_" + name);
    func_h.push_back("P_" + name);
    func_h.push_back("E_" + name);
    spec_h.push_back("magnitude_" + name);
    spectra.push_back(spectrum(s.probe, T));
  }
  const auto& times = runs.front().second.times;
  Csv probe(out / "probe.csv", probe_h), func(out / "functionals.csv", func_h), spec(out / "spectrum.csv", spec_h);
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<std::string> pr{num(times[i])}, fr{num(times[i])};
    for (const auto& [name, s] : runs) {
      pr.push_back(num(s.probe[i]));
      fr.push_back(num(s.P[i]));
      fr.push_back(num(s.E[i]));
    }
    probe.row(pr);
    func.row(fr);
  }
  for (std::size_t m = 0; m < spectra.front().frequency.size(); ++m) {
    std::vector<std::string> row{num(spectra.front().frequency[m])};
    for (const auto& sp : spectra) row.push_back(num(sp.magnitude[m]));
    spec.row(row);
  }
}

void write_round(const fs::path& path, const AdaptiveRound& round) {
  Csv csv(path, {"cell", "slab", "space_cell", "eta", "p_old", "q_old", "p_new", "q_new", "eta_global", "dofs"});
  const Space& space = *round.solve.space;
  const SpaceTimeMesh& mesh = space.mesh();
  for (int r = 0; r < space.num_cells(); ++r) {
    const CellDegree a = space.degree(r), b = round.next.degrees[r];
    csv.row({num(r), num(mesh.slab_of_cell(r)), num(mesh.space_cell_of(r)), num(round.eta[static_cast<std::size_t>(r)]),
             num(a.p), num(a.q), num(b.p), num(b.q), num(round.eta_global), num(static_cast<long long>(space.dofs().total()))});
  }
}

const std::vector<std::string> kSummaryHeader{"start_p", "start_q", "n_r",     "round",    "dofs",
                                              "eta_global", "refined", "derefined", "clamped"};

void write_summary_rows(Csv& csv, const std::vector<AdaptiveRound>& rounds, CellDegree start, int n_r) {
  for (const auto& r : rounds) {
    csv.row({num(start.p), num(start.q), num(n_r), num(r.round), num(static_cast<long long>(r.solve.space->dofs().total())),
             num(r.eta_global), num(r.next.refined), num(r.next.derefined), num(r.next.clamped)});
  }
}

void release(SolveRecord& rec) {
  rec.u = DiscreteField();
}

}  // namespace

Problem make_problem(const RunConfig& cfg, bool linear) {
  Problem pb = cfg.experiment.problem == "bump" ? bump_problem(cfg.experiment.bump)
                                                 : manufactured_problem(cfg.model, cfg.experiment.manufactured, !linear);
  if (!cfg.mesh.neumann.empty()) {
    const std::set<std::string> sides(cfg.mesh.neumann.begin(), cfg.mesh.neumann.end());
    pb.labeler = [sides](const Vec2&, const Vec2& normal) {
      return sides.count(side_of_normal(normal)) ? BoundaryLabel::Neumann : BoundaryLabel::Dirichlet;
    };
    if (pb.exact) {
      const ExactSolution exact = pb.exact;
      const double beta = cfg.model.beta;
      pb.data.neumann_p = [exact, beta](double t, double x, double y, const Vec2& n) {
        return beta * exact(t, x, y).u.grad.grad_p.dot(n);
      };
      pb.data.neumann_v = [exact](double t, double x, double y) { return exact(t, x, y).u.value; };
    }
  }
  return pb;
}

std::shared_ptr<const SpaceTimeMesh> make_mesh(const Problem& problem, const RunConfig& cfg, int n_r) {
  return build_uniform(problem.domain, problem.final_time, n_r, cfg.mesh.ratio, problem.labeler);
}

SolveRecord solve_on(const Problem& problem, std::shared_ptr<const Space> space, const RunConfig& cfg, bool linear,
                     const Vector* initial, const std::string& run, const Logger& log) {
  const auto start = std::chrono::steady_clock::now();
  FormOptions forms = cfg.forms;
  forms.linear_mode = linear;
  Discretization disc(space, cfg.model, forms);
  const Vector load = disc.rhs(interpolate_data(problem.data, *space));
  SolveRecord rec;
  rec.run = run;
  rec.n_r = static_cast<int>(std::lround(-std::log2(space->mesh().space().h_max())));
  rec.space = space;
  auto step_log = [&](const NewtonStep& s) {
    if (!log) return;
    std::ostringstream msg;
    msg << run << " n_r=" << rec.n_r << " dofs=" << space->dofs().total() << " newton " << s.iteration
        << " residual " << s.residual << " gmres " << s.linear_iterations;
    log(msg.str());
  };
  try {
    rec.newton = newton_solve(disc, load, initial ? *initial : Vector(), cfg.newton, cfg.linsolve, step_log);
  } catch (const SolverFailure& e) {
    throw SolverFailure(run + " (n_r=" + std::to_string(rec.n_r) + "): " + e.what());
  }
  rec.u = DiscreteField(space, rec.newton.u);
  rec.newton.u = Vector();
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

SolveRecord solve_uniform(const Problem& problem, const RunConfig& cfg, int n_r, CellDegree d, bool linear,
                          const std::string& run, const Logger& log, const SolveRecord* coarser,
                          std::vector<SolveRecord>* warmups) {
  auto space = make_space(make_mesh(problem, cfg, n_r), d);
  if (!cfg.initial_guess.coarse || n_r <= cfg.initial_guess.coarse_level) {
    return solve_on(problem, space, cfg, linear, nullptr, run, log);
  }
  SolveRecord chained;
  if (coarser == nullptr || coarser->n_r != n_r - 1 || coarser->u.coefficients().size() == 0) {
    chained = solve_uniform(problem, cfg, n_r - 1, d, linear, run + "_warmup", log, nullptr, warmups);
    coarser = &chained;
  }
  const Vector start = prolong(coarser->u, space).coefficients();
  if (warmups != nullptr && chained.space) {
    warmups->push_back(chained);
    warmups->back().u = DiscreteField();
  }
  return solve_on(problem, space, cfg, linear, &start, run, log);
}

std::vector<AdaptiveRound> run_adaptive(const Problem& problem, const RunConfig& cfg, int n_r, CellDegree start,
                                        bool linear, const Logger& log) {
  const AdaptConfig ac = cfg.adapt_config(start);
  std::shared_ptr<const SpaceTimeMesh> mesh;
  DegreeMap degrees;
  std::vector<AdaptiveRound> rounds;
  for (int i = 0; i <= cfg.adapt.rounds; ++i) {
    AdaptiveRound round;
    round.round = i;
    const std::string label = "adaptive_" + degree_label(start) + "_round" + std::to_string(i);
    if (rounds.empty()) {
      round.solve = solve_uniform(problem, cfg, n_r, start, linear, label, log);
      mesh = round.solve.space->mesh_ptr();
      degrees = DegreeMap(mesh->num_cells(), start, cfg.degrees.ceiling);
    } else {
      auto space = make_space(mesh, degrees);
      const Vector warm = transfer(rounds.back().solve.u, space).coefficients();
      round.solve = solve_on(problem, space, cfg, linear, &warm, label, log);
    }
    round.eta = indicator(round.solve.u, problem.data, cfg.model, !linear);
    round.eta_global = aggregate(round.eta);
    if (i < cfg.adapt.rounds) {
      round.next = mark_and_adapt(degrees, round.eta, ac);
      if (round.next.clamped > 0 && log) {
        log("warning: " + std::to_string(round.next.clamped) + " refinements clamped at degree ceiling " +
            std::to_string(ac.ceiling));
      }
    } else {
      round.next.degrees = degrees;
    }
    degrees = round.next.degrees;
    // Only the latest field is needed for the warm start.
    if (!rounds.empty()) rounds.back().solve.u = DiscreteField();
    rounds.push_back(std::move(round));
  }
  return rounds;
}

ConvergenceResult run_convergence(const RunConfig& cfg, const Logger& log) {
  RunConfig manufactured = cfg;
  manufactured.experiment.problem = "manufactured";
  const bool linear = cfg.experiment.linear;
  const Problem problem = make_problem(manufactured, linear);
  ConvergenceResult result;
  for (const CellDegree d : cfg.experiment.pairs) {
    const ConvergenceRow* previous = nullptr;
    SolveRecord coarser;
    for (const int n_r : cfg.experiment.levels) {
      std::vector<SolveRecord> warmups;
      SolveRecord rec = solve_uniform(problem, cfg, n_r, d, linear, "uniform_" + degree_label(d), log, &coarser, &warmups);
      for (auto& w : warmups) result.warmups.push_back(std::move(w));
      ConvergenceRow row;
      row.degree = d;
      row.n_r = n_r;
      row.h = rec.space->mesh().space().h_max();
      row.dofs = rec.space->dofs().total();
      row.dg_error = dg_error(rec.u, problem.exact, cfg.model, cfg.forms);
      row.l2_error = l2q_error(rec.u, problem.exact);
      row.newton_iterations = rec.newton.iterations();
      row.contraction_order = contraction_order(rec.newton.history);
      row.dg_order = row.l2_order = kNaN;
      if (previous != nullptr) {
        row.dg_order = eoc({previous->dg_error, row.dg_error}, {previous->h, row.h}).extrapolated;
        row.l2_order = eoc({previous->l2_error, row.l2_error}, {previous->h, row.h}).extrapolated;
      }
      coarser = rec;
      release(rec);
      result.rows.push_back(row);
      previous = &result.rows.back();
      result.solves.push_back(std::move(rec));
    }
  }
  return result;
}

int cmd_solve(const RunConfig& cfg, const fs::path& out, const Logger& log) {
  prepare(out);
  const bool linear = cfg.experiment.linear;
  const Problem problem = make_problem(cfg, linear);
  const CellDegree start{cfg.degrees.p, cfg.degrees.q};
  Json meta = metadata("solve", cfg);
  Csv newton(out / "newton.csv", kNewtonHeader);

  SolveRecord final;
  if (cfg.adapt.enabled) {
    auto rounds = run_adaptive(problem, cfg, cfg.mesh.n_r, start, linear, log);
    Csv summary(out / "adapt_summary.csv", kSummaryHeader);
    write_summary_rows(summary, rounds, start, cfg.mesh.n_r);
    for (const auto& r : rounds) {
      write_round(out / ("adapt_round_" + std::to_string(r.round) + ".csv"), r);
      write_newton_rows(newton, r.solve, start);
      meta["runs"].push_back(run_summary(r.solve));
    }
    final = std::move(rounds.back().solve);
  } else {
    std::vector<SolveRecord> warmups;
    final = solve_uniform(problem, cfg, cfg.mesh.n_r, start, linear, linear ? "linear" : "nonlinear", log, nullptr, &warmups);
    for (const auto& w : warmups) write_newton_rows(newton, w, start);
    write_newton_rows(newton, final, start);
    meta["runs"].push_back(run_summary(final));
  }
  write_series(out, {{linear ? "linear" : "nonlinear", sample(final.u, cfg)}}, problem.final_time);
  if (problem.exact) {
    meta["dg_error"] = dg_error(final.u, problem.exact, cfg.model, cfg.forms);
    meta["l2_error"] = l2q_error(final.u, problem.exact);
  }
  meta["contraction_order"] = contraction_order(final.newton.history);
  write_json(out / "run.json", meta);
  return 0;
}

int cmd_convergence(const RunConfig& cfg, const fs::path& out, const Logger& log) {
  prepare(out);
  const ConvergenceResult res = run_convergence(cfg, log);
  Csv eoc_csv(out / "eoc.csv", {"p", "q", "n_r", "h", "dofs", "dg_error", "dg_order", "l2_error", "l2_order",
                                "newton_iterations", "contraction_order"});
  for (const auto& r : res.rows) {
    eoc_csv.row({num(r.degree.p), num(r.degree.q), num(r.n_r), num(r.h), num(static_cast<long long>(r.dofs)),
                 num(r.dg_error), num(r.dg_order), num(r.l2_error), num(r.l2_order), num(r.newton_iterations),
                 num(r.contraction_order)});
  }
  Csv newton(out / "newton.csv", kNewtonHeader);
  Json meta = metadata("convergence", cfg);
  for (const auto& w : res.warmups) {
    const CellDegree d = w.space->degree(0);
    write_newton_rows(newton, w, d);
    meta["runs"].push_back(run_summary(w));
  }
  for (std::size_t i = 0; i < res.solves.size(); ++i) {
    write_newton_rows(newton, res.solves[i], res.rows[i].degree);
    meta["runs"].push_back(run_summary(res.solves[i]));
  }
  // Extrapolated order: the finest consecutive pair of each degree column.
  for (const CellDegree d : cfg.experiment.pairs) {
    std::vector<double> dg, l2, h;
    for (const auto& r : res.rows) {
      if (r.degree != d) continue;
      dg.push_back(r.dg_error);
      l2.push_back(r.l2_error);
      h.push_back(r.h);
    }
    Json e;
    e["p"] = d.p;
    e["q"] = d.q;
    e["dg_eoc"] = dg.size() >= 2 ? eoc(dg, h).extrapolated : kNaN;
    e["l2_eoc"] = l2.size() >= 2 ? eoc(l2, h).extrapolated : kNaN;
    meta["extrapolated"].push_back(e);
  }
  write_json(out / "run.json", meta);
  return 0;
}

int cmd_bump(const RunConfig& cfg, const fs::path& out, const Logger& log) {
  prepare(out);
  RunConfig bump = cfg;
  bump.experiment.problem = "bump";
  const bool linear = cfg.experiment.linear;
  const Problem problem = make_problem(bump, linear);
  const CellDegree start{cfg.degrees.p, cfg.degrees.q};
  const int n_r = cfg.mesh.n_r;
  Json meta = metadata("bump", cfg);
  Csv newton(out / "newton.csv", kNewtonHeader);

  // Uniform runs at the configured level: probe series, spectra and functionals.
  std::vector<std::pair<std::string, Series>> series;
  auto uniform = [&](int level, CellDegree d, bool lin, const std::string& run) {
    std::vector<SolveRecord> warmups;
    SolveRecord rec = solve_uniform(problem, cfg, level, d, lin, run, log, nullptr, &warmups);
    for (const auto& w : warmups) write_newton_rows(newton, w, d);
    write_newton_rows(newton, rec, d);
    return rec;
  };
  {
    SolveRecord main = uniform(n_r, start, linear, linear ? "linear" : "nonlinear");
    meta["runs"].push_back(run_summary(main));
    series.emplace_back(main.run, sample(main.u, cfg));
  }
  if (cfg.experiment.compare_linear && !linear) {
    SolveRecord lin = uniform(n_r, start, true, "linear");
    meta["runs"].push_back(run_summary(lin));
    meta["linear_model"] = "gamma=delta=eta=theta=0";
    series.emplace_back(lin.run, sample(lin.u, cfg));
  }
  write_series(out, series, problem.final_time);

  // A failed solve is recorded and skipped so that the remaining artifacts are still written;
  // the exit status then reports the failure.
  meta["failures"] = Json::array();
  auto attempt = [&](const std::string& what, const auto& body) {
    try {
      body();
      return true;
    } catch (const SolverFailure& e) {
      if (log) log("solver failure in " + what + ": " + e.what());
      meta["failures"].push_back(Json{{"run", what}, {"message", e.what()}});
      return false;
    }
  };

  // Adaptive runs for every start pair and level; the last-round fields feed the study.
  std::vector<std::tuple<CellDegree, int, DiscreteField>> adapted;
  if (cfg.adapt.enabled) {
    Csv summary(out / "adapt_summary.csv", kSummaryHeader);
    for (const CellDegree d : cfg.experiment.pairs) {
      for (const int level : cfg.experiment.levels) {
        (void)attempt("adaptive_" + degree_label(d) + " n_r=" + std::to_string(level), [&] {
          auto rounds = run_adaptive(problem, cfg, level, d, linear, log);
          write_summary_rows(summary, rounds, d, level);
          for (const auto& r : rounds) {
            write_newton_rows(newton, r.solve, d);
            meta["runs"].push_back(run_summary(r.solve));
          }
          if (level == n_r && d == start) {
            for (const auto& r : rounds) write_round(out / ("adapt_round_" + std::to_string(r.round) + ".csv"), r);
          }
          adapted.emplace_back(d, level, rounds.back().solve.u);
        });
      }
    }
  }

  // Functional errors of uniform and adaptive runs against a finer uniform reference.
  if (cfg.experiment.reference_level > 0) {
    const CellDegree ref_deg = cfg.experiment.reference;
    std::optional<SolveRecord> ref;
    (void)attempt("reference_" + degree_label(ref_deg) + " n_r=" + std::to_string(cfg.experiment.reference_level), [&] {
      ref = uniform(cfg.experiment.reference_level, ref_deg, linear, "reference_" + degree_label(ref_deg));
      meta["runs"].push_back(run_summary(*ref));
    });
    if (ref) {
      Csv errors(out / "functional_errors.csv", {"mode", "start_p", "start_q", "n_r", "dofs", "p_l1", "e_l2"});
      auto error_row = [&](const std::string& mode, CellDegree d, int level, const DiscreteField& u) {
        const FunctionalErrors fe = functional_errors(u, ref->u);
        errors.row({mode, num(d.p), num(d.q), num(level), num(static_cast<long long>(u.space().dofs().total())),
                    num(fe.p_l1), num(fe.e_l2)});
      };
      for (const CellDegree d : cfg.experiment.pairs) {
        for (const int level : cfg.experiment.levels) {
          (void)attempt("uniform_" + degree_label(d) + " n_r=" + std::to_string(level), [&] {
            SolveRecord uni = uniform(level, d, linear, "uniform_" + degree_label(d));
            meta["runs"].push_back(run_summary(uni));
            error_row("uniform", d, level, uni.u);
          });
        }
        for (const auto& [ad, level, u] : adapted) {
          if (ad == d) error_row("adaptive", d, level, u);
        }
      }
    }
  }
  write_json(out / "run.json", meta);
  return meta["failures"].empty() ? 0 : 3;
}

}  // namespace stdg
