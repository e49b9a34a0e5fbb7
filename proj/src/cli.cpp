#include "qp/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "qp/discretize.hpp"
#include "qp/io.hpp"
#include "qp/reduce.hpp"
#include "qp/transform.hpp"

namespace qp::cli {

using io::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::NonPositiveState:
      return kExitInput;
    case ErrorCode::SingularMatrix:
    case ErrorCode::RankDeficientInput:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::DuplicateQuasimonomial:
    case ErrorCode::NotFound:
    case ErrorCode::NotSameClass:
    case ErrorCode::NotNonRedundant:
    case ErrorCode::NotApplicable:
      return kExitPrecondition;
    case ErrorCode::Overflow:
    case ErrorCode::OrbitEscaped:
      return kExitDivergence;
    case ErrorCode::Internal:
      return kExitInternal;
  }
  return kExitInternal;
}

namespace {

struct Options {
  std::string model;
  std::string model2;
  std::string initial;
  std::size_t steps = 0;
  std::string eps;
  std::string scheme = "both";
  std::string out;
  double tolerance = 1e-9;
  double horizon = 1.0;
  bool fixed_point = false;
  bool commutativity = false;
  std::string transform;
};

struct Outcome {
  io::Report report;
  int exit_code = kExitOk;
  std::string summary;
};

double relative_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(a[i]));
  }
  return scale == 0.0 ? diff : diff / scale;
}

std::optional<State> resolve_initial(const Options& opt, const io::ModelFile& model) {
  if (opt.initial.empty()) return model.initial_state();
  const auto values = io::parse_rational_list(opt.initial);
  if (values.size() != model.coefficients.n())
    throw Error(ErrorCode::ParseError, "--initial: expected " +
                                           std::to_string(model.coefficients.n()) +
                                           " values, found " + std::to_string(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] <= 0)
      throw Error(ErrorCode::ParseError,
                  "--initial[" + std::to_string(i) + "]: state must be positive");
  return State(to_doubles(values));
}

json echo_model(const std::string& path, const io::ModelFile& model) {
  json j;
  j["path"] = path;
  j["model"] = io::model_to_json(model);
  return j;
}

json rank_certificate(const RationalMatrix& mat) {
  const auto ech = row_echelon(mat);
  json j;
  j["rank"] = ech.pivots.size();
  j["pivot_columns"] = ech.pivots;
  return j;
}

RationalMatrix parse_matrix_text(const std::string& text) {
  std::vector<RationalVector> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(io::parse_rational_list(row));
  if (rows.empty()) throw Error(ErrorCode::ParseError, "--transform: empty matrix");
  for (const auto& r : rows)
    if (r.size() != rows.size())
      throw Error(ErrorCode::ParseError, "--transform: matrix must be square");
  return RationalMatrix::from_rows(rows, rows.size());
}

std::uint64_t seed_from_env() {
  const char* text = std::getenv("QP_SEED");
  if (text == nullptr || *text == '\0') return 1;
  char* end = nullptr;
  const auto v = std::strtoull(text, &end, 10);
  if (*end != '\0') throw Error(ErrorCode::ParseError, "QP_SEED must be a non-negative integer");
  return v;
}

// Small invertible integer matrix: random diagonal in {1,-1,2} then a few
// unit shears.
RationalMatrix random_transform(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  static constexpr int kDiag[] = {1, -1, 2};
  RationalMatrix C(n, n);
  for (std::size_t i = 0; i < n; ++i) C(i, i) = kDiag[rng() % 3];
  if (n > 1) {
    for (std::size_t k = 0; k < 2 * n; ++k) {
      const std::size_t i = rng() % n;
      std::size_t j = rng() % (n - 1);
      if (j >= i) ++j;
      const int s = (rng() % 2) ? 1 : -1;
      for (std::size_t c = 0; c < n; ++c) C(i, c) += s * C(j, c);
    }
  }
  return C;
}

// ---------------------------------------------------------------- reduce

Outcome cmd_reduce(const Options& opt) {
  const auto model = io::load_model(opt.model);
  const QPMap& map = model.as_map();
  const auto initial = resolve_initial(opt, model);
  const std::size_t steps = opt.steps == 0 ? 50 : opt.steps;

  Outcome o;
  o.report.command = "reduce";
  o.report.inputs = echo_model(opt.model, model);
  if (initial) o.report.inputs["initial"] = io::to_json(*initial);

  const ReductionReport rr = reduce(map, initial);
  const QPMap& fin = rr.final;
  const bool trivial = rr.steps.empty();

  json res;
  res["already_non_redundant"] = trivial;
  res["original"] = {{"n", map.n()}, {"m", map.m()},
                     {"rank_B", rank(map.B())}, {"rank_M", rank(map.M())}};
  json body = io::to_json(rr);
  for (const auto& [k, v] : body.items()) res[k] = v;
  res["certificates"] = {{"n", fin.n()},
                         {"m", fin.m()},
                         {"B", rank_certificate(fin.B())},
                         {"M", rank_certificate(fin.M())}};

  const std::size_t rank_B = rank(fin.B());
  const std::size_t rank_M = rank(fin.M());
  o.report.exact_checks = {{"m_at_least_n", fin.m() >= fin.n()},
                           {"rank_B_equals_n", rank_B == fin.n()},
                           {"rank_M_equals_n", rank_M == fin.n()},
                           {"replay_reproduces_final", replay(rr) == fin}};
  o.report.tolerances = {{"tolerance", opt.tolerance}};

  if (initial) {
    // Original orbit projected through log_projection must follow the
    // reduced map, and the lifted constants must not move.
    const Trajectory xs = iterate(map, *initial, steps);
    const auto project = [&](const State& x) {
      const auto logs = x.logs();
      std::vector<double> y(rr.log_projection.rows(), 0.0);
      const auto P = rr.log_projection.to_doubles();
      for (std::size_t i = 0; i < y.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < logs.size(); ++k) s += P[i * logs.size() + k] * logs[k];
        y[i] = std::exp(s);
      }
      return State(std::move(y));
    };
    State y = project(xs.front());
    double orbit_gap = 0.0;
    double drift = 0.0;
    for (std::size_t p = 1; p < xs.size(); ++p) {
      y = step(fin, y);
      orbit_gap = std::max(orbit_gap, relative_gap(project(xs[p]).values(), y.values()));
      for (const auto& c : rr.constants)
        drift = std::max(drift, std::abs(evaluate_constant(c, xs[p]) - *c.value) /
                                    std::abs(*c.value));
    }
    res["orbit_check"] = {{"steps", steps},
                          {"max_relative_orbit_gap", orbit_gap},
                          {"max_relative_constant_drift", drift},
                          {"passed", orbit_gap <= opt.tolerance && drift <= opt.tolerance}};
  }
  o.report.results = std::move(res);

  std::ostringstream s;
  if (trivial)
    s << "already non-redundant (n=" << fin.n() << ", m=" << fin.m() << ")\n";
  else
    s << "reduced n=" << map.n() << ", m=" << map.m() << " to n=" << fin.n() << ", m=" << fin.m()
      << " in " << rr.steps.size() << " step(s); " << rr.constants.size()
      << " constant(s) of motion\n";
  o.summary = s.str();
  return o;
}

// ------------------------------------------------------------- canonical

Outcome cmd_canonical(const Options& opt) {
  const auto model = io::load_model(opt.model);
  const QPMap& map = model.as_map();
  const auto initial = resolve_initial(opt, model);
  const std::size_t steps = opt.steps == 0 ? 20 : opt.steps;

  Outcome o;
  o.report.command = "canonical";
  o.report.inputs = echo_model(opt.model, model);
  if (initial) o.report.inputs["initial"] = io::to_json(*initial);

  const CanonicalForm cf = to_lv_canonical(map);
  const RationalMatrix invariant = class_invariant(map);
  const QPMap& lv = cf.lotka_volterra;

  json res;
  res["class_invariant"] = io::to_json(invariant);
  json body = io::to_json(cf);
  for (const auto& [k, v] : body.items()) res[k] = v;
  res["constant_count"] = cf.constants.size();
  res["identity_transform"] = cf.transform.C() == RationalMatrix::identity(cf.transform.n());

  o.report.exact_checks = {{"B_is_identity", lv.B() == RationalMatrix::identity(lv.n())},
                           {"M_equals_class_invariant", lv.M() == invariant}};
  o.report.tolerances = {{"tolerance", opt.tolerance}};

  if (initial) {
    const std::size_t m = lv.n();
    const Trajectory xs = iterate(map, *initial, steps);
    State z = phi(cf.transform, embed_state(*initial, m));
    double gap = 0.0;
    double level = 0.0;
    for (std::size_t p = 1; p < xs.size(); ++p) {
      z = step(lv, z);
      const State back = phi_inverse(cf.transform, z);
      const std::vector<double> head(back.values().begin(),
                                     back.values().begin() + static_cast<std::ptrdiff_t>(map.n()));
      gap = std::max(gap, relative_gap(xs[p].values(), head));
      for (const auto& c : cf.constants)
        level = std::max(level, std::abs(evaluate_constant(c, z) - 1.0));
    }
    res["orbit_check"] = {{"steps", steps},
                          {"max_relative_orbit_gap", gap},
                          {"max_level_set_deviation", level},
                          {"passed", gap <= opt.tolerance && level <= opt.tolerance}};
  }
  o.report.results = std::move(res);

  std::ostringstream s;
  s << "LV canonical form of dimension " << lv.n();
  if (!cf.constants.empty()) s << " with " << cf.constants.size() << " constant(s) fixed at 1";
  s << '\n';
  o.summary = s.str();
  return o;
}

// ------------------------------------------------------------ same-class

Outcome cmd_same_class(const Options& opt) {
  const auto first = io::load_model(opt.model);
  const auto second = io::load_model(opt.model2);
  const QPMap& a = first.as_map();
  const QPMap& b = second.as_map();

  Outcome o;
  o.report.command = "same-class";
  o.report.inputs = {{"first", echo_model(opt.model, first)},
                     {"second", echo_model(opt.model2, second)}};
  o.report.tolerances = {{"tolerance", opt.tolerance}};

  json res;
  res["invariants"] = {{"first", io::to_json(class_invariant(a))},
                       {"second", io::to_json(class_invariant(b))}};
  try {
    const QMTransform t = same_class(a, b);
    res["same_class"] = true;
    res["C"] = io::to_json(t.C());
    o.report.exact_checks = {{"B_C_equals_B2", a.B() * t.C() == b.B()},
                             {"Cinv_M_equals_M2", t.C_inverse() * a.M() == b.M()}};
    o.summary = "same class\n";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotSameClass) throw;
    res["same_class"] = false;
    res["reason"] = e.what();
    o.summary = std::string("different classes: ") + e.what() + "\n";
  }
  o.report.results = std::move(res);
  return o;
}

// -------------------------------------------------------------- simulate

Outcome cmd_simulate(const Options& opt) {
  const auto model = io::load_model(opt.model);
  std::optional<QPMap> discrete;
  if (model.kind == io::ModelFile::Kind::Flow) {
    if (opt.eps.empty())
      throw Error(ErrorCode::ParseError, "simulating a flow needs --eps for its QP discretization");
    discrete = qp_discretize(model.as_flow(), parse_rational(opt.eps));
  } else {
    discrete = model.as_map();
  }
  const auto initial = resolve_initial(opt, model);
  if (!initial)
    throw Error(ErrorCode::ParseError, "simulate needs --initial or an 'initial' field");
  const std::size_t steps = opt.steps == 0 ? 100 : opt.steps;

  Outcome o;
  o.report.command = "simulate";
  o.report.inputs = echo_model(opt.model, model);
  o.report.inputs["initial"] = io::to_json(*initial);
  o.report.inputs["steps"] = steps;
  if (!opt.eps.empty()) o.report.inputs["eps"] = opt.eps;
  o.report.inputs["csv"] = opt.out;

  Trajectory traj{*initial};
  std::optional<Error> failure;
  for (std::size_t p = 1; p <= steps; ++p) {
    try {
      traj.push_back(step(*discrete, traj.back()));
    } catch (const Error& e) {
      failure = Error(e.code(), e.what(), p);
      break;
    }
  }

  std::ofstream csv(opt.out);
  if (!csv) throw Error(ErrorCode::ParseError, "cannot write " + opt.out);
  io::write_trajectory_csv(csv, traj);

  json res;
  res["rows_written"] = traj.size();
  res["steps_completed"] = traj.size() - 1;
  res["diverged"] = failure.has_value();
  if (failure) {
    res["diverged_at_step"] = *failure->step();
    res["note"] = std::string("iteration stopped: ") + failure->what();
    o.exit_code = kExitDivergence;
  }
  res["final_state"] = io::to_json(traj.back());
  o.report.results = std::move(res);
  o.report.exact_checks = json::object();

  std::ostringstream s;
  s << "wrote " << traj.size() << " row(s) to " << opt.out;
  if (failure) s << "; diverged at step " << *failure->step();
  s << '\n';
  o.summary = s.str();
  return o;
}

// ------------------------------------------------------------ discretize

json trajectory_json(const Trajectory& traj) {
  json j = json::array();
  for (const auto& x : traj) j.push_back(io::to_json(x));
  return j;
}

Outcome cmd_discretize(const Options& opt) {
  const auto model = io::load_model(opt.model);
  const QPFlow flow = model.as_flow();
  const Rational eps = checked_step(parse_rational(opt.eps));
  const auto initial = resolve_initial(opt, model);
  if (!initial && !opt.fixed_point && !opt.commutativity)
    throw Error(ErrorCode::ParseError,
                "discretize needs an initial state or one of --fixed-point, --commutativity");

  Outcome o;
  o.report.command = "discretize";
  o.report.inputs = echo_model(opt.model, model);
  o.report.inputs["eps"] = to_string(eps);
  o.report.inputs["scheme"] = opt.scheme;
  o.report.inputs["horizon"] = opt.horizon;
  if (initial) o.report.inputs["initial"] = io::to_json(*initial);
  o.report.tolerances = {{"fixed_point_residual", kFixedPointResidualTol},
                         {"jacobian", kJacobianTol},
                         {"pointwise_commutativity", 1e-12}};

  json res;
  std::ostringstream s;
  const double h = to_double(eps);
  const auto steps = static_cast<std::size_t>(std::floor(opt.horizon / h * (1.0 + 1e-12)));

  if (initial) {
    if (opt.scheme == "both") {
      const auto series = compare_discretizations(flow, eps, *initial, opt.horizon);
      json js = json::array();
      for (const auto& d : series)
        js.push_back({{"step", d.step}, {"time", d.time}, {"divergence", d.divergence}});
      res["divergence_series"] = std::move(js);
      res["terminal_divergence"] = series.back().divergence;
      s << "terminal |x_E - x_QP| = " << series.back().divergence << " after " << steps
        << " step(s)\n";
    } else if (opt.scheme == "qp") {
      Trajectory traj;
      try {
        traj = iterate(qp_discretize(flow, eps), *initial, steps);
      } catch (const Error& e) {
        throw Error(ErrorCode::OrbitEscaped, std::string("qp orbit diverged: ") + e.what(),
                    e.step());
      }
      res["qp_trajectory"] = trajectory_json(traj);
      s << "qp scheme: " << steps << " step(s)\n";
    } else {
      const EulerMap em = euler_discretize(flow, eps);
      Trajectory traj{*initial};
      for (std::size_t p = 1; p <= steps; ++p) {
        const EulerImage img = euler_step(em, traj.back());
        if (!img.positive)
          throw Error(ErrorCode::OrbitEscaped,
                      "euler orbit left the positive orthant at step " + std::to_string(p), p);
        traj.emplace_back(img.x);
      }
      res["euler_trajectory"] = trajectory_json(traj);
      s << "euler scheme: " << steps << " step(s)\n";
    }
  }

  if (opt.fixed_point) {
    const FixedPointReport fp = check_fixed_point_coincidence(flow, eps);
    res["fixed_point"] = io::to_json(fp);
    if (!fp.skipped) o.report.exact_checks["fixed_point_coincidence"] = fp.coincident;
    s << (fp.skipped ? "fixed point check skipped: " + fp.reason
                     : std::string(fp.coincident ? "fixed points and Jacobians coincide"
                                                 : "fixed point mismatch"))
      << '\n';
  }

  if (opt.commutativity) {
    json table;
    RationalMatrix C;
    if (!opt.transform.empty()) {
      C = parse_matrix_text(opt.transform);
      if (C.rows() != flow.n())
        throw Error(ErrorCode::ParseError, "--transform: expected a " + std::to_string(flow.n()) +
                                               "x" + std::to_string(flow.n()) + " matrix");
      table["source"] = "--transform";
    } else {
      const auto seed = seed_from_env();
      C = random_transform(flow.n(), seed);
      table["source"] = "random";
      table["seed"] = seed;
    }
    const QMTransform t(C);
    table["C"] = io::to_json(C);
    const std::vector<DiscretizationFamily> families = {
        DiscretizationFamily::qp_exp(),
        DiscretizationFamily::power_base(2.0),
        DiscretizationFamily::euler_add(),
        DiscretizationFamily::multiplicative(Shape::Affine),
        DiscretizationFamily::multiplicative(Shape::Quadratic),
        DiscretizationFamily::multiplicative(Shape::Logistic),
        DiscretizationFamily::additive(Shape::Affine),
        DiscretizationFamily::additive(Shape::Quadratic),
        DiscretizationFamily::additive(Shape::Logistic)};
    json rows = json::array();
    for (const auto& fam : families) {
      const auto verdict = check_commutativity(flow, t, eps, fam);
      json row = {{"family", fam.name()}};
      const json fields = io::to_json(verdict);
      for (const auto& [k, v] : fields.items()) row[k] = v;
      rows.push_back(std::move(row));
      if (verdict.exact) o.report.exact_checks["commutes_" + fam.name()] = verdict.commutes;
      s << fam.name() << ": " << (verdict.commutes ? "commutes" : "does not commute") << " ("
        << verdict.detail << ")\n";
    }
    table["families"] = std::move(rows);
    res["commutativity"] = std::move(table);
  }

  o.report.results = std::move(res);
  o.summary = s.str();
  return o;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quasipolynomial map toolkit"};
  app.name("qpmap");
  app.require_subcommand(1);
  Options opt;

  auto* tol = app.add_option("--tolerance", opt.tolerance, "Tolerance for float checks")
                  ->capture_default_str();
  tol->check(CLI::PositiveNumber);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", opt.out, "Write the report (or CSV) to this path");
    sub->add_option("--tolerance", opt.tolerance, "Tolerance for float checks")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  };

  auto* reduce_cmd = app.add_subcommand("reduce", "Reduce a map to non-redundant form");
  reduce_cmd->add_option("model", opt.model, "Model file")->required();
  reduce_cmd->add_option("--initial", opt.initial, "Initial state, e.g. 0.5,1,2");
  reduce_cmd->add_option("--steps", opt.steps, "Orbit check length (default 50)");
  add_common(reduce_cmd);

  auto* canon_cmd = app.add_subcommand("canonical", "Lotka-Volterra canonical form");
  canon_cmd->add_option("model", opt.model, "Model file")->required();
  canon_cmd->add_option("--initial", opt.initial, "Initial state for the orbit check");
  canon_cmd->add_option("--steps", opt.steps, "Orbit check length (default 20)");
  add_common(canon_cmd);

  auto* same_cmd = app.add_subcommand("same-class", "Decide class equivalence of two maps");
  same_cmd->add_option("first", opt.model, "First model file")->required();
  same_cmd->add_option("second", opt.model2, "Second model file")->required();
  add_common(same_cmd);

  auto* sim_cmd = app.add_subcommand("simulate", "Iterate a map and write a CSV trajectory");
  sim_cmd->add_option("model", opt.model, "Model file")->required();
  sim_cmd->add_option("--initial", opt.initial, "Initial state");
  sim_cmd->add_option("--steps", opt.steps, "Number of iterates (default 100)");
  sim_cmd->add_option("--eps", opt.eps, "Time step when the model is a flow");
  sim_cmd->add_option("--out", opt.out, "CSV output path")->required();
  sim_cmd->add_option("--tolerance", opt.tolerance)->check(CLI::PositiveNumber);

  auto* disc_cmd = app.add_subcommand("discretize", "Compare QP and Euler discretizations");
  disc_cmd->add_option("model", opt.model, "Flow model file")->required();
  disc_cmd->add_option("--eps", opt.eps, "Time step, e.g. 1/100")->required();
  disc_cmd->add_option("--scheme", opt.scheme, "qp, euler or both")
      ->capture_default_str()
      ->check(CLI::IsMember({"qp", "euler", "both"}));
  disc_cmd->add_option("--horizon", opt.horizon, "Physical end time")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  disc_cmd->add_option("--initial", opt.initial, "Initial state");
  disc_cmd->add_flag("--fixed-point", opt.fixed_point, "Check fixed point coincidence");
  disc_cmd->add_flag("--commutativity", opt.commutativity, "Commutativity verdict table");
  disc_cmd->add_option("--transform", opt.transform,
                       "Exponent matrix for --commutativity, rows split by ';'");
  add_common(disc_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    if (*reduce_cmd)
      outcome = cmd_reduce(opt);
    else if (*canon_cmd)
      outcome = cmd_canonical(opt);
    else if (*same_cmd)
      outcome = cmd_same_class(opt);
    else if (*sim_cmd)
      outcome = cmd_simulate(opt);
    else
      outcome = cmd_discretize(opt);
  } catch (const Error& e) {
    err << "qpmap: " << to_string(e.code()) << ": " << e.what() << '\n';
    if (e.code() == ErrorCode::NotNonRedundant) err << "hint: run `qpmap reduce` first\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "qpmap: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  const double elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  outcome.report.timing = {{"elapsed_ms", elapsed}};

  const std::string text = outcome.report.serialize();
  if (!opt.out.empty() && !*sim_cmd) {
    std::ofstream f(opt.out);
    if (!f) {
      err << "qpmap: cannot write " << opt.out << '\n';
      return kExitInput;
    }
    f << text;
  } else {
    out << text;
  }
  err << outcome.summary;
  return outcome.exit_code;
}

}  // namespace qp::cli
