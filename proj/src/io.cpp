#include "qp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qp/error.hpp"

namespace qp::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::ParseError, path + ": " + msg);
}

Rational rational_field(const json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(mpz_class(j.dump(), 10));
  if (!j.is_string()) fail(path, "expected a rational string such as \"3/4\"");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

std::size_t count_field(const json& doc, const char* key) {
  if (!doc.contains(key)) fail(key, "missing field");
  const auto& v = doc.at(key);
  if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

RationalVector vector_field(const json& j, const std::string& path, std::size_t expected) {
  if (!j.is_array()) fail(path, "expected an array");
  if (j.size() != expected)
    fail(path, "expected " + std::to_string(expected) + " entries, found " +
                   std::to_string(j.size()));
  RationalVector out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(rational_field(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

RationalMatrix matrix_field(const json& doc, const char* key, std::size_t rows,
                            std::size_t cols) {
  if (!doc.contains(key)) fail(key, "missing field");
  const auto& j = doc.at(key);
  if (!j.is_array()) fail(key, "expected an array of rows");
  if (j.size() != rows)
    fail(key, "expected " + std::to_string(rows) + " rows, found " + std::to_string(j.size()));
  RationalMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    auto row = vector_field(j[i], std::string(key) + "[" + std::to_string(i) + "]", cols);
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = row[c];
  }
  return m;
}

}  // namespace

const QPMap& ModelFile::as_map() const {
  if (kind != Kind::Map) throw Error(ErrorCode::ParseError, "kind: expected \"map\", found \"flow\"");
  return coefficients;
}

QPFlow ModelFile::as_flow() const {
  if (kind != Kind::Flow) throw Error(ErrorCode::ParseError, "kind: expected \"flow\", found \"map\"");
  return QPFlow(coefficients);
}

std::optional<State> ModelFile::initial_state() const {
  if (!initial) return std::nullopt;
  try {
    return State(to_doubles(*initial));
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, std::string("initial: ") + e.what());
  }
}

ModelFile parse_model(const json& doc) {
  if (!doc.is_object()) fail("$", "expected a JSON object");
  if (!doc.contains("kind") || !doc.at("kind").is_string()) fail("kind", "expected \"map\" or \"flow\"");
  const auto kind_text = doc.at("kind").get<std::string>();
  ModelFile::Kind kind;
  if (kind_text == "map")
    kind = ModelFile::Kind::Map;
  else if (kind_text == "flow")
    kind = ModelFile::Kind::Flow;
  else
    fail("kind", "expected \"map\" or \"flow\", found \"" + kind_text + "\"");

  const std::size_t n = count_field(doc, "n");
  const std::size_t m = count_field(doc, "m");
  if (!doc.contains("lambda")) fail("lambda", "missing field");
  RationalVector lambda = vector_field(doc.at("lambda"), "lambda", n);
  RationalMatrix A = matrix_field(doc, "A", n, m);
  RationalMatrix B = matrix_field(doc, "B", m, n);

  std::optional<RationalVector> initial;
  if (doc.contains("initial") && !doc.at("initial").is_null()) {
    initial = vector_field(doc.at("initial"), "initial", n);
    for (std::size_t i = 0; i < n; ++i)
      if ((*initial)[i] <= 0) fail("initial[" + std::to_string(i) + "]", "must be positive");
  }

  std::string name;
  std::string description;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) fail("name", "expected a string");
    name = doc.at("name").get<std::string>();
  }
  if (doc.contains("description")) {
    if (!doc.at("description").is_string()) fail("description", "expected a string");
    description = doc.at("description").get<std::string>();
  }

  try {
    return ModelFile{kind, QPMap::create(std::move(lambda), std::move(A), std::move(B)),
                     std::move(initial), std::move(name), std::move(description)};
  } catch (const Error& e) {
    fail("B", e.what());
  }
}

ModelFile parse_model_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what());
  }
  return parse_model(doc);
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open model file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model_text(buf.str());
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

json model_to_json(const ModelFile& model) {
  json j;
  j["kind"] = model.kind == ModelFile::Kind::Map ? "map" : "flow";
  if (!model.name.empty()) j["name"] = model.name;
  if (!model.description.empty()) j["description"] = model.description;
  j["n"] = model.coefficients.n();
  j["m"] = model.coefficients.m();
  j["lambda"] = to_json(model.coefficients.lambda());
  j["A"] = to_json(model.coefficients.A());
  j["B"] = to_json(model.coefficients.B());
  if (model.initial) j["initial"] = to_json(*model.initial);
  return j;
}

json map_model(const QPMap& map, const std::string& name) {
  return model_to_json(ModelFile{ModelFile::Kind::Map, map, std::nullopt, name, {}});
}

json flow_model(const QPFlow& flow, const std::string& name) {
  return model_to_json(ModelFile{ModelFile::Kind::Flow, flow.rates(), std::nullopt, name, {}});
}

std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw Error(ErrorCode::ParseError, "empty entry in list \"" + text + "\"");
    out.push_back(parse_rational(item.substr(first, last - first + 1)));
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "empty list");
  return out;
}

json to_json(const Rational& v) { return v.get_str(); }

json to_json(const RationalVector& v) {
  json j = json::array();
  for (const auto& x : v) j.push_back(x.get_str());
  return j;
}

json to_json(const RationalMatrix& m) {
  json j = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) j.push_back(to_json(m.row(i)));
  return j;
}

json to_json(const State& s) { return json(s.values()); }

json to_json(const DenseMatrix& m) {
  json j = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(i, c));
    j.push_back(std::move(row));
  }
  return j;
}

json to_json(const ConstantOfMotion& c) {
  json j;
  j["exponents"] = to_json(c.exponents);
  j["value"] = c.value ? json(*c.value) : json(nullptr);
  return j;
}

json to_json(const StepRecord& r) {
  json j;
  j["kind"] = std::string(to_string(r.kind));
  j["n_before"] = r.n_before;
  j["m_before"] = r.m_before;
  j["n_after"] = r.n_after;
  j["m_after"] = r.m_after;
  j["working_rank"] = r.working_rank;
  if (r.transform) j["C"] = to_json(r.transform->C());
  if (!r.decoupled.empty()) j["decoupled"] = r.decoupled;
  if (!r.q_factors.empty()) j["q_factors"] = r.q_factors;
  if (!r.constants.empty()) {
    j["constants"] = json::array();
    for (const auto& c : r.constants) j["constants"].push_back(to_json(c));
  }
  if (!r.merged_groups.empty()) j["merged_groups"] = r.merged_groups;
  if (!r.folded_constant_qms.empty()) j["folded_constant_qms"] = r.folded_constant_qms;
  return j;
}

json to_json(const QPMap& map) {
  json j;
  j["n"] = map.n();
  j["m"] = map.m();
  j["lambda"] = to_json(map.lambda());
  j["A"] = to_json(map.A());
  j["B"] = to_json(map.B());
  return j;
}

json to_json(const ReductionReport& report) {
  json j;
  j["final"] = to_json(report.final);
  j["steps"] = json::array();
  for (const auto& s : report.steps) j["steps"].push_back(to_json(s));
  j["constants"] = json::array();
  for (const auto& c : report.constants) j["constants"].push_back(to_json(c));
  j["log_projection"] = to_json(report.log_projection);
  return j;
}

json to_json(const CanonicalForm& form) {
  json j;
  j["lotka_volterra"] = to_json(form.lotka_volterra);
  j["C"] = to_json(form.transform.C());
  if (form.embedded) j["embedded"] = to_json(*form.embedded);
  j["constants"] = json::array();
  for (const auto& c : form.constants) j["constants"].push_back(to_json(c));
  return j;
}

json to_json(const FixedPointReport& report) {
  json j;
  j["skipped"] = report.skipped;
  if (report.skipped) {
    j["reason"] = report.reason;
    return j;
  }
  j["fixed_point"] = to_json(*report.fixed_point);
  j["qp_residual"] = report.qp_residual;
  j["euler_residual"] = report.euler_residual;
  j["qp_jacobian"] = to_json(report.qp_jacobian);
  j["euler_jacobian"] = to_json(report.euler_jacobian);
  j["jacobian_max_difference"] = report.jacobian_max_difference;
  j["coincident"] = report.coincident;
  return j;
}

json to_json(const CommutativityVerdict& verdict) {
  json j;
  j["exact"] = verdict.exact;
  j["commutes"] = verdict.commutes;
  j["max_discrepancy"] = std::isfinite(verdict.max_discrepancy) ? json(verdict.max_discrepancy)
                                                                : json("inf");
  j["points_evaluated"] = verdict.points_evaluated;
  j["points_escaped"] = verdict.points_escaped;
  if (verdict.effective_step) j["effective_step"] = *verdict.effective_step;
  j["detail"] = verdict.detail;
  return j;
}

RationalMatrix matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j[0].size();
  RationalMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    auto row = vector_field(j[i], path + "[" + std::to_string(i) + "]", cols);
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = row[c];
  }
  return m;
}

json Report::to_json() const {
  json j;
  j["command"] = command;
  j["inputs"] = inputs;
  j["results"] = results;
  j["exact_checks"] = exact_checks;
  j["tolerances"] = tolerances;
  j["timing"] = timing;
  return j;
}

Report Report::from_json(const json& j) {
  Report r;
  r.command = j.at("command").get<std::string>();
  r.inputs = j.at("inputs");
  r.results = j.at("results");
  r.exact_checks = j.at("exact_checks");
  r.tolerances = j.at("tolerances");
  r.timing = j.at("timing");
  return r;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t n = traj.empty() ? 0 : traj.front().size();
  os << 'p';
  for (std::size_t i = 0; i < n; ++i) os << ",x" << (i + 1);
  os << '\n';
  char buf[32];
  for (std::size_t p = 0; p < traj.size(); ++p) {
    os << p;
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", traj[p][i]);
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace qp::io
