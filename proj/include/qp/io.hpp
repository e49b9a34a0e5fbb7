#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qp/discretize.hpp"
#include "qp/model.hpp"
#include "qp/reduce.hpp"

namespace qp::io {

using json = nlohmann::ordered_json;

/// Parsed model file. Matrices are exact; `coefficients` holds lambda, A, B
/// for a map and lambda*, A*, B for a flow.
struct ModelFile {
  enum class Kind { Map, Flow };
  Kind kind = Kind::Map;
  QPMap coefficients;
  std::optional<std::vector<Rational>> initial;
  std::string name;
  std::string description;

  /// Throws ParseError when the file declares the other kind.
  const QPMap& as_map() const;
  QPFlow as_flow() const;
  std::optional<State> initial_state() const;
};

/// Throws Error(ParseError) with a field path ("A[1][0]: ...").
ModelFile parse_model(const json& doc);
ModelFile parse_model_text(const std::string& text);
ModelFile load_model(const std::filesystem::path& path);

json model_to_json(const ModelFile& model);
json map_model(const QPMap& map, const std::string& name = {});
json flow_model(const QPFlow& flow, const std::string& name = {});

/// Comma-separated list of decimal or p/q values, e.g. "0.5,1/3".
std::vector<Rational> parse_rational_list(const std::string& text);

json to_json(const Rational& v);
json to_json(const RationalVector& v);
json to_json(const RationalMatrix& m);
json to_json(const State& s);
json to_json(const DenseMatrix& m);
json to_json(const ConstantOfMotion& c);
json to_json(const StepRecord& r);
json to_json(const QPMap& map);
json to_json(const ReductionReport& report);
json to_json(const CanonicalForm& form);
json to_json(const FixedPointReport& report);
json to_json(const CommutativityVerdict& verdict);

RationalMatrix matrix_from_json(const json& j, const std::string& path);

/// Machine-readable command report. Everything except `timing` is a pure
/// function of the command's inputs.
struct Report {
  std::string command;
  json inputs = json::object();
  json results = json::object();
  json exact_checks = json::object();
  json tolerances = json::object();
  json timing = json::object();

  json to_json() const;
  static Report from_json(const json& j);
  std::string serialize() const { return to_json().dump(2) + "\n"; }

  friend bool operator==(const Report& a, const Report& b) { return a.to_json() == b.to_json(); }
};

/// Writes "p,x1,...,xn" then one row per state, 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace qp::io
