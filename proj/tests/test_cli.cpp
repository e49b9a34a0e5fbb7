#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qp/cli.hpp"
#include "qp/io.hpp"

using qp::io::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;

  json report() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "qpmap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = qp::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string data(const std::string& name) { return std::string(QP_TEST_DATA) + "/" + name; }

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("qpmap_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_timing(const std::string& text) {
  auto j = json::parse(text);
  j.erase("timing");
  return j.dump(2);
}

}  // namespace

TEST_CASE("reduce the worked example") {
  const auto r = run({"reduce", data("worked_example.json")});
  REQUIRE(r.code == 0);
  const auto rep = r.report();
  CHECK(rep["command"] == "reduce");
  CHECK(rep["results"]["final"]["B"] == json::parse(R"([["1","1"],["1","0"]])"));
  CHECK(rep["results"]["already_non_redundant"] == false);
  CHECK(rep["results"]["certificates"]["B"]["rank"] == 2);
  CHECK(rep["results"]["certificates"]["M"]["rank"] == 2);
  for (const auto& [k, v] : rep["exact_checks"].items()) {
    CAPTURE(k);
    CHECK(v == true);
  }
}

TEST_CASE("reduce: non-redundant input and orbit check") {
  const auto r = run({"reduce", data("lv2.json")});
  REQUIRE(r.code == 0);
  const auto rep = r.report();
  CHECK(rep["results"]["already_non_redundant"] == true);
  CHECK(rep["results"]["steps"].empty());
  CHECK(rep["results"]["orbit_check"]["passed"] == true);
  CHECK(r.err.find("already non-redundant") != std::string::npos);
}

TEST_CASE("reduce: malformed rational is an input error with a field path") {
  const auto r = run({"reduce", data("bad_rational.json")});
  CHECK(r.code == 2);
  CHECK(r.err.find("A[1][0]") != std::string::npos);
  CHECK(r.out.empty());
  CHECK(run({"reduce", data("missing.json")}).code == 2);
  CHECK(run({"reduce", data("lv2.json"), "--initial", "1,-2"}).code == 2);
  CHECK(run({"reduce", data("lv2.json"), "--initial", "1"}).code == 2);
}

TEST_CASE("canonical") {
  const auto lv = run({"canonical", data("lv_identity.json")});
  REQUIRE(lv.code == 0);
  CHECK(lv.report()["results"]["identity_transform"] == true);
  CHECK(lv.report()["results"]["constant_count"] == 0);

  const auto wide = run({"canonical", data("wide.json")});
  REQUIRE(wide.code == 0);
  const auto rep = wide.report();
  CHECK(rep["results"]["constant_count"] == 1);
  CHECK(rep["results"]["constants"].size() == 1);
  CHECK(rep["exact_checks"]["B_is_identity"] == true);
  CHECK(rep["exact_checks"]["M_equals_class_invariant"] == true);
  CHECK(rep["results"]["orbit_check"]["passed"] == true);

  const auto bad = run({"canonical", data("redundant.json")});
  CHECK(bad.code == 3);
  CHECK(bad.err.find("reduce") != std::string::npos);
}

TEST_CASE("same-class") {
  const auto self = run({"same-class", data("wide.json"), data("wide.json")});
  REQUIRE(self.code == 0);
  CHECK(self.report()["results"]["same_class"] == true);
  CHECK(self.report()["results"]["C"] == json::parse(R"([["1"]])"));

  const auto pair = run({"same-class", data("wide.json"), data("wide_transformed.json")});
  REQUIRE(pair.code == 0);
  CHECK(pair.report()["results"]["C"] == json::parse(R"([["1/2"]])"));

  const auto diff = run({"same-class", data("lv2.json"), data("lv_identity.json")});
  REQUIRE(diff.code == 0);
  CHECK(diff.report()["results"]["same_class"] == false);

  CHECK(run({"same-class", data("wide.json"), data("lv2.json")}).code == 3);
}

TEST_CASE("simulate") {
  const auto csv = temp_path("fixed.csv");
  const auto r = run({"simulate", data("lv_identity.json"), "--steps", "5", "--out", csv});
  REQUIRE(r.code == 0);
  CHECK(slurp(csv) ==
        "p,x1,x2\n0,1,0.5\n1,1,0.5\n2,1,0.5\n3,1,0.5\n4,1,0.5\n5,1,0.5\n");

  const auto blow = temp_path("blowup.csv");
  const auto b = run({"simulate", data("blowup.json"), "--steps", "10", "--out", blow});
  CHECK(b.code == 4);
  CHECK(b.report()["results"]["diverged_at_step"] == 2);
  CHECK(b.report()["results"]["rows_written"] == 2);
  CHECK(slurp(blow).rfind("p,x1\n0,2\n1,", 0) == 0);

  CHECK(run({"simulate", data("lv_identity.json")}).code == 2);
  CHECK(run({"simulate", data("logistic_flow.json"), "--out", temp_path("f.csv")}).code == 2);
  CHECK(run({"simulate", data("logistic_flow.json"), "--eps", "1/10", "--out", temp_path("f.csv")})
            .code == 0);
}

TEST_CASE("discretize") {
  const auto both = run({"discretize", data("logistic_flow.json"), "--eps", "1/50"});
  REQUIRE(both.code == 0);
  CHECK(both.report()["results"]["divergence_series"].size() == 51);

  const auto qp_only =
      run({"discretize", data("logistic_flow.json"), "--eps", "1/10", "--scheme", "qp"});
  REQUIRE(qp_only.code == 0);
  CHECK(qp_only.report()["results"]["qp_trajectory"].size() == 11);

  const auto analysis = run({"discretize", data("flow_wide.json"), "--eps", "1/10",
                             "--fixed-point", "--commutativity"});
  REQUIRE(analysis.code == 0);
  const auto rep = analysis.report();
  CHECK(rep["results"]["fixed_point"]["skipped"] == true);
  CHECK(rep["results"]["commutativity"]["families"].size() == 9);
  CHECK(rep["exact_checks"]["commutes_qp-exp"] == true);
  CHECK(rep["exact_checks"]["commutes_power-base(2)"] == true);

  const auto given = run({"discretize", data("logistic_flow.json"), "--eps", "1/10",
                          "--commutativity", "--transform", "2"});
  REQUIRE(given.code == 0);
  const auto euler_row = given.report()["results"]["commutativity"]["families"][2];
  CHECK(euler_row["family"] == "euler");
  CHECK(euler_row["max_discrepancy"].get<double>() > 0.0);

  CHECK(run({"discretize", data("logistic_flow.json"), "--eps", "1", "--initial", "3",
             "--scheme", "euler"}).code == 4);
  CHECK(run({"discretize", data("logistic_flow.json"), "--eps", "0"}).code == 3);
  CHECK(run({"discretize", data("logistic_flow.json"), "--eps", "1/10", "--scheme", "rk4"}).code == 2);
  CHECK(run({"discretize", data("lv2.json"), "--eps", "1/10"}).code == 2);
}

TEST_CASE("reports are deterministic apart from timing") {
  const std::vector<std::vector<std::string>> commands = {
      {"reduce", data("worked_example.json")},
      {"canonical", data("wide.json")},
      {"same-class", data("wide.json"), data("wide_transformed.json")},
      {"discretize", data("flow_wide.json"), "--eps", "1/10", "--fixed-point", "--commutativity"}};
  for (const auto& c : commands) {
    const auto a = run(c);
    const auto b = run(c);
    CHECK(without_timing(a.out) == without_timing(b.out));
    CHECK(a.report().contains("timing"));
  }
}

TEST_CASE("--out writes the report to a file") {
  const auto path = temp_path("report.json");
  const auto r = run({"reduce", data("worked_example.json"), "--out", path});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  CHECK(json::parse(slurp(path))["command"] == "reduce");
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"reduce"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"reduce", data("lv2.json"), "--tolerance", "-1"}).code == 2);
}

TEST_CASE("exit code table") {
  using qp::ErrorCode;
  CHECK(qp::cli::exit_code_for(ErrorCode::ParseError) == 2);
  CHECK(qp::cli::exit_code_for(ErrorCode::NotNonRedundant) == 3);
  CHECK(qp::cli::exit_code_for(ErrorCode::DimensionMismatch) == 3);
  CHECK(qp::cli::exit_code_for(ErrorCode::Overflow) == 4);
  CHECK(qp::cli::exit_code_for(ErrorCode::OrbitEscaped) == 4);
}
