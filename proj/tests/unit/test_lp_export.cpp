#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "p2psched/lp_export.hpp"
#include "p2psched/milp.hpp"
#include "support/instance_gen.hpp"
#include "support/lp_reader.hpp"
#include "support/tempdir.hpp"
#include "p2psched/scheduler.hpp"

using namespace p2psched::milp;

namespace {

/// Asserts that a parsed LP file means exactly what `model` means, assuming
/// the model's names already use the clean [A-Za-z0-9_] alphabet.
void check_roundtrip(const MilpModel& model, const LpFileRead& file) {
  for (int j = 0; j < model.num_variables(); ++j) {
    const Variable& v = model.variable(j);
    CAPTURE(v.name);
    const double coef = model.objective_coef(j);
    if (coef != 0.0) {
      REQUIRE(file.objective.count(v.name) == 1);
      CHECK(file.objective.at(v.name) == coef);
    } else {
      // A zero coefficient may only appear via the all-zero placeholder.
      if (file.objective.count(v.name)) CHECK(file.objective.at(v.name) == 0.0);
    }

    CHECK((v.kind == VarKind::Binary) == (file.binaries.count(v.name) == 1));

    LpBound parsed;  // LP-format default [0, inf)
    if (v.kind == VarKind::Binary) parsed = {0.0, 1.0};
    if (file.explicit_bounds.count(v.name)) {
      parsed = file.explicit_bounds.at(v.name);
    }
    CHECK(parsed.lo == v.lower);
    CHECK(parsed.up == v.upper);
  }
  CHECK(file.objective_offset == model.objective_offset());

  REQUIRE(file.constraints.size() ==
          static_cast<std::size_t>(model.num_constraints()));
  for (int i = 0; i < model.num_constraints(); ++i) {
    const Constraint& con = model.constraint(i);
    const LpConstraintRead& got = file.constraints[i];
    CAPTURE(con.name);
    CHECK(got.name == con.name);
    CHECK(got.rhs == con.rhs);
    const char* rel = con.relation == Relation::LessEqual      ? "<="
                      : con.relation == Relation::GreaterEqual ? ">="
                                                               : "=";
    CHECK(got.relation == rel);
    std::map<std::string, double> expected;
    for (const Term& t : con.terms) {
      if (t.coef != 0.0) expected[model.variable(t.var).name] += t.coef;
    }
    if (expected.empty()) expected[model.variable(0).name] = 0.0;
    CHECK(got.terms == expected);
  }
}

}  // namespace

TEST_CASE("lp export: hand-built model round-trips exactly") {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, kInf);
  const int y = m.add_continuous("y", -kInf, kInf);
  const int z = m.add_continuous("z", -2.5, 7.25);
  const int w = m.add_continuous("w", 1.0, kInf);
  const int c = m.add_continuous("capped", 0.0, 4.5);
  const int fixed = m.add_continuous("fixed", 3.0, 3.0);
  const int b = m.add_binary("b");
  const int b2 = m.add_binary("b2");
  m.set_bounds(b2, 1.0, 1.0);
  m.set_objective_coef(x, 0.1);
  m.set_objective_coef(y, -2.0);
  m.set_objective_coef(z, 1.0 / 3.0);
  m.set_objective_coef(b, 5.0);
  m.set_objective_offset(-1.75);
  m.add_constraint("r1", {{x, 1.0}, {y, -1.5}, {b, 2.0}}, Relation::LessEqual,
                   10.0);
  m.add_constraint("r2", {{z, 0.25}, {w, 1.0}}, Relation::GreaterEqual, -3.5);
  m.add_constraint("r3", {{c, 1.0}, {fixed, -1.0}, {b2, 1.0}}, Relation::Equal,
                   0.125);

  LpFileRead file = parse_lp(export_lp_string(m));
  check_roundtrip(m, file);
}

TEST_CASE("lp export: doubles survive the text round trip bit-exactly") {
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, 1e-30);
  m.set_objective_coef(x, 0.1 + 0.2);  // not representable in short decimal
  m.add_constraint("r", {{x, 1.0 / 3.0}}, Relation::LessEqual,
                   6.02214076e23);
  LpFileRead file = parse_lp(export_lp_string(m));
  CHECK(file.objective.at("x") == 0.1 + 0.2);
  CHECK(file.constraints.at(0).terms.at("x") == 1.0 / 3.0);
  CHECK(file.constraints.at(0).rhs == 6.02214076e23);
  CHECK(file.explicit_bounds.at("x").up == 1e-30);
}

TEST_CASE("lp export: messy names are sanitized and mapped") {
  MilpModel m;
  const int a = m.add_continuous("p2p sell[0]", 0.0, 1.0);
  const int b = m.add_continuous("p2p+sell(0)", 0.0, 1.0);
  m.set_objective_coef(a, 1.0);
  m.set_objective_coef(b, 2.0);
  m.add_constraint("row one", {{a, 1.0}, {b, 1.0}}, Relation::LessEqual, 1.5);

  const std::string text = export_lp_string(m);
  // Sanitized output never contains the offending characters outside comments.
  std::istringstream in(text);
  std::string line;
  bool in_comments = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '\\') {
      in_comments = true;
      continue;
    }
    CHECK(!in_comments);  // comments only after End
    CHECK(line.find('[') == std::string::npos);
    CHECK(line.find('(') == std::string::npos);
  }
  CHECK(text.find("name mapping") != std::string::npos);
  CHECK(text.find("p2p sell[0]") != std::string::npos);  // original recorded

  // The two distinct originals must stay distinct after sanitization.
  LpFileRead file = parse_lp(text);
  CHECK(file.objective.size() == 2);
  double coef_sum = 0.0;
  for (const auto& [name, coef] : file.objective) coef_sum += coef;
  CHECK(coef_sum == 3.0);
}

TEST_CASE("lp export: zero objective emits a placeholder term") {
  MilpModel m;
  m.add_continuous("x", 0.0, 1.0);
  m.add_constraint("r", {{0, 1.0}}, Relation::LessEqual, 1.0);
  LpFileRead file = parse_lp(export_lp_string(m));
  REQUIRE(file.objective.count("x") == 1);
  CHECK(file.objective.at("x") == 0.0);
}

TEST_CASE("lp export: file variant writes identical content") {
  TempDir tmp;
  MilpModel m;
  const int x = m.add_continuous("x", 0.0, 2.0);
  m.set_objective_coef(x, 1.0);
  m.add_constraint("r", {{x, 1.0}}, Relation::LessEqual, 1.0);
  const std::string path = tmp.file("model.lp");
  export_lp_file(m, path);
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  CHECK(buffer.str() == export_lp_string(m));
}

TEST_CASE("lp export: full scheduling model round-trips") {
  p2psched::model::Instance inst = mid_instance(424242);
  p2psched::scheduler::BuiltModel built =
      p2psched::scheduler::build_model(inst, inst.evs);
  LpFileRead file = parse_lp(export_lp_string(built.model));
  check_roundtrip(built.model, file);
}
