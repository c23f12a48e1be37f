#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "ep3/cli.hpp"
#include "ep3/serialize.hpp"

using namespace ep3;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ep3-atlas");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Minimal JSON Schema check covering the keywords the shipped schema uses.
bool type_matches(const Json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "null") return v.is_null();
  return false;
}

void validate(const Json& v, const Json& schema, const Json& root, const std::string& where,
              std::vector<std::string>& problems) {
  if (schema.contains("$ref")) {
    const std::string ref = schema["$ref"];
    validate(v, root["$defs"][ref.substr(ref.rfind('/') + 1)], root, where, problems);
    return;
  }
  if (schema.contains("type")) {
    bool ok = false;
    if (schema["type"].is_array()) {
      for (const auto& t : schema["type"]) ok = ok || type_matches(v, t);
    } else {
      ok = type_matches(v, schema["type"]);
    }
    if (!ok) {
      problems.push_back(where + ": wrong type");
      return;
    }
  }
  if (schema.contains("enum") && std::find(schema["enum"].begin(), schema["enum"].end(), v) == schema["enum"].end())
    problems.push_back(where + ": not in enum");
  if (schema.contains("minimum") && v.is_number() && v.get<double>() < schema["minimum"].get<double>())
    problems.push_back(where + ": below minimum");
  if (schema.contains("exclusiveMinimum") && v.is_number() &&
      v.get<double>() <= schema["exclusiveMinimum"].get<double>())
    problems.push_back(where + ": not above exclusiveMinimum");
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>())
      problems.push_back(where + ": too few items");
    if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>())
      problems.push_back(where + ": too many items");
    if (schema.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i)
        validate(v[i], schema["items"], root, where + "[" + std::to_string(i) + "]", problems);
  }
  if (v.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema["required"])
        if (!v.contains(key.get<std::string>())) problems.push_back(where + ": missing " + key.get<std::string>());
    for (const auto& [key, value] : v.items()) {
      if (schema.contains("properties") && schema["properties"].contains(key)) {
        validate(value, schema["properties"][key], root, where + "." + key, problems);
      } else if (schema.value("additionalProperties", true) == false) {
        problems.push_back(where + ": unexpected key " + key);
      }
    }
  }
}

std::vector<std::string> schema_problems(const Json& doc) {
  const Json schema = Json::parse(read_file(EP3_SOURCE_DIR "/docs/loop-summary.schema.json"));
  std::vector<std::string> problems;
  validate(doc, schema, schema, "$", problems);
  return problems;
}

}  // namespace

TEST_CASE("classify") {
  const auto equal = run({"classify", "--family", "waveguide-ab-equal"});
  CHECK(equal.code == kExitOk);
  CHECK(equal.json()["class"]["kind"] == "ThirdRoot");
  const auto opposite = run({"classify", "--family", "waveguide-ab-opposite"});
  CHECK(opposite.code == kExitOk);
  CHECK(opposite.json()["class"]["kind"] == "SquareRootPlusTaylor");
  const auto zero = run({"classify", "--family", "file:" EP3_SOURCE_DIR "/data/zero-perturbation.json"});
  CHECK(zero.code == kExitOk);
  CHECK(zero.json()["class"]["kind"] == "DegenerateOther");
}

TEST_CASE("jordan residuals") {
  const auto r = run({"jordan", "--family", "waveguide-ab-equal"});
  REQUIRE(r.code == kExitOk);
  const auto residuals = r.json()["chain"]["residuals"];
  CHECK(residuals.size() == 9);
  for (const auto& [key, value] : residuals.items()) {
    INFO(key);
    CHECK(value.get<double>() < 1e-8);
  }
}

TEST_CASE("sheet") {
  SUBCASE("row count and defect flag") {
    const auto r = run({"sheet", "--family", "waveguide-ab-equal", "--grid", "41,41", "--bounds", "-0.2,0.2,-0.2,0.2"});
    REQUIRE(r.code == kExitOk);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 41 * 41 * 3 + 1);
    CHECK(rows[0] == "re_z,im_z,branch,re_lambda,im_lambda,defect");
    int defect_rows = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
      const auto cells = split(rows[k]);
      REQUIRE(cells.size() == 6);
      if (cells[5] == "1") {
        ++defect_rows;
        CHECK(std::stod(cells[0]) == 0.0);
        CHECK(std::stod(cells[1]) == 0.0);
      }
    }
    CHECK(defect_rows == 3);
  }
  SUBCASE("a = -b has a flat branch") {
    const auto r = run({"sheet", "--family", "waveguide-ab-opposite", "--grid", "41,41"});
    REQUIRE(r.code == kExitOk);
    // Per branch: spread of lambda over grid points on the ring 0.09 <= |z| <= 0.11.
    std::map<int, std::vector<std::complex<double>>> ring;
    for (const auto& row : lines(r.out)) {
      if (row.rfind("re_z", 0) == 0) continue;
      const auto c = split(row);
      const double z = std::hypot(std::stod(c[0]), std::stod(c[1]));
      if (z < 0.09 || z > 0.11) continue;
      ring[std::stoi(c[2])].emplace_back(std::stod(c[3]), std::stod(c[4]));
    }
    REQUIRE(ring.size() == 3);
    int flat = 0, varying = 0;
    for (const auto& [branch, values] : ring) {
      double spread = 0.0;
      for (auto a : values)
        for (auto b : values) spread = std::max(spread, std::abs(a - b));
      if (spread <= 1e-6) ++flat;
      if (spread > 0.1) ++varying;
    }
    CHECK(flat == 1);
    CHECK(varying == 2);
  }
  SUBCASE("deterministic") {
    const auto a = run({"sheet", "--family", "waveguide-ab-opposite", "--grid", "21,11"});
    const auto b = run({"sheet", "--family", "waveguide-ab-opposite", "--grid", "21,11"});
    CHECK(a.out == b.out);
    CHECK(lines(a.out).size() == 21 * 11 * 3 + 1);
  }
}

TEST_CASE("loop summaries") {
  SUBCASE("enclosing, a = b") {
    const auto r = run({"loop", "--family", "waveguide-ab-equal", "--radius", "0.1"});
    REQUIRE(r.code == kExitOk);
    const auto j = r.json();
    CHECK(j["cycle_structure"] == Json::array({3}));
    for (const auto& p : j["phase_per_orbit"]) CHECK(std::abs(p.get<double>()) <= 1e-2);
    CHECK(schema_problems(j).empty());
  }
  SUBCASE("not enclosing") {
    const auto r = run({"loop", "--family", "waveguide-ab-equal", "--center", "0.5,0", "--radius", "0.1"});
    REQUIRE(r.code == kExitOk);
    const auto j = r.json();
    CHECK(j["cycle_structure"] == Json::array({1, 1, 1}));
    for (const auto& p : j["phase_per_orbit"]) CHECK(std::abs(p.get<double>()) <= 1e-2);
  }
  SUBCASE("two real parameters") {
    const auto r = run({"loop", "--family", "waveguide-2param", "--radius", "0.5", "--cycles", "3"});
    REQUIRE(r.code == kExitOk);
    const auto j = r.json();
    CHECK(j["crossings"].size() >= 1);
    CHECK(j["has_vectors"] == false);
    CHECK(schema_problems(j).empty());
  }
  SUBCASE("through the EP") {
    const auto r = run({"loop", "--family", "waveguide-ab-equal", "--center", "0.1,0", "--radius", "0.1"});
    CHECK(r.code == kExitEPOnPath);
    CHECK(r.json()["error"] == "EPOnPath");
    CHECK_FALSE(r.err.empty());
  }
  SUBCASE("schema rejects a broken summary") {
    auto j = run({"loop", "--family", "ep2-symmetric", "--steps", "64"}).json();
    CHECK(schema_problems(j).empty());
    j.erase("permutation");
    j["signs"] = Json::array({0, 1});
    CHECK(schema_problems(j).size() == 2);
  }
}

TEST_CASE("loop files") {
  const auto dir = std::filesystem::temp_directory_path() / "ep3-cli-test";
  std::filesystem::create_directories(dir);
  const auto prefix = (dir / "run").string();
  const auto r = run({"loop", "--family", "waveguide-ab-opposite", "--steps", "64", "--cycles", "2", "--out", prefix});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.empty());
  const auto csv = lines(read_file(prefix + ".csv"));
  CHECK(csv[0] == "cycle,step,phi,branch,re_lambda,im_lambda");
  CHECK(csv.size() == (64 * 2 + 1) * 3 + 1);
  const auto json = Json::parse(read_file(prefix + ".json"));
  CHECK(json["cycle_structure"] == Json::array({2, 1}));

  // Byte-identical rerun.
  const auto first_csv = read_file(prefix + ".csv");
  const auto first_json = read_file(prefix + ".json");
  REQUIRE(run({"loop", "--family", "waveguide-ab-opposite", "--steps", "64", "--cycles", "2", "--out", prefix}).code ==
          kExitOk);
  CHECK(read_file(prefix + ".csv") == first_csv);
  CHECK(read_file(prefix + ".json") == first_json);
  std::filesystem::remove_all(dir);
}

TEST_CASE("fit and find-ep") {
  const auto fit = run({"fit", "--family", "waveguide-ab-equal", "--radii", "1e-3,1e-4,1e-5,1e-6"});
  REQUIRE(fit.code == kExitOk);
  CHECK(std::abs(fit.json()["groups"][0]["slope"].get<double>() - 1.0 / 3.0) <= 0.02);

  const auto ep = run({"find-ep", "--family", "waveguide-2param", "--guess", "0.1,-0.05"});
  REQUIRE(ep.code == kExitOk);
  const auto j = ep.json();
  for (const auto& p : j["params"]) CHECK(std::hypot(p[0].get<double>(), p[1].get<double>()) <= 1e-8);
  CHECK(j["verified_order"] == 3);

  const auto seeded_a = run({"find-ep", "--family", "waveguide-2param", "--seed", "7"});
  const auto seeded_b = run({"find-ep", "--family", "waveguide-2param", "--seed", "7"});
  CHECK(seeded_a.code == kExitOk);
  CHECK(seeded_a.out == seeded_b.out);
}

TEST_CASE("usage and computation errors") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"loop", "--steps", "63"}).code == kExitUsage);
  CHECK(run({"loop", "--radius", "-1"}).code == kExitUsage);
  CHECK(run({"sheet", "--grid", "1"}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  const auto unknown = run({"classify", "--family", "nope"});
  CHECK(unknown.code == kExitComputation);
  CHECK(unknown.json()["error"] == "InvalidInput");
  CHECK(run({"find-ep", "--family", "waveguide-ab-equal", "--order", "3"}).code == kExitComputation);
  CHECK(run({"classify", "--family", "file:/nonexistent.json"}).code == kExitComputation);
}

TEST_CASE("installed binary exit codes") {
  const auto status = [](const std::string& args) {
    const int raw = std::system((std::string(EP3_ATLAS_BIN) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status("classify --family waveguide-ab-equal") == 0);
  CHECK(status("loop --steps 63") == 1);
  CHECK(status("classify --family nope") == 2);
  CHECK(status("loop --center 0.1,0 --radius 0.1") == 3);
}
