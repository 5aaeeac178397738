#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "subdelay/config.hpp"

using namespace subdelay;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream file(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "subdelay_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("parse_config applies benchmark defaults") {
  const auto config = parse_config(
      R"({"kind":"study-time","alpha":0.5,"h":0.001,"N":[100,200,400]})");
  CHECK(config.kind == StudyKind::study_time);
  CHECK(config.alpha == 0.5);
  CHECK(config.p == doctest::Approx(0.01));
  CHECK(config.a_scale == doctest::Approx(0.01));
  CHECK(config.b == -1.0);
  CHECK(config.tau == 1.0);
  CHECK(config.K == 3);
  CHECK(config.N_list == std::vector<int>{100, 200, 400});
  CHECK(config.format == OutputFormat::csv);

  const auto high = parse_config(
      R"({"kind":"study-time","alpha":0.8,"h":0.001,"N":[100,200]})");
  CHECK(high.p == doctest::Approx(0.002));
}

TEST_CASE("parse_config rejects bad input") {
  SUBCASE("alpha out of range") {
    CHECK_THROWS_AS(
        parse_config(R"({"kind":"study-time","alpha":1.2,"h":0.001,"N":[100]})"),
        ConfigError);
  }
  SUBCASE("unknown key carries a line number") {
    try {
      parse_config("{\n  \"kind\": \"study-time\",\n  \"alpha\": 0.5,\n"
                   "  \"h\": 0.001,\n  \"N\": [100],\n  \"bogus\": 1\n}");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line == 6);
      CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
  }
  SUBCASE("missing required field") {
    CHECK_THROWS_AS(parse_config(R"({"kind":"study-time","alpha":0.5,"N":[100]})"),
                    ConfigError);
  }
  SUBCASE("field not applicable to the kind") {
    CHECK_THROWS_AS(
        parse_config(R"({"kind":"study-space","alpha":0.5,"h":0.1,"M":[8,16]})"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(
            R"({"kind":"study-time","alpha":0.5,"h":0.1,"N":[8,16],"M":4})"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({"kind":"check-truncation","alpha":0.5,"N":100,"p":0.1})"),
        ConfigError);
  }
  SUBCASE("sweeps must double") {
    CHECK_THROWS_AS(
        parse_config(R"({"kind":"study-time","alpha":0.5,"h":0.1,"N":[100,300]})"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({"kind":"study-time","alpha":0.5,"h":0.1,"N":[200,100]})"),
        ConfigError);
  }
  SUBCASE("the benchmark pins b, tau and K") {
    CHECK_THROWS_AS(
        parse_config(R"({"kind":"study-time","alpha":0.5,"h":0.1,"N":[100],"b":0.5})"),
        ConfigError);
    CHECK_NOTHROW(parse_config(
        R"({"kind":"solve","alpha":0.5,"N":10,"M":8,"problem":"zero","b":0.5})"));
  }
  SUBCASE("malformed JSON reports the line") {
    try {
      parse_config("{\n  \"kind\": \"solve\",\n  broken\n}");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line >= 2);
    }
  }
}

TEST_CASE("parse_config accepts the kernel check") {
  const auto config = parse_config(R"({"kind":"check-kernel","alpha":0.5,"N":2000})");
  CHECK(config.kind == StudyKind::check_kernel);
  CHECK(config.N_list == std::vector<int>{2000});
}

TEST_CASE("emit then parse is the identity") {
  const char* samples[] = {
      R"({"kind":"study-time","alpha":0.5,"h":0.001,"N":[100,200,400]})",
      R"({"kind":"study-space","alpha":0.4,"M":[8,16,32],"N":500})",
      R"({"kind":"study-delay-nodes","alpha":0.8,"h":0.01,"N":[50,100]})",
      R"({"kind":"solve","alpha":0.3,"N":10,"M":16,"problem":"zero","b":2.0,"K":2})",
      R"({"kind":"check-kernel","alpha":0.7,"N":800,"tau":2.0})",
      R"({"kind":"check-truncation","alpha":0.6,"N":100,"format":"json"})",
  };
  for (const char* text : samples) {
    const StudyConfig config = parse_config(text);
    const StudyConfig round = parse_config(emit_config(config).dump());
    CHECK(round == config);
  }
}

TEST_CASE("dispatch writes the configured outputs") {
  const auto dir = temp_dir();

  SUBCASE("zero solve produces an all-zero trace") {
    const auto out = (dir / "zero.csv").string();
    const auto config = parse_config(
        R"({"kind":"solve","alpha":0.5,"N":4,"M":8,"problem":"zero"})");
    const auto report = dispatch(config, out);
    CHECK(report.output_path == out);
    std::ifstream file(out);
    std::string header;
    std::getline(file, header);
    CHECK(header == "n,t,l2_error,l2_norm");
    std::string line;
    int rows = 0;
    while (std::getline(file, line)) {
      ++rows;
      CHECK(line.find("0.0000e+00,0.0000e+00") != std::string::npos);
    }
    CHECK(rows == 13);  // n = 0..KN with K=3, N=4
  }

  SUBCASE("kernel check reports a tiny identity residual") {
    const auto out = (dir / "kernel.json").string();
    const auto config = parse_config(
        R"({"kind":"check-kernel","alpha":0.5,"N":2000,"format":"json"})");
    dispatch(config, out);
    const auto doc = nlohmann::json::parse(slurp(out));
    CHECK(doc["summary"]["max_identity_residual"].get<double>() <= 1e-10);
    CHECK(doc["summary"]["decay_bound_violations"].get<int>() == 0);
    CHECK(doc["summary"]["prefix_bound_violations"].get<int>() == 0);
    CHECK(doc["config"]["alpha"].get<double>() == 0.5);
  }

  SUBCASE("truncation check emits per-step rows") {
    const auto out = (dir / "trunc.json").string();
    const auto config = parse_config(
        R"({"kind":"check-truncation","alpha":0.6,"N":50,"format":"json"})");
    dispatch(config, out);
    const auto doc = nlohmann::json::parse(slurp(out));
    CHECK(doc["rows"].size() == 150);
    CHECK(doc["summary"]["fitted_constants"].size() == 3);
  }

  SUBCASE("study output is byte-stable across runs") {
    const auto first = (dir / "study1.csv").string();
    const auto second = (dir / "study2.csv").string();
    const auto config = parse_config(
        R"({"kind":"study-time","alpha":0.5,"h":0.05,"N":[10,20]})");
    dispatch(config, first);
    dispatch(config, second);
    const auto a = slurp(first);
    CHECK(a == slurp(second));
    CHECK(!a.empty());
    CHECK(a.find("\r") == std::string::npos);
  }
}

#if defined(__unix__) || defined(__APPLE__)

namespace {

int run_cli(const std::string& args) {
  const char* bin = std::getenv("SUBDELAY_BIN");
  REQUIRE(bin != nullptr);
  const int status = std::system((std::string(bin) + " " + args).c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("command line exit codes and outputs") {
  const char* bin = std::getenv("SUBDELAY_BIN");
  if (bin == nullptr) return;  // built without the ctest harness
  const auto dir = temp_dir();

  SUBCASE("configuration errors exit with 2") {
    const auto bad = dir / "bad.json";
    std::ofstream(bad) << R"({"kind":"study-time","alpha":1.2,"h":0.01,"N":[10]})";
    CHECK(run_cli("study-time --config " + bad.string() + " 2>/dev/null") == 2);
  }

  SUBCASE("kind must match the subcommand") {
    const auto mismatched = dir / "mismatch.json";
    std::ofstream(mismatched)
        << R"({"kind":"study-time","alpha":0.5,"h":0.01,"N":[10]})";
    CHECK(run_cli("solve --config " + mismatched.string() + " 2>/dev/null") == 2);
  }

  SUBCASE("a small study runs to completion") {
    const auto good = dir / "good.json";
    const auto out = dir / "good_out.csv";
    std::ofstream(good)
        << R"({"kind":"study-time","alpha":0.5,"h":0.05,"N":[10,20]})";
    CHECK(run_cli("study-time --config " + good.string() + " --output " +
                  out.string() + " > /dev/null") == 0);
    const auto text = slurp(out);
    CHECK(text.find("N,E1,rate1,E2,rate2,E3,rate3") == 0);
  }

  SUBCASE("numerical breakdown exits with 1 and names the step") {
    const auto blow = dir / "blow.json";
    std::ofstream(blow) << R"({"kind":"solve","alpha":0.5,"N":2,"M":8,"p":1e308})";
    const auto err = dir / "blow.err";
    const int code = run_cli("solve --config " + blow.string() + " 2> " +
                             err.string() + " > /dev/null");
    CHECK(code == 1);
    CHECK(slurp(err).find("step") != std::string::npos);
  }

  SUBCASE("stdin feeds the config when no file is given") {
    const auto out = dir / "stdin_out.csv";
    const int code = run_cli(
        "check-kernel --output " + out.string() +
        R"( > /dev/null <<'EOF'
{"kind":"check-kernel","alpha":0.5,"N":50}
EOF)");
    CHECK(code == 0);
    CHECK(slurp(out).find("l,P,identity_residual") == 0);
  }
}

#endif
