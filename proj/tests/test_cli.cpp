#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "doctest.h"
#include "facelm/cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using facelm::cli::run;

namespace {

struct Captured {
  int code;
  std::string out;
};

// Runs the CLI with stdout and stderr captured.
Captured invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "facelm");
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  int code = 0;
  try {
    code = run(args);
  } catch (...) {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    throw;
  }
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("facelm-cli-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "-" +
            std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("synth then validate reports every record accepted") {
  TempDir dir;
  REQUIRE(invoke({"synth", "--out", dir / "syn.csv", "--seed", "3"}).code == 0);
  const auto res = invoke({"validate", "--input", dir / "syn.csv", "--out", dir / "o"});
  CHECK(res.code == 0);
  const auto j = nlohmann::json::parse(res.out);
  CHECK(j.at("accepted") == 168);
  CHECK(j.at("rejected").empty());
  CHECK(nlohmann::json::parse(slurp(dir / "o/validation_report.json")) == j);
}

TEST_CASE("a missing input file is an error") {
  TempDir dir;
  CHECK(invoke({"validate", "--input", dir / "nope.csv", "--out", dir / "o"}).code != 0);
  CHECK(invoke({"validate"}).code != 0);
  CHECK(invoke({"frobnicate"}).code != 0);
}

TEST_CASE("stats zone percentages sum to one hundred for every emotion") {
  TempDir dir;
  REQUIRE(invoke({"synth", "--out", dir / "syn.csv"}).code == 0);
  const auto res = invoke({"stats", "--input", dir / "syn.csv", "--out", dir / "o"});
  REQUIRE(res.code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "o/stats_displacement.json"));
  CHECK(j.size() == 7);
  for (const auto& [emotion, t] : j.items()) {
    const double sum = t.at("in_quartiles_pct").get<double>() +
                       t.at("in_whiskers_pct").get<double>() + t.at("outlier_pct").get<double>();
    CHECK_MESSAGE(std::abs(sum - 100.0) <= 0.02, emotion);
  }
  CHECK(fs::exists(dir / "o/stats_displacement.csv"));
}

TEST_CASE("config files fill unset options and explicit flags win") {
  TempDir dir;
  REQUIRE(invoke({"synth", "--out", dir / "syn.csv"}).code == 0);
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"mode": "absolute", "emotion": "fear"})";
  }
  REQUIRE(invoke({"stats", "--config", dir / "cfg.json", "--input", dir / "syn.csv", "--out",
                  dir / "a"})
              .code == 0);
  CHECK(fs::exists(dir / "a/stats_absolute.json"));
  CHECK(nlohmann::json::parse(slurp(dir / "a/stats_absolute.json")).size() == 1);

  REQUIRE(invoke({"stats", "--config", dir / "cfg.json", "--mode", "displacement", "--input",
                  dir / "syn.csv", "--out", dir / "b"})
              .code == 0);
  CHECK(fs::exists(dir / "b/stats_displacement.json"));
  CHECK(!fs::exists(dir / "b/stats_absolute.json"));

  {
    std::ofstream cfg(dir / "bad.json");
    cfg << R"({"mode": "absolute", "colour": "red"})";
  }
  CHECK(invoke({"stats", "--config", dir / "bad.json", "--input", dir / "syn.csv", "--out",
                dir / "c"})
            .code != 0);
}

TEST_CASE("every command answers --help") {
  CHECK(invoke({"--help"}).code == 0);
  for (const char* cmd :
       {"validate", "features", "stats", "plot", "train", "cv", "compare", "synth"}) {
    const auto res = invoke({cmd, "--help"});
    CHECK_MESSAGE(res.code == 0, cmd);
  }
  const auto cv = invoke({"cv", "--help"});
  CHECK(cv.out.find("--epochs") != std::string::npos);
  CHECK(cv.out.find("50") != std::string::npos);
}

TEST_CASE("train writes a model that records its configuration") {
  TempDir dir;
  REQUIRE(invoke({"synth", "--out", dir / "syn.csv"}).code == 0);
  REQUIRE(invoke({"train", "--input", dir / "syn.csv", "--model", "tree", "--out", dir / "o"}).code ==
          0);
  const auto j = nlohmann::json::parse(slurp(dir / "o/model_tree.json"));
  CHECK(j.contains("train_config"));
}
