#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cocycle/error.hpp"
#include "cocycle/experiment.hpp"

using namespace cocycle;

namespace {

ErrorKind kind_of(const std::string& config) {
  try {
    run_experiment(config);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << config;
  return ErrorKind::validation;
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::istringstream in(csv);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("# ", 0) != 0) out.push_back(line);
  return out;
}

std::string header_value(const std::string& csv, const std::string& key) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("# " + key + "=", 0) == 0) return line.substr(key.size() + 3);
  return {};
}

}  // namespace

TEST(Experiment, BallOnZ2HasThirteenRows) {
  auto out = run_experiment(R"({"command": "ball", "family": "Z2", "radius": 2})");
  auto lines = data_lines(out.csv);
  ASSERT_EQ(lines.size(), 14u);  // header + 13 elements, |B_2| = 2*4 + 2*2 + 1
  EXPECT_EQ(lines.front(), "index,length,element");
  EXPECT_TRUE(out.property_ok);
}

TEST(Experiment, HeadersRecordHashVersionAndSeed) {
  auto out = run_experiment(R"({"command": "ball", "family": "Z", "radius": 1, "seed": 5})");
  EXPECT_EQ(header_value(out.csv, "command"), "ball");
  EXPECT_EQ(header_value(out.csv, "version"), kLibraryVersion);
  EXPECT_EQ(header_value(out.csv, "config_hash"), out.config_hash);
  EXPECT_EQ(header_value(out.csv, "seed"), "5");
  EXPECT_EQ(out.config_hash.size(), 16u);
}

TEST(Experiment, HashIgnoresKeyOrderPathsAndName) {
  auto a = run_experiment(R"({"command": "ball", "family": "Z2", "radius": 2})");
  auto b = run_experiment(R"({"radius": 2, "output": "x.csv", "name": "other", "family": "Z2", "command": "ball"})");
  auto c = run_experiment(R"({"command": "ball", "family": "Z2", "radius": 2, "seed": 1})");
  EXPECT_EQ(a.config_hash, b.config_hash);
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_NE(a.config_hash, c.config_hash);
  EXPECT_EQ(b.output_path, "x.csv");
}

TEST(Experiment, DefaultsAreFilledIntoCanonicalForm) {
  auto canon = canonical_config(R"({"command": "cnd-check", "family": "F2", "psi": "word-length", "radius": 3})");
  EXPECT_NE(canon.find("\"tol\":1e-09"), std::string::npos) << canon;
  EXPECT_NE(canon.find("\"expect\":\"pass\""), std::string::npos) << canon;
  EXPECT_EQ(canon, canonical_config(R"({"radius": 3, "psi": "word-length", "family": "F2", "command": "cnd-check",
                                        "tol": 1e-9, "strict": true})"));
}

TEST(Experiment, SchemaViolationsAreValidationErrors) {
  EXPECT_EQ(kind_of(R"({"command": "ball", "family": "Z2", "radius": 2, "colour": 1})"), ErrorKind::validation);
  EXPECT_EQ(kind_of(R"({"command": "ball", "family": "Z2"})"), ErrorKind::validation);
  EXPECT_EQ(kind_of(R"({"command": "ball", "family": "Z2", "radius": "two"})"), ErrorKind::validation);
  EXPECT_EQ(kind_of(R"({"command": "teleport"})"), ErrorKind::validation);
  EXPECT_EQ(kind_of(R"({"family": "Z2"})"), ErrorKind::validation);
  EXPECT_EQ(kind_of(R"([1, 2])"), ErrorKind::validation);
  EXPECT_EQ(kind_of("{not json"), ErrorKind::validation);
  EXPECT_EQ(kind_of(R"({"command": "cnd-check", "family": "F2", "psi": "sq-euclid", "radius": 2})"),
            ErrorKind::validation);
}

TEST(Experiment, ResourceBudgetSurfaces) {
  EXPECT_EQ(kind_of(R"({"command": "ball", "family": "F5", "radius": 40})"), ErrorKind::resource);
}

TEST(Experiment, FreeGroupWordLengthPasses) {
  auto out = run_experiment(R"({"command": "cnd-check", "family": "F2", "psi": "word-length", "radius": 3})");
  EXPECT_TRUE(out.property_ok);
  EXPECT_NE(out.summary.find("\"all_pass\": true"), std::string::npos);
}

TEST(Experiment, ViolationsAreReportedNotThrown) {
  auto out = run_experiment(R"({"command": "cnd-check", "family": "Z", "psi": "neg-sq-euclid", "radius": 4})");
  EXPECT_FALSE(out.property_ok);
  ASSERT_FALSE(out.violations.empty());
  auto expected = run_experiment(
      R"({"command": "cnd-check", "family": "Z", "psi": "neg-sq-euclid", "radius": 4, "expect": "fail"})");
  EXPECT_TRUE(expected.property_ok);
}

TEST(Experiment, RepeatedRunsAreByteIdentical) {
  const std::string cfg = R"({"command": "euclid", "random": 5, "dimension": 3, "seed": 11})";
  auto a = run_experiment(cfg), b = run_experiment(cfg);
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_EQ(a.summary, b.summary);
  auto c = run_experiment(R"({"command": "euclid", "random": 5, "dimension": 3, "seed": 12})");
  EXPECT_NE(a.csv, c.csv);
}

TEST(Experiment, EuclidInputResolvesAgainstBaseDir) {
  auto dir = std::filesystem::temp_directory_path() / "cocycle-experiment-test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "p4.json") << R"({"isometries": [{"R": [0, -1, 1, 0], "t": [0, 0]},
                                                      {"R": [1, 0, 0, 1], "t": [1, 0]}]})";
  auto out = run_experiment(R"({"command": "euclid", "input": "p4.json"})", dir);
  EXPECT_NE(out.summary.find("\"verdict\": \"cocompact\""), std::string::npos) << out.summary;
  EXPECT_EQ(kind_of(R"({"command": "euclid", "input": "/nonexistent/p4.json"})"), ErrorKind::validation);
  EXPECT_EQ(kind_of(R"({"command": "euclid", "isometries": [{"R": [1, 1, 0, 1], "t": [0, 0]}]})"),
            ErrorKind::validation);
  std::filesystem::remove_all(dir);
}

TEST(Experiment, RotationGroupIsNotCocompact) {
  auto out = run_experiment(R"({"command": "euclid", "isometries": [{"R": [0, -1, 1, 0], "t": [0, 0]}]})");
  EXPECT_NE(out.summary.find("\"verdict\": \"not-cocompact\""), std::string::npos);
  EXPECT_TRUE(out.property_ok);
}

TEST(Batch, RunsAreNamedByIndexAndCommand) {
  auto out = run_batch(R"({"description": "two", "runs": [
      {"command": "ball", "family": "Z", "radius": 1},
      {"command": "ball", "family": "Z", "radius": 2, "name": "wide"}]})");
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].name, "00-ball");
  EXPECT_EQ(out[1].name, "wide");
  EXPECT_EQ(run_batch(R"({"command": "ball", "family": "Z", "radius": 1})").size(), 1u);
}

TEST(Batch, RejectsUnknownKeysAndEmptyRuns) {
  EXPECT_THROW(run_batch(R"({"runs": [], "description": "x"})"), Error);
  EXPECT_THROW(run_batch(R"({"runs": [{"command": "ball", "family": "Z", "radius": 1}], "seed": 3})"), Error);
  try {
    run_batch(R"({"runs": [{"command": "ball", "family": "Z", "radius": 1}, {"command": "ball"}]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_NE(std::string(e.what()).find("run 1"), std::string::npos);
  }
}

TEST(Keys, EveryCommandExposesItsKeys) {
  for (const auto& c : experiment_commands()) {
    auto keys = experiment_keys(c);
    EXPECT_TRUE(std::any_of(keys.begin(), keys.end(), [](const ConfigKey& k) { return k.name == "seed"; })) << c;
    EXPECT_TRUE(std::none_of(keys.begin(), keys.end(), [](const ConfigKey& k) { return k.name == "command"; })) << c;
  }
  EXPECT_EQ(experiment_commands().size(), 14u);
  EXPECT_THROW(experiment_keys("nope"), Error);
}
