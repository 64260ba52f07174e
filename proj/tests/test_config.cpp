#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "xlchan/configfile.hpp"

using namespace xlchan;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& text)
      : path("xlchan_test_config.cfg") {
    std::ofstream out(path, std::ios::binary);
    out << text;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("entries update the matching fields", "[config]") {
  ExperimentConfig cfg;
  apply_config_entry(cfg, "array.num_antennas", "64");
  apply_config_entry(cfg, "array.wavelength", "0.03");
  apply_config_entry(cfg, "array.antenna_spacing", "0.015");
  apply_config_entry(cfg, "channel.num_paths", "4");
  apply_config_entry(cfg, "channel.gamma", "0.25");
  apply_config_entry(cfg, "pilot.count", "32");
  apply_config_entry(cfg, "pilot.kind", "identity");
  apply_config_entry(cfg, "noise.snr_db", "7.5");
  apply_config_entry(cfg, "sweep.snr_grid_db", "0, 5, 10");
  apply_config_entry(cfg, "sweep.gamma_grid", "0,0.5,1");
  apply_config_entry(cfg, "estimators", "ff-omp, mmse");
  apply_config_entry(cfg, "omp.kappa", "8");
  apply_config_entry(cfg, "dict.beta", "2.4");
  apply_config_entry(cfg, "dict.rho_min", "3");
  apply_config_entry(cfg, "dict.include_far_column", "false");
  apply_config_entry(cfg, "mmse.identity_pilots", "false");
  apply_config_entry(cfg, "mmse.train_factor", "5");
  apply_config_entry(cfg, "trials", "17");
  apply_config_entry(cfg, "seed", "987654321");
  apply_config_entry(cfg, "threads", "2");

  REQUIRE(cfg.num_antennas == 64);
  REQUIRE(cfg.wavelength == 0.03);
  REQUIRE(cfg.spacing() == 0.015);
  REQUIRE(cfg.num_paths == 4);
  REQUIRE(cfg.gamma == 0.25);
  REQUIRE(cfg.pilot_count == 32);
  REQUIRE(cfg.pilot_kind == PilotKind::identity);
  REQUIRE(cfg.snr_db == 7.5);
  REQUIRE(cfg.snr_grid_db == std::vector<double>{0.0, 5.0, 10.0});
  REQUIRE(cfg.gamma_grid == std::vector<double>{0.0, 0.5, 1.0});
  REQUIRE(cfg.estimators == std::vector<std::string>{"ff-omp", "mmse"});
  REQUIRE(cfg.kappa == 8);
  REQUIRE(cfg.dict.beta == 2.4);
  REQUIRE(cfg.dict.rho_min == 3.0);
  REQUIRE(cfg.dict.include_far_column == false);
  REQUIRE(cfg.mmse_identity_pilots == false);
  REQUIRE(cfg.mmse_train_factor == 5);
  REQUIRE(cfg.trials == 17);
  REQUIRE(cfg.seed == 987654321ull);
  REQUIRE(cfg.threads == 2);
}

TEST_CASE("unknown keys are rejected by name", "[config]") {
  ExperimentConfig cfg;
  REQUIRE_THROWS_WITH(apply_config_entry(cfg, "array.elements", "64"),
                      Catch::Matchers::ContainsSubstring("array.elements"));
}

TEST_CASE("malformed values name the key", "[config]") {
  ExperimentConfig cfg;
  REQUIRE_THROWS_WITH(apply_config_entry(cfg, "trials", "ten"),
                      Catch::Matchers::ContainsSubstring("trials"));
  REQUIRE_THROWS_WITH(apply_config_entry(cfg, "noise.snr_db", "5dB"),
                      Catch::Matchers::ContainsSubstring("noise.snr_db"));
  REQUIRE_THROWS_AS(apply_config_entry(cfg, "dict.include_far_column", "yes"),
                    ConfigError);
  REQUIRE_THROWS_AS(apply_config_entry(cfg, "pilot.kind", "hadamard"),
                    ConfigError);
  REQUIRE_THROWS_AS(apply_config_entry(cfg, "seed", "-3"), ConfigError);
  REQUIRE_THROWS_AS(apply_config_entry(cfg, "sweep.snr_grid_db", "0,,10"),
                    ConfigError);
}

TEST_CASE("files allow comments and blank lines", "[config]") {
  const TempFile file(
      "# experiment setup\n"
      "\n"
      "array.num_antennas = 128\n"
      "  trials=9   \n"
      "estimators = hf-omp , ls\n"
      "# trailing comment\n");
  ExperimentConfig cfg;
  apply_config_file(cfg, file.path);
  REQUIRE(cfg.num_antennas == 128);
  REQUIRE(cfg.trials == 9);
  REQUIRE(cfg.estimators == std::vector<std::string>{"hf-omp", "ls"});
}

TEST_CASE("file errors carry the line number", "[config]") {
  const TempFile file(
      "array.num_antennas = 128\n"
      "this line has no equals sign\n");
  ExperimentConfig cfg;
  REQUIRE_THROWS_WITH(apply_config_file(cfg, file.path),
                      Catch::Matchers::ContainsSubstring(":2:"));
}

TEST_CASE("missing files are reported", "[config]") {
  ExperimentConfig cfg;
  REQUIRE_THROWS_AS(apply_config_file(cfg, "no_such_file.cfg"), ConfigError);
}
