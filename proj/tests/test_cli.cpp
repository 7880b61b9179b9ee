#include "doctest_main.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "vegspot/io.hpp"

namespace fs = std::filesystem;
using namespace vegspot;

namespace {

const fs::path kWork = fs::temp_directory_path() / "vegspot_cli_test";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VEGSPOT_BIN) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string dir(const std::string& name) { return (kWork / name).string(); }

}  // namespace

TEST_CASE("regions row and raster") {
  fs::remove_all(kWork);
  REQUIRE(run_cli("regions --b 1 --m 0.5 --samples 40 --out " + dir("reg")) == 0);
  auto row = io::read_json(kWork / "reg" / "row.json");
  CHECK(row["aOverM"][0].get<double>() == 5.0);
  CHECK(row["aOverM"][1].get<double>() == 6.5);
  CHECK(row["boundaryA"].get<double>() == doctest::Approx(2.6369).epsilon(1e-3 / 2.6369));
  auto t = io::read_csv(kWork / "reg" / "regions.csv");
  CHECK(t.rows.size() == 1600);
  CHECK(fs::exists(kWork / "reg" / "regions.svg"));
  CHECK(fs::exists(kWork / "reg" / "manifest.json"));

  // Every flagged cell lies inside max{9b/2, 4b + 1/b} < a/m < 9b/2 + 2/b.
  const auto am = t.column("a_over_m"), b = t.column("b"), adm = t.column("admissible");
  for (std::size_t k = 0; k < am.size(); ++k) {
    const bool inside = am[k] > std::max(4.5 * b[k], 4 * b[k] + 1 / b[k]) && am[k] < 4.5 * b[k] + 2 / b[k];
    CHECK((adm[k] == 1.0) == inside);
  }
}

TEST_CASE("solve, spectrum and continue") {
  REQUIRE(run_cli("solve --a 2.625 --b 1 --m 0.5 --delta 0.05 --kind spot --radii 5.66 --out " + dir("spot")) == 0);
  const auto prof = kWork / "spot" / "profile.csv";
  auto side = io::read_json(fs::path(prof).replace_extension(".json"));
  CHECK(side["interfaces"][0].get<double>() == doctest::Approx(5.66).epsilon(0.15 / 5.66));

  REQUIRE(run_cli("spectrum --profile " + prof.string() + " --lmax 12 --k 2 --out " + dir("spec")) == 0);
  auto s = io::read_csv(kWork / "spec" / "spectrum.csv");
  REQUIRE(s.rows.size() == 25);
  CHECK(s.rows.front()[0] == -12);
  CHECK(s.rows.back()[0] == 12);
  CHECK(s.rows[0][1] == s.rows[24][1]);
  auto j = io::read_json(kWork / "spec" / "spectrum.json");
  CHECK(j["profileHash"].get<std::string>() == io::file_hash(prof));
  CHECK(fs::exists(kWork / "spec" / "asymptotic.csv"));

  REQUIRE(run_cli("continue --profile " + prof.string() + " --a-target 2.62 --out " + dir("cont")) == 0);
  auto b = io::read_csv(kWork / "cont" / "branch.csv");
  CHECK(b.column("a").back() == doctest::Approx(2.62));
}

TEST_CASE("front speed") {
  REQUIRE(run_cli("front --a 2.665 --b 1 --m 0.5 --delta 0.05 --out " + dir("front")) == 0);
  auto j = io::read_json(kWork / "front" / "front.json");
  CHECK(j["c"].get<double>() == doctest::Approx(-0.013).epsilon(0.005 / 0.013));
}

TEST_CASE("simulate writes snapshots and diagnostics") {
  REQUIRE(run_cli("solve --a 2.55 --delta 0.05 --kind spot --radii 1.3 --out " + dir("small")) == 0);
  REQUIRE(run_cli("simulate --profile " + dir("small") + "/profile.csv --n 256 --t-end 2 --snap-every 1 --out " +
                  dir("sim")) == 0);
  CHECK(fs::exists(kWork / "sim" / "snapshots" / "v_2.f64"));
  CHECK(fs::file_size(kWork / "sim" / "snapshots" / "v_2.f64") == 256u * 256u * 8u);
  auto d = io::read_csv(kWork / "sim" / "diagnostics.csv");
  CHECK(d.header == std::vector<std::string>{"t", "l", "amp"});
  CHECK(d.rows.size() == 3u * 33u);
  CHECK(fs::exists(kWork / "sim" / "manifest.json"));
}

TEST_CASE("exit codes") {
  CHECK(run_cli("") == 1);
  CHECK(run_cli("solve --kind spot") == 1);
  CHECK(run_cli("solve --a 2.6 --kind blob") == 1);
  CHECK(run_cli("solve --a -1 --out " + dir("neg")) == 1);
  CHECK(run_cli("spectrum --profile /nonexistent.csv") == 1);
  CHECK(run_cli("solve --a 2.625 --kind ring --radii 1 1.1 --out " + dir("bad")) == 1);
  // Outside the admissible window: the predictor fails numerically.
  CHECK(run_cli("predict-radius --a 2.4 --out " + dir("outside")) == 2);
  CHECK(run_cli("--help") == 0);
  fs::remove_all(kWork);
}
