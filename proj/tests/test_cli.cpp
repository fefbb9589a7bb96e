#include "flock/csv.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kSource = FLOCK_SOURCE_DIR;

struct Result {
  int code;
  std::string output;
};

Result run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "cli_output.txt";
  const std::string cmd = std::string("\"") + FLOCKSIM_PATH + "\" " + args + " > \"" + out.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, flock::read_file(out)};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("flocksim_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string bundled(const std::string& name) { return "\"" + kSource + "/scenarios/" + name + "\""; }

std::size_t lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) {
    n += c == '\n' ? 1 : 0;
  }
  return n;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kPair = R"([[agents]]
position = [1.0, 0.0]
heading_deg = 180
v0 = 0.5

[[agents]]
position = [%X%, %Y%]
heading_deg = 0
v0 = 0.5

[sim]
graph = "proximity"
)";

std::string pair_at(const std::string& x, const std::string& y) {
  std::string s = kPair;
  s.replace(s.find("%X%"), 3, x);
  s.replace(s.find("%Y%"), 3, y);
  return s;
}

}  // namespace

TEST_CASE("validate") {
  const fs::path dir = scratch("validate");
  CHECK(run("validate " + bundled("free_space.toml"), dir).code == 0);
  CHECK(run("validate " + bundled("cluttered.toml"), dir).code == 0);

  write(dir / "twin.toml", pair_at("1.0", "0.0"));
  Result r = run("validate \"" + (dir / "twin.toml").string() + "\"", dir);
  CHECK(r.code != 0);
  CHECK(r.output.find("coincident positions") != std::string::npos);

  write(dir / "far.toml", pair_at("30.0", "0.5"));
  r = run("validate \"" + (dir / "far.toml").string() + "\"", dir);
  CHECK(r.code != 0);
  CHECK(r.output.find("initial graph not connected") != std::string::npos);

  write(dir / "broken.toml", "[sim]\ndt = fast\n");
  r = run("validate \"" + (dir / "broken.toml").string() + "\"", dir);
  CHECK(r.code != 0);
  CHECK(r.output.find("broken.toml:2:") != std::string::npos);

  CHECK(run("validate \"" + (dir / "missing.toml").string() + "\"", dir).code != 0);
}

TEST_CASE("run, metrics and plot") {
  const fs::path dir = scratch("run");
  const fs::path out = dir / "free";
  Result r = run("run " + bundled("free_space.toml") + " --out \"" + out.string() + "\"", dir);
  REQUIRE(r.code == 0);
  CHECK(r.output.find("fallback_count = 0") != std::string::npos);
  for (const char* f : {"trajectory.csv", "edges.csv", "events.csv", "scenario.toml", "metrics.txt"}) {
    CHECK(fs::exists(out / f));
  }
  const std::string traj = flock::read_file(out / "trajectory.csv");
  CHECK(lines(traj) == 1 + 5 * 501);
  CHECK(lines(flock::read_file(out / "edges.csv")) == 1 + 20 * 501);

  r = run("metrics \"" + (out / "trajectory.csv").string() + "\"", dir);
  CHECK(r.code == 0);
  CHECK(r.output == flock::read_file(out / "metrics.txt"));

  r = run("plot \"" + (out / "trajectory.csv").string() + "\" --out \"" + (dir / "free.svg").string() + "\"", dir);
  CHECK(r.code == 0);
  const std::string svg = flock::read_file(dir / "free.svg");
  CHECK(svg.find("class=\"leader\"") != std::string::npos);

  const fs::path fine = dir / "fine";
  r = run("run " + bundled("free_space.toml") + " --out \"" + fine.string() + "\" --dt 0.001 --t-end 0.1", dir);
  REQUIRE(r.code == 0);
  CHECK(lines(flock::read_file(fine / "trajectory.csv")) == 1 + 5 * 101);
  CHECK(flock::read_file(fine / "scenario.toml").find("dt = 0.001") != std::string::npos);

  r = run("run " + bundled("free_space.toml") + " --out \"" + (dir / "x").string() + "\" --controller sideways", dir);
  CHECK(r.code != 0);
}

TEST_CASE("usage errors") {
  const fs::path dir = scratch("usage");
  CHECK(run("", dir).code != 0);
  CHECK(run("frobnicate", dir).code != 0);
  CHECK(run("metrics \"" + (dir / "none.csv").string() + "\"", dir).code != 0);
}
