#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// Exercises the installed binary end to end through std::system; the binary
// path is injected by the build.
#ifndef SWITCHID_CLI_PATH
#error "SWITCHID_CLI_PATH must be defined"
#endif

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("switchid_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

int run_cli(const std::string& args) {
  const std::string command = std::string(SWITCHID_CLI_PATH) + " " + args;
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const char* kTinySls = R"({
  "system": {
    "state_dim": 2,
    "degree": 1,
    "modes": [
      [[0.0, 0.0, 1.0], [0.0, -1.0, -0.1]],
      [[0.0, 0.0, 1.0], [0.0, -1.0, -0.5]]
    ],
    "surfaces": {"degree": 1, "coefficients": [[0.0, 1.0, 0.0]]},
    "modebook": [[1], [-1]]
  },
  "sampling": {"box": [[-2.0, 2.0], [-2.0, 2.0]], "count": 60, "seed": 5},
  "identify": {"mode_count": 2, "degree": 2, "max_iters": 8},
  "surface": {"degree": 2, "margin": 0.01, "sparsity": 0.01, "bound": 10.0},
  "evaluate": {"test_count": 40, "test_seed": 19, "rollout_count": 2,
               "rollout_seed": 23, "dt": 0.02, "horizon": 1.0}
})";

const char* kSingleMode = R"({
  "system": {
    "state_dim": 2,
    "degree": 1,
    "modes": [[[0.0, 0.0, 1.0], [0.0, -1.0, 0.0]]]
  },
  "sampling": {"box": [[-2.0, 2.0], [-2.0, 2.0]], "count": 30, "seed": 2},
  "identify": {"mode_count": 1, "degree": 1, "max_iters": 5}
})";

}  // namespace

TEST_CASE("argument and config failures map to exit code 2") {
  TempDir dir;
  CHECK(run_cli("> /dev/null 2>&1") == 2);
  CHECK(run_cli("simulate > /dev/null 2>&1") == 2);
  CHECK(run_cli("frobnicate --config x > /dev/null 2>&1") == 2);

  write_text_file(dir.file("bad.json"), "{ not json at all");
  CHECK(run_cli("simulate --config " + dir.file("bad.json") + " --output " +
                dir.file("out.csv") + " > /dev/null 2>&1") == 2);
}

TEST_CASE("missing input files map to exit code 4") {
  TempDir dir;
  CHECK(run_cli("simulate --config " + dir.file("none.json") + " --output " +
                dir.file("out.csv") + " > /dev/null 2>&1") == 4);

  write_text_file(dir.file("config.json"), kTinySls);
  CHECK(run_cli("identify --config " + dir.file("config.json") +
                " --dataset " + dir.file("none.csv") + " --output " +
                dir.file("out") + " > /dev/null 2>&1") == 4);
}

TEST_CASE("the full command chain runs with exit code 0") {
  TempDir dir;
  write_text_file(dir.file("config.json"), kTinySls);
  const std::string config = " --config " + dir.file("config.json");

  CHECK(run_cli("simulate" + config + " --output " + dir.file("train.csv") +
                " > " + dir.file("sim.out")) == 0);
  const std::string sim_out = read_text_file(dir.file("sim.out"));
  CHECK(sim_out.find("N=60") != std::string::npos);
  CHECK(sim_out.find("seed=5") != std::string::npos);

  CHECK(run_cli("identify" + config + " --dataset " + dir.file("train.csv") +
                " --output " + dir.file("out") + " > /dev/null") == 0);
  CHECK(fs::exists(dir.file("out/model.json")));
  CHECK(fs::exists(dir.file("out/history.csv")));

  CHECK(run_cli("fit-surface" + config + " --dataset " +
                dir.file("train.csv") + " --model " +
                dir.file("out/model.json") + " --output " +
                dir.file("out/surfaces.json") + " > /dev/null") == 0);
  CHECK(fs::exists(dir.file("out/surfaces.json")));

  CHECK(run_cli("evaluate" + config + " --model " + dir.file("out/model.json") +
                " --surfaces " + dir.file("out/surfaces.json") + " --output " +
                dir.file("out") + " > /dev/null") == 0);
  CHECK(fs::exists(dir.file("out/metrics.json")));
  CHECK(fs::exists(dir.file("out/rollout_01.csv")));

  // A quiet rerun prints nothing and reproduces every byte.
  CHECK(run_cli("simulate" + config + " --quiet --output " +
                dir.file("train2.csv") + " > " + dir.file("quiet.out")) == 0);
  CHECK(read_text_file(dir.file("quiet.out")).empty());
  CHECK(read_text_file(dir.file("train.csv")) ==
        read_text_file(dir.file("train2.csv")));

  CHECK(run_cli("identify" + config + " --dataset " + dir.file("train.csv") +
                " --output " + dir.file("out2") + " --quiet") == 0);
  CHECK(read_text_file(dir.file("out/model.json")) ==
        read_text_file(dir.file("out2/model.json")));
  // History is deterministic except for the two measured-time columns.
  const auto strip_timings = [](const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
      std::size_t cut = line.rfind(',');
      if (cut != std::string::npos) cut = line.rfind(',', cut - 1);
      out << (cut == std::string::npos ? line : line.substr(0, cut)) << '\n';
    }
    return out.str();
  };
  CHECK(strip_timings(read_text_file(dir.file("out/history.csv"))) ==
        strip_timings(read_text_file(dir.file("out2/history.csv"))));
}

TEST_CASE("seed override changes the sampled data and is recorded") {
  TempDir dir;
  write_text_file(dir.file("config.json"), kTinySls);
  const std::string config = " --config " + dir.file("config.json");

  CHECK(run_cli("simulate" + config + " --quiet --output " + dir.file("a.csv") +
                " --seed 99") == 0);
  CHECK(run_cli("simulate" + config + " --quiet --output " + dir.file("b.csv") +
                " --seed 99") == 0);
  CHECK(run_cli("simulate" + config + " --quiet --output " +
                dir.file("c.csv")) == 0);
  const std::string a = read_text_file(dir.file("a.csv"));
  CHECK(a == read_text_file(dir.file("b.csv")));
  CHECK(a != read_text_file(dir.file("c.csv")));
  CHECK(a.find("seed=99") != std::string::npos);
}

TEST_CASE("relaxation override fills the tightness column only for sdp") {
  TempDir dir;
  write_text_file(dir.file("config.json"), kTinySls);
  const std::string config = " --config " + dir.file("config.json");

  CHECK(run_cli("simulate" + config + " --quiet --output " +
                dir.file("train.csv")) == 0);
  CHECK(run_cli("identify" + config + " --dataset " + dir.file("train.csv") +
                " --output " + dir.file("lp") + " --quiet") == 0);
  CHECK(run_cli("identify" + config + " --dataset " + dir.file("train.csv") +
                " --output " + dir.file("sdp") + " --quiet --relaxation sdp") ==
        0);

  // First data row, fifth column: empty for lp, a ratio for sdp.
  const auto fifth_field = [](const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // provenance
    std::getline(in, line);  // header
    std::getline(in, line);  // first record
    std::istringstream fields(line);
    std::string field;
    for (int i = 0; i < 5; ++i) std::getline(fields, field, ',');
    return field;
  };
  CHECK(fifth_field(read_text_file(dir.file("lp/history.csv"))).empty());
  CHECK_FALSE(fifth_field(read_text_file(dir.file("sdp/history.csv"))).empty());
}

TEST_CASE("fit-surface refuses a single-mode model with exit code 2") {
  TempDir dir;
  write_text_file(dir.file("config.json"), kSingleMode);
  const std::string config = " --config " + dir.file("config.json");

  CHECK(run_cli("simulate" + config + " --quiet --output " +
                dir.file("train.csv")) == 0);
  CHECK(run_cli("identify" + config + " --dataset " + dir.file("train.csv") +
                " --output " + dir.file("out") + " --quiet") == 0);
  CHECK(run_cli("fit-surface" + config + " --dataset " + dir.file("train.csv") +
                " --model " + dir.file("out/model.json") + " --output " +
                dir.file("surfaces.json") + " > /dev/null 2>&1") == 2);
}

TEST_CASE("evaluate without surfaces warns and writes null metrics") {
  TempDir dir;
  write_text_file(dir.file("config.json"), kTinySls);
  const std::string config = " --config " + dir.file("config.json");

  CHECK(run_cli("simulate" + config + " --quiet --output " +
                dir.file("train.csv")) == 0);
  CHECK(run_cli("identify" + config + " --dataset " + dir.file("train.csv") +
                " --output " + dir.file("out") + " --quiet") == 0);
  CHECK(run_cli("evaluate" + config + " --model " + dir.file("out/model.json") +
                " --output " + dir.file("out") + " --quiet 2> " +
                dir.file("warn.txt")) == 0);
  CHECK(read_text_file(dir.file("warn.txt")).find("warning") !=
        std::string::npos);
  CHECK(read_text_file(dir.file("out/metrics.json"))
            .find("\"velocity_rmse\": null") != std::string::npos);
}
