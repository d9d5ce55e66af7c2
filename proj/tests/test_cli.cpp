#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "csc/conv_dictionary.hpp"
#include "csc/io.hpp"
#include "csc/manifest.hpp"

using csc::ConvDictionary;
using csc::Rng;
using csc::Tensor3;
namespace fs = std::filesystem;
namespace io = csc::io;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("csc_cli_test_" + std::to_string(Rng(std::random_device{}()).next_u64()));
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string at(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(CSC_FORGE_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json manifest(const std::string& prefix) {
  const io::Bytes b = io::read_file(prefix + "_manifest.json");
  return nlohmann::json::parse(b.begin(), b.end());
}

// Two-layer model with 128 atoms of 4x4x3 (stride 2) under 128 atoms of
// 3x3x128.
std::string write_wide_model(const Workspace& ws) {
  Rng rng(1);
  io::write_dictionary(ws.at("d1.cscd"), ConvDictionary::random(128, 4, 3, 2, 1, rng));
  io::write_dictionary(ws.at("d2.cscd"), ConvDictionary::random(128, 3, 128, 1, 0, rng));
  io::write_text(ws.at("model.json"),
                 R"({"layers":[{"dictionary":"d1.cscd","rule":"l0inf","k":4},)"
                 R"({"dictionary":"d2.cscd","rule":"l0inf","k":2}]})");
  return ws.at("model.json");
}

std::string write_image(const Workspace& ws) {
  Tensor3 img(24, 24, 1);
  for (std::size_t h = 0; h < 24; ++h)
    for (std::size_t w = 0; w < 24; ++w) img(h, w, 0) = (h < 12) == (w < 12) ? 60.0f : 190.0f;
  io::write_image(ws.at("clean.pgm"), img);
  return ws.at("clean.pgm");
}

}  // namespace

TEST_CASE("synth on the wide two-layer model") {
  Workspace ws;
  const std::string model = write_wide_model(ws);
  const std::string out = ws.at("s");
  REQUIRE(run("synth --model " + model + " --height 3 --width 3 --seed 5 --out " + out) == 0);
  const Tensor3 gamma = io::read_tensor(out + "_gamma.csct");
  CHECK(gamma.channels() == 128);
  CHECK(csc::sparsity_report(gamma).max_needle_nnz == 2);
  const Tensor3 image = io::read_tensor(out + "_image.csct");
  CHECK(image.channels() == 3);
  CHECK(image.height() == 2 * (5 - 1) + 4 - 2);
  CHECK(fs::exists(out + "_image.ppm"));
  CHECK(fs::exists(out + "_sparsity.csv"));
  const nlohmann::json m = manifest(out);
  CHECK(m["subcommand"] == "synth");
  CHECK(m["seed"] == 5);
  CHECK(m["outputs"].size() >= 4);
}

TEST_CASE("atoms of the effective dictionary are 8x8 tiles") {
  Workspace ws;
  const std::string model = write_wide_model(ws);
  const std::string out = ws.at("a");
  REQUIRE(run("atoms --model " + model + " --effective 2 --cols 16 --out " + out) == 0);
  const Tensor3 grid = io::read_image(out + "_atoms.ppm");
  CHECK(grid.height() == 8 * 9 + 1);
  CHECK(grid.width() == 16 * 9 + 1);
  CHECK(io::read_dictionary(out + "_effective.cscd").atom_size() == 8);

  REQUIRE(run("atoms --dict " + ws.at("d1.cscd") + " --out " + ws.at("b")) == 0);
  const Tensor3 first = io::read_image(ws.at("b") + "_atoms.ppm");
  CHECK(first.height() == 41);
  CHECK(first.width() == 81);
}

TEST_CASE("repeated runs with the same seed are byte-identical") {
  Workspace ws;
  const std::string image = write_image(ws);
  const std::string model = write_wide_model(ws);
  const std::vector<std::string> commands = {
      "denoise --image " + image + " --sigma 25 --iters 8 --dct-atoms 16 --atom-size 5 --seed 3",
      "denoise --image " + image + " --learn --atoms 8 --atom-size 5 --epochs 2 --iters 5 --seed 3",
      "synth --model " + model + " --height 2 --width 2 --seed 9",
  };
  int index = 0;
  for (const std::string& cmd : commands) {
    CAPTURE(cmd);
    const std::string prefix = ws.at("det" + std::to_string(index++));
    REQUIRE(run(cmd + " --out " + prefix) == 0);
    const nlohmann::json first = csc::without_duration(manifest(prefix));
    REQUIRE(run(cmd + " --threads 2 --out " + prefix) == 0);
    nlohmann::json second = csc::without_duration(manifest(prefix));
    second["threads"] = first["threads"];
    CHECK(first == second);
    for (const auto& entry : first["outputs"]) CHECK(entry["sha256"].is_string());
  }
}

TEST_CASE("pursue, project, analyze and learn") {
  Workspace ws;
  Rng rng(2);
  io::write_dictionary(ws.at("d.cscd"), ConvDictionary::random(4, 3, 1, 1, 1, rng));
  io::write_tensor(ws.at("x.csct"), csc::random_gaussian(10, 10, 1, rng));

  REQUIRE(run("pursue --dict " + ws.at("d.cscd") + " --signal " + ws.at("x.csct") +
              " --rule l1 --lambda 0.1 --iters 30 --out " + ws.at("p")) == 0);
  const Tensor3 gamma = io::read_tensor(ws.at("p") + "_gamma.csct");
  CHECK(gamma.channels() == 4);
  CHECK(fs::exists(ws.at("p") + "_reconstruction.csct"));
  CHECK(fs::exists(ws.at("p") + "_trace.csv"));

  REQUIRE(run("project --in " + ws.at("p") + "_gamma.csct --rule l0inf --k 1 --out " + ws.at("q")) == 0);
  CHECK(csc::sparsity_report(io::read_tensor(ws.at("q") + "_projected.csct")).max_needle_nnz <= 1);

  REQUIRE(run("analyze --in " + ws.at("q") + "_projected.csct --out " + ws.at("r")) == 0);
  CHECK(io::read_image(ws.at("r") + "_heat.pgm").height() == 10);
  CHECK(fs::exists(ws.at("r") + "_sparsity.csv"));

  REQUIRE(run("learn --signal " + ws.at("x.csct") + " --atoms 4 --atom-size 3 --epochs 2 --rule l0inf --k 1 --out " +
              ws.at("l")) == 0);
  CHECK(io::read_dictionary(ws.at("l") + "_dict.cscd").atom_count() == 4);
  CHECK(fs::exists(ws.at("l") + "_objective.csv"));
}

TEST_CASE("exit codes") {
  Workspace ws;
  const std::string image = write_image(ws);
  CHECK(run("") == 2);
  CHECK(run("denoise --image " + image + " --sigma -1 --out " + ws.at("e")) == 2);
  CHECK(run("denoise --image " + ws.at("missing.pgm") + " --out " + ws.at("e")) == 1);
  CHECK(run("project --in " + image + " --out " + ws.at("e")) == 2);
  CHECK(run("frobnicate --out x") == 2);
  CHECK(run("denoise --image " + image + " --rule l2 --out " + ws.at("e")) == 2);
  CHECK(run("denoise --image " + image + " --dct-atoms 16 --atom-size 5 --step 1e6 --iters 100 --out " +
            ws.at("div")) == 3);
  CHECK(fs::exists(ws.at("div") + "_trace.csv"));
  CHECK(run("--help") == 0);
}
