// csc-forge: command-line front end for the convolutional sparse coding
// toolkit. Exit codes: 0 success, 1 IO failure, 2 usage or validation error,
// 3 numerical failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "csc/conv_dictionary.hpp"
#include "csc/denoise.hpp"
#include "csc/errors.hpp"
#include "csc/io.hpp"
#include "csc/kernels.hpp"
#include "csc/manifest.hpp"
#include "csc/mlcsc.hpp"
#include "csc/pursuit.hpp"
#include "csc/sparsify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
};

struct RuleFlags {
  std::string rule = "l0inf";
  std::size_t k = 4;
  double lambda = 0.1;

  csc::SparsityRule resolve() const {
    if (lambda < 0.0) throw UsageError("--lambda must be >= 0");
    return csc::io::make_rule(rule, lambda, k);
  }
};

void add_common(CLI::App* cmd, Common& common, bool needs_seed) {
  if (needs_seed) cmd->add_option("--seed", common.seed, "Seed for every random stream of the run");
  cmd->add_option("--threads", common.threads, "Threads for the parallel kernels (default: $CSC_FORGE_THREADS or 1)");
  cmd->add_option("--out", common.out, "Output prefix; files are written as <prefix>_<name>.<ext>")->required();
}

void add_rule_flags(CLI::App* cmd, RuleFlags& flags) {
  cmd->add_option("--rule", flags.rule, "Sparsity rule: l1, l0 or l0inf")->capture_default_str();
  cmd->add_option("--k", flags.k, "Nonzero budget for l0 (global) or l0inf (per needle)")->capture_default_str();
  cmd->add_option("--lambda", flags.lambda, "Penalty weight for l1")->capture_default_str();
}

fs::path output_path(const Common& common, const std::string& name) { return fs::path(common.out + "_" + name); }

std::string image_ext(const csc::Tensor3& t) { return t.channels() == 3 ? ".ppm" : ".pgm"; }

csc::Tensor3 load_signal(const fs::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return csc::io::read_image(p);
  return csc::io::read_tensor(p);
}

json rule_json(const csc::SparsityRule& rule) {
  json j = {{"rule", csc::io::rule_name(rule)}};
  if (const auto* r = std::get_if<csc::L1Penalty>(&rule)) j["lambda"] = r->lambda;
  if (const auto* r = std::get_if<csc::L0Global>(&rule)) j["k"] = r->k;
  if (const auto* r = std::get_if<csc::L0InfNeedle>(&rule)) j["k"] = r->k;
  return j;
}

json report_json(const csc::SparsityReport& r) {
  return {{"global_nnz_fraction", r.global_nnz_fraction},
          {"total_nnz", r.total_nnz},
          {"max_needle_nnz", r.max_needle_nnz}};
}

class Run {
 public:
  Run(std::string subcommand, const Common& common) : common_(common), start_(std::chrono::steady_clock::now()) {
    manifest_.subcommand = std::move(subcommand);
    manifest_.seed = common.seed;
    manifest_.threads = common.threads;
  }

  csc::RunManifest& manifest() { return manifest_; }

  fs::path output(const std::string& name) {
    fs::path p = output_path(common_, name);
    manifest_.add_output(p);
    return p;
  }

  void finish() {
    manifest_.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    manifest_.write(output_path(common_, "manifest.json"));
  }

 private:
  const Common& common_;
  csc::RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

// --- synth -----------------------------------------------------------------

struct SynthFlags {
  std::string model;
  std::size_t height = 4;
  std::size_t width = 4;
  std::optional<std::size_t> k;
  double scale = 1.0;
  double offset = 0.0;
};

int cmd_synth(const Common& common, const SynthFlags& f) {
  Run run("synth", common);
  run.manifest().add_input(f.model);
  for (const auto& p : csc::io::model_dictionary_paths(f.model)) run.manifest().add_input(p);
  const csc::MlCscModel model = csc::io::load_model(f.model);

  csc::SparsityRule rule = model.layer(model.depth()).rule;
  if (f.k) {
    if (std::holds_alternative<csc::L0Global>(rule)) rule = csc::L0Global{*f.k};
    else if (std::holds_alternative<csc::L0InfNeedle>(rule)) rule = csc::L0InfNeedle{*f.k};
    else throw UsageError("--k given but the deepest layer uses an l1 rule");
  }
  if (!csc::is_projection(rule)) {
    throw csc::CascadeGeometryError(model.depth(), "sampling needs an l0 or l0inf rule on the deepest layer");
  }
  const std::size_t channels = model.layer(model.depth()).dict.atom_count();
  const csc::SparseSample sample = csc::sample_sparse(f.height, f.width, channels, rule, common.seed);
  const csc::Tensor3 image = csc::synthesize_cascade(model, sample.gamma);
  csc::Tensor3 mapped = image;
  for (float& v : mapped.values()) v = static_cast<float>(f.offset + f.scale * v);
  const csc::SparsityReport report = csc::sparsity_report(sample.gamma);

  csc::io::write_tensor(run.output("gamma.csct"), sample.gamma);
  csc::io::write_tensor(run.output("image.csct"), image);
  if (image.channels() == 1 || image.channels() == 3) {
    csc::io::write_image(run.output("image" + image_ext(image)), mapped);
  }
  csc::io::write_text(run.output("sparsity.csv"), csc::io::sparsity_csv(report));

  run.manifest().config = {{"model", f.model},         {"height", f.height}, {"width", f.width},
                           {"sampling", rule_json(rule)}, {"scale", f.scale},   {"offset", f.offset}};
  run.manifest().results = {{"support_size", sample.support_size},
                            {"image_shape", image.shape_string()},
                            {"sparsity", report_json(report)}};
  run.finish();
  return 0;
}

// --- denoise ---------------------------------------------------------------

struct DenoiseFlags {
  std::string image;
  double sigma = 25.0;
  RuleFlags rule;
  int iters = 50;
  double ema = 0.99;
  std::optional<double> step;
  std::string dict;
  std::size_t dct_atoms = 64;
  bool learn = false;
  std::size_t atoms = 64;
  std::size_t atom_size = 8;
  int epochs = 10;
  double learn_rate = 1e-3;
  int sc_iters = 5;
};

int cmd_denoise(const Common& common, const DenoiseFlags& f) {
  if (!(f.sigma > 0.0)) throw UsageError("--sigma must be positive");
  if (!(f.ema > 0.0 && f.ema < 1.0)) throw UsageError("--ema must lie strictly between 0 and 1");
  if (f.iters <= 0) throw UsageError("--iters must be positive");
  if (f.step && !(*f.step > 0.0)) throw UsageError("--step must be positive");

  Run run("denoise", common);
  run.manifest().add_input(f.image);
  const csc::Tensor3 clean = csc::io::read_image(f.image);

  csc::DenoiseConfig cfg;
  cfg.sigma = f.sigma;
  cfg.rule = f.rule.resolve();
  cfg.iters = f.iters;
  cfg.ema_decay = f.ema;
  cfg.step_size = f.step;
  cfg.seed = common.seed;

  json source;
  csc::ConvDictionary dict;
  if (!f.dict.empty()) {
    run.manifest().add_input(f.dict);
    dict = csc::io::read_dictionary(f.dict);
    source = {{"kind", "file"}, {"path", f.dict}};
  } else if (f.learn) {
    csc::LearnConfig lc;
    lc.atom_count = f.atoms;
    lc.atom_size = f.atom_size;
    lc.rule = cfg.rule;
    lc.epochs = f.epochs;
    lc.learn_rate = f.learn_rate;
    lc.sc_iters = f.sc_iters;
    csc::Rng rng = csc::derive_rng(common.seed, csc::SeedStream::Learning);
    const csc::LearnResult learned = csc::learn_dictionary(csc::noisy_observation(clean, cfg), lc, rng);
    dict = learned.dict;
    csc::io::write_dictionary(run.output("dict.cscd"), dict);
    source = {{"kind", "learned"},   {"atoms", f.atoms},           {"atom_size", f.atom_size},
              {"epochs", f.epochs},  {"learn_rate", f.learn_rate}, {"sc_iters", f.sc_iters},
              {"rejected_updates", learned.rejected_updates}};
  } else {
    dict = csc::dct_dictionary(f.dct_atoms, f.atom_size);
    source = {{"kind", "dct"}, {"atoms", f.dct_atoms}, {"atom_size", f.atom_size}};
  }
  const std::string dict_hash = csc::io::sha256_hex(csc::io::encode_dictionary(dict));

  run.manifest().config = {{"image", f.image},       {"sigma", f.sigma},  {"sparsity", rule_json(cfg.rule)},
                           {"iters", f.iters},       {"ema_decay", f.ema}, {"dictionary", source},
                           {"dictionary_sha256", dict_hash}};
  if (f.step) run.manifest().config["step"] = *f.step;
  const json header = {{"config", run.manifest().config}, {"seed", common.seed}, {"dictionary_sha256", dict_hash}};

  auto write_run = [&](const csc::DenoiseRun& result) {
    csc::io::write_image(run.output("noisy" + image_ext(clean)), result.noisy);
    if (!result.best_single.image.empty()) {
      csc::io::write_image(run.output("best_single" + image_ext(clean)), result.best_single.image);
      csc::io::write_image(run.output("best_average" + image_ext(clean)), result.best_average.image);
    }
    csc::io::write_text(run.output("trace.csv"), csc::io::denoise_trace_csv(result, header.dump()));
    run.manifest().results = {{"noisy_psnr", result.noisy_psnr},
                              {"iterations", result.psnr_single.size()},
                              {"best_single", {{"iter", result.best_single.iter}, {"psnr", result.best_single.psnr}}},
                              {"best_average", {{"iter", result.best_average.iter}, {"psnr", result.best_average.psnr}}},
                              {"step", result.pursuit.step},
                              {"rule_violations", result.rule_violations}};
  };

  try {
    const csc::DenoiseRun result = csc::denoise(clean, cfg, dict);
    write_run(result);
  } catch (const csc::DenoiseDivergenceError& e) {
    write_run(e.partial_run());
    run.manifest().results["error"] = e.what();
    run.finish();
    std::cerr << "csc-forge denoise: " << e.what() << "\n";
    return kExitNumeric;
  }
  run.finish();
  std::cout << "noisy " << run.manifest().results["noisy_psnr"].get<double>()
            << " dB, best single " << run.manifest().results["best_single"]["psnr"].get<double>()
            << " dB, best average " << run.manifest().results["best_average"]["psnr"].get<double>() << " dB\n";
  return 0;
}

// --- project ---------------------------------------------------------------

int cmd_project(const Common& common, const std::string& input, const RuleFlags& flags) {
  Run run("project", common);
  run.manifest().add_input(input);
  const csc::Tensor3 gamma = csc::io::read_tensor(input);
  const csc::SparsityRule rule = flags.resolve();
  const csc::Tensor3 projected = csc::apply_rule(gamma, rule, 1.0);
  csc::io::write_tensor(run.output("projected.csct"), projected);
  run.manifest().config = {{"input", input}, {"sparsity", rule_json(rule)}};
  run.manifest().results = {{"sparsity", report_json(csc::sparsity_report(projected))}};
  run.finish();
  return 0;
}

// --- pursue ----------------------------------------------------------------

struct PursueFlags {
  std::string dict;
  std::string signal;
  RuleFlags rule;
  int iters = 100;
  std::optional<double> step;
  double tol = 0.0;
  int power_iters = 50;
};

int cmd_pursue(const Common& common, const PursueFlags& f) {
  if (f.iters < 0) throw UsageError("--iters must be >= 0");
  Run run("pursue", common);
  run.manifest().add_input(f.dict);
  run.manifest().add_input(f.signal);
  const csc::ConvDictionary dict = csc::io::read_dictionary(f.dict);
  const csc::Tensor3 x = load_signal(f.signal);

  csc::PursuitConfig cfg;
  cfg.max_iters = f.iters;
  cfg.step_size = f.step;
  cfg.rule = f.rule.resolve();
  cfg.objective_tol = f.tol;
  cfg.power_iters = f.power_iters;
  cfg.seed = csc::derive_rng(common.seed, csc::SeedStream::Pursuit).next_u64();

  run.manifest().config = {{"dictionary", f.dict}, {"signal", f.signal},  {"sparsity", rule_json(cfg.rule)},
                           {"iters", f.iters},     {"objective_tol", f.tol}, {"power_iters", f.power_iters}};
  if (f.step) run.manifest().config["step"] = *f.step;
  const json header = {
      {"config", run.manifest().config}, {"seed", common.seed}, {"dictionary_sha256", csc::io::sha256_file(f.dict)}};

  csc::PursuitTrace trace;
  try {
    trace = csc::pursue(dict, x, cfg);
  } catch (const csc::DivergenceError& e) {
    trace.objective = e.partial_objective();
    csc::io::write_text(run.output("trace.csv"), csc::io::pursuit_trace_csv(trace, header.dump()));
    run.manifest().results = {{"error", e.what()}};
    run.finish();
    std::cerr << "csc-forge pursue: " << e.what() << "\n";
    return kExitNumeric;
  }
  csc::io::write_tensor(run.output("gamma.csct"), trace.gamma);
  csc::io::write_tensor(run.output("reconstruction.csct"), csc::synthesize(dict, trace.gamma));
  csc::io::write_text(run.output("trace.csv"), csc::io::pursuit_trace_csv(trace, header.dump()));
  run.manifest().results = {{"iterations", trace.iterations_run},
                            {"final_objective", trace.objective.empty() ? trace.initial_objective
                                                                        : trace.objective.back()},
                            {"step", trace.step},
                            {"stop", trace.stop == csc::StopReason::MaxIters ? "max_iters" : "objective_tol"},
                            {"sparsity", report_json(csc::sparsity_report(trace.gamma, 1e-8))}};
  run.finish();
  return 0;
}

// --- learn -----------------------------------------------------------------

struct LearnFlags {
  std::string signal;
  RuleFlags rule;
  std::size_t atoms = 64;
  std::size_t atom_size = 8;
  int epochs = 10;
  double learn_rate = 1e-3;
  int sc_iters = 5;
};

int cmd_learn(const Common& common, const LearnFlags& f) {
  Run run("learn", common);
  run.manifest().add_input(f.signal);
  const csc::Tensor3 x = load_signal(f.signal);
  csc::LearnConfig lc;
  lc.atom_count = f.atoms;
  lc.atom_size = f.atom_size;
  lc.rule = f.rule.resolve();
  lc.epochs = f.epochs;
  lc.learn_rate = f.learn_rate;
  lc.sc_iters = f.sc_iters;
  csc::Rng rng = csc::derive_rng(common.seed, csc::SeedStream::Learning);
  const csc::LearnResult learned = csc::learn_dictionary(x, lc, rng);

  csc::io::write_dictionary(run.output("dict.cscd"), learned.dict);
  if (learned.dict.channels() == 1 || learned.dict.channels() == 3) {
    const csc::Tensor3 grid = csc::export_atom_grid(learned.dict, 8);
    csc::io::write_image(run.output("atoms" + image_ext(grid)), grid);
  }
  std::string csv = "epoch,objective\n";
  for (std::size_t i = 0; i < learned.objective.size(); ++i) {
    csv += std::to_string(i + 1) + "," + csc::io::format_double(learned.objective[i]) + "\n";
  }
  csc::io::write_text(run.output("objective.csv"), csv);

  run.manifest().config = {{"signal", f.signal},         {"atoms", f.atoms},        {"atom_size", f.atom_size},
                           {"sparsity", rule_json(lc.rule)}, {"epochs", f.epochs},      {"learn_rate", f.learn_rate},
                           {"sc_iters", f.sc_iters}};
  run.manifest().results = {
      {"final_objective", learned.objective.empty() ? json(nullptr) : json(learned.objective.back())},
      {"rejected_updates", learned.rejected_updates}};
  run.finish();
  return 0;
}

// --- analyze ---------------------------------------------------------------

int cmd_analyze(const Common& common, const std::string& input, double zero_tol) {
  if (zero_tol < 0.0) throw UsageError("--zero-tol must be >= 0");
  Run run("analyze", common);
  run.manifest().add_input(input);
  const csc::Tensor3 gamma = csc::io::read_tensor(input);
  const csc::SparsityReport report = csc::sparsity_report(gamma, zero_tol);
  csc::io::write_text(run.output("sparsity.csv"), csc::io::sparsity_csv(report));
  csc::io::write_image(run.output("heat.pgm"), csc::io::sparsity_heat(report));
  run.manifest().config = {{"input", input}, {"zero_tol", zero_tol}};
  run.manifest().results = {{"sparsity", report_json(report)}};
  run.finish();
  std::cout << "global nnz fraction " << report.global_nnz_fraction << ", max needle nnz " << report.max_needle_nnz
            << "\n";
  return 0;
}

// --- atoms -----------------------------------------------------------------

struct AtomsFlags {
  std::string dict;
  std::string model;
  std::size_t effective = 1;
  std::size_t cols = 16;
};

int cmd_atoms(const Common& common, const AtomsFlags& f) {
  if (f.dict.empty() == f.model.empty()) throw UsageError("give exactly one of --dict or --model");
  if (f.cols == 0) throw UsageError("--cols must be positive");
  Run run("atoms", common);
  csc::ConvDictionary dict;
  if (!f.dict.empty()) {
    run.manifest().add_input(f.dict);
    dict = csc::io::read_dictionary(f.dict);
  } else {
    run.manifest().add_input(f.model);
    for (const auto& p : csc::io::model_dictionary_paths(f.model)) run.manifest().add_input(p);
    const csc::MlCscModel model = csc::io::load_model(f.model);
    dict = csc::effective_dictionary(model, f.effective);
    csc::io::write_dictionary(run.output("effective.cscd"), dict);
  }
  const csc::Tensor3 grid = csc::export_atom_grid(dict, f.cols);
  csc::io::write_image(run.output("atoms" + image_ext(grid)), grid);
  run.manifest().config = {{"dictionary", f.dict}, {"model", f.model}, {"effective", f.effective}, {"cols", f.cols}};
  run.manifest().results = {{"atom_count", dict.atom_count()},
                            {"atom_size", dict.atom_size()},
                            {"channels", dict.channels()},
                            {"stride", dict.stride()},
                            {"padding", dict.padding()},
                            {"grid_shape", grid.shape_string()}};
  run.finish();
  return 0;
}

int default_threads() {
  if (const char* env = std::getenv("CSC_FORGE_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"csc-forge: convolutional sparse coding toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", csc::kToolVersion);

  Common common;
  common.threads = default_threads();

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Sample a sparse deepest code and synthesize it through a model");
  add_common(synth_cmd, common, true);
  synth_cmd->add_option("--model", synth.model, "Model manifest (JSON)")->required();
  synth_cmd->add_option("--height", synth.height, "Deepest code height")->capture_default_str();
  synth_cmd->add_option("--width", synth.width, "Deepest code width")->capture_default_str();
  synth_cmd->add_option("--k", synth.k, "Override the deepest layer's budget");
  synth_cmd->add_option("--scale", synth.scale, "Image value = offset + scale * x")->capture_default_str();
  synth_cmd->add_option("--offset", synth.offset, "Image value = offset + scale * x")->capture_default_str();

  DenoiseFlags den;
  auto* den_cmd = app.add_subcommand("denoise", "Denoise an image by sparse coding with oracle-best selection");
  add_common(den_cmd, common, true);
  den_cmd->add_option("--image", den.image, "Clean 8-bit PGM/PPM")->required();
  den_cmd->add_option("--sigma", den.sigma, "Noise standard deviation")->capture_default_str();
  add_rule_flags(den_cmd, den.rule);
  den_cmd->add_option("--iters", den.iters, "Pursuit iterations")->capture_default_str();
  den_cmd->add_option("--ema", den.ema, "Exponential average decay")->capture_default_str();
  den_cmd->add_option("--step", den.step, "Fixed gradient step (default 0.99/L)");
  den_cmd->add_option("--dict", den.dict, "Dictionary file (CSCD)");
  den_cmd->add_option("--dct-atoms", den.dct_atoms, "DCT baseline atom count")->capture_default_str();
  den_cmd->add_flag("--learn", den.learn, "Learn the dictionary from the noisy image");
  den_cmd->add_option("--atoms", den.atoms, "Learned atom count")->capture_default_str();
  den_cmd->add_option("--atom-size", den.atom_size, "Atom size (learned or DCT)")->capture_default_str();
  den_cmd->add_option("--epochs", den.epochs, "Learning epochs")->capture_default_str();
  den_cmd->add_option("--learn-rate", den.learn_rate, "Atom gradient step")->capture_default_str();
  den_cmd->add_option("--sc-iters", den.sc_iters, "Pursuit steps per epoch")->capture_default_str();

  std::string project_in;
  RuleFlags project_rule;
  auto* proj_cmd = app.add_subcommand("project", "Apply a sparsity rule to a CSCT tensor");
  add_common(proj_cmd, common, false);
  proj_cmd->add_option("--in", project_in, "Input tensor (CSCT)")->required();
  add_rule_flags(proj_cmd, project_rule);

  PursueFlags pursue;
  auto* pursue_cmd = app.add_subcommand("pursue", "Sparse-code a signal over a dictionary (ISTA or IHT)");
  add_common(pursue_cmd, common, true);
  pursue_cmd->add_option("--dict", pursue.dict, "Dictionary (CSCD)")->required();
  pursue_cmd->add_option("--signal", pursue.signal, "Signal (CSCT, PGM or PPM)")->required();
  add_rule_flags(pursue_cmd, pursue.rule);
  pursue_cmd->add_option("--iters", pursue.iters, "Maximum iterations")->capture_default_str();
  pursue_cmd->add_option("--step", pursue.step, "Fixed gradient step (default 0.99/L)");
  pursue_cmd->add_option("--tol", pursue.tol, "Stop when the objective drops by less than this")->capture_default_str();
  pursue_cmd->add_option("--power-iters", pursue.power_iters, "Power iterations for L")->capture_default_str();

  LearnFlags learn;
  auto* learn_cmd = app.add_subcommand("learn", "Learn a convolutional dictionary from one signal");
  add_common(learn_cmd, common, true);
  learn_cmd->add_option("--signal", learn.signal, "Signal (CSCT, PGM or PPM)")->required();
  add_rule_flags(learn_cmd, learn.rule);
  learn_cmd->add_option("--atoms", learn.atoms, "Atom count")->capture_default_str();
  learn_cmd->add_option("--atom-size", learn.atom_size, "Atom size")->capture_default_str();
  learn_cmd->add_option("--epochs", learn.epochs, "Epochs")->capture_default_str();
  learn_cmd->add_option("--learn-rate", learn.learn_rate, "Atom gradient step")->capture_default_str();
  learn_cmd->add_option("--sc-iters", learn.sc_iters, "Pursuit steps per epoch")->capture_default_str();

  std::string analyze_in;
  double zero_tol = 0.0;
  auto* analyze_cmd = app.add_subcommand("analyze", "Sparsity report and needle heat map of a CSCT tensor");
  add_common(analyze_cmd, common, false);
  analyze_cmd->add_option("--in", analyze_in, "Input tensor (CSCT)")->required();
  analyze_cmd->add_option("--zero-tol", zero_tol, "Entries with |v| <= tol count as zero")->capture_default_str();

  AtomsFlags atoms;
  auto* atoms_cmd = app.add_subcommand("atoms", "Export a dictionary's atoms as an image grid");
  add_common(atoms_cmd, common, false);
  atoms_cmd->add_option("--dict", atoms.dict, "Dictionary (CSCD)");
  atoms_cmd->add_option("--model", atoms.model, "Model manifest (JSON)");
  atoms_cmd->add_option("--effective", atoms.effective, "Depth of the effective dictionary (with --model)")
      ->capture_default_str();
  atoms_cmd->add_option("--cols", atoms.cols, "Tiles per row")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (common.threads <= 0) throw UsageError("--threads must be positive");
    csc::set_thread_count(common.threads);
    if (name == "synth") return cmd_synth(common, synth);
    if (name == "denoise") return cmd_denoise(common, den);
    if (name == "project") return cmd_project(common, project_in, project_rule);
    if (name == "pursue") return cmd_pursue(common, pursue);
    if (name == "learn") return cmd_learn(common, learn);
    if (name == "analyze") return cmd_analyze(common, analyze_in, zero_tol);
    if (name == "atoms") return cmd_atoms(common, atoms);
  } catch (const csc::IoError& e) {
    std::cerr << "csc-forge " << name << ": " << e.what() << "\n";
    return kExitIo;
  } catch (const csc::DivergenceError& e) {
    std::cerr << "csc-forge " << name << ": " << e.what() << "\n";
    return kExitNumeric;
  } catch (const csc::FormatError& e) {
    std::cerr << "csc-forge " << name << ": malformed input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "csc-forge " << name << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "csc-forge " << name << ": " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
