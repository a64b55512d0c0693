#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "cogsr/conditioning/cot.hpp"
#include "cogsr/harness/commands.hpp"
#include "cogsr/harness/gradcheck.hpp"

namespace cogsr::cli {

namespace {

namespace fs = std::filesystem;
using harness::RunConfig;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string data;
  std::string checkpoint;
  std::string manifest;
  std::string in_wav;
  std::string cot;
  std::string cot_file;
  std::string cache;
  std::string id;
  std::size_t steps = 32;
  std::optional<double> cutoff_hz;
  bool resume = false;
  std::optional<std::size_t> stop_at;
  bool quiet = false;
};


RunConfig load(const Options& o) { return harness::load_config(o.config); }

void finish(RunConfig& c) { harness::validate(c); }

std::string read_text(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw harness::ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void add_common(CLI::App* cmd, Options& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "Run configuration (JSON)");
  if (config_required) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Override the command's seed");
  cmd->add_flag("--quiet", o.quiet, "Only log warnings and errors");
}

int dispatch(CLI::App& app, Options& o, std::ostream& out) {
  const std::string verb = app.get_subcommands().front()->get_name();
  if (o.quiet) spdlog::set_level(spdlog::level::warn);

  if (verb == "synth-data") {
    auto c = load(o);
    if (o.seed) c.corpus.seed = *o.seed;
    finish(c);
    const auto s = harness::cmd_synth_data(c, o.out);
    out << "train " << s.train << "  val " << s.val << "  test " << s.test << "  config " << s.fingerprint << '\n';
  } else if (verb == "train") {
    auto c = load(o);
    if (o.seed) c.training.seed = *o.seed;
    finish(c);
    const auto s = harness::cmd_train(c, o.data, o.out, o.resume, o.stop_at);
    out << "steps " << s.steps << "  loss " << s.initial_loss << " -> " << s.final_loss << "  best val "
        << s.best_val_loss << " @ " << s.best_step << '\n';
  } else if (verb == "restore") {
    harness::RestoreRequest r;
    r.checkpoint = o.checkpoint;
    r.in_wav = o.in_wav;
    r.out_wav = o.out;
    r.steps = o.steps;
    r.seed = o.seed.value_or(0);
    r.cutoff_hz = o.cutoff_hz;
    if (!o.cache.empty()) {
      if (o.id.empty()) throw harness::ConfigError("--cache needs --id");
      r.cache = o.cache;
      r.cache_id = o.id;
    } else if (!o.cot_file.empty()) {
      r.cot_text = read_text(o.cot_file);
    } else if (!o.cot.empty()) {
      r.cot_text = o.cot;
    } else {
      throw harness::ConfigError("one of --cot, --cot-file or --cache/--id is required");
    }
    const auto res = harness::cmd_restore(r);
    const auto& t = res.timings;
    char line[200];
    std::snprintf(line, sizeof line,
                  "cutoff %.0f Hz  encode %.3f s  condition %.3f s  sample %.3f s  decode %.3f s\n",
                  res.cutoff_hz, t.encode_s, t.condition_s, t.sample_s, t.decode_s);
    out << line;
  } else if (verb == "evaluate") {
    auto c = load(o);
    if (o.seed) c.evaluation.seed = *o.seed;
    finish(c);
    const auto report = harness::cmd_evaluate(c, o.checkpoint, o.manifest, o.out);
    out << eval::report_table(report);
  } else if (verb == "ablate") {
    auto c = load(o);
    if (o.seed) c.training.seed = *o.seed;
    finish(c);
    out << harness::ablation_table(harness::cmd_ablate(c, o.data, o.out));
  } else if (verb == "gradcheck") {
    constexpr double kTolerance = 1e-4;
    auto reports = harness::gradcheck_ops(o.seed.value_or(0));
    reports.push_back(harness::gradcheck_dit(o.seed.value_or(0)));
    bool ok = true;
    for (const auto& r : reports) {
      const bool pass = r.report.within(kTolerance);
      ok = ok && pass;
      char line[200];
      std::snprintf(line, sizeof line, "%-24s %s  max rel err %.3e over %zu coords\n", r.name.c_str(),
                    pass ? "ok  " : "FAIL", r.report.max_relative_error, r.report.coordinates_checked);
      out << line;
    }
    if (!ok) return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speech super-resolution with semantic and acoustic conditioning"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth-data", "Synthesize the corpus, manifests and CoT cache");
  add_common(synth, o, true);
  synth->add_option("--out", o.out, "Output data directory")->required();

  auto* train = app.add_subcommand("train", "Train a model");
  add_common(train, o, true);
  train->add_option("--data", o.data, "Data directory from synth-data")->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", o.out, "Run directory")->required();
  train->add_flag("--resume", o.resume, "Continue from <out>/last.ckpt");
  train->add_option("--stop-at", o.stop_at, "End this session after the given step");

  auto* restore = app.add_subcommand("restore", "Restore one band-limited recording");
  add_common(restore, o, false);
  restore->add_option("--checkpoint", o.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  restore->add_option("--in", o.in_wav, "Input WAV")->required()->check(CLI::ExistingFile);
  restore->add_option("--out", o.out, "Output WAV")->required();
  restore->add_option("--cot", o.cot, "CoT record text");
  restore->add_option("--cot-file", o.cot_file, "File holding the CoT record")->check(CLI::ExistingFile);
  restore->add_option("--cache", o.cache, "CoT cache file")->check(CLI::ExistingFile);
  restore->add_option("--id", o.id, "Utterance id in the CoT cache");
  restore->add_option("--steps", o.steps, "Euler steps")->check(CLI::PositiveNumber);
  restore->add_option("--cutoff-hz", o.cutoff_hz, "Known input cutoff; estimated when absent");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint on a manifest");
  add_common(evaluate, o, true);
  evaluate->add_option("--checkpoint", o.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--manifest", o.manifest, "Manifest (JSON lines)")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", o.out, "Report path prefix; writes .json and .txt")->required();

  auto* ablate = app.add_subcommand("ablate", "Train and evaluate the four ablation variants");
  add_common(ablate, o, true);
  ablate->add_option("--data", o.data, "Data directory from synth-data")->required()->check(CLI::ExistingDirectory);
  ablate->add_option("--out", o.out, "Output directory")->required();

  auto* grad = app.add_subcommand("gradcheck", "Check every differentiable op and the DiT loss");
  grad->add_option("--seed", o.seed, "Seed for the random inputs");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    return dispatch(app, o, out);
  } catch (const harness::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const conditioning::CoTSyntaxError& e) {
    err << "CoT parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const conditioning::CoTMissingKeys& e) {
    err << "CoT parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace cogsr::cli
