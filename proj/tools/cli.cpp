// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <random>

#include "CLI11.hpp"
#include "pcn/checkpoint.hpp"
#include "pcn/errors.hpp"
#include "pcn/feature_io.hpp"
#include "pcn/gradcheck.hpp"
#include "pcn/manifest.hpp"
#include "pcn/metrics.hpp"
#include "pcn/moving_shapes.hpp"
#include "pcn/run_config.hpp"
#include "pcn/trainer.hpp"

namespace pcn::cli {

namespace fs = std::filesystem;

namespace {

/// Flags shared by every config-driven subcommand. Named flags map onto
/// dotted keys and win over --a.b=v overrides, which win over the file.
struct CommonFlags {
  std::string config;
  std::string profile;
  std::vector<std::pair<std::string, std::string*>> named;
  bool deterministic = false;
  std::vector<std::unique_ptr<std::string>> storage;

  void add_named(CLI::App* app, const std::string& flag, const std::string& key,
                 const std::string& help) {
    storage.push_back(std::make_unique<std::string>());
    app->add_option(flag, *storage.back(), help + " (" + key + ")");
    named.emplace_back(key, storage.back().get());
  }
};

void add_common(CLI::App* app, CommonFlags& flags) {
  app->add_option("--config", flags.config, "TOML run config");
  app->add_option("--profile", flags.profile, "desk or paper");
  flags.add_named(app, "--seed", "seed", "seed; PREDNET_SEED is the fallback");
  app->add_flag("--deterministic", flags.deterministic, "sequential execution");
  app->allow_extras();
  app->footer("Any config key can be overridden with --<key>=<value>, e.g. --train.lr=0.01");
}

/// Leftover tokens must be --a.b=v or --a.b v overrides.
std::vector<std::pair<std::string, std::string>> parse_overrides(
    const std::vector<std::string>& rest) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const std::string& tok = rest[i];
    if (tok.rfind("--", 0) != 0 || tok.size() <= 2) {
      throw UsageError("unexpected argument '" + tok + "'");
    }
    std::string key = tok.substr(2);
    std::string value;
    if (auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else if (i + 1 < rest.size() && rest[i + 1].rfind("--", 0) != 0) {
      value = rest[++i];
    } else {
      throw UsageError("option '" + tok + "' needs a value");
    }
    if (!find_key(key)) throw UsageError("unknown option '--" + key + "'");
    out.emplace_back(key, value);
  }
  return out;
}

RunConfig resolve(const CommonFlags& flags, const std::vector<std::string>& rest) {
  ConfigSources src;
  if (!flags.config.empty()) src.file = flags.config;
  if (!flags.profile.empty()) src.profile = flags.profile;
  src.overrides = parse_overrides(rest);
  for (const auto& [key, value] : flags.named) {
    if (!value->empty()) src.overrides.emplace_back(key, *value);
  }
  if (flags.deterministic) src.overrides.emplace_back("deterministic", "true");
  if (const char* env = std::getenv("PREDNET_SEED")) src.env_seed = env;
  return resolve_config(src);
}

fs::path required_path(const RunConfig& run, const std::string& key, const std::string& flag) {
  const std::string p = run.get_string(key);
  if (p.empty()) throw UsageError(flag + " is required");
  return p;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

/// The resolved config is the run's record: rerunning with --config on it
/// reproduces the run.
fs::path prepare_out(const RunConfig& run) {
  const fs::path out = required_path(run, "paths.out", "--out");
  fs::create_directories(out);
  write_file(out / "config.toml", run.to_toml());
  return out;
}

int gen_data(const RunConfig& run, std::ostream& out) {
  const fs::path dir = prepare_out(run);
  MovingShapesConfig cfg = moving_shapes_config(run);
  const std::vector<std::pair<std::string, std::uint64_t>> splits{
      {"train", run.get_uint("data.clips")},
      {"val", run.get_uint("data.val_clips")},
      {"test", run.get_uint("data.test_clips")}};
  for (std::size_t s = 0; s < splits.size(); ++s) {
    const auto& [name, per_class] = splits[s];
    if (per_class == 0) continue;
    cfg.clips_per_class = per_class;
    const MovingShapesDataset data = generate_moving_shapes(cfg, s);
    write_moving_shapes(data, dir, name);
    out << name << ": " << data.clips.size() << " clips, " << data.classes.size()
        << " classes -> " << (dir / (name + ".json")).string() << "\n";
  }
  return kExitOk;
}

Dataset load_split(const fs::path& data_dir, const std::string& split) {
  const fs::path manifest = data_dir / (split + ".json");
  if (!fs::exists(manifest)) throw InputError("missing manifest " + manifest.string());
  return load_dataset(manifest);
}

int train(const RunConfig& run, std::ostream& out) {
  const fs::path data_dir = required_path(run, "paths.data", "--data");
  const fs::path dir = prepare_out(run);
  const Dataset train_set = load_split(data_dir, "train");
  Dataset val_set;
  if (fs::exists(data_dir / "val.json")) val_set = load_split(data_dir, "val");
  if (val_set.size() > 0 && val_set.manifest.classes != train_set.manifest.classes) {
    throw InputError("train and val manifests list different classes");
  }

  const ModelConfig mc = model_config(run, train_set.num_classes());
  const TrainConfig tc = train_config(run);
  ActionModel model(mc);
  std::seed_seq init_seq{tc.seed, std::uint64_t{1}};
  Rng init_rng(init_seq);
  model.init(init_rng);

  std::optional<Checkpoint> resume;
  if (const std::string r = run.get_string("paths.resume"); !r.empty()) {
    resume = load_checkpoint(r);
  }
  FitOptions opts;
  opts.out_dir = dir;
  opts.resume = resume ? &*resume : nullptr;
  opts.on_epoch = [&](const LogRow& row) {
    out << "epoch " << row.epoch << " lr " << row.lr << " train_loss " << row.train_loss
        << " val_loss " << row.val_loss << " val_acc " << row.val_acc << std::endl;
  };
  const FitResult result = fit(model, train_set, val_set, tc, opts);
  out << "trained " << result.log.size() << " epochs; checkpoints in " << dir.string() << "\n";
  return kExitOk;
}

int eval(const RunConfig& run, std::ostream& out) {
  const fs::path ckpt_path = required_path(run, "paths.checkpoint", "--checkpoint");
  const fs::path data_dir = required_path(run, "paths.data", "--data");
  const fs::path dir = prepare_out(run);
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const ActionModel model = model_from_checkpoint(ckpt);
  std::size_t window = 0;
  try {
    window = ckpt.trailer.at("config").at("train").at("window").get<std::size_t>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError("checkpoint " + ckpt_path.string() + " has no train window in its config");
  }
  const Dataset data = load_split(data_dir, run.get_string("eval.split"));
  if (data.num_classes() != model.config().num_classes) {
    throw InputError("dataset has " + std::to_string(data.num_classes()) +
                     " classes, checkpoint has " + std::to_string(model.config().num_classes));
  }
  const Metrics m = evaluate(model, data, window);
  emit_report(m, dir);
  out << "samples " << m.samples << " top1 " << m.top1 << " top5 " << m.top5 << "\n";
  for (std::size_t k = 0; k < m.classes.size(); ++k) {
    out << "  " << m.classes[k] << " " << m.per_class[k] << "\n";
  }
  return kExitOk;
}

int gradcheck(const RunConfig& run, std::ostream& out) {
  if (run.profile() != Profile::kDesk) {
    throw UsageError("gradcheck runs only with --profile desk");
  }
  const GradcheckConfig cfg = gradcheck_config(run);
  const GradcheckReport report = gradient_check(cfg);
  out << std::setprecision(6);
  for (const auto& p : report.parameters) {
    out << std::left << std::setw(44) << p.name << " entries " << std::setw(5) << p.entries
        << " max_rel " << p.max_rel_error << "\n";
  }
  const double tolerance = run.get_double("gradcheck.tolerance");
  out << "parameters " << report.entries << "\n";
  out << "max_rel_error " << report.max_rel_error << "\n";
  if (!run.get_string("paths.out").empty()) {
    const fs::path dir = prepare_out(run);
    nlohmann::json j = {{"max_rel_error", report.max_rel_error},
                        {"entries", report.entries},
                        {"tolerance", tolerance}};
    for (const auto& p : report.parameters) j["parameters"][p.name] = p.max_rel_error;
    write_file(dir / "gradcheck.json", j.dump(2) + "\n");
  }
  if (!(report.max_rel_error <= tolerance)) {
    throw NumericError("max relative error exceeds tolerance " + std::to_string(tolerance));
  }
  return kExitOk;
}

int inspect(const std::string& path, std::ostream& out) {
  const FeatureClip clip = read_feature_clip(path);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sum = 0.0;
  double sq = 0.0;
  std::size_t nonfinite = 0;
  for (float f : clip.frames) {
    const double v = f;
    if (!std::isfinite(v)) {
      ++nonfinite;
      continue;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(clip.frames.size() - nonfinite);
  const double mean = n > 0 ? sum / n : 0.0;
  const double var = n > 0 ? std::max(0.0, sq / n - mean * mean) : 0.0;
  out << "file " << path << "\n"
      << "kind " << (clip.pixels ? "pixels" : "features") << "\n"
      << "shape [" << clip.num_frames << ", " << clip.channels << ", " << clip.height << ", "
      << clip.width << "]\n"
      << "label " << clip.label << "\n"
      << std::setprecision(6) << "min " << (n > 0 ? lo : 0.0) << "\n"
      << "max " << (n > 0 ? hi : 0.0) << "\n"
      << "mean " << mean << "\n"
      << "std " << std::sqrt(var) << "\n"
      << "nonfinite " << nonfinite << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Predictive-coding action recognition engine", "pcn"};
  app.require_subcommand(1, 1);

  CommonFlags gen_flags, train_flags, eval_flags, grad_flags;

  CLI::App* gen_cmd = app.add_subcommand("gen-data", "write a MovingShapes dataset");
  add_common(gen_cmd, gen_flags);
  gen_flags.add_named(gen_cmd, "--out", "paths.out", "output directory");
  gen_flags.add_named(gen_cmd, "--classes", "data.classes", "class count");
  gen_flags.add_named(gen_cmd, "--clips", "data.clips", "train clips per class");
  gen_flags.add_named(gen_cmd, "--val-clips", "data.val_clips", "validation clips per class");
  gen_flags.add_named(gen_cmd, "--test-clips", "data.test_clips", "test clips per class");

  CLI::App* train_cmd = app.add_subcommand("train", "fit a model on <data>/train.json");
  add_common(train_cmd, train_flags);
  train_flags.add_named(train_cmd, "--data", "paths.data", "dataset directory");
  train_flags.add_named(train_cmd, "--out", "paths.out", "output directory");
  train_flags.add_named(train_cmd, "--epochs", "train.epochs", "epochs");
  train_flags.add_named(train_cmd, "--resume", "paths.resume", "checkpoint to resume");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint and write reports");
  add_common(eval_cmd, eval_flags);
  eval_flags.add_named(eval_cmd, "--checkpoint", "paths.checkpoint", "checkpoint file");
  eval_flags.add_named(eval_cmd, "--data", "paths.data", "dataset directory");
  eval_flags.add_named(eval_cmd, "--split", "eval.split", "manifest name");
  eval_flags.add_named(eval_cmd, "--out", "paths.out", "report directory");

  CLI::App* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of the full model");
  add_common(grad_cmd, grad_flags);
  grad_flags.add_named(grad_cmd, "--out", "paths.out", "optional report directory");

  CLI::App* inspect_cmd = app.add_subcommand("inspect", "print a feature file's header and stats");
  std::string inspect_path;
  inspect_cmd->add_option("file", inspect_path, "PCFV file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  try {
    if (cmd == inspect_cmd) return inspect(inspect_path, out);
    CommonFlags& flags = cmd == gen_cmd     ? gen_flags
                         : cmd == train_cmd ? train_flags
                         : cmd == eval_cmd  ? eval_flags
                                            : grad_flags;
    const RunConfig run = resolve(flags, cmd->remaining());
    if (cmd == gen_cmd) return gen_data(run, out);
    if (cmd == train_cmd) return train(run, out);
    if (cmd == eval_cmd) return eval(run, out);
    return gradcheck(run, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << cmd->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace pcn::cli
