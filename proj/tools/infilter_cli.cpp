// Copyright 2026 The infilter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "infilter/harness.hpp"
#include "infilter/memimage.hpp"
#include "infilter/serialize.hpp"
#include "infilter/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace infilter;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string mode;
  std::string out = "out";
  std::string manifest;
};

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed_set) cfg.seed = c.seed;
  if (!c.mode.empty()) cfg.mode = parse_mode(c.mode);
  if (!c.manifest.empty()) cfg.manifest = c.manifest;
  cfg.validate();
  return cfg;
}

DatasetManifest need_manifest(const ExperimentConfig& cfg) {
  if (cfg.manifest.empty()) throw InputError("no manifest given (--manifest or config 'manifest')");
  return read_manifest(cfg.manifest);
}

// Writes text under --out as <stem>-<content hash>.<ext> and reports it.
std::string emit(const Common& c, const std::string& stem, const std::string& ext, const std::string& text) {
  fs::create_directories(c.out);
  const auto path = (fs::path(c.out) / (stem + "-" + hash_hex(content_hash(text)) + "." + ext)).string();
  write_text_file(path, text);
  std::cout << json{{"artifact", path}}.dump() << "\n";
  return path;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string::npos ? s.size() : comma;
    if (end > start) out.push_back(s.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void add_common(CLI::App* sub, Common& c, bool with_manifest) {
  sub->add_option("--config", c.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  sub->add_option_function<std::uint64_t>(
      "--seed", [&c](const std::uint64_t& v) { c.seed = v, c.seed_set = true; }, "root seed (u64)");
  sub->add_option("--mode", c.mode, "float or fixed")->check(CLI::IsMember({"float", "fixed"}));
  sub->add_option("--out", c.out, "artifact directory");
  if (with_manifest) sub->add_option("--manifest", c.manifest, "dataset manifest (JSON lines)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"infilter: cochlear filter-bank features and template SVMs"};
  app.require_subcommand(1);
  Common c;

  auto* design = app.add_subcommand("design", "design a filter bank from the config");
  add_common(design, c, false);
  int channels = 0;
  design->add_option("-P,--channels", channels, "override channel count");

  auto* featurize = app.add_subcommand("featurize", "window accumulations for a manifest");
  add_common(featurize, c, true);
  std::string bank_file;
  featurize->add_option("--bank", bank_file, "filter bank JSON (default: design from config)");

  auto* train = app.add_subcommand("train", "fit a template model from a feature table");
  add_common(train, c, false);
  std::string features_file;
  double C = 0.0;
  train->add_option("--features", features_file, "feature table")->required()->check(CLI::ExistingFile);
  train->add_option("--C", C, "fixed C (default: cross-validate the config grid)");

  auto* eval = app.add_subcommand("eval", "score a model on a manifest");
  add_common(eval, c, true);
  std::string model_file;
  eval->add_option("--model", model_file, "model JSON")->required()->check(CLI::ExistingFile);

  auto* exportm = app.add_subcommand("export-mem", "quantize a model and write memory images");
  add_common(exportm, c, false);
  exportm->add_option("--model", model_file, "model JSON")->required()->check(CLI::ExistingFile);

  auto* sweepf = app.add_subcommand("sweep-filters", "accuracy versus channel count");
  add_common(sweepf, c, true);
  std::string p_list = "10,20,30,40,50,60";
  sweepf->add_option("--P", p_list, "comma-separated channel counts, ascending");

  auto* sweeps = app.add_subcommand("sweep-snr", "accuracy versus test SNR");
  add_common(sweeps, c, true);
  std::string snr_list = "0,5,10,15,20,30";
  bool augment = false;
  int repeats = 10;
  sweeps->add_option("--snr", snr_list, "comma-separated SNR values in dB");
  sweeps->add_flag("--augment", augment, "add matched-SNR noisy copies to training");
  sweeps->add_option("--repeats", repeats, "noise seeds per SNR")->check(CLI::PositiveNumber);

  auto* cmp = app.add_subcommand("compare-baseline", "template versus conventional dual SVM");
  add_common(cmp, c, true);
  std::string kernel = "linear";
  double gamma = 0.0;
  cmp->add_option("--C", C, "C for both models (default: cross-validate)");
  cmp->add_option("--kernel", kernel, "baseline kernel")->check(CLI::IsMember({"linear", "rbf"}));
  cmp->add_option("--gamma", gamma, "rbf bandwidth (default 1/P)");

  auto* mk = app.add_subcommand("manifest", "build a one-vs-rest manifest from a corpus directory");
  add_common(mk, c, false);
  std::string root, target;
  double train_frac = 0.8;
  mk->add_option("--root", root, "corpus root")->required();
  mk->add_option("--target", target, "positive class")->required();
  mk->add_option("--train-frac", train_frac, "training fraction");

  auto* syn = app.add_subcommand("synth", "write a synthetic FSDD-style corpus");
  add_common(syn, c, false);
  SynthConfig scfg;
  syn->add_option("--speakers", scfg.speakers);
  syn->add_option("--per-digit", scfg.per_digit);
  std::string synth_dir;
  syn->add_option("--dir", synth_dir, "corpus directory (default: <out>/corpus)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  }

  try {
    if (design->parsed()) {
      auto cfg = resolve(c);
      if (channels > 0) cfg.cochlea.num_channels = channels;
      emit(c, "bank", "json", filterbank_to_json(design_filterbank(cfg.cochlea)).dump(2) + "\n");
    } else if (featurize->parsed()) {
      const auto cfg = resolve(c);
      const auto bank = bank_file.empty() ? design_filterbank(cfg.cochlea)
                                          : filterbank_from_json(read_json_file(bank_file));
      const auto table = featurize_manifest(need_manifest(cfg), bank, cfg.mode, cfg);
      emit(c, "features", "json", feature_table_to_json(table).dump() + "\n");
    } else if (train->parsed()) {
      auto cfg = resolve(c);
      if (C > 0.0) cfg.C_grid = {C};
      const auto table = feature_table_from_json(read_json_file(features_file));
      const auto model = train_from_table(table, cfg);
      auto j = model_to_json(model);
      j["solver_report"].erase("wall_seconds");  // keeps the artifact byte-reproducible
      emit(c, "model", "json", j.dump(2) + "\n");
      std::cout << json{{"train_accuracy", model.train_accuracy}, {"C", model.C},
                        {"solver_seconds", model.report.wall_seconds}}
                       .dump()
                << "\n";
    } else if (eval->parsed()) {
      const auto cfg = resolve(c);
      const auto model = model_from_json(read_json_file(model_file));
      const auto report = evaluate(model, need_manifest(cfg), cfg);
      auto j = eval_report_to_json(report);
      j.erase("runtime_seconds");  // keeps the artifact byte-reproducible
      emit(c, "report", "json", j.dump(2) + "\n");
      std::cout << json{{"train_accuracy", report.train_accuracy}, {"test_accuracy", report.test_accuracy},
                        {"runtime_seconds", report.runtime_seconds}}
                       .dump()
                << "\n";
    } else if (exportm->parsed()) {
      const auto cfg = resolve(c);
      const auto model = model_from_json(read_json_file(model_file));
      const auto q = quantize_model(model, cfg.formats);
      const auto dir = fs::path(c.out) / ("mem-" + hash_hex(content_hash(formats_json(q) + model_to_json(model).dump())));
      fs::create_directories(dir);
      for (const auto& p : export_mem(q, dir.string() + "/")) std::cout << json{{"artifact", p}}.dump() << "\n";
      for (const auto& name : q.diagnostics.saturated) std::cerr << json{{"warning", "saturated"}, {"param", name}}.dump() << "\n";
    } else if (sweepf->parsed()) {
      const auto cfg = resolve(c);
      std::vector<int> Ps;
      for (const auto& s : split_csv(p_list)) Ps.push_back(std::stoi(s));
      emit(c, "sweep-filters", "csv", filter_sweep_csv(sweep_filters(need_manifest(cfg), cfg, Ps)));
    } else if (sweeps->parsed()) {
      const auto cfg = resolve(c);
      std::vector<double> snrs;
      for (const auto& s : split_csv(snr_list)) snrs.push_back(std::stod(s));
      emit(c, "sweep-snr", "csv", snr_sweep_csv(sweep_snr(need_manifest(cfg), cfg, snrs, augment, repeats)));
    } else if (cmp->parsed()) {
      const auto cfg = resolve(c);
      KernelSpec ks{kernel == "rbf" ? KernelKind::kRbf : KernelKind::kLinear, gamma};
      emit(c, "compare-baseline", "csv", baseline_csv({compare_baseline(need_manifest(cfg), cfg, C, ks)}));
    } else if (mk->parsed()) {
      const auto cfg = resolve(c);
      emit(c, "manifest", "jsonl", render_manifest(build_manifest(root, target, cfg.seed, train_frac)));
    } else if (syn->parsed()) {
      const auto cfg = resolve(c);
      scfg.seed = cfg.seed;
      const auto dir = synth_dir.empty() ? (fs::path(c.out) / "corpus").string() : synth_dir;
      fs::create_directories(dir);
      const int n = write_synth_corpus(dir, scfg);
      std::cout << json{{"artifact", dir}, {"clips", n}}.dump() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 3;
  }
  return 0;
}
