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

#include "infilter/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "infilter/random.hpp"
#include "infilter/serialize.hpp"

namespace infilter {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt_acc(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string bank_id(const FilterBank& bank) { return hash_hex(content_hash(filterbank_to_json(bank).dump())); }

std::uint64_t path_seed(std::uint64_t seed, const std::string& path) {
  return derive_seed(seed, content_hash(path));
}

TrainingSet make_set(const Eigen::MatrixXd& F, const PreparedSplit& split) {
  return TrainingSet{F, split.window_labels()};
}

Confusion tally(const PreparedSplit& split, const std::vector<double>& window_decisions) {
  std::vector<std::vector<double>> per_clip(split.num_clips());
  for (std::size_t w = 0; w < window_decisions.size(); ++w) {
    per_clip[static_cast<std::size_t>(split.clip_of_window[w])].push_back(window_decisions[w]);
  }
  Confusion c;
  for (std::size_t i = 0; i < per_clip.size(); ++i) {
    const int pred = vote(per_clip[i]);
    const int truth = split.clip_labels[i];
    if (truth > 0) {
      (pred > 0 ? c.tp : c.fn)++;
    } else {
      (pred > 0 ? c.fp : c.tn)++;
    }
  }
  return c;
}

struct LoadedManifest {
  PreparedSplit train, test;
  std::vector<Clip> train_clips, test_clips;
};

LoadedManifest load_both(const DatasetManifest& m, const ExperimentConfig& cfg) {
  LoadedManifest out;
  out.train_clips = load_clips(m, "train", cfg);
  out.test_clips = load_clips(m, "test", cfg);
  out.train = prepare_split(out.train_clips, cfg);
  out.test = prepare_split(out.test_clips, cfg);
  return out;
}

std::unique_ptr<FeatureCache> make_cache(const ExperimentConfig& cfg) {
  if (cfg.cache_dir.empty()) return nullptr;
  return std::make_unique<FeatureCache>(cfg.cache_dir);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

Mode parse_mode(const std::string& s) {
  if (s == "float") return Mode::kFloat;
  if (s == "fixed") return Mode::kFixed;
  throw InputError("mode must be 'float' or 'fixed', got '" + s + "'");
}

std::string mode_name(Mode m) { return m == Mode::kFloat ? "float" : "fixed"; }

void ExperimentConfig::validate() const {
  cochlea.validate();
  formats.validate();
  if (C_grid.empty()) throw InputError("config: C grid is empty");
  for (double c : C_grid) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InputError("config: C values must be positive and finite");
  }
  if (cv_folds < 2) throw InputError("config: cv_folds must be >= 2");
  if (!sweep_axis.empty()) {
    if (sweep_axis != "P" && sweep_axis != "snr_db") throw InputError("config: sweep axis must be P or snr_db");
    if (sweep_values.empty()) throw InputError("config: sweep values are empty");
  }
  if (!manifest.empty() && !std::filesystem::exists(manifest)) throw IoError(manifest, "manifest not found");
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["version"] = 1;
  j["cochlea"] = cochlea_config_to_json(c.cochlea);
  j["C_grid"] = c.C_grid;
  j["cv_folds"] = c.cv_folds;
  j["seed"] = c.seed;
  j["manifest"] = c.manifest;
  j["mode"] = mode_name(c.mode);
  j["sweep"] = {{"axis", c.sweep_axis}, {"values", c.sweep_values}};
  j["trim"] = {{"threshold_db", c.trim_db}, {"window_ms", c.trim_window_ms}};
  j["formats"] = datapath_formats_to_json(c.formats);
  j["solver"] = {{"tol", c.solver.tol}, {"max_iterations", c.solver.max_iterations}};
  j["cache_dir"] = c.cache_dir;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("cochlea")) {
      // Partial cochlea blocks override the defaults key by key.
      json full = cochlea_config_to_json(c.cochlea);
      for (const auto& [key, value] : j.at("cochlea").items()) {
        if (!full.contains(key)) throw FormatError("config: unknown cochlea key '" + key + "'");
      }
      full.update(j.at("cochlea"));
      c.cochlea = cochlea_config_from_json(full);
    }
    if (j.contains("C_grid")) c.C_grid = j.at("C_grid").get<std::vector<double>>();
    c.cv_folds = j.value("cv_folds", c.cv_folds);
    c.seed = j.value("seed", c.seed);
    c.manifest = j.value("manifest", c.manifest);
    if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("sweep")) {
      c.sweep_axis = j.at("sweep").value("axis", std::string{});
      c.sweep_values = j.at("sweep").value("values", std::vector<double>{});
    }
    if (j.contains("trim")) {
      c.trim_db = j.at("trim").value("threshold_db", c.trim_db);
      c.trim_window_ms = j.at("trim").value("window_ms", c.trim_window_ms);
    }
    if (j.contains("formats")) c.formats = datapath_formats_from_json(j.at("formats"));
    if (j.contains("solver")) {
      c.solver.tol = j.at("solver").value("tol", c.solver.tol);
      c.solver.max_iterations = j.at("solver").value("max_iterations", c.solver.max_iterations);
    }
    c.cache_dir = j.value("cache_dir", c.cache_dir);
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

Eigen::VectorXd PreparedSplit::window_labels() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(clip_of_window.size()));
  for (std::size_t w = 0; w < clip_of_window.size(); ++w) {
    y(static_cast<Eigen::Index>(w)) = clip_labels[static_cast<std::size_t>(clip_of_window[w])];
  }
  return y;
}

std::vector<Clip> load_clips(const DatasetManifest& m, const std::string& split, const ExperimentConfig& cfg) {
  const auto entries = m.split(split);
  const int rate = static_cast<int>(std::lround(cfg.cochlea.sample_rate));
  std::vector<Clip> clips(entries.size());
  std::vector<std::string> errors(entries.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < entries.size(); ++i) {
    try {
      Clip c = read_wav(m.resolve(entries[i]));
      c = trim_silence(resample_linear(c, rate), cfg.trim_db, cfg.trim_window_ms);
      c.label = entries[i].label > 0 ? "+1" : "-1";
      c.source = entries[i].path;
      clips[i] = std::move(c);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw IoError(m.root, e);
  }
  return clips;
}

PreparedSplit prepare_split(const std::vector<Clip>& clips, const ExperimentConfig& cfg,
                            const std::optional<NoiseSpec>& noise) {
  const auto W = static_cast<std::size_t>(cfg.cochlea.window_len);
  std::vector<std::vector<kernels::Window>> framed(clips.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (noise) {
      framed[i] = frame_fixed(add_awgn(clips[i], noise->snr_db, path_seed(noise->seed, clips[i].source)), W);
    } else {
      framed[i] = frame_fixed(clips[i], W);
    }
  }
  PreparedSplit out;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    out.clip_paths.push_back(clips[i].source);
    out.clip_labels.push_back(clips[i].label == "+1" ? 1 : -1);
    for (auto& w : framed[i]) {
      out.windows.push_back(std::move(w));
      out.clip_of_window.push_back(static_cast<int>(i));
    }
  }
  return out;
}

std::string FeatureCache::key(const std::string& bank, const std::vector<kernels::Window>& windows, Mode mode) const {
  std::uint64_t h = content_hash(bank);
  h = content_hash(mode_name(mode), h);
  for (const auto& w : windows) {
    h = content_hash(std::string_view(reinterpret_cast<const char*>(w.data()), w.size() * sizeof(std::int16_t)), h);
  }
  return hash_hex(h);
}

std::optional<Eigen::MatrixXd> FeatureCache::load(const std::string& key) const {
  std::ifstream in(std::filesystem::path(dir_) / (key + ".feat"), std::ios::binary);
  if (!in) return std::nullopt;
  std::int64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || rows < 0 || cols < 0) return std::nullopt;
  Eigen::MatrixXd m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * rows * cols));
  if (!in) return std::nullopt;
  return m;
}

void FeatureCache::store(const std::string& key, const Eigen::MatrixXd& rows) const {
  std::filesystem::create_directories(dir_);
  const auto final_path = std::filesystem::path(dir_) / (key + ".feat");
  const auto tmp = final_path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp, "cannot open cache file");
    const std::int64_t r = rows.rows(), c = rows.cols();
    out.write(reinterpret_cast<const char*>(&r), sizeof r);
    out.write(reinterpret_cast<const char*>(&c), sizeof c);
    out.write(reinterpret_cast<const char*>(rows.data()), static_cast<std::streamsize>(sizeof(double) * r * c));
    if (!out) throw IoError(tmp, "cache write failed");
  }
  std::filesystem::rename(tmp, final_path);
}

Eigen::MatrixXd accumulate_split(const PreparedSplit& split, const FilterBank& bank, Mode mode,
                                 const DatapathFormats& fmts, const FeatureCache* cache, DatapathStats* stats) {
  std::string key;
  const bool use_cache = cache != nullptr && cache->enabled() && stats == nullptr;
  if (use_cache) {
    key = cache->key(bank_id(bank) + (mode == Mode::kFixed ? datapath_formats_to_json(fmts).dump() : ""),
                     split.windows, mode);
    if (auto hit = cache->load(key)) return *hit;
  }
  Eigen::MatrixXd out;
  if (mode == Mode::kFloat) {
    out = kernels::accumulate_batch_parallel(bank, split.windows);
  } else {
    const auto qbank = quantize_bank(bank, fmts);
    auto batch = kernels::fx_accumulate_batch_parallel(qbank, split.windows);
    const double lsb = fmts.accumulator.lsb();
    out.resize(static_cast<Eigen::Index>(batch.accum.size()), static_cast<Eigen::Index>(bank.size()));
    for (std::size_t w = 0; w < batch.accum.size(); ++w) {
      for (std::size_t p = 0; p < bank.size(); ++p) {
        out(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(p)) = static_cast<double>(batch.accum[w][p]) * lsb;
      }
    }
    if (stats) *stats = batch.stats;
  }
  if (use_cache) cache->store(key, out);
  return out;
}

FeatureTable featurize_manifest(const DatasetManifest& m, const FilterBank& bank, Mode mode,
                                const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.cochlea = bank.config();
  auto data = load_both(m, cfg);
  const auto cache = make_cache(cfg);
  FeatureTable t{bank, mode, {}, {}, {}, {}};
  t.train_accum = accumulate_split(data.train, bank, mode, cfg.formats, cache.get());
  t.test_accum = accumulate_split(data.test, bank, mode, cfg.formats, cache.get());
  t.train = std::move(data.train);
  t.test = std::move(data.test);
  return t;
}

namespace {

json split_to_json(const PreparedSplit& s, const Eigen::MatrixXd& accum) {
  json clips = json::array();
  for (std::size_t i = 0; i < s.num_clips(); ++i) clips.push_back({{"path", s.clip_paths[i]}, {"label", s.clip_labels[i]}});
  json windows = json::array();
  for (std::size_t w = 0; w < s.clip_of_window.size(); ++w) {
    json row = json::array();
    for (Eigen::Index p = 0; p < accum.cols(); ++p) row.push_back(real_to_string(accum(static_cast<Eigen::Index>(w), p)));
    windows.push_back({{"clip", s.clip_of_window[w]}, {"accum", std::move(row)}});
  }
  return {{"clips", std::move(clips)}, {"windows", std::move(windows)}};
}

void split_from_json(const json& j, std::size_t P, PreparedSplit& s, Eigen::MatrixXd& accum) {
  for (const auto& c : j.at("clips")) {
    s.clip_paths.push_back(c.at("path").get<std::string>());
    s.clip_labels.push_back(c.at("label").get<int>());
  }
  const auto& windows = j.at("windows");
  accum.resize(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(P));
  Eigen::Index w = 0;
  for (const auto& row : windows) {
    const int clip = row.at("clip").get<int>();
    if (clip < 0 || static_cast<std::size_t>(clip) >= s.num_clips()) throw FormatError("features: window refers to a missing clip");
    s.clip_of_window.push_back(clip);
    const auto& a = row.at("accum");
    if (a.size() != P) throw FormatError("features: row width disagrees with the filter bank");
    for (std::size_t p = 0; p < P; ++p) accum(w, static_cast<Eigen::Index>(p)) = real_from_json(a[p]);
    ++w;
  }
}

}  // namespace

json feature_table_to_json(const FeatureTable& t) {
  json j;
  j["version"] = 1;
  j["mode"] = mode_name(t.mode);
  j["filterbank"] = filterbank_to_json(t.bank);
  j["train"] = split_to_json(t.train, t.train_accum);
  j["test"] = split_to_json(t.test, t.test_accum);
  return j;
}

FeatureTable feature_table_from_json(const json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw FormatError("features: unsupported version");
    FeatureTable t{filterbank_from_json(j.at("filterbank")), parse_mode(j.at("mode").get<std::string>()), {}, {}, {}, {}};
    split_from_json(j.at("train"), t.bank.size(), t.train, t.train_accum);
    split_from_json(j.at("test"), t.bank.size(), t.test, t.test_accum);
    return t;
  } catch (const json::exception& e) {
    throw FormatError(std::string("features: ") + e.what());
  }
}

TemplateModel train_from_table(const FeatureTable& t, const ExperimentConfig& cfg, CvResult* cv) {
  if (t.train_accum.rows() == 0) throw InputError("train: feature table has no training windows");
  return fit_model(t.train_accum, t.train, t.bank, cfg, cv);
}

double Confusion::accuracy() const {
  return total() == 0 ? 0.0 : 100.0 * static_cast<double>(tp + tn) / static_cast<double>(total());
}

int vote(std::span<const double> d) {
  long votes = 0;
  double sum = 0.0;
  for (double f : d) {
    votes += sign_label(f);
    sum += f;
  }
  if (votes != 0) return votes > 0 ? 1 : -1;
  return sign_label(sum);
}

SplitScore score_float(const TemplateModel& model, const Eigen::MatrixXd& accum, const PreparedSplit& split) {
  const Eigen::MatrixXd F = model.standardizer.apply(accum);
  SplitScore s;
  s.window_decisions.resize(static_cast<std::size_t>(F.rows()));
  for (Eigen::Index w = 0; w < F.rows(); ++w) {
    const Eigen::VectorXd row = F.row(w).transpose();
    s.window_decisions[static_cast<std::size_t>(w)] = decision(std::span(row.data(), static_cast<std::size_t>(row.size())), model);
  }
  s.confusion = tally(split, s.window_decisions);
  return s;
}

SplitScore score_fixed(const QuantizedModel& model, const PreparedSplit& split, DatapathStats* stats) {
  auto batch = kernels::fx_accumulate_batch_parallel(model.bank, split.windows);
  SplitScore s;
  s.window_decisions.resize(batch.accum.size());
  DatapathStats total = batch.stats;
  for (std::size_t w = 0; w < batch.accum.size(); ++w) {
    const auto fv = fx_standardize(std::move(batch.accum[w]), model.standardizer, model.formats());
    total.mid_saturations += fv.stats.mid_saturations;
    total.output_saturations += fv.stats.output_saturations;
    s.window_decisions[w] = static_cast<double>(fx_decision(fv.phi, model));
  }
  if (stats) *stats = total;
  s.confusion = tally(split, s.window_decisions);
  return s;
}

TemplateModel fit_model(const Eigen::MatrixXd& train_accum, const PreparedSplit& train, const FilterBank& bank,
                        const ExperimentConfig& cfg, CvResult* cv) {
  Standardizer st = fit_standardizer(train_accum);
  const TrainingSet data = make_set(st.apply(train_accum), train);
  double C = cfg.C_grid.front();
  if (cfg.C_grid.size() > 1) {
    auto res = cross_validate(data, cfg.C_grid, cfg.cv_folds, derive_seed(cfg.seed, 0xc5), cfg.solver);
    C = res.best_C;
    if (cv) *cv = std::move(res);
  }
  auto fit = train_template(data, C, cfg.solver);
  TemplateModel model = std::move(fit.model);
  model.C = C;
  model.standardizer = std::move(st);
  model.bank = bank;
  model.report = fit.report;
  model.train_accuracy = score_float(model, train_accum, train).confusion.accuracy();
  return model;
}

json eval_report_to_json(const EvalReport& r) {
  auto conf = [](const Confusion& c) { return json{{"tp", c.tp}, {"fn", c.fn}, {"fp", c.fp}, {"tn", c.tn}}; };
  json j;
  j["version"] = 1;
  j["mode"] = r.mode;
  j["train_accuracy"] = r.train_accuracy;
  j["test_accuracy"] = r.test_accuracy;
  j["train_confusion"] = conf(r.train_confusion);
  j["test_confusion"] = conf(r.test_confusion);
  j["num_templates"] = r.num_templates;
  j["macs_per_decision"] = r.macs_per_decision;
  j["solver_report"] = solver_report_to_json(r.solver);
  j["C"] = r.C;
  j["runtime_seconds"] = r.runtime_seconds;
  if (r.window_agreement >= 0.0) j["window_agreement"] = r.window_agreement;
  j["saturations"] = r.saturations;
  return j;
}

namespace {

EvalReport evaluate_prepared(const TemplateModel& model, const LoadedManifest& data, const ExperimentConfig& cfg,
                             const Eigen::MatrixXd& train_accum, const Eigen::MatrixXd& test_accum) {
  EvalReport r;
  r.mode = mode_name(cfg.mode);
  r.num_templates = model.dim();
  r.solver = model.report;
  r.C = model.C;
  {
    MacCounter mc;
    std::vector<double> zero(model.dim(), 0.0);
    decision(zero, model, &mc);
    r.macs_per_decision = mc.macs;
  }
  const auto train_f = score_float(model, train_accum, data.train);
  const auto test_f = score_float(model, test_accum, data.test);
  if (cfg.mode == Mode::kFloat) {
    r.train_confusion = train_f.confusion;
    r.test_confusion = test_f.confusion;
  } else {
    const auto qm = quantize_model(model, cfg.formats);
    DatapathStats s1, s2;
    const auto train_q = score_fixed(qm, data.train, &s1);
    const auto test_q = score_fixed(qm, data.test, &s2);
    r.train_confusion = train_q.confusion;
    r.test_confusion = test_q.confusion;
    r.saturations = s1.total() + s2.total();
    std::size_t agree = 0;
    for (std::size_t w = 0; w < test_q.window_decisions.size(); ++w) {
      agree += sign_label(test_q.window_decisions[w]) == sign_label(test_f.window_decisions[w]);
    }
    r.window_agreement = test_q.window_decisions.empty()
                             ? 100.0
                             : 100.0 * static_cast<double>(agree) / static_cast<double>(test_q.window_decisions.size());
    MacCounter mc;
    std::vector<std::int64_t> zero(model.dim(), 0);
    fx_decision(zero, qm, &mc);
    r.macs_per_decision = mc.macs;
  }
  r.train_accuracy = r.train_confusion.accuracy();
  r.test_accuracy = r.test_confusion.accuracy();
  return r;
}

}  // namespace

EvalReport evaluate(const TemplateModel& model, const DatasetManifest& m, const ExperimentConfig& cfg_in) {
  if (!model.bank) throw InputError("evaluate: model carries no filter bank");
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = cfg_in;
  cfg.cochlea = model.bank->config();
  const auto data = load_both(m, cfg);
  const auto cache = make_cache(cfg);
  const auto train_accum = accumulate_split(data.train, *model.bank, Mode::kFloat, cfg.formats, cache.get());
  const auto test_accum = accumulate_split(data.test, *model.bank, Mode::kFloat, cfg.formats, cache.get());
  auto r = evaluate_prepared(model, data, cfg, train_accum, test_accum);
  r.runtime_seconds = seconds_since(t0);
  return r;
}

ExperimentResult run_experiment(const DatasetManifest& m, const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto bank = design_filterbank(cfg.cochlea);
  const auto data = load_both(m, cfg);
  const auto cache = make_cache(cfg);
  const auto train_accum = accumulate_split(data.train, bank, Mode::kFloat, cfg.formats, cache.get());
  const auto test_accum = accumulate_split(data.test, bank, Mode::kFloat, cfg.formats, cache.get());
  ExperimentResult out{fit_model(train_accum, data.train, bank, cfg), {}};
  out.report = evaluate_prepared(out.model, data, cfg, train_accum, test_accum);
  out.report.runtime_seconds = seconds_since(t0);
  return out;
}

std::vector<FilterSweepRow> sweep_filters(const DatasetManifest& m, const ExperimentConfig& cfg,
                                          const std::vector<int>& P_values) {
  if (P_values.empty()) throw InputError("sweep_filters: no P values");
  if (!std::is_sorted(P_values.begin(), P_values.end())) throw InputError("sweep_filters: P values must ascend");
  const auto data = load_both(m, cfg);
  const auto cache = make_cache(cfg);
  std::vector<FilterSweepRow> rows;
  for (int P : P_values) {
    FilterSweepRow row;
    row.P = P;
    try {
      ExperimentConfig c = cfg;
      c.cochlea.num_channels = P;
      const auto bank = design_filterbank(c.cochlea);
      const auto train_accum = accumulate_split(data.train, bank, Mode::kFloat, c.formats, cache.get());
      const auto test_accum = accumulate_split(data.test, bank, Mode::kFloat, c.formats, cache.get());
      const auto model = fit_model(train_accum, data.train, bank, c);
      row.train_acc = model.train_accuracy;
      row.test_acc = score_float(model, test_accum, data.test).confusion.accuracy();
      row.status = "ok";
    } catch (const std::exception& e) {
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string filter_sweep_csv(const std::vector<FilterSweepRow>& rows) {
  std::ostringstream os;
  os << "P,train_acc,test_acc,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    os << r.P << ',' << fmt_acc(r.train_acc) << ',' << fmt_acc(r.test_acc) << ',' << status << '\n';
  }
  return os.str();
}

std::vector<SnrSweepRow> sweep_snr(const DatasetManifest& m, const ExperimentConfig& cfg,
                                   const std::vector<double>& snr_values, bool augment, int repeats) {
  if (repeats < 1) throw InputError("sweep_snr: repeats must be >= 1");
  if (snr_values.empty()) throw InputError("sweep_snr: no SNR values");
  const auto bank = design_filterbank(cfg.cochlea);
  const auto data = load_both(m, cfg);
  const auto cache = make_cache(cfg);
  const auto clean_accum = accumulate_split(data.train, bank, Mode::kFloat, cfg.formats, cache.get());
  const auto clean_model = fit_model(clean_accum, data.train, bank, cfg);
  ExperimentConfig fixed_c = cfg;
  fixed_c.C_grid = {clean_model.C};

  std::vector<SnrSweepRow> rows;
  for (std::size_t i = 0; i < snr_values.size(); ++i) {
    std::vector<double> acc;
    for (int rep = 0; rep < repeats; ++rep) {
      const std::uint64_t s = derive_seed(derive_seed(cfg.seed, 0x5a + i), static_cast<std::uint64_t>(rep));
      const auto test = prepare_split(data.test_clips, cfg, NoiseSpec{snr_values[i], derive_seed(s, 0)});
      const auto test_accum = accumulate_split(test, bank, Mode::kFloat, cfg.formats);
      if (augment) {
        // Training set is the clean windows plus one noisy copy of each.
        const auto noisy = prepare_split(data.train_clips, cfg, NoiseSpec{snr_values[i], derive_seed(s, 1)});
        PreparedSplit both = data.train;
        const int offset = static_cast<int>(both.num_clips());
        both.clip_paths.insert(both.clip_paths.end(), noisy.clip_paths.begin(), noisy.clip_paths.end());
        both.clip_labels.insert(both.clip_labels.end(), noisy.clip_labels.begin(), noisy.clip_labels.end());
        both.windows.insert(both.windows.end(), noisy.windows.begin(), noisy.windows.end());
        for (int c : noisy.clip_of_window) both.clip_of_window.push_back(c + offset);
        const auto noisy_accum = accumulate_split(noisy, bank, Mode::kFloat, cfg.formats);
        Eigen::MatrixXd stacked(clean_accum.rows() + noisy_accum.rows(), clean_accum.cols());
        stacked << clean_accum, noisy_accum;
        const auto model = fit_model(stacked, both, bank, fixed_c);
        acc.push_back(score_float(model, test_accum, test).confusion.accuracy());
      } else {
        acc.push_back(score_float(clean_model, test_accum, test).confusion.accuracy());
      }
    }
    rows.push_back({snr_values[i], augment, repeats, mean_of(acc), sample_variance(acc)});
  }
  return rows;
}

std::string snr_sweep_csv(const std::vector<SnrSweepRow>& rows) {
  std::ostringstream os;
  os << "snr_db,augment,repeats,mean_test_acc,var_test_acc\n";
  for (const auto& r : rows) {
    os << fmt_real(r.snr_db) << ',' << (r.augment ? 1 : 0) << ',' << r.repeats << ',' << fmt_acc(r.mean_test_acc)
       << ',' << fmt_acc(r.var_test_acc) << '\n';
  }
  return os.str();
}

BaselineRow compare_baseline(const DatasetManifest& m, const ExperimentConfig& cfg, double C,
                             const KernelSpec& kernel) {
  const auto bank = design_filterbank(cfg.cochlea);
  const auto data = load_both(m, cfg);
  const auto cache = make_cache(cfg);
  const auto train_accum = accumulate_split(data.train, bank, Mode::kFloat, cfg.formats, cache.get());
  const auto test_accum = accumulate_split(data.test, bank, Mode::kFloat, cfg.formats, cache.get());
  ExperimentConfig c = cfg;
  if (C > 0.0) c.C_grid = {C};
  const auto model = fit_model(train_accum, data.train, bank, c);

  const TrainingSet set = make_set(model.standardizer.apply(train_accum), data.train);
  const auto base = train_baseline(set, model.C, kernel);
  auto base_decisions = [&](const Eigen::MatrixXd& accum) {
    const Eigen::MatrixXd F = model.standardizer.apply(accum);
    std::vector<double> d(static_cast<std::size_t>(F.rows()));
#pragma omp parallel for schedule(static)
    for (Eigen::Index w = 0; w < F.rows(); ++w) {
      const Eigen::VectorXd row = F.row(w).transpose();
      d[static_cast<std::size_t>(w)] = decision(std::span(row.data(), static_cast<std::size_t>(row.size())), base);
    }
    return d;
  };

  BaselineRow r;
  r.task = m.target;
  r.S = base.num_sv();
  r.P = model.dim();
  {
    MacCounter mc;
    std::vector<double> zero(model.dim(), 0.0);
    decision(zero, base, &mc);
    r.baseline_macs = mc.macs;
    MacCounter tc;
    decision(zero, model, &tc);
    r.template_macs = tc.macs;
  }
  r.baseline_train_acc = tally(data.train, base_decisions(train_accum)).accuracy();
  r.baseline_test_acc = tally(data.test, base_decisions(test_accum)).accuracy();
  r.template_train_acc = model.train_accuracy;
  r.template_test_acc = score_float(model, test_accum, data.test).confusion.accuracy();
  return r;
}

std::string baseline_csv(const std::vector<BaselineRow>& rows) {
  std::ostringstream os;
  os << "task,S,P,baseline_macs,template_macs,baseline_train_acc,baseline_test_acc,template_train_acc,"
        "template_test_acc\n";
  for (const auto& r : rows) {
    os << r.task << ',' << r.S << ',' << r.P << ',' << r.baseline_macs << ',' << r.template_macs << ','
       << fmt_acc(r.baseline_train_acc) << ',' << fmt_acc(r.baseline_test_acc) << ','
       << fmt_acc(r.template_train_acc) << ',' << fmt_acc(r.template_test_acc) << '\n';
  }
  return os.str();
}

}  // namespace infilter
