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

#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "infilter/harness.hpp"
#include "infilter/synth.hpp"

using namespace infilter;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path dir;
  DatasetManifest manifest;
  ExperimentConfig cfg;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.dir = fs::temp_directory_path() / "infilter_harness";
    fs::remove_all(x.dir);
    fs::create_directories(x.dir / "corpus");
    SynthConfig sc;
    sc.speakers = 3;
    sc.digits = 4;
    sc.per_digit = 3;
    write_synth_corpus((x.dir / "corpus").string(), sc);
    x.manifest = build_manifest((x.dir / "corpus").string(), synth_speaker_name(0), 3, 0.75);
    x.cfg.cochlea = CochleaConfig::defaults(16000.0, 10);
    x.cfg.cochlea.window_len = 4000;
    x.cfg.C_grid = {1.0};
    x.cfg.seed = 3;
    return x;
  }();
  return f;
}

std::vector<std::string> csv_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("mode names") {
  CHECK(parse_mode("float") == Mode::kFloat);
  CHECK(parse_mode("fixed") == Mode::kFixed);
  CHECK(mode_name(Mode::kFixed) == "fixed");
  CHECK_THROWS(parse_mode("double"));
}

TEST_CASE("config round trip and validation") {
  ExperimentConfig c;
  c.C_grid = {0.5, 2.0};
  c.mode = Mode::kFixed;
  c.formats.accumulator = FixedFormat{30, 12, false};
  c.cochlea.num_channels = 12;
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.formats.accumulator == FixedFormat{30, 12, false});
  const auto partial = config_from_json(nlohmann::json::parse(R"({"cochlea": {"P": 8}})"));
  CHECK(partial.cochlea.num_channels == 8);
  CHECK(partial.cochlea.sample_rate == CochleaConfig::defaults().sample_rate);
  CHECK_THROWS(config_from_json(nlohmann::json::parse(R"({"cochlea": {"num_channels": 8}})")));
  ExperimentConfig bad;
  bad.cv_folds = 1;
  CHECK_THROWS(bad.validate());
  bad = ExperimentConfig{};
  bad.C_grid = {};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("voting") {
  CHECK(vote(std::vector<double>{1.0, -0.5, 2.0}) == 1);
  CHECK(vote(std::vector<double>{-1.0, -0.5, 2.0}) == -1);
  CHECK(vote(std::vector<double>{-1.0, 0.5}) == -1);  // tie: sum is negative
  CHECK(vote(std::vector<double>{-0.2, 0.5}) == 1);
  CHECK(vote(std::vector<double>{0.0}) == 1);
  Confusion c{3, 1, 2, 4};
  CHECK(c.total() == 10);
  CHECK(c.accuracy() == doctest::Approx(70.0));
}

TEST_CASE("window framing per clip") {
  const auto& f = fixture();
  const auto clips = load_clips(f.manifest, "train", f.cfg);
  CHECK(clips.size() == f.manifest.split("train").size());
  for (const auto& c : clips) CHECK(c.sample_rate == 16000);
  const auto split = prepare_split(clips, f.cfg);
  CHECK(split.windows.size() == split.clip_of_window.size());
  CHECK(split.window_labels().size() == static_cast<Eigen::Index>(split.windows.size()));
  for (std::size_t w = 0; w < split.windows.size(); ++w) {
    CHECK(split.windows[w].size() == 4000);
    CHECK(split.window_labels()(static_cast<Eigen::Index>(w)) == split.clip_labels[static_cast<std::size_t>(split.clip_of_window[w])]);
  }
  const auto noisy1 = prepare_split(clips, f.cfg, NoiseSpec{5.0, 1});
  const auto noisy2 = prepare_split(clips, f.cfg, NoiseSpec{5.0, 1});
  CHECK(noisy1.windows == noisy2.windows);
  CHECK(noisy1.windows != split.windows);
}

TEST_CASE("feature cache returns identical rows") {
  const auto& f = fixture();
  const auto bank = design_filterbank(f.cfg.cochlea);
  const auto split = prepare_split(load_clips(f.manifest, "test", f.cfg), f.cfg);
  const auto cache_dir = f.dir / "cache";
  fs::remove_all(cache_dir);
  FeatureCache cache(cache_dir.string());
  for (Mode mode : {Mode::kFloat, Mode::kFixed}) {
    const auto cold = accumulate_split(split, bank, mode, f.cfg.formats, &cache);
    CHECK(!fs::is_empty(cache_dir));
    const auto warm = accumulate_split(split, bank, mode, f.cfg.formats, &cache);
    const auto none = accumulate_split(split, bank, mode, f.cfg.formats, nullptr);
    CHECK(cold == warm);
    CHECK(cold == none);
  }
  CHECK(cache.key("a", split.windows, Mode::kFloat) != cache.key("a", split.windows, Mode::kFixed));
  CHECK(cache.key("a", split.windows, Mode::kFloat) != cache.key("b", split.windows, Mode::kFloat));
}

TEST_CASE("feature table round trip reproduces training") {
  const auto& f = fixture();
  const auto bank = design_filterbank(f.cfg.cochlea);
  const auto table = featurize_manifest(f.manifest, bank, Mode::kFloat, f.cfg);
  const auto back = feature_table_from_json(feature_table_to_json(table));
  CHECK(back.train_accum == table.train_accum);
  CHECK(back.test_accum == table.test_accum);
  CHECK(back.train.clip_of_window == table.train.clip_of_window);
  const auto m1 = train_from_table(table, f.cfg);
  const auto m2 = train_from_table(back, f.cfg);
  CHECK(m1.Q == m2.Q);
  CHECK(m1.b == m2.b);
}

TEST_CASE("evaluation reproduces the recorded training accuracy") {
  const auto& f = fixture();
  for (Mode mode : {Mode::kFloat, Mode::kFixed}) {
    ExperimentConfig cfg = f.cfg;
    cfg.mode = mode;
    const auto r = run_experiment(f.manifest, cfg);
    CAPTURE(mode_name(mode));
    CHECK(r.report.num_templates == 10);
    CHECK(r.report.macs_per_decision == 10);
    CHECK(r.report.train_confusion.total() == f.manifest.split("train").size());
    CHECK(r.report.test_confusion.total() == f.manifest.split("test").size());
    const auto again = evaluate(r.model, f.manifest, cfg);
    CHECK(again.train_accuracy == r.report.train_accuracy);
    CHECK(again.test_accuracy == r.report.test_accuracy);
    if (mode == Mode::kFloat) CHECK(r.model.train_accuracy == r.report.train_accuracy);
    if (mode == Mode::kFixed) CHECK(r.report.window_agreement >= 0.0);
    const auto j = eval_report_to_json(r.report);
    CHECK(j.at("mode") == mode_name(mode));
  }
}

TEST_CASE("sweeps") {
  const auto& f = fixture();
  SUBCASE("filter count") {
    const auto rows = sweep_filters(f.manifest, f.cfg, {4, 8});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].P == 4);
    CHECK(rows[1].status == "ok");
    const auto lines = csv_lines(filter_sweep_csv(rows));
    CHECK(lines.size() == 3);
    CHECK(lines[0] == "P,train_acc,test_acc,status");
    CHECK(lines[1].rfind("4,", 0) == 0);
    CHECK_THROWS(sweep_filters(f.manifest, f.cfg, {8, 4}));
  }
  SUBCASE("snr") {
    const auto rows = sweep_snr(f.manifest, f.cfg, {20.0}, false, 1);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].repeats == 1);
    CHECK(rows[0].var_test_acc == 0.0);
    const auto lines = csv_lines(snr_sweep_csv(rows));
    CHECK(lines[0] == "snr_db,augment,repeats,mean_test_acc,var_test_acc");
    CHECK(lines.size() == 2);
    const auto two = sweep_snr(f.manifest, f.cfg, {20.0}, true, 2);
    CHECK(two[0].augment);
    CHECK(two[0].var_test_acc >= 0.0);
    CHECK_THROWS(sweep_snr(f.manifest, f.cfg, {20.0}, false, 0));
  }
  SUBCASE("baseline") {
    const auto row = compare_baseline(f.manifest, f.cfg, 1.0, KernelSpec{});
    CHECK(row.P == 10);
    CHECK(row.template_macs == 10);
    CHECK(row.baseline_macs == row.S * row.P);
    const auto lines = csv_lines(baseline_csv({row}));
    CHECK(lines.size() == 2);
    CHECK(lines[0].rfind("task,S,P,", 0) == 0);
  }
}
