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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "infilter/audio.hpp"
#include "infilter/manifest.hpp"
#include "infilter/synth.hpp"

using namespace infilter;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("infilter_audio_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Hand-built RIFF header, independent of encode_wav.
std::vector<std::uint8_t> riff(int channels, int rate, int bits, int format, const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> b;
  auto put = [&](std::uint32_t v, int n) {
    for (int i = 0; i < n; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto tag = [&](const char* t) { b.insert(b.end(), t, t + 4); };
  tag("RIFF");
  put(static_cast<std::uint32_t>(36 + data.size()), 4);
  tag("WAVE");
  tag("fmt ");
  put(16, 4);
  put(static_cast<std::uint32_t>(format), 2);
  put(static_cast<std::uint32_t>(channels), 2);
  put(static_cast<std::uint32_t>(rate), 4);
  put(static_cast<std::uint32_t>(rate * channels * bits / 8), 4);
  put(static_cast<std::uint32_t>(channels * bits / 8), 2);
  put(static_cast<std::uint32_t>(bits), 2);
  tag("data");
  put(static_cast<std::uint32_t>(data.size()), 4);
  b.insert(b.end(), data.begin(), data.end());
  return b;
}

std::vector<std::uint8_t> pcm_bytes(const std::vector<std::int16_t>& s) {
  std::vector<std::uint8_t> out;
  for (auto v : s) {
    out.push_back(static_cast<std::uint8_t>(static_cast<std::uint16_t>(v) & 0xFF));
    out.push_back(static_cast<std::uint8_t>(static_cast<std::uint16_t>(v) >> 8));
  }
  return out;
}

WavError::Reason reason_of(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_wav(bytes);
  } catch (const WavError& e) {
    return e.reason();
  }
  FAIL("no WavError");
  return WavError::Reason::kOpen;
}

Clip tone(int n, int rate, double freq, double amp) {
  Clip c;
  c.sample_rate = rate;
  for (int i = 0; i < n; ++i) {
    c.samples.push_back(static_cast<std::int16_t>(std::lround(amp * std::sin(2 * std::numbers::pi * freq * i / rate))));
  }
  return c;
}

}  // namespace

TEST_CASE("wav decoding") {
  SUBCASE("stereo is averaged to mono") {
    const auto c = decode_wav(riff(2, 16000, 16, 1, pcm_bytes({100, 300, -5, -6, 32767, 32767})));
    REQUIRE(c.samples.size() == 3);
    CHECK(c.samples[0] == 200);
    CHECK(c.samples[1] == -6);  // -5.5 rounds away from zero
    CHECK(c.samples[2] == 32767);
    CHECK(c.sample_rate == 16000);
  }
  SUBCASE("rejections carry a reason") {
    CHECK(reason_of(riff(1, 16000, 24, 1, std::vector<std::uint8_t>(6, 0))) == WavError::Reason::kUnsupported);
    CHECK(reason_of(riff(1, 16000, 16, 3, pcm_bytes({1, 2}))) == WavError::Reason::kUnsupported);
    CHECK(reason_of(riff(1, 22050, 16, 1, pcm_bytes({1, 2}))) == WavError::Reason::kUnsupported);
    CHECK(reason_of(riff(1, 16000, 16, 1, {})) == WavError::Reason::kEmpty);
    std::vector<std::uint8_t> junk = {'R', 'I', 'F', 'X', 0, 0, 0, 0, 'W', 'A', 'V', 'E'};
    CHECK(reason_of(junk) == WavError::Reason::kMalformed);
    auto truncated = riff(1, 16000, 16, 1, pcm_bytes({1, 2, 3}));
    truncated.resize(20);
    CHECK(reason_of(truncated) == WavError::Reason::kMalformed);
    try {
      read_wav("/nonexistent/infilter.wav");
      FAIL("expected throw");
    } catch (const WavError& e) {
      CHECK(e.reason() == WavError::Reason::kOpen);
      CHECK(std::string(e.kind()) == "wav");
    }
  }
  SUBCASE("accepted rates") {
    for (int rate : {8000, 16000, 44100}) CHECK(decode_wav(riff(1, rate, 16, 1, pcm_bytes({7}))).sample_rate == rate);
  }
  SUBCASE("file round trip") {
    const auto dir = scratch("rt");
    Clip c = tone(1234, 8000, 440.0, 9000.0);
    write_wav((dir / "a.wav").string(), c);
    const auto back = read_wav((dir / "a.wav").string());
    CHECK(back.samples == c.samples);
    CHECK(back.sample_rate == 8000);
    const std::vector<std::int16_t> st = {10, 20, -10, -30};
    CHECK(encode_wav(st, 2, 16000) == riff(2, 16000, 16, 1, pcm_bytes(st)));
  }
}

TEST_CASE("resampling") {
  const Clip c = tone(8000, 8000, 300.0, 10000.0);
  const auto up = resample_linear(c, 16000);
  CHECK(up.samples.size() == 16000);
  CHECK(up.sample_rate == 16000);
  CHECK(up.samples[0] == c.samples[0]);
  CHECK(up.samples[2] == c.samples[1]);
  CHECK(up.samples[1] == static_cast<std::int16_t>(std::lround(0.5 * (c.samples[0] + c.samples[1]))));
  const auto cd = resample_linear(tone(44100, 44100, 300.0, 10000.0), 16000);
  CHECK(cd.samples.size() == 16000);
  // Tone stays a tone: compare against the analytic signal.
  double err = 0;
  for (std::size_t i = 0; i < cd.samples.size(); ++i) {
    err = std::max(err, std::abs(cd.samples[i] - 10000.0 * std::sin(2 * std::numbers::pi * 300.0 * i / 16000.0)));
  }
  CHECK(err < 30.0);
  CHECK(resample_linear(c, 8000).samples == c.samples);
  CHECK(resample_linear(tone(3, 8000, 1, 1), 16000).samples.size() == 6);
  CHECK_THROWS_AS(resample_linear(c, 0), DomainError);
}

TEST_CASE("silence trimming") {
  Clip c;
  c.sample_rate = 16000;
  c.samples.assign(3200, 0);
  const Clip t = tone(8000, 16000, 500.0, 8000.0);
  c.samples.insert(c.samples.end(), t.samples.begin(), t.samples.end());
  c.samples.insert(c.samples.end(), 4800, 0);
  for (std::size_t i = 0; i < c.samples.size(); i += 7) c.samples[i] = static_cast<std::int16_t>(c.samples[i] + 3);
  const auto out = trim_silence(c);
  // 20 ms windows: 10 silent windows before, 25 tone windows, 15 after.
  CHECK(out.samples.size() == 8000);
  CHECK(out.samples[320] == c.samples[3200 + 320]);

  Clip quiet;
  quiet.sample_rate = 16000;
  quiet.samples.assign(1000, 0);
  CHECK(!trim_silence(quiet).samples.empty());
  CHECK_THROWS_AS(trim_silence(c, -40.0, 0.0), DomainError);
}

TEST_CASE("framing") {
  Clip c;
  c.samples.assign(16000 * 2 + 9600, 1);
  CHECK(frame_fixed(c, 16000).size() == 3);
  c.samples.assign(16000 * 2 + 6400, 1);
  const auto w = frame_fixed(c, 16000);
  CHECK(w.size() == 2);
  for (const auto& x : w) CHECK(x.size() == 16000);
  c.samples.assign(16000 * 2 + 8000, 1);
  const auto half = frame_fixed(c, 16000);
  REQUIRE(half.size() == 3);
  CHECK(half[2][7999] == 1);
  CHECK(half[2][8000] == 0);
  c.samples.assign(100, 5);
  const auto one = frame_fixed(c, 16000);
  REQUIRE(one.size() == 1);
  CHECK(one[0][99] == 5);
  CHECK(one[0][100] == 0);
  CHECK_THROWS_AS(frame_fixed(c, 0), DomainError);
}

TEST_CASE("white noise at a given SNR") {
  const Clip c = tone(16000, 16000, 700.0, 6000.0);
  const double ps = signal_power(c.samples);
  CHECK(ps == doctest::Approx(0.5 * 6000.0 * 6000.0).epsilon(0.01));
  for (double snr : {20.0, 10.0, 0.0, -5.0}) {
    const auto n = add_awgn(c, snr, 42);
    std::vector<std::int16_t> diff(c.samples.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = static_cast<std::int16_t>(n.samples[i] - c.samples[i]);
    const double measured = 10.0 * std::log10(ps / signal_power(diff));
    CAPTURE(snr);
    CHECK(std::abs(measured - snr) < 0.5);
  }
  CHECK(add_awgn(c, 10.0, 42).samples == add_awgn(c, 10.0, 42).samples);
  CHECK(add_awgn(c, 10.0, 42).samples != add_awgn(c, 10.0, 43).samples);
  Clip zero;
  zero.samples.assign(100, 0);
  CHECK_THROWS_AS(add_awgn(zero, 10.0, 1), DomainError);
  CHECK_THROWS_AS(add_awgn(c, std::nan(""), 1), DomainError);
}

TEST_CASE("manifest") {
  const auto dir = scratch("corpus");
  SynthConfig cfg;
  cfg.speakers = 3;
  cfg.digits = 2;
  cfg.per_digit = 5;
  CHECK(write_synth_corpus(dir.string(), cfg) == 30);
  const auto names = list_classes(dir.string());
  CHECK(names == std::vector<std::string>{synth_speaker_name(0), synth_speaker_name(1), synth_speaker_name(2)});

  const auto m = build_manifest(dir.string(), synth_speaker_name(0), 9, 0.8);
  CHECK_NOTHROW(m.validate());
  CHECK(m.entries.size() == 20);  // 10 target + 10 drawn from the rest
  CHECK(m.count("train", 1) == 8);
  CHECK(m.count("test", 1) == 2);
  CHECK(m.count("train", -1) == 8);
  CHECK(m.count("test", -1) == 2);
  std::set<std::string> paths;
  for (const auto& e : m.entries) {
    paths.insert(e.path);
    CHECK((e.label == 1) == (e.class_name == synth_speaker_name(0)));
    CHECK(fs::exists(m.resolve(e)));
  }
  CHECK(paths.size() == m.entries.size());
  CHECK(std::is_sorted(m.entries.begin(), m.entries.end(), [](auto& a, auto& b) { return a.path < b.path; }));

  const auto again = parse_manifest(render_manifest(m));
  CHECK(render_manifest(again) == render_manifest(m));
  CHECK(render_manifest(build_manifest(dir.string(), synth_speaker_name(0), 9, 0.8)) == render_manifest(m));
  CHECK(render_manifest(build_manifest(dir.string(), synth_speaker_name(0), 10, 0.8)) != render_manifest(m));
  CHECK_THROWS(build_manifest(dir.string(), "nobody", 9, 0.8));
  CHECK_THROWS(parse_manifest("{\"version\": 2}\n"));

  DatasetManifest bad = m;
  bad.entries.push_back(bad.entries.front());
  bad.entries.back().split = bad.entries.front().split == "train" ? "test" : "train";
  CHECK_THROWS(bad.validate());
}

TEST_CASE("synthetic utterances") {
  SynthConfig cfg;
  const auto a = synth_utterance(cfg, 0, 3, 1);
  const auto b = synth_utterance(cfg, 0, 3, 1);
  CHECK(a.samples == b.samples);
  CHECK(a.sample_rate == 8000);
  CHECK(a.samples.size() > 2000);
  CHECK(synth_utterance(cfg, 1, 3, 1).samples != a.samples);
  CHECK(signal_power(a.samples) > 1e4);
}
