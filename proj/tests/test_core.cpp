#include <fstream>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace aks;
using aks::testing::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(LoadScores, ThreeRecordsInferOneFps) {
  TempDir dir("core");
  write_text(dir / "s.jsonl",
             "{\"index\":0,\"timestamp_s\":0,\"score\":0.1}\n"
             "{\"index\":1,\"timestamp_s\":1,\"score\":0.2}\n"
             "{\"index\":2,\"timestamp_s\":2,\"score\":0.3}\n");
  const auto s = load_scores(dir / "s.jsonl", ScoreFormat::jsonl);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s.native_fps(), 1.0);
  EXPECT_DOUBLE_EQ(s.scores()[2], 0.3);
  EXPECT_FALSE(s.query_id());
}

TEST(LoadScores, HeaderCarriesFpsAndQuery) {
  TempDir dir("core");
  write_text(dir / "s.jsonl",
             "{\"native_fps\":2.0,\"query_id\":\"q7\"}\n"
             "{\"index\":0,\"timestamp_s\":0,\"score\":1}\n"
             "{\"index\":1,\"timestamp_s\":5,\"score\":2}\n");
  const auto s = load_scores(dir / "s.jsonl");
  EXPECT_DOUBLE_EQ(s.native_fps(), 2.0);
  EXPECT_EQ(s.query_id(), "q7");
}

TEST(LoadScores, EmptyFile) {
  TempDir dir("core");
  write_text(dir / "empty.jsonl", "");
  EXPECT_NE(error_of([&] { load_scores(dir / "empty.jsonl"); }).find("empty score file"), std::string::npos);
  write_text(dir / "empty.csv", "index,timestamp_s,score\n");
  EXPECT_NE(error_of([&] { load_scores(dir / "empty.csv"); }).find("empty score file"), std::string::npos);
}

TEST(LoadScores, NonMonotonicTimestampNamesLine) {
  TempDir dir("core");
  write_text(dir / "s.jsonl",
             "{\"index\":0,\"timestamp_s\":0,\"score\":0.1}\n"
             "{\"index\":1,\"timestamp_s\":2,\"score\":0.2}\n"
             "{\"index\":2,\"timestamp_s\":1,\"score\":0.3}\n");
  const auto msg = error_of([&] { load_scores(dir / "s.jsonl"); });
  EXPECT_NE(msg.find(":3:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("non-monotonic"), std::string::npos) << msg;
}

TEST(LoadScores, DuplicateTimestampNonFiniteAndMalformed) {
  TempDir dir("core");
  write_text(dir / "dup.csv", "index,timestamp_s,score\n0,0,1\n1,0,2\n");
  auto msg = error_of([&] { load_scores(dir / "dup.csv"); });
  EXPECT_NE(msg.find(":3:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;

  write_text(dir / "nan.csv", "index,timestamp_s,score\n0,0,1\n1,1,nan\n");
  msg = error_of([&] { load_scores(dir / "nan.csv"); });
  EXPECT_NE(msg.find(":3: non-finite score"), std::string::npos) << msg;

  write_text(dir / "bad.jsonl", "{\"index\":0,\"timestamp_s\":0,\"score\":1}\n{\"index\":1,\"timestamp_s\":1}\n");
  msg = error_of([&] { load_scores(dir / "bad.jsonl"); });
  EXPECT_NE(msg.find(":2: malformed record"), std::string::npos) << msg;

  write_text(dir / "junk.jsonl", "not json\n");
  msg = error_of([&] { load_scores(dir / "junk.jsonl"); });
  EXPECT_NE(msg.find(":1: malformed record"), std::string::npos) << msg;

  write_text(dir / "gap.jsonl", "{\"index\":0,\"timestamp_s\":0,\"score\":1}\n{\"index\":2,\"timestamp_s\":1,\"score\":1}\n");
  msg = error_of([&] { load_scores(dir / "gap.jsonl"); });
  EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;

  EXPECT_THROW(load_scores(dir / "missing.jsonl"), Error);
}

TEST(LoadScores, CsvWithCommentHeader) {
  TempDir dir("core");
  write_text(dir / "s.csv", "# native_fps=4\n# query_id=abc\nindex,timestamp_s,score\n0,0,0.5\n1,0.25,0.75\n");
  const auto s = load_scores(dir / "s.csv");
  EXPECT_DOUBLE_EQ(s.native_fps(), 4.0);
  EXPECT_EQ(s.query_id(), "abc");
  EXPECT_DOUBLE_EQ(s.scores()[1], 0.75);
}

TEST(LoadScores, FpsFromMedianToleratesDroppedFrame) {
  std::vector<double> ts{0, 0.5, 1.0, 2.0, 2.5, 3.0};
  EXPECT_DOUBLE_EQ(infer_fps(ts), 2.0);
}

TEST(ScoreFiles, RoundTripBothFormats) {
  TempDir dir("core");
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 1 + rng.integer(0, 60);
    std::vector<ScoreEntry> entries;
    double t = rng.uniform(-5, 5);
    for (std::size_t i = 0; i < n; ++i) {
      entries.push_back({i, t, rng.uniform(-3, 3) * std::pow(10.0, rng.uniform(-8, 8))});
      t += rng.uniform(1e-3, 2.0);
    }
    std::optional<std::string> qid;
    if (trial % 2) qid = "query \"" + std::to_string(trial) + "\"";
    const ScoreSeries s(entries, rng.uniform(0.1, 60), trial % 2 ? qid : std::nullopt);
    save_scores(s, dir / "r.jsonl");
    EXPECT_EQ(load_scores(dir / "r.jsonl"), s);
    // the csv comment header is line-based, so keep query ids on one line
    save_scores(s, dir / "r.csv");
    EXPECT_EQ(load_scores(dir / "r.csv"), s);
  }
}

TEST(ScoreSeries, RejectsInvalidConstruction) {
  EXPECT_THROW(ScoreSeries({}, 1.0), Error);
  EXPECT_THROW(ScoreSeries({{0, 0, 1}, {1, 0, 1}}, 1.0), Error);
  EXPECT_THROW(ScoreSeries({{0, 0, std::nan("")}}, 1.0), Error);
  EXPECT_THROW(ScoreSeries({{1, 0, 1}}, 1.0), Error);
  EXPECT_THROW(ScoreSeries({{0, 0, 1}}, 0.0), Error);
}

TEST(Resample, StrideTwo) {
  std::vector<double> scores(10);
  for (std::size_t i = 0; i < 10; ++i) scores[i] = static_cast<double>(i);
  const auto s = ScoreSeries::from_scores(scores, 1.0);
  const auto r = resample_candidates(s, 0.5);
  ASSERT_EQ(r.size(), 5u);
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_EQ(r.entries()[j].index, j);
    EXPECT_DOUBLE_EQ(r.entries()[j].timestamp_s, static_cast<double>(2 * j));
    EXPECT_DOUBLE_EQ(r.entries()[j].score, static_cast<double>(2 * j));
  }
  EXPECT_DOUBLE_EQ(r.native_fps(), 0.5);
}

TEST(Resample, StrideTenKeepsOnlyFirst) {
  const auto s = ScoreSeries::from_scores(std::vector<double>(10, 1.0), 1.0);
  const auto r = resample_candidates(s, 0.1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r.entries()[0].timestamp_s, 0.0);
}

TEST(Resample, IdentityAtOrAboveNative) {
  aks::testing::CaptureWarnings warnings;
  const auto s = ScoreSeries::from_scores(std::vector<double>{1, 2, 3}, 2.0);
  EXPECT_EQ(resample_candidates(s, 2.0), s);
  EXPECT_TRUE(warnings.messages.empty());
  EXPECT_EQ(resample_candidates(s, 5.0), s);
  EXPECT_EQ(warnings.messages.size(), 1u);
}

TEST(Resample, RejectsBadTarget) {
  const auto s = ScoreSeries::from_scores(std::vector<double>{1, 2, 3});
  EXPECT_THROW(resample_candidates(s, 0.0), Error);
  EXPECT_THROW(resample_candidates(s, -1.0), Error);
  EXPECT_THROW(resample_candidates(s, std::nan("")), Error);
  EXPECT_THROW(resample_candidates(s, INFINITY), Error);
}

TEST(Resample, IdempotentAndLengthIsCeilTOverK) {
  aks::testing::QuietWarnings quiet;
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.integer(0, 300);
    const double native = rng.uniform(0.5, 30.0);
    const double target = rng.uniform(0.05, 35.0);
    const auto s = ScoreSeries::from_scores(aks::testing::random_scores(rng, n), native);
    const auto once = resample_candidates(s, target);
    EXPECT_EQ(resample_candidates(once, target), once) << "native " << native << " target " << target;
    const std::size_t k = resample_stride(native, target);
    EXPECT_EQ(once.size(), (n + k - 1) / k);
  }
}

TEST(Manifest, RoundTripAndValidation) {
  TempDir dir("core");
  FrameManifest m{"video-1", {{0, 0.0, "f/0.jpg"}, {1, 1.0, "f/1.jpg"}}, 640, 360, 3};
  save_manifest(m, dir / "m.jsonl");
  EXPECT_EQ(load_manifest(dir / "m.jsonl"), m);
  write_text(dir / "bad.jsonl", "{\"video_id\":\"v\"}\n{\"index\":1,\"timestamp_s\":0,\"asset\":\"a\"}\n");
  EXPECT_THROW(load_manifest(dir / "bad.jsonl"), Error);
}

TEST(SelectionParams, ValidationAndLevelWarning) {
  SelectionParams p;
  EXPECT_NO_THROW(p.validate());
  p.m = 0;
  EXPECT_THROW(p.validate(), Error);
  p.m = 4;
  p.s_thr = -0.1;
  EXPECT_THROW(p.validate(), Error);
  p.s_thr = 0.5;
  p.max_level = 3;
  aks::testing::CaptureWarnings warnings;
  p.warn_if_unusual();
  EXPECT_EQ(warnings.messages.size(), 1u);
  p.max_level = 2;
  p.warn_if_unusual();
  EXPECT_EQ(warnings.messages.size(), 1u);
}

TEST(Strategy, ParseIsCaseInsensitive) {
  EXPECT_EQ(parse_strategy("ada"), Strategy::ADA);
  EXPECT_EQ(parse_strategy("Top"), Strategy::TOP);
  EXPECT_THROW(parse_strategy("best"), Error);
}
