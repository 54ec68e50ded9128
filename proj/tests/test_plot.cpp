#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace aks;

namespace {

std::size_t occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Plot, OneMarkerPerKeyframe) {
  const auto s = aks::testing::series_of({0.1, 0.9, 0.2, 0.3, 0.1, 0.1, 0.8, 0.1});
  const KeyframeSelection sel{{1, 6}, Strategy::TOP, {}, 8, ""};
  const auto svg = render_svg(s, sel, 2);
  EXPECT_EQ(occurrences(svg, "class=\"keyframe\""), 2u);
  EXPECT_EQ(occurrences(svg, "class=\"scores\""), 1u);
  EXPECT_EQ(occurrences(svg, "class=\"bin\""), 3u);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(render_svg(s, sel, 2), svg);
}

TEST(Plot, ConstantSeriesAndSingleFrame) {
  const KeyframeSelection all{{0, 1, 2}, Strategy::UNI, {}, 3, ""};
  EXPECT_EQ(occurrences(render_svg(aks::testing::series_of({0.5, 0.5, 0.5}), all, 1), "class=\"keyframe\""), 3u);
  const KeyframeSelection one{{0}, Strategy::UNI, {}, 1, ""};
  EXPECT_NO_THROW(render_svg(aks::testing::series_of({2.0}), one, 3));
}

TEST(Plot, InvalidSelectionFailsBeforeWriting) {
  aks::testing::TempDir dir("plot");
  const auto s = aks::testing::series_of({0.1, 0.2, 0.3});
  const KeyframeSelection bad{{0, 5}, Strategy::TOP, {}, 3, ""};
  EXPECT_THROW(emit_plot(s, bad, 1, dir / "p.svg"), Error);
  EXPECT_FALSE(std::filesystem::exists(dir / "p.svg"));
  const KeyframeSelection wrong_horizon{{0}, Strategy::TOP, {}, 4, ""};
  EXPECT_THROW(emit_plot(s, wrong_horizon, 1, dir / "p.svg"), Error);
  const KeyframeSelection good{{2}, Strategy::TOP, {}, 3, ""};
  emit_plot(s, good, 1, dir / "p.svg");
  EXPECT_TRUE(std::filesystem::exists(dir / "p.svg"));
}
