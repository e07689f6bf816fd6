#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "chemostat_es/experiments.hpp"

namespace ces = chemostat_es;

namespace {

ces::Trajectory sample_trajectory() {
  ces::Trajectory t;
  for (int i = 0; i < 10; ++i) {
    const double x = i * 0.1;
    t.rows.push_back({x, 0.2 + x / 10, 0.8 - x / 10, 0.21, 0.3, 0.12, 0.22, 0.1});
  }
  return t;
}

}  // namespace

TEST(PlotData, DsPlane) {
  const auto d = ces::emit_plot_data(sample_trajectory(), ces::PlotKind::ds_plane, ces::PlantParams{}, 1, 100);
  EXPECT_EQ(d.main.columns, (std::vector<std::string>{"sbar", "Dbar"}));
  EXPECT_EQ(d.main.rows.size(), 10u);
  ASSERT_EQ(d.overlays.size(), 2u);
  EXPECT_EQ(d.overlays[0].first, "mu");
  EXPECT_EQ(d.overlays[0].second.columns, (std::vector<std::string>{"s", "mu"}));
  EXPECT_EQ(d.overlays[0].second.rows.size(), 101u);
  EXPECT_NEAR(d.overlays[0].second.rows[100][1], 1.0 / 12.0, 1e-15);
  EXPECT_EQ(d.overlays[1].first, "optimum");
  EXPECT_NEAR(d.overlays[1].second.rows[0][0], 0.2240092377, 1e-9);
}

TEST(PlotData, SbPlaneHasInvariantLine) {
  const auto d = ces::emit_plot_data(sample_trajectory(), ces::PlotKind::sb_plane, ces::PlantParams{}, 3, 10);
  EXPECT_EQ(d.main.columns, (std::vector<std::string>{"s", "b"}));
  EXPECT_EQ(d.main.rows.size(), 4u);
  EXPECT_EQ(d.overlays[0].first, "invariant");
  for (const auto& r : d.overlays[0].second.rows) EXPECT_DOUBLE_EQ(r[0] + r[1], 1.0);
}

TEST(PlotData, OtherKinds) {
  const auto ts = ces::emit_plot_data(sample_trajectory(), ces::PlotKind::ts, ces::PlantParams{});
  EXPECT_EQ(ts.main.columns.front(), "t");
  EXPECT_EQ(ts.main.rows[3][0], 0.1 * 3);
  const auto io = ces::emit_plot_data(sample_trajectory(), ces::PlotKind::io_plane, ces::PlantParams{});
  EXPECT_EQ(io.main.columns, (std::vector<std::string>{"y", "u"}));
  EXPECT_THROW(ces::parse_plot_kind("xy"), ces::ConfigError);
  EXPECT_EQ(ces::parse_plot_kind("io-plane"), ces::PlotKind::io_plane);
}

TEST(PlotData, EmptyTrajectoryGivesHeaderOnly) {
  const auto d = ces::emit_plot_data(ces::Trajectory{}, ces::PlotKind::ds_plane, ces::PlantParams{});
  std::ostringstream out;
  ces::write_csv(out, d.main);
  EXPECT_EQ(out.str(), "sbar,Dbar\n");
}

TEST(PlotData, FilesWithOverlays) {
  const auto dir = std::filesystem::temp_directory_path() / "ces_plot_test";
  std::filesystem::create_directories(dir);
  const std::string main = (dir / "fig.csv").string();
  ces::write_plot_data(main, ces::emit_plot_data(sample_trajectory(), ces::PlotKind::ds_plane, ces::PlantParams{}));
  EXPECT_TRUE(std::filesystem::exists(dir / "fig.mu.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "fig.optimum.csv"));
  std::filesystem::remove_all(dir);
}

TEST(Paths, TaggedPath) {
  EXPECT_EQ(ces::tagged_path("out/run.csv", "seed3"), "out/run.seed3.csv");
  EXPECT_EQ(ces::tagged_path("run", "x"), "run.x");
  EXPECT_EQ(ces::tagged_path("", "x"), "");
  EXPECT_EQ(ces::tagged_path("a.csv", ""), "a.csv");
}

TEST(Experiments, TailStats) {
  const auto t = sample_trajectory();
  const auto w = ces::tail_stats(t, 0.5, [](const ces::Sample& s) { return s.t; });
  EXPECT_EQ(w.count, 5u);
  EXPECT_NEAR(w.mean, 0.7, 1e-12);
}

TEST(Experiments, OracleReport) {
  const auto s = ces::oracle_report(ces::ExperimentConfig{});
  EXPECT_NEAR(std::stod(*s.get("s_star")), 0.2240092377, 1e-9);
  EXPECT_NEAR(std::stod(*s.get("phi_star")), 0.1007231598, 1e-9);
  EXPECT_NEAR(std::stod(*s.get("min_gain")), 0.096869, 1e-6);
  EXPECT_EQ(*s.get("gain_sufficient"), "true");
}

TEST(Experiments, ShortContinuousRun) {
  auto cfg = ces::parse_config("[sim]\nt_end = 200\n[noise]\nkind = none\n");
  const auto r = ces::run_continuous(cfg);
  EXPECT_EQ(r.trajectory.size(), 201u);
  EXPECT_DOUBLE_EQ(r.t_end, 200.0);
  ASSERT_TRUE(r.abs_error);
  EXPECT_FALSE(r.reference_sbar_std);
  const auto s = ces::summarize(r, cfg);
  EXPECT_TRUE(s.get("y_hat"));
  EXPECT_EQ(*s.get("oscillating"), "false");
}

TEST(Experiments, PairedReferenceRun) {
  auto cfg = ces::parse_config("[sim]\nt_end = 100\n[gains]\nepsilon = 0.01\n");
  const auto r = ces::run_continuous(cfg);
  ASSERT_TRUE(r.reference_sbar_std);
  ASSERT_TRUE(r.oscillation_ratio);
}

TEST(Experiments, DiscreteNoiseFree) {
  auto cfg = ces::parse_config("[noise]\nkind = none\n[scheme]\ntype = discrete\n");
  const auto r = ces::run_discrete(cfg);
  EXPECT_EQ(r.optimum.golden_evaluations, 7);
  EXPECT_EQ(r.optimum.newton_evaluations, 3);
  EXPECT_LE(r.optimum.bracket.width(), 0.2);
  ASSERT_TRUE(r.abs_error);
  EXPECT_LE(*r.abs_error, 5e-3);
  EXPECT_EQ(r.optimum.log.back().phase, ces::Phase::apply);
  EXPECT_DOUBLE_EQ(r.trajectory.rows.back().t, r.t_end);
}

TEST(Experiments, InadmissibleBracketRejected) {
  auto cfg = ces::parse_config("[discrete]\nv1 = 0.001\n");
  EXPECT_THROW(ces::run_discrete(cfg), ces::ConfigError);
}
