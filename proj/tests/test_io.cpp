#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cofreq/io.hpp"

using namespace cofreq;

namespace {

std::string slurp(const std::string &path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Csv, VersionedHeaderAndRoundTrip) {
  const std::string text = csv_text("demo", {"a", "b"}, {{0.1, 1e-300}, {-2.5, 3.0}});
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# cofreq demo v" + std::to_string(kCsvSchemaVersion));
  std::getline(is, line);
  EXPECT_EQ(line, "a,b");
  std::getline(is, line);
  EXPECT_EQ(line, "0.1,1e-300");
  EXPECT_EQ(std::stod(format_number(0.1 + 0.2)), 0.1 + 0.2);
  EXPECT_THROW(csv_text("demo", {"a"}, {{1.0, 2.0}}), std::invalid_argument);
}

TEST(Csv, ProfileFileIsDeterministic) {
  FrequencyProfile p;
  p.center = Vec::Zero(4);
  p.radii = {0.5, 1.0};
  p.H = {1.0, 2.0};
  p.D = {3.0, 4.0};
  p.N = {1.0 / 3, 0.5};
  const auto dir = std::filesystem::temp_directory_path();
  const std::string a = (dir / "cofreq_io_a.csv").string(), b = (dir / "cofreq_io_b.csv").string();
  write_profile_csv(a, p);
  write_profile_csv(b, p);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(slurp(a).find("r,H,D,N"), std::string::npos);
  EXPECT_THROW(write_profile_csv("/nonexistent_dir/x.csv", p), std::runtime_error);
}

TEST(Json, ReportsSerializeWithoutInfinities) {
  C01Report r;
  r.C_variation = INFINITY;
  r.shells.push_back({1e-3, 2e-3, 1e-4, 0.1});
  const nlohmann::json j = to_json(r);
  EXPECT_TRUE(j["C_variation"].is_null());
  EXPECT_EQ(j["shells"].size(), 1u);
  MinkowskiEstimate e;
  e.s = {0.1};
  e.volume = {0.2};
  EXPECT_DOUBLE_EQ(to_json(e)["volume"][0].get<double>(), 0.2);
}

TEST(Svg, DeterministicAndRejectsEmpty) {
  PlotSeries s{"N(r)", {0.1, 0.2, 0.4, 0.8}, {1.0, 1.2, 1.5, 1.9}};
  PlotSeries ref{"slope 2", {0.1, 0.8}, {0.01, 0.64}, false, true};
  PlotOptions o;
  o.logx = true;
  o.logy = true;
  const std::string a = render_svg({s, ref}, o), b = render_svg({s, ref}, o);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  EXPECT_NE(a.find("stroke-dasharray"), std::string::npos);
  EXPECT_NE(a.find("slope 2"), std::string::npos);
  EXPECT_THROW(render_svg({}), std::invalid_argument);
  EXPECT_THROW(render_svg({PlotSeries{"empty"}}), std::invalid_argument);
  PlotSeries neg{"neg", {1.0}, {-1.0}};
  EXPECT_THROW(render_svg({neg}, o), std::invalid_argument);
  EXPECT_THROW(emit_plot({s}, "/nonexistent_dir/p.svg"), std::runtime_error);
}
