#include "crsched/report_io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

using namespace crsched;

namespace {

Json shape_json(bool pmtn) {
  return {{"machines", {{"kind", "identical"}, {"m", 1}}}, {"preemptive", pmtn}};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("crsched_" + name)).string();
}

}  // namespace

TEST(UniverseJson, GenerateMatchesBuildUniverse) {
  SchemeConfig cfg;
  Json j{{"name", "u"}, {"shape", shape_json(true)},
         {"generate", {{"p_exps", {0}}, {"Delta", 2}, {"X_max", 1}}}};
  auto u = universe_from_json(j, cfg);
  EXPECT_EQ(u.name, "u");
  EXPECT_EQ(u.instance_count(), 9);
}

TEST(UniverseJson, RoundTrip) {
  SchemeConfig cfg;
  Json j{{"name", "cats"},
         {"shape", shape_json(false)},
         {"catalogs", {{Json::array(), {{{"p_exp", -3}, {"relative", true}}}}, {{{{"p_exp", 1}, {"w_exp", -1}}}}}},
         {"X_max", 2}};
  auto u = universe_from_json(j, cfg);
  auto back = universe_from_json(universe_to_json(u), cfg);
  ASSERT_EQ(back.catalogs.size(), u.catalogs.size());
  EXPECT_EQ(back.X_max, 2);
  EXPECT_FALSE(back.shape.preemptive);
  for (std::size_t c = 0; c < u.catalogs.size(); ++c) {
    ASSERT_EQ(back.catalogs[c].size(), u.catalogs[c].size());
    for (std::size_t o = 0; o < u.catalogs[c].size(); ++o) {
      ASSERT_EQ(back.catalogs[c][o].size(), u.catalogs[c][o].size());
      for (std::size_t k = 0; k < u.catalogs[c][o].size(); ++k) {
        EXPECT_EQ(back.catalogs[c][o][k].p_exp, u.catalogs[c][o][k].p_exp);
        EXPECT_EQ(back.catalogs[c][o][k].w_exp, u.catalogs[c][o][k].w_exp);
        EXPECT_EQ(back.catalogs[c][o][k].relative, u.catalogs[c][o][k].relative);
      }
    }
  }
}

TEST(UniverseJson, RejectsMalformed) {
  SchemeConfig cfg;
  Json gen{{"p_exps", {0}}, {"Delta", 1}, {"X_max", 1}};
  EXPECT_THROW(universe_from_json({{"shape", shape_json(true)}}, cfg), ParseError);
  EXPECT_THROW(universe_from_json({{"shape", shape_json(true)}, {"generate", gen}, {"colour", 1}}, cfg), ParseError);
  gen["Delta"] = "x";
  EXPECT_THROW(universe_from_json({{"shape", shape_json(true)}, {"generate", gen}}, cfg), ParseError);
  Json crowded{{"shape", shape_json(true)}, {"catalogs", {{{{{"p_exp", 0}}, {{"p_exp", 1}}}}}}};
  cfg.Delta = 1;
  EXPECT_THROW(universe_from_json(crowded, cfg), ParseError);
}

TEST(RandomizedMapFile, RoundTrip) {
  RandomizedMap g;
  g.table["k1"] = {{{1, 0}, Rational(1, 3)}, {{0, 1}, Rational(2, 3)}};
  g.table["k2"] = {{{0}, Rational(1)}};
  const auto path = temp_path("rmap.jsonl");
  save_randomized_map(g, path);
  auto back = load_randomized_map(path);
  std::remove(path.c_str());
  ASSERT_EQ(back.table.size(), 2u);
  ASSERT_EQ(back.table.at("k1").size(), 2u);
  EXPECT_EQ(back.table.at("k1")[1].atoms, (std::vector<int>{0, 1}));
  EXPECT_EQ(back.table.at("k1")[1].prob, Rational(2, 3));
  EXPECT_EQ(back.table.at("k2")[0].prob, 1);
}

TEST(RandomizedMapFile, RejectsBadSums) {
  const auto path = temp_path("bad.jsonl");
  {
    std::ofstream out(path);
    out << R"({"key":"k","actions":[{"atoms":[1],"p":"1/2"}]})" << "\n";
  }
  EXPECT_THROW(load_randomized_map(path), ParseError);
  std::remove(path.c_str());
}

TEST(Reports, RowsSurviveJson) {
  CompetitiveReport rep;
  rep.map_name = "m";
  rep.universe = "u";
  rep.mode = "evaluate";
  rep.rho = Rational(5, 4);
  rep.certificate = Rational(27, 8);
  rep.exact = false;
  auto row = report_row_from_json(report_to_json(rep), "r");
  EXPECT_EQ(row.rho, Rational(5, 4));
  EXPECT_EQ(row.certificate, Rational(27, 8));
  EXPECT_FALSE(row.exact);
  EXPECT_THROW(report_row_from_json(Json::object(), "r"), ParseError);
}

TEST(Reports, TableSortsByUniverseThenRatio) {
  ReportRow a{"worse", "u", "evaluate", "grid", Rational(3, 2), Rational(4), true, 2};
  ReportRow b{"better", "u", "evaluate", "grid", Rational(1), Rational(4), true, 2};
  ReportRow c{"other", "a", "evaluate", "grid", Rational(2), Rational(4), false, 1};
  auto csv = comparison_table({a, b, c}, true);
  EXPECT_EQ(csv,
            "universe,map,mode,policy,exact,rho,certificate,ends\n"
            "a,other,evaluate,grid,no,2,4,1\n"
            "u,better,evaluate,grid,yes,1,4,2\n"
            "u,worse,evaluate,grid,yes,3/2,4,2\n");
  auto text = comparison_table({a, b}, false);
  EXPECT_LT(text.find("better"), text.find("worse"));
}
