#include <doctest.h>

#include <sstream>

#include "altrec/baselines.hpp"
#include "altrec/error.hpp"
#include "support/temp_dir.hpp"

using namespace altrec;
using altrec::testing::TempDir;

namespace {

AttributeSchema toy_schema() {
  AttributeSchema s;
  AttributeSpec color{"color", AttributeSpec::Kind::categorical, {"red", "blue", "green"}};
  AttributeSpec capacity{"capacity", AttributeSpec::Kind::numerical, {}, 10.0, 30.0};
  s.attributes = {color, capacity};
  return s;
}

AttributeTable toy_table() {
  return {{"p1", {{"color", "red"}, {"capacity", "25.5"}}},
          {"p2", {{"color", "red"}, {"capacity", "10"}}},
          {"p3", {{"color", "blue"}, {"capacity", "30"}}},
          {"p4", {{"color", "green"}, {"capacity", "20"}}},
          {"p5", {{"color", "red"}, {"capacity", "30"}}},
          {"p6", {{"weight", "3"}}}};
}

const std::vector<std::string> kCatalog{"p1", "p2", "p3", "p4", "p5", "p6", "p7"};

}  // namespace

TEST_CASE("build_attribute_vectors") {
  const auto r = build_attribute_vectors(kCatalog, toy_table(), toy_schema());
  REQUIRE(r.vectors.size() == 5);
  CHECK(r.excluded == std::vector<std::string>{"p6", "p7"});
  CHECK(r.vectors[0].product_id == "p1");
  CHECK(std::vector<double>(r.vectors[0].values.begin(), r.vectors[0].values.begin() + 3) ==
        std::vector<double>{1, 0, 0});
  CHECK(r.vectors[0].values[3] == doctest::Approx(0.775).epsilon(1e-15));
  CHECK(r.vectors[2].values == std::vector<double>{0, 1, 0, 1});
  CHECK(r.unknown_values == 0);
}

TEST_CASE("attribute edge cases") {
  auto schema = toy_schema();
  SUBCASE("unknown categorical value maps to zeros and is counted") {
    const AttributeTable t{{"x", {{"color", "purple"}, {"capacity", "20"}}}};
    const auto r = build_attribute_vectors({"x"}, t, schema);
    REQUIRE(r.vectors.size() == 1);
    CHECK(r.vectors[0].values == std::vector<double>{0, 0, 0, 0.5});
    CHECK(r.unknown_values == 1);
  }
  SUBCASE("constant numerical attribute maps to zero") {
    schema.attributes[1].min = schema.attributes[1].max = 5.0;
    const AttributeTable t{{"x", {{"capacity", "5"}}}};
    CHECK(build_attribute_vectors({"x"}, t, schema).vectors[0].values == std::vector<double>{0, 0, 0, 0});
  }
  SUBCASE("schema round trip") {
    TempDir dir;
    schema.save(dir / "schema.csv");
    const auto loaded = AttributeSchema::load(dir / "schema.csv");
    REQUIRE(loaded.attributes.size() == 2);
    CHECK(loaded.attributes[0].values == schema.attributes[0].values);
    CHECK(loaded.attributes[1].kind == AttributeSpec::Kind::numerical);
    CHECK(loaded.attributes[1].max == 30.0);
    CHECK(loaded.dimension() == 4);
    save_attributes(dir / "attrs.csv", toy_table());
    CHECK(load_attributes(dir / "attrs.csv") == toy_table());
  }
}

TEST_CASE("attribute_recommend matches the brute-force cosine table") {
  const auto r = build_attribute_vectors(kCatalog, toy_table(), toy_schema());
  const AttributeRecommender rec(r.vectors);
  // Frozen from tests/oracles/attribute_cosine.py.
  const std::map<std::string, std::vector<std::pair<std::string, double>>> expected{
      {"p1", {{"p5", 0.99206142193743452}, {"p2", 0.79041505217524377}, {"p3", 0.433153578592401}, {"p4", 0.27395037700094765}}},
      {"p2", {{"p1", 0.79041505217524377}, {"p5", 0.70710678118654746}, {"p3", 0.0}, {"p4", 0.0}}},
      {"p3", {{"p5", 0.49999999999999989}, {"p1", 0.433153578592401}, {"p4", 0.31622776601683794}, {"p2", 0.0}}},
      {"p4", {{"p3", 0.31622776601683794}, {"p5", 0.31622776601683794}, {"p1", 0.27395037700094765}, {"p2", 0.0}}},
      {"p5", {{"p1", 0.99206142193743452}, {"p2", 0.70710678118654746}, {"p3", 0.49999999999999989}, {"p4", 0.31622776601683794}}}};
  for (const auto& [anchor, ranking] : expected) {
    CAPTURE(anchor);
    const auto recs = rec.recommend_or_throw(anchor, 10);
    REQUIRE(recs.size() == ranking.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(recs[i].anchor_id == anchor);
      CHECK(recs[i].neighbor_id == ranking[i].first);
      CHECK(recs[i].similarity == doctest::Approx(ranking[i].second).epsilon(1e-12));
      CHECK(recs[i].rank == static_cast<int>(i) + 1);
    }
  }
  CHECK(rec.recommend_or_throw("p1", 2).size() == 2);
  CHECK_THROWS_AS(rec.recommend_or_throw("p6", 5), NoCoverageError);
  CHECK(rec.recommend("p6", 5).empty());
  CHECK_FALSE(rec.covers("p7"));
}

TEST_CASE("identical attribute vectors rank first with similarity one") {
  const AttributeRecommender rec({{"a", {1, 0, 0.5}}, {"b", {1, 0, 0.5}}, {"c", {0, 1, 0.5}}});
  const auto recs = attribute_recommend("a", rec, 5);
  CHECK(recs[0].neighbor_id == "b");
  CHECK(recs[0].similarity == doctest::Approx(1.0));
  CHECK(recs[0].rank == 1);
}

TEST_CASE("co-compare counts") {
  SUBCASE("unordered aggregation") {
    const std::vector<ComparePair> stream{ComparePair::make("a", "b"), ComparePair::make("a", "b"),
                                          ComparePair::make("a", "b"), ComparePair::make("b", "a")};
    const auto c = build_cocompare_counts(stream);
    CHECK(c.count("a", "b") == 4);
    CHECK(c.count("b", "a") == 4);
    CHECK(c.count("a", "z") == 0);
  }
  SUBCASE("empty stream") { CHECK(build_cocompare_counts(std::vector<ComparePair>{}).empty()); }
  SUBCASE("single pair from a file") {
    TempDir dir;
    const auto c = build_cocompare_counts(dir.write("p.csv", "x,y,1\n"));
    CHECK(c.size() == 1);
    CHECK(c.count("y", "x") == 1);
  }
  SUBCASE("raw stream from a file keeps multiplicity") {
    TempDir dir;
    const auto c = build_cocompare_counts(dir.write("p.csv", "a,b,1\nb,a,1\na,b,1\na,b,0\n"));
    CHECK(c.count("a", "b") == 3);
  }
}

TEST_CASE("frequently_compared_recommend") {
  CoCompareCounts c;
  c.add(ComparePair::make("a", "b"), 5);
  c.add(ComparePair::make("a", "c"), 2);
  c.add(ComparePair::make("a", "e"), 2);
  c.add(ComparePair::make("a", "d"), 2);
  const auto recs = frequently_compared_recommend("a", c, 10);
  REQUIRE(recs.size() == 4);
  CHECK(recs[0] == Recommendation{"a", "b", 5.0, 1});
  CHECK(recs[1] == Recommendation{"a", "c", 2.0, 2});
  CHECK(recs[2].neighbor_id == "d");
  CHECK(recs[3].neighbor_id == "e");
  CHECK(frequently_compared_recommend("a", c, 2).size() == 2);
  CHECK(frequently_compared_recommend("never", c, 10).empty());
  const FrequentlyComparedRecommender rec(c);
  CHECK(rec.recommend("b", 10) == std::vector<Recommendation>{{"b", "a", 5.0, 1}});
}
