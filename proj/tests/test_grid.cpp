#include "orthodeg/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace orthodeg;

namespace {

std::set<std::vector<double>> node_set(const TensorGrid& g) {
  std::set<std::vector<double>> s;
  for (int i = 0; i < g.num_nodes(); ++i) {
    const Point z = g.node(i);
    s.insert(std::vector<double>(z.data(), z.data() + z.size()));
  }
  return s;
}

}  // namespace

TEST(BuildGrid, Counting) {
  const TensorGrid g = build_grid(OrthantBox(2, 1, 1.0), {{2, 2}});
  EXPECT_EQ(g.num_nodes(), 9);
  EXPECT_EQ(g.num_cells(), 4);
}

TEST(BuildGrid, OneDimensionalTags) {
  const TensorGrid g = build_grid(OrthantBox(1, 1, 1.0), {{4}});
  ASSERT_EQ(g.num_nodes(), 5);
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(g.node(i)[0], 0.25 * i);
  EXPECT_TRUE(g.tag(0).on_sigma(0));
  EXPECT_FALSE(g.tag(0).outer);
  EXPECT_TRUE(g.tag(4).outer);
  EXPECT_FALSE(g.tag(4).on_sigma(0));
  EXPECT_TRUE(g.tag(2).interior());
}

TEST(BuildGrid, CornerCarriesBothTags) {
  const TensorGrid g = build_grid(OrthantBox(2, 2, 1.0), {{2, 2}});
  const NodeTag t = g.tag(g.node_index({0, 0, 0}));
  EXPECT_TRUE(t.on_sigma(0));
  EXPECT_TRUE(t.on_sigma(1));
  EXPECT_FALSE(t.outer);
}

TEST(BuildGrid, TagPartition) {
  const TensorGrid g = build_grid(OrthantBox(3, 2, 1.0), {{3, 4, 5}});
  for (int i = 0; i < g.num_nodes(); ++i) {
    const Point z = g.node(i);
    const NodeTag t = g.tag(i);
    bool boundary = std::abs(std::abs(z[0]) - 1.0) < 1e-15;
    for (int k = 1; k < 3; ++k) {
      EXPECT_EQ(t.on_sigma(k - 1), z[k] == 0.0);
      boundary = boundary || std::abs(z[k] - 1.0) < 1e-15;
    }
    EXPECT_EQ(t.outer, boundary);
  }
}

TEST(BuildGrid, GeometricGrading) {
  GridOptions o{{4, 6}, Grading::geometric, 0.7};
  const TensorGrid g = build_grid(OrthantBox(2, 1, 2.0), o);
  const Eigen::VectorXd& y = g.axis(1);
  EXPECT_DOUBLE_EQ(y[0], 0.0);
  EXPECT_DOUBLE_EQ(y[6], 2.0);
  for (int j = 1; j < 6; ++j) {
    const double w0 = y[j] - y[j - 1], w1 = y[j + 1] - y[j];
    EXPECT_NEAR(w0 / w1, 0.7, 1e-12);
  }
  EXPECT_LE(y[1] - y[0], 2.0 / 6);
  // Unweighted axis stays uniform.
  EXPECT_NEAR(g.axis(0)[1] - g.axis(0)[0], 1.0, 1e-15);
  EXPECT_THROW(build_grid(OrthantBox(1, 1, 1.0), {{4}, Grading::geometric, 1.5}), InvalidArgument);
  EXPECT_THROW(build_grid(OrthantBox(1, 1, 1.0), {{1}}), InvalidArgument);
}

TEST(BuildGrid, DefaultGrading) {
  WeightSpec w(2, (Eigen::VectorXd(1) << 1.0).finished(), Eigen::VectorXd::Zero(1));
  EXPECT_EQ(GridOptions::defaults_for(w, {4, 4}).grading, Grading::geometric);
  WeightSpec w2(2, (Eigen::VectorXd(1) << 0.2).finished(), Eigen::VectorXd::Zero(1));
  EXPECT_EQ(GridOptions::defaults_for(w2, {4, 4}).grading, Grading::uniform);
}

TEST(RestrictSubregion, Examples) {
  const OrthantBox box(2, 1, 1.0);
  const TensorGrid g = build_grid(box, {{8, 4}});
  const auto half = restrict_subregion(g, box.half_box());
  for (int idx : half) {
    const Point z = g.node(idx);
    EXPECT_LE(std::abs(z[0]), 0.5 + 1e-15);
    EXPECT_LE(z[1], 0.5 + 1e-15);
  }
  EXPECT_EQ(half.size(), 5u * 3u);
  EXPECT_EQ(restrict_subregion(g, box.box()).size(), static_cast<size_t>(g.num_nodes()));
  Box thin{Point(2), Point(2)};
  thin.lo << 0.01, 0.01;
  thin.hi << 0.11, 0.11;
  EXPECT_THROW(restrict_subregion(g, thin), EmptyRegion);
}

TEST(ReflectGrid, Examples) {
  const TensorGrid g = build_grid(OrthantBox(1, 1, 1.0), {{2}});
  const TensorGrid r = reflect_grid(g, 0);
  ASSERT_EQ(r.num_nodes(), 5);
  const double expect[] = {-1, -0.5, 0, 0.5, 1};
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(r.node(i)[0], expect[i]);
  EXPECT_TRUE(r.tag(0).outer);
  EXPECT_TRUE(r.tag(4).outer);
  EXPECT_EQ(node_set(reflect_grid(r, 0)), node_set(r));
}

TEST(ReflectGrid, CountAndTags) {
  const TensorGrid g = build_grid(OrthantBox(2, 2, 1.0), {{3, 4}});
  const TensorGrid r = reflect_grid(g, 1);
  const int interface = g.nodes_on_axis(0);
  EXPECT_EQ(r.num_nodes(), 2 * g.num_nodes() - interface);
  int tagged = 0;
  for (int i = 0; i < r.num_nodes(); ++i) {
    const Point z = r.node(i);
    EXPECT_EQ(r.tag(i).on_sigma(0), z[0] == 0.0);
    tagged += r.tag(i).on_sigma(0);
  }
  EXPECT_EQ(tagged, r.nodes_on_axis(1));
  // Symmetric as a node set.
  std::set<std::vector<double>> mirrored;
  for (const auto& v : node_set(r)) mirrored.insert({v[0], v[1] == 0.0 ? 0.0 : -v[1]});
  EXPECT_EQ(mirrored, node_set(r));
}

TEST(GridIO, RoundTrip) {
  GridOptions o{{3, 5}, Grading::geometric, 0.8};
  const TensorGrid g = reflect_grid(build_grid(OrthantBox(2, 1, 1.5), o), 0);
  std::stringstream ss;
  write_grid(ss, g);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  EXPECT_EQ(header, "2 1 1.5");
  const TensorGrid h = read_grid(ss);
  EXPECT_EQ(node_set(g), node_set(h));
  EXPECT_TRUE(h.reflected(1));
  std::stringstream bad("2 1\n");
  EXPECT_THROW(read_grid(bad), ParseError);
}
