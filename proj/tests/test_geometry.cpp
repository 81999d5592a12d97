#include <gtest/gtest.h>

#include "xgnn/geometry.hpp"

using namespace xgnn;

TEST(Domains, LShapeCorner) {
  Domain d = make_preset_domain("lshape");
  ASSERT_EQ(d.corners.size(), 1u);
  EXPECT_DOUBLE_EQ(d.corners[0].alpha, 1.5 * kPi);
  EXPECT_EQ(d.corners[0].vertex, Point(0, 0));
  EXPECT_DOUBLE_EQ(d.area, 3.0);
  EXPECT_DOUBLE_EQ(d.perimeter(), 8.0);
}

TEST(Domains, ChannelCavityBottomCorner) {
  Domain d = make_preset_domain("channel_cavity");
  const Corner& c = d.corners.at(2);
  EXPECT_EQ(c.vertex, Point(0, -3));
  EXPECT_NEAR(c.alpha, 0.6435011087932844, 1e-14);
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(d.corners[k].alpha, kPi + std::atan(3.0), 1e-14);
}

TEST(Domains, SectorCorner) {
  Domain d = make_preset_domain("sector");
  ASSERT_EQ(d.corners.size(), 1u);
  EXPECT_NEAR(d.corners[0].alpha, kPi + std::acos(1.0 / std::sqrt(10.0)), 1e-15);
  EXPECT_TRUE(d.inside(Point(0.5, 0.1)));
  EXPECT_TRUE(d.inside(Point(-0.5, 0.1)));
  EXPECT_FALSE(d.inside(Point(0.5, -0.1)));
}

TEST(Domains, UnknownNameThrows) { EXPECT_THROW(make_preset_domain("triangle"), ConfigError); }

TEST(LocalPolar, VertexIsOrigin) {
  Domain d = make_preset_domain("lshape");
  Polar p = local_polar(Point(0, 0), d.corners[0]);
  EXPECT_EQ(p.r, 0.0);
  EXPECT_EQ(p.theta, 0.0);
}

TEST(LocalPolar, LShapeFrame) {
  const Corner c = make_preset_domain("lshape").corners[0];
  Polar a = local_polar(Point(0, -1), c);
  EXPECT_NEAR(a.r, 1.0, 1e-15);
  EXPECT_NEAR(a.theta, 0.0, 1e-15);
  Polar b = local_polar(Point(-1, 0), c);
  EXPECT_NEAR(b.theta, 1.5 * kPi, 1e-15);
  Polar m = local_polar(Point(1, 0), c);
  EXPECT_NEAR(m.theta, 0.5 * kPi, 1e-15);
}

TEST(LocalPolar, ThetaInsideWedge) {
  Domain d = make_preset_domain("lshape");
  for (double x : {0.3, 0.9})
    for (double y : {-0.8, 0.2, 0.7}) {
      Polar p = local_polar(Point(x, y), d.corners[0]);
      EXPECT_GT(p.theta, 0.0);
      EXPECT_LT(p.theta, d.corners[0].alpha);
    }
}

TEST(Cutoff, PlateauAndSupport) {
  Cutoff c{0.5, 1.0};
  auto in = cutoff_eval(0.25, c);
  EXPECT_EQ(in[0], 1.0);
  EXPECT_EQ(in[1], 0.0);
  EXPECT_EQ(in[2], 0.0);
  auto out = cutoff_eval(2.0, c);
  EXPECT_EQ(out[0], 0.0);
  EXPECT_EQ(out[1], 0.0);
}

TEST(Cutoff, Midpoint) {
  Cutoff c{0.5, 1.0};
  auto m = cutoff_eval(0.75, c);
  EXPECT_NEAR(m[0], 0.5, 1e-15);
  EXPECT_NEAR(m[1], -1.875 / 0.5, 1e-13);
}

TEST(Cutoff, DerivativesMatchFiniteDifferences) {
  Cutoff c{0.4, 1.3};
  const double h = 1e-5;
  for (double r = 0.3; r < 1.4; r += 0.0371) {
    auto f = cutoff_eval_full(r, c);
    auto p = cutoff_eval_full(r + h, c), m = cutoff_eval_full(r - h, c);
    for (int k = 0; k < 3; ++k) {
      const double fd = (p[k] - m[k]) / (2 * h);
      EXPECT_NEAR(fd, f[k + 1], 1e-6 * std::max(1.0, std::abs(f[k + 1]))) << "r=" << r << " k=" << k;
    }
  }
}

TEST(Cutoff, ContinuousAtJunctions) {
  Cutoff c{0.5, 1.0};
  for (double r : {c.r0, c.r1}) {
    auto a = cutoff_eval_full(r - 1e-9, c), b = cutoff_eval_full(r + 1e-9, c);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(a[k], b[k], 1e-6);
  }
}
