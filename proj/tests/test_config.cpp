#include <gtest/gtest.h>

#include "xgnn/presets.hpp"

using namespace xgnn;

namespace {

Config with_text(const std::string& preset, const std::string& text) {
  Config c = preset_defaults(preset);
  for (const auto& [k, v] : parse_config_text(text)) c.set(k, v);
  return resolve_config(c);
}

}  // namespace

TEST(ConfigParse, ValuesAndComments) {
  auto kv = parse_config_text("# header\nseed = 7  # trailing\n\n[form]\ndelta = 100\nbeta = [1, 2.5]\n");
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv[0].first, "seed");
  EXPECT_EQ(kv[1].first, "form.delta");
  EXPECT_EQ(kv[2].second, "[1, 2.5]");
  Value v = parse_value("form.beta", "[1, 2.5]");
  EXPECT_EQ(v.list, (std::vector<double>{1.0, 2.5}));
}

TEST(ConfigParse, UnknownKeyNamed) {
  try {
    parse_config_text("train.widht0 = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.widht0"), std::string::npos);
  }
}

TEST(ConfigParse, TypeMismatch) {
  EXPECT_THROW(parse_value("seed", "1.5"), ConfigError);
  EXPECT_THROW(parse_value("form.delta", "big"), ConfigError);
  EXPECT_THROW(parse_value("train.split_knowledge", "maybe"), ConfigError);
  EXPECT_THROW(parse_value("form.beta", "[1, x]"), ConfigError);
  EXPECT_THROW(parse_config_text("seed 3\n"), ConfigError);
}

TEST(ConfigParse, Infinity) {
  EXPECT_TRUE(std::isinf(parse_value("train.tol", "inf").r));
  EXPECT_EQ(format_value(parse_value("train.tol", "inf")), "inf");
}

TEST(Presets, EmptyFileGivesPresetDefaults) {
  Config c = with_text("example_3_2", "");
  EXPECT_EQ(c.get_int("train.width0"), 20);
  EXPECT_DOUBLE_EQ(c.get_real("train.width_growth"), 2.0);
  EXPECT_EQ(c.get_int("train.depth"), 1);
  EXPECT_DOUBLE_EQ(c.get_real("train.lr0"), 4e-3);
  EXPECT_DOUBLE_EQ(c.get_real("train.lr_decay"), 1.1);
  EXPECT_DOUBLE_EQ(c.get_real("form.delta"), 1e3);
  EXPECT_EQ(c.get_list("form.beta"), std::vector<double>{4.0 / 3.0});
  EXPECT_EQ(c.get_string("knowledge.family"), "poisson_corner");
  EXPECT_EQ(c.get_int("knowledge.count"), 20);
  EXPECT_EQ(c.get_int("quad.interior_n"), 128);
  EXPECT_EQ(c.get_int("quad.boundary_n"), 128);
  KnowledgeConfig k = knowledge_from_config(c);
  ASSERT_EQ(k.fixed.size(), 20u);
  for (int j = 0; j < 20; ++j) EXPECT_NEAR(k.fixed[j].mu.real(), 2.0 * (j + 1) / 3.0, 1e-15);
}

TEST(Presets, DeltaOverride) {
  EXPECT_DOUBLE_EQ(with_text("example_3_2", "form.delta = 100\n").get_real("form.delta"), 100.0);
}

TEST(Presets, NegativeInteriorRejected) {
  EXPECT_THROW(with_text("example_3_2", "quad.interior_n = -1\n"), ConfigError);
}

TEST(Presets, UnknownPreset) { EXPECT_THROW(preset_defaults("example_9_9"), ConfigError); }

TEST(Presets, Example22PenaltyIsMToTheTwoS) {
  Config c = with_text("example_2_2", "problem.m = 16\nproblem.s = 1.5\n");
  EXPECT_DOUBLE_EQ(c.get_real("form.delta"), 4096.0);
  EXPECT_EQ(c.get_string("quad.boundary_scheme"), "riemann");
  EXPECT_DOUBLE_EQ(with_text("example_2_2", "problem.s = 0\n").get_real("form.delta"), 1.0);
  // explicit delta wins
  EXPECT_DOUBLE_EQ(with_text("example_2_2", "problem.m = 4\nform.delta = 9\n").get_real("form.delta"), 9.0);
}

TEST(Presets, Example34Knowledge) {
  Config c = with_text("example_3_4", "");
  EXPECT_EQ(c.get_list("form.beta"), std::vector<double>{5.0 / 3.0});
  KnowledgeConfig k = knowledge_from_config(c);
  ASSERT_EQ(k.fixed.size(), 3u);
  EXPECT_NEAR(k.fixed[0].mu.real(), 1.58223, 1e-5);
  EXPECT_NEAR(k.fixed[1].mu.real(), 1.58223, 1e-5);
  EXPECT_NEAR(k.fixed[2].mu.real(), 7.56813, 1e-3);
  EXPECT_NEAR(k.fixed[2].mu.imag(), 3.37941, 1e-3);
  for (const auto& t : k.fixed) EXPECT_TRUE(t.cutoff.has_value());
}

TEST(Presets, Example41TrainableUniform) {
  Config c = with_text("example_4_1", "");
  TrainConfig t = train_from_config(c);
  EXPECT_TRUE(t.knowledge.enabled);
  EXPECT_TRUE(t.knowledge.trainable);
  EXPECT_DOUBLE_EQ(t.knowledge.init_lo, 0.0);
  EXPECT_DOUBLE_EQ(t.knowledge.init_hi, 1.0);
  EXPECT_DOUBLE_EQ(t.knowledge.mu_lr_scale, 20.0);
  EXPECT_DOUBLE_EQ(t.knowledge.mu_min_re, 0.05);
}

TEST(Presets, TrainableDirichletRejected) {
  EXPECT_THROW(with_text("example_3_4", "knowledge.mode = trainable\n"), ConfigError);
}

TEST(Presets, FamilyMustMatchProblem) {
  EXPECT_THROW(with_text("example_3_2", "knowledge.family = stokes_noslip\n"), ConfigError);
}

TEST(Presets, AllLoad) {
  for (const auto& name : preset_names()) {
    Config c = preset_defaults(name);
    c.set_int("quad.interior_n", 4);
    c.set_int("quad.boundary_n", 4);
    Preset p = load_preset(c);
    EXPECT_EQ(p.name, name);
    xgnn::Setup s = make_setup(p);
    EXPECT_GT(s.map.size(), 0);
    EXPECT_EQ(s.has_exact, name == "example_2_2" || name == "example_3_1") << name;
  }
}

TEST(Presets, ChannelDataIsCompatible) {
  Config c = preset_defaults("example_3_4");
  c.set_int("quad.interior_n", 16);
  c.set_int("quad.boundary_n", 64);
  Preset p = load_preset(c);
  xgnn::Setup s = make_setup(p);
  EXPECT_NEAR(compatibility_defect(p.data, s.q, s.b), 0.0, 1e-12);
}

TEST(ConfigEmit, RoundTrip) {
  for (const auto& name : preset_names()) {
    Config a = with_text(name, "seed = 3\ntrain.tol = inf\n");
    Config b = preset_defaults(name);
    for (const auto& [k, v] : parse_config_text(emit_config(a))) b.set(k, v);
    b = resolve_config(b);
    EXPECT_TRUE(a == b) << name;
    EXPECT_EQ(emit_config(a), emit_config(b));
  }
}

TEST(ConfigEmit, SortedAndFullPrecision) {
  Config c = with_text("example_3_2", "train.lr0 = 0.1\n");
  const std::string text = emit_config(c);
  EXPECT_NE(text.find("train.lr0 = 0.10000000000000001"), std::string::npos);
  EXPECT_LT(text.find("form.beta"), text.find("form.delta"));
  EXPECT_LT(text.find("form.delta"), text.find("train.lr0"));
}
