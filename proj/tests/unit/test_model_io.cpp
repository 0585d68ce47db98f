#include <gtest/gtest.h>

#include <cstdlib>

#include "support.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/model_io.hpp"

using namespace tailsim;

TEST(ModelIo, ShippedFileMatchesBuiltIn) {
  const auto m = load_model(test::data_path("default_tail.json"));
  EXPECT_EQ(model_hash(m), model_hash(default_tail()));
}

TEST(ModelIo, RoundTrip) {
  auto c = default_config();
  c.kappa = 0.37;
  c.base_angle_deg = 5.0;
  const auto text = dump_model_config(c);
  EXPECT_EQ(parse_model_config(text), c);
}

TEST(ModelIo, Errors) {
  EXPECT_THROW(parse_model_config("{"), ParseError);
  EXPECT_THROW(parse_model_config("[]"), ParseError);
  EXPECT_THROW(parse_model_config(R"({"kappa": 1})"), ParseError);
  EXPECT_THROW(load_model("/definitely/not/here.json"), EnvironmentError);
}

TEST(ModelIo, ResolveOrder) {
  test::TempDir dir;
  auto c = default_config();
  c.kappa = 2.0;
  test::spit(dir / "m.json", dump_model_config(c));
  EXPECT_DOUBLE_EQ(resolve_model((dir / "m.json").string()).stiffness_coefficient, 2.0);
  ::setenv("TAILSIM_MODEL", (dir / "m.json").string().c_str(), 1);
  EXPECT_DOUBLE_EQ(resolve_model("").stiffness_coefficient, 2.0);
  ::unsetenv("TAILSIM_MODEL");
  EXPECT_DOUBLE_EQ(resolve_model("").stiffness_coefficient, 1.0);
}

TEST(ModelIo, InvalidModelFileNamesRule) {
  test::TempDir dir;
  auto c = default_config();
  c.regions[2].rubber_mm = 2.0;
  test::spit(dir / "bad.json", dump_model_config(c));
  try {
    load_model(dir / "bad.json");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("stiffness ordering"), std::string::npos) << e.what();
  }
}
