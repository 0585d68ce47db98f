#include <gtest/gtest.h>

#include <numbers>

#include "tailsim/errors.hpp"
#include "tailsim/units.hpp"

using namespace tailsim;

TEST(Units, LengthSuffixes) {
  EXPECT_DOUBLE_EQ(parse_length("20mm"), 0.020);
  EXPECT_DOUBLE_EQ(parse_length("4.9cm"), 0.049);
  EXPECT_DOUBLE_EQ(parse_length("1.5m"), 1.5);
  EXPECT_DOUBLE_EQ(parse_length("-5mm"), -0.005);
  EXPECT_DOUBLE_EQ(parse_length(" 3 cm "), 0.03);
  EXPECT_DOUBLE_EQ(parse_length("1e1mm"), 0.01);
}

TEST(Units, ForceAndAngle) {
  EXPECT_DOUBLE_EQ(parse_force("4N"), 4.0);
  EXPECT_NEAR(parse_angle("180deg"), std::numbers::pi, 1e-15);
  EXPECT_DOUBLE_EQ(parse_angle("0.5rad"), 0.5);
}

TEST(Units, BareNumbersAreRejected) {
  EXPECT_THROW(parse_length("20"), ParseError);
  EXPECT_THROW(parse_force("3"), ParseError);
  EXPECT_THROW(parse_angle("90"), ParseError);
}

TEST(Units, UnknownOrWrongUnits) {
  EXPECT_THROW(parse_length("20in"), ParseError);
  EXPECT_THROW(parse_length("20N"), ParseError);
  EXPECT_THROW(parse_force("2kg"), ParseError);
  EXPECT_THROW(parse_length("mm"), ParseError);
  EXPECT_THROW(parse_length(""), ParseError);
  EXPECT_THROW(parse_length("1.2.3mm"), ParseError);
}
