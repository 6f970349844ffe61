#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "parastab/config.hpp"

using namespace parastab;

TEST_CASE("INI parsing basics") {
  const ConfigFile cfg = ConfigFile::parse(
      "# comment line\n"
      "[time]\n"
      "T = 8\n"
      "steps = 400\n"
      "\n"
      "[physics]\n"
      "nu = 0.25\n"
      "lambda = 2\n"
      "[coefficients]\n"
      "a = \"-sin(t)*cos(x1) - 3\"  \n"
      "[flags]\n"
      "verbose = true\n");
  CHECK(cfg.num("time", "T") == 8.0);
  CHECK(cfg.integer("time", "steps") == 400);
  CHECK(cfg.num("physics", "nu") == 0.25);
  CHECK(cfg.flag_or("flags", "verbose", false));
  CHECK(cfg.flag_or("flags", "quiet", true));
  const Expr a = cfg.expr("coefficients", "a");
  CHECK(eval(a, 0.0, 0.0, 0.0) == doctest::Approx(-3.0));
  CHECK(cfg.get_or("physics", "missing", "fallback") == "fallback");
}

TEST_CASE("missing sections and keys are diagnosed") {
  const ConfigFile cfg = ConfigFile::parse("[mesh]\nrings = 4\n");
  try {
    cfg.require_section("time");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("missing section [time]") != std::string::npos);
    CHECK(e.section == "time");
  }
  CHECK_THROWS_AS(cfg.get("mesh", "refine"), ConfigError);
  CHECK_THROWS_AS(cfg.num("mesh", "refine"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("key = value\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("[time\n"), ConfigError);
}

TEST_CASE("type errors carry section and key") {
  const ConfigFile cfg = ConfigFile::parse("[time]\nT = abc\n");
  try {
    cfg.num("time", "T");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.section == "time");
    CHECK(e.key == "T");
  }
}

TEST_CASE("overrides") {
  ConfigFile cfg = ConfigFile::parse("[time]\nT = 8\n");
  cfg.apply_override("time.T=4");
  cfg.apply_override("mesh.rings=6");
  CHECK(cfg.num("time", "T") == 4.0);
  CHECK(cfg.integer("mesh", "rings") == 6);
  CHECK_THROWS_AS(cfg.apply_override("nodotorequals"), ConfigError);
  // hash changes with content
  ConfigFile other = ConfigFile::parse("[time]\nT = 8\n");
  CHECK(cfg.hash() != other.hash());
  CHECK(cfg.hash() == cfg.hash());
}

TEST_CASE("coefficient family substitutes the six integers") {
  const CoefficientField f = family_coefficients(2, -1, 1, -3, 5, 1);
  const double t = 0.7, x1 = 0.3, x2 = -0.4;
  CHECK(eval(f.a, t, x1, x2) ==
        doctest::Approx(-std::sin(t) * std::cos(2 * x1) +
                        std::sin(5 * t) * std::sin(-x2) - 3.0)
            .epsilon(1e-14));
  CHECK(eval(f.b1, t, x1, x2) ==
        doctest::Approx(std::cos(t) * std::sin(-x1) -
                        std::cos(3 * t) * std::cos(-3 * x2))
            .epsilon(1e-14));
  CHECK(eval(f.b2, t, x1, x2) ==
        doctest::Approx(std::sin(-t) * std::sin(5 * x1) -
                        std::cos(2 * t) * std::sin(x2))
            .epsilon(1e-14));
}

TEST_CASE("coefficients section accepts family or explicit expressions") {
  const ConfigFile fam = ConfigFile::parse("[coefficients]\nfamily = 1 1 1 1 1 1\n");
  const CoefficientField f = coefficients_from_config(fam);
  CHECK(eval(f.a, 0, 0, 0) == doctest::Approx(-3.0));

  const ConfigFile expl = ConfigFile::parse(
      "[coefficients]\na = \"1 - x1\"\nb1 = \"x2\"\nb2 = \"0\"\n");
  const CoefficientField g = coefficients_from_config(expl);
  CHECK(eval(g.a, 0, 0.25, 0) == doctest::Approx(0.75));
  CHECK(eval(g.b1, 0, 0, -2) == doctest::Approx(-2.0));

  CHECK_THROWS_AS(coefficients_from_config(ConfigFile::parse("[mesh]\nrings=3\n")),
                  ConfigError);
  CHECK_THROWS_AS(
      coefficients_from_config(ConfigFile::parse("[coefficients]\nfamily = 1 2\n")),
      ConfigError);
}
