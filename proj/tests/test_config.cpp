#include <catch2/catch_amalgamated.hpp>

#include "scatstab/config.hpp"
#include "scatstab/experiments.hpp"

using namespace scatstab;

TEST_CASE("nested key-value parsing") {
    const std::string text =
        "# header comment\n"
        "experiment = sharpness\n"
        "grid {\n"
        "  dim = 1      # trailing comment\n"
        "  extent = 64\n"
        "  spacing = 0.125\n"
        "}\n"
        "list = 1 2.5 -3\n";
    const ConfigNode root = parse_config_text(text);
    ConfigCursor c(root, "");
    REQUIRE(c.get_string("experiment") == "sharpness");
    ConfigCursor g = c.block("grid");
    REQUIRE(g.get_int("dim") == 1);
    REQUIRE(g.get_int("extent") == 64);
    REQUIRE(g.get_double("spacing") == 0.125);
    g.finish();
    const std::vector<double> xs = c.get_doubles("list");
    REQUIRE(xs == std::vector<double>{1.0, 2.5, -3.0});
    c.finish();
}

TEST_CASE("repeated blocks are collected in order") {
    const ConfigNode root = parse_config_text(
        "module {\n  a = 1\n}\nmodule {\n  a = 2\n}\n");
    ConfigCursor c(root, "");
    auto blocks = c.blocks("module");
    REQUIRE(blocks.size() == 2);
    REQUIRE(blocks[0].get_int("a") == 1);
    REQUIRE(blocks[1].get_int("a") == 2);
    c.finish();
}

TEST_CASE("parse errors carry line numbers") {
    REQUIRE_THROWS_WITH(parse_config_text("a = 1\nnonsense\n"),
                        Catch::Matchers::ContainsSubstring("line 2"));
    REQUIRE_THROWS_WITH(parse_config_text("block {\n a = 1\n"),
                        Catch::Matchers::ContainsSubstring("unterminated"));
    REQUIRE_THROWS_WITH(parse_config_text("}\n"), Catch::Matchers::ContainsSubstring("unmatched"));
    REQUIRE_THROWS_WITH(parse_config_text("a =\n"), Catch::Matchers::ContainsSubstring("empty value"));
    REQUIRE_THROWS_WITH(parse_config_text("3bad = 1\n"), Catch::Matchers::ContainsSubstring("bad key"));
}

TEST_CASE("unknown keys are errors") {
    const ConfigNode root = parse_config_text("a = 1\nmystery = 2\n");
    ConfigCursor c(root, "");
    REQUIRE(c.get_int("a") == 1);
    REQUIRE_THROWS_WITH(c.finish(), Catch::Matchers::ContainsSubstring("unknown key 'mystery'"));
}

TEST_CASE("typed accessors validate their input") {
    const ConfigNode root = parse_config_text("n = 3.7\nflag = maybe\n");
    ConfigCursor c(root, "");
    REQUIRE_THROWS_AS(c.get_int("n"), ConfigError);
    ConfigCursor c2(root, "");
    REQUIRE(c2.get_double("n") == 3.7);
    REQUIRE_THROWS_AS(c2.get_bool("flag", false), ConfigError);
}

TEST_CASE("experiment specs apply per-kind window defaults") {
    const std::string text =
        "experiment = sharpness\n"
        "grid {\n  dim = 1\n  extent = 64\n  spacing = 0.125\n}\n"
        "signal {\n  kind = cartoon\n"
        "  f2 {\n    kind = constant\n    value = 1\n  }\n"
        "  domain {\n    kind = interval\n    lo = -1\n    hi = 1\n  }\n"
        "}\n";
    const ExperimentSpec spec = parse_experiment(parse_config_text(text));
    REQUIRE(spec.kind == ExperimentKind::sharpness);
    REQUIRE(spec.windows.alpha_min.value() == Catch::Approx(0.45));
    REQUIRE(spec.windows.alpha_max.value() == Catch::Approx(0.55));
    REQUIRE(spec.extractor.is_identity());
    REQUIRE(spec.deformation.ladder_count == 7);  // default ladder
}

TEST_CASE("spec validation failures are config errors") {
    // non-power-of-two extent
    REQUIRE_THROWS_AS(parse_experiment(parse_config_text(
                          "experiment = deform\n"
                          "grid {\n  dim = 1\n  extent = 100\n  spacing = 0.1\n}\n"
                          "signal {\n  kind = smooth\n  f {\n    kind = zero\n  }\n}\n")),
                      ConfigError);
    // unknown experiment
    REQUIRE_THROWS_AS(parse_experiment(parse_config_text(
                          "experiment = banana\n"
                          "grid {\n  dim = 1\n  extent = 64\n  spacing = 0.1\n}\n"
                          "signal {\n  kind = smooth\n  f {\n    kind = zero\n  }\n}\n")),
                      ConfigError);
}
