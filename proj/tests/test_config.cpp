#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "dupin/config.hpp"

using namespace dupin;

TEST_CASE("key-value parsing") {
    std::istringstream in(
        "# sampling\n"
        "grid = 24\n"
        "\n"
        "  tol=1e-6   # trailing comment\n"
        "fd_step = 1e-5\n"
        "grid = 32\n");
    const ConfigMap cfg = parse_config(in, "inline");
    REQUIRE(cfg.entries.size() == 4);
    REQUIRE(cfg.has("grid"));
    REQUIRE(cfg.get("grid", "") == "32");  // later lines override
    REQUIRE(cfg.get("tol", "") == "1e-6");
    // Underscores normalize to dashes.
    REQUIRE(cfg.has("fd-step"));
    REQUIRE(cfg.get("fd-step", "") == "1e-5");
    REQUIRE_FALSE(cfg.has("seed"));
    REQUIRE(cfg.get("seed", "fallback") == "fallback");
}

TEST_CASE("typed getters") {
    std::istringstream in(
        "tol = 2.5e-4\n"
        "grid = 18\n"
        "seed = 0x63\n"
        "plain-seed = 99\n"
        "richardson = on\n"
        "validate = false\n"
        "bad-int = 2.5\n"
        "bad-double = 1.5x\n"
        "bad-bool = yes\n");
    const ConfigMap cfg = parse_config(in, "inline");
    REQUIRE(cfg.get_double("tol", 0.0) == Catch::Approx(2.5e-4));
    REQUIRE(cfg.get_int("grid", 0) == 18);
    REQUIRE(cfg.get_seed("seed", 0) == 99);  // hex accepted
    REQUIRE(cfg.get_seed("plain-seed", 0) == 99);
    REQUIRE(cfg.get_bool("richardson", false));
    REQUIRE_FALSE(cfg.get_bool("validate", true));
    REQUIRE(cfg.get_double("missing", 7.5) == 7.5);
    REQUIRE(cfg.get_seed("missing", 42) == 42);
    REQUIRE_THROWS_AS(cfg.get_int("bad-int", 0), invalid_input);
    REQUIRE_THROWS_AS(cfg.get_double("bad-double", 0.0), invalid_input);
    REQUIRE_THROWS_AS(cfg.get_bool("bad-bool", false), invalid_input);
}

TEST_CASE("values are kept verbatim") {
    // Keys normalize; values do not, so a mixed-case boolean is rejected
    // rather than guessed at.
    std::istringstream in("flag = FALSE\n");
    const ConfigMap cfg = parse_config(in, "inline");
    REQUIRE(cfg.get("flag", "") == "FALSE");
    REQUIRE_THROWS_AS(cfg.get_bool("flag", true), invalid_input);
}

TEST_CASE("malformed lines point at their location") {
    std::istringstream in(
        "grid = 4\n"
        "# fine\n"
        "this line has no equals sign\n");
    try {
        parse_config(in, "sample.cfg");
        FAIL("expected a parse error");
    } catch (const invalid_input& e) {
        const std::string msg = e.what();
        REQUIRE(msg.find("sample.cfg:3") != std::string::npos);
    }
}

TEST_CASE("key charset is restricted") {
    std::istringstream spaces("my key = 3\n");
    REQUIRE_THROWS_AS(parse_config(spaces, "inline"), invalid_input);
    std::istringstream symbols("grid! = 3\n");
    REQUIRE_THROWS_AS(parse_config(symbols, "inline"), invalid_input);
    std::istringstream empty_val("grid =   \n");
    REQUIRE_THROWS_AS(parse_config(empty_val, "inline"), invalid_input);
    // Upper case normalizes to lower case rather than erroring.
    std::istringstream upper("GRID = 3\n");
    REQUIRE(parse_config(upper, "inline").get_int("grid", 0) == 3);
}

TEST_CASE("file loading") {
    REQUIRE_THROWS_AS(load_config("/nonexistent/path.cfg"), invalid_input);
}
