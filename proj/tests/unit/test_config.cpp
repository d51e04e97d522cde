#include <doctest.h>

#include <cstdlib>

#include "fascai/config.hpp"
#include "fascai/errors.hpp"

using namespace fascai;

TEST_CASE("config parse and defaults")
{
    const AppConfig c = parse_config(Json::parse(R"({"schema_version": 1, "seed": 3,
        "service": {"port": 9000, "data_dir": "/tmp/x", "min_think_ms": 1500}})"));
    CHECK(c.experiment.seed == 3);
    CHECK(c.service.port == 9000);
    CHECK(c.service.data_dir == "/tmp/x");
    CHECK(c.service.min_think_ms == 1500);
    CHECK(c.service.host == "127.0.0.1");
    CHECK(c.experiment.arms.size() == 3);

    const AppConfig back = parse_config(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("config errors")
{
    CHECK_THROWS_AS(parse_config(Json::parse(R"({"schema_version": 2})")), ValidationError);
    CHECK_THROWS_AS(parse_config(Json::parse(R"({"service": {"port": 70000}})")), ValidationError);
    CHECK_THROWS_AS(parse_config(Json::parse(R"({"seed": "x"})")), ValidationError);
    CHECK_THROWS_AS(parse_config(Json::parse(R"([1, 2])")), ValidationError);
    CHECK_THROWS_AS(load_config("/nonexistent/fascai.json"), ValidationError);
}

TEST_CASE("environment overrides")
{
    AppConfig c;
    ::setenv("FASCAI_PORT", "9123", 1);
    ::setenv("FASCAI_DATA_DIR", "/tmp/fascai-env", 1);
    apply_env_overrides(c);
    CHECK(c.service.port == 9123);
    CHECK(c.service.data_dir == "/tmp/fascai-env");
    ::setenv("FASCAI_PORT", "eighty", 1);
    CHECK_THROWS_AS(apply_env_overrides(c), ValidationError);
    ::unsetenv("FASCAI_PORT");
    ::unsetenv("FASCAI_DATA_DIR");
}
