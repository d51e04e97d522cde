#include "fascai/config.hpp"

#include <cstdlib>
#include <fstream>

#include "fascai/errors.hpp"

namespace fascai {

AppConfig parse_config(const Json& j)
{
    if (!j.is_object())
        throw ValidationError("config must be a JSON object");
    AppConfig c;
    c.schema_version = j.value("schema_version", kConfigSchemaVersion);
    if (c.schema_version != kConfigSchemaVersion)
        throw ValidationError("unsupported config schema_version " +
                              std::to_string(c.schema_version));
    try {
        c.experiment = j.get<ExperimentConfig>();
        if (j.contains("service")) {
            const Json& s = j.at("service");
            c.service.host = s.value("host", c.service.host);
            c.service.port = s.value("port", c.service.port);
            c.service.data_dir = s.value("data_dir", c.service.data_dir.string());
            c.service.min_think_ms = s.value("min_think_ms", c.service.min_think_ms);
        }
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed config: ") + e.what());
    }
    if (c.service.port < 0 || c.service.port > 65535)
        throw ValidationError("service port out of range");
    if (c.service.min_think_ms < 0)
        throw ValidationError("min_think_ms must be non-negative");
    return c;
}

AppConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot read config file " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw ValidationError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

Json config_to_json(const AppConfig& c)
{
    Json j = c.experiment;
    j["schema_version"] = c.schema_version;
    j["service"] = {{"host", c.service.host},
                    {"port", c.service.port},
                    {"data_dir", c.service.data_dir.string()},
                    {"min_think_ms", c.service.min_think_ms}};
    return j;
}

void apply_env_overrides(AppConfig& c)
{
    if (const char* port = std::getenv("FASCAI_PORT")) {
        try {
            c.service.port = std::stoi(port);
        } catch (const std::exception&) {
            throw ValidationError(std::string("FASCAI_PORT is not a number: ") + port);
        }
    }
    if (const char* dir = std::getenv("FASCAI_DATA_DIR"))
        c.service.data_dir = dir;
}

} // namespace fascai
