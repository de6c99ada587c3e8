#ifndef MBDL_TOOLS_CONFIG_HPP
#define MBDL_TOOLS_CONFIG_HPP

// Schema validation for the JSON run configs. Every key must be declared;
// errors carry the JSON-pointer path of the offending value.

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace mbdl::tools {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : std::runtime_error("config error at " + (path.empty() ? std::string("/") : path) + ": " + what) {}
};

enum class Type { number, integer, unsigned_integer, boolean, string, object, numbers, integers, strings, edges, objects, weights };

struct Key;
using Schema = std::vector<Key>;

struct Key {
    std::string name;
    Type type;
    bool required = false;
    Schema fields = {};  ///< for object and objects
};

void validate(const nlohmann::json& value, const Schema& schema, const std::string& path = "");

nlohmann::json load_config(const std::string& path);

}  // namespace mbdl::tools

#endif  // MBDL_TOOLS_CONFIG_HPP
