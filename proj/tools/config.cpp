#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mbdl::tools {

using nlohmann::json;

namespace {

const char* type_name(Type t) {
    switch (t) {
        case Type::number: return "a number";
        case Type::integer: return "an integer";
        case Type::unsigned_integer: return "a nonnegative integer";
        case Type::boolean: return "a boolean";
        case Type::string: return "a string";
        case Type::object: return "an object";
        case Type::numbers: return "an array of numbers";
        case Type::integers: return "an array of integers";
        case Type::strings: return "an array of strings";
        case Type::edges: return "an array of [int, int] pairs";
        case Type::objects: return "an array of objects";
        case Type::weights: return "an object of number values";
    }
    return "?";
}

bool is_int(const json& v) { return v.is_number_integer(); }

void check(const json& v, const Key& key, const std::string& path) {
    bool ok = false;
    switch (key.type) {
        case Type::number: ok = v.is_number(); break;
        case Type::integer: ok = is_int(v); break;
        case Type::unsigned_integer: ok = v.is_number_unsigned() || (is_int(v) && v.get<long long>() >= 0); break;
        case Type::boolean: ok = v.is_boolean(); break;
        case Type::string: ok = v.is_string(); break;
        case Type::object:
            ok = v.is_object();
            if (ok) validate(v, key.fields, path);
            break;
        case Type::numbers:
            ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
            break;
        case Type::integers:
            ok = v.is_array() && std::all_of(v.begin(), v.end(), is_int);
            break;
        case Type::strings:
            ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
            break;
        case Type::edges:
            ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) {
                     return e.is_array() && e.size() == 2 && is_int(e[0]) && is_int(e[1]);
                 });
            break;
        case Type::objects:
            ok = v.is_array();
            if (ok)
                for (std::size_t k = 0; k < v.size(); ++k) {
                    if (!v[k].is_object())
                        throw ConfigError(path + "/" + std::to_string(k), "expected an object");
                    validate(v[k], key.fields, path + "/" + std::to_string(k));
                }
            break;
        case Type::weights:
            ok = v.is_object() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
            break;
    }
    if (!ok) throw ConfigError(path, std::string("expected ") + type_name(key.type));
}

}  // namespace

void validate(const json& value, const Schema& schema, const std::string& path) {
    if (!value.is_object()) throw ConfigError(path, "expected an object");
    for (const auto& [name, v] : value.items()) {
        const auto it = std::find_if(schema.begin(), schema.end(), [&](const Key& k) { return k.name == name; });
        if (it == schema.end()) throw ConfigError(path + "/" + name, "unknown key");
        check(v, *it, path + "/" + name);
    }
    for (const auto& key : schema)
        if (key.required && !value.contains(key.name)) throw ConfigError(path + "/" + key.name, "missing required key");
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    try {
        return json::parse(os.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("cannot parse '") + path + "': " + e.what());
    }
}

}  // namespace mbdl::tools
