#include "scenario.hpp"

#include "scenario_schema.hpp"

#include <cmath>

namespace nhlab::cli {

using nlohmann::json;

namespace {

bool has_type(const json &v, const std::string &type) {
    if (type == "object") {
        return v.is_object();
    }
    if (type == "array") {
        return v.is_array();
    }
    if (type == "string") {
        return v.is_string();
    }
    if (type == "boolean") {
        return v.is_boolean();
    }
    if (type == "null") {
        return v.is_null();
    }
    if (type == "number") {
        return v.is_number();
    }
    if (type == "integer") {
        if (v.is_number_integer()) {
            return true;
        }
        return v.is_number_float() && std::floor(v.get<double>()) == v.get<double>();
    }
    throw std::logic_error("schema uses unsupported type '" + type + "'");
}

std::string at(const std::string &ptr) { return ptr.empty() ? "/" : ptr; }

void check(const json &v, const json &schema, const std::string &ptr, std::vector<std::string> &out) {
    if (schema.contains("type")) {
        const auto &t = schema["type"];
        bool ok = false;
        if (t.is_array()) {
            for (const auto &alt : t) {
                ok = ok || has_type(v, alt.get<std::string>());
            }
        } else {
            ok = has_type(v, t.get<std::string>());
        }
        if (!ok) {
            out.push_back(at(ptr) + ": expected " + t.dump() + ", got " + v.type_name());
            return;
        }
    }
    if (schema.contains("const") && v != schema["const"]) {
        out.push_back(at(ptr) + ": must equal " + schema["const"].dump());
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto &e : schema["enum"]) {
            found = found || e == v;
        }
        if (!found) {
            out.push_back(at(ptr) + ": " + v.dump() + " is not one of " + schema["enum"].dump());
        }
    }
    if (v.is_number()) {
        const double x = v.get<double>();
        if (schema.contains("minimum") && x < schema["minimum"].get<double>()) {
            out.push_back(at(ptr) + ": " + v.dump() + " is below the minimum " + schema["minimum"].dump());
        }
        if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>()) {
            out.push_back(at(ptr) + ": " + v.dump() + " must be greater than " + schema["exclusiveMinimum"].dump());
        }
    }
    if (v.is_object()) {
        const json props = schema.value("properties", json::object());
        for (const auto &name : schema.value("required", json::array())) {
            if (!v.contains(name.get<std::string>())) {
                out.push_back(at(ptr) + ": missing required key '" + name.get<std::string>() + "'");
            }
        }
        for (const auto &[key, child] : v.items()) {
            const std::string child_ptr = ptr + "/" + key;
            if (props.contains(key)) {
                check(child, props[key], child_ptr, out);
            } else if (schema.contains("additionalProperties")) {
                const auto &extra = schema["additionalProperties"];
                if (extra.is_boolean() && !extra.get<bool>()) {
                    out.push_back(at(ptr) + ": unknown key '" + key + "'");
                } else if (extra.is_object()) {
                    check(child, extra, child_ptr, out);
                }
            }
        }
    }
    if (v.is_array()) {
        if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>()) {
            out.push_back(at(ptr) + ": needs at least " + schema["minItems"].dump() + " items");
        }
        if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>()) {
            out.push_back(at(ptr) + ": allows at most " + schema["maxItems"].dump() + " items");
        }
        if (schema.contains("items")) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                check(v[i], schema["items"], ptr + "/" + std::to_string(i), out);
            }
        }
    }
}

} // namespace

const json &scenario_schema() {
    static const json schema = json::parse(kScenarioSchemaText);
    return schema;
}

std::vector<std::string> validate_json(const json &doc, const json &schema) {
    std::vector<std::string> out;
    check(doc, schema, "", out);
    return out;
}

} // namespace nhlab::cli
