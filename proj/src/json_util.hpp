#pragma once

#include "ipnv/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

namespace ipnv::detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline json parse_json(std::string_view bytes)
{
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw ValidationError("", std::string("JSON parse error at byte ") + std::to_string(e.byte) + ": " +
                                      e.what());
    }
}

inline std::string child_path(const std::string& path, std::string_view key)
{
    return path + "/" + std::string(key);
}

inline std::string child_path(const std::string& path, std::size_t index)
{
    return path + "/" + std::to_string(index);
}

inline std::string display_path(const std::string& path)
{
    return path.empty() ? "/" : path;
}

inline void expect_object(const json& value, const std::string& path)
{
    if (!value.is_object()) {
        throw ValidationError(display_path(path), "expected an object");
    }
}

inline const json& require(const json& obj, std::string_view key, const std::string& path)
{
    expect_object(obj, path);
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ValidationError(display_path(path), "missing field \"" + std::string(key) + "\"");
    }
    return *it;
}

inline const json& require_array(const json& obj, std::string_view key, const std::string& path)
{
    const json& v = require(obj, key, path);
    if (!v.is_array()) {
        throw ValidationError(child_path(path, key), "expected an array");
    }
    return v;
}

inline const json& require_object(const json& obj, std::string_view key, const std::string& path)
{
    const json& v = require(obj, key, path);
    expect_object(v, child_path(path, key));
    return v;
}

// Files may carry numbers either as JSON numbers or as numeric strings.
inline double to_number(const json& v, const std::string& path)
{
    double out = 0.0;
    if (v.is_number()) {
        out = v.get<double>();
    } else if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
            throw ValidationError(path, "\"" + s + "\" is not a number");
        }
    } else {
        throw ValidationError(path, "expected a number");
    }
    if (!std::isfinite(out)) {
        throw ValidationError(path, "number is not finite");
    }
    return out;
}

inline double require_number(const json& obj, std::string_view key, const std::string& path)
{
    return to_number(require(obj, key, path), child_path(path, key));
}

inline std::string require_string(const json& obj, std::string_view key, const std::string& path)
{
    const json& v = require(obj, key, path);
    if (!v.is_string()) {
        throw ValidationError(child_path(path, key), "expected a string");
    }
    return v.get<std::string>();
}

inline std::string dump(const ordered_json& j)
{
    return j.dump(2) + "\n";
}

} // namespace ipnv::detail
