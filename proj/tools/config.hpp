#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace agepde::cli {

using Value = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

/// Validated configuration: every known key with its value, defaults filled in.
/// Keys are "section.key". Optional keys without a default are simply absent.
struct RunConfig {
    std::map<std::string, Value> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    double real(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    const std::string& str(const std::string& key) const;
    bool flag(const std::string& key) const;
    const std::vector<double>& reals(const std::string& key) const;
    std::optional<double> maybe_real(const std::string& key) const;

    bool operator==(const RunConfig&) const = default;
};

enum class Kind { Bool, Int, Real, Str, RealList, IntList };

struct KeySpec {
    std::string section;
    std::string key;
    Kind kind;
    bool required = false;
    std::optional<Value> fallback;
    /// Shown in TypeError messages: "<section>.<key> expects <expect>".
    std::string expect;
    /// Allowed strings for Kind::Str (empty = any).
    std::vector<std::string> choices;
    std::optional<double> lo, hi;
    bool lo_open = false, hi_open = false;
    std::string doc;
};

/// The documented schema, in section order.
const std::vector<KeySpec>& schema();

/// Reads and validates a TOML file. `overrides` are "section.key=value" strings,
/// applied before validation; the value is read as a TOML value, or as a string
/// when it does not parse. Throws agepde::Error with MissingKey, UnknownKey,
/// TypeError, or IoError.
RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {});
RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {},
                            const std::string& source = "<string>");

}  // namespace agepde::cli
