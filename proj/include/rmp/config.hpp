#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rmp {

// One parsed value: a scalar token or a (possibly nested) list. Scalars keep
// their source text; typed accessors convert on demand and report the source
// location on failure.
struct ConfigValue {
    bool is_list = false;
    std::string scalar;
    std::vector<ConfigValue> items;
    int line = 0;
    int col = 0;

    double as_real() const;
    long as_int() const;
    bool as_bool() const;
    const std::string& as_string() const;
    std::vector<double> as_reals() const;
    std::vector<int> as_ints() const;

    static ConfigValue string(std::string s);
    static ConfigValue number(double x);
    static ConfigValue integer(long v);
    static ConfigValue boolean(bool b);
    static ConfigValue list(std::vector<ConfigValue> elems);
};

// Block of `key = value` entries and named sub-blocks, in source order.
// Duplicate keys are allowed and kept; the singular accessors see the first.
struct ConfigBlock {
    int line = 0;
    int col = 0;
    std::vector<std::pair<std::string, ConfigValue>> values;
    std::vector<std::pair<std::string, ConfigBlock>> blocks;

    const ConfigValue* find(const std::string& key) const;
    const ConfigValue& at(const std::string& key) const;  // throws ConfigError when absent
    const ConfigBlock* find_block(const std::string& key) const;
    const ConfigBlock& at_block(const std::string& key) const;
    std::vector<const ConfigBlock*> blocks_named(const std::string& key) const;

    double real_or(const std::string& key, double fallback) const;
    long int_or(const std::string& key, long fallback) const;
    bool bool_or(const std::string& key, bool fallback) const;
    std::string string_or(const std::string& key, const std::string& fallback) const;

    ConfigValue& set(const std::string& key, ConfigValue v);
    ConfigBlock& add_block(const std::string& key);
};

// Grammar, line oriented:
//   key = value          value: scalar token, quoted string, or [a, b, [c]]
//   key { ... }          nested block, closed by a lone }
//   # comment            anywhere outside quotes
// Lists may continue across lines until their brackets balance.
ConfigBlock parse_config(const std::string& text, const std::string& source_name = "");
ConfigBlock parse_config_file(const std::string& path);

// Canonical text form: stable entry order (as stored), two-space indent,
// numbers already normalized by the builders. Parsing the output reproduces
// the block.
std::string emit_config(const ConfigBlock& root);

}  // namespace rmp
