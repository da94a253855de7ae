#include "rmp/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rmp/errors.hpp"

namespace rmp {
namespace {

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Cut an unquoted # comment.
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char ch = s[i];
        if (ch == '\\' && quoted) {
            ++i;
            continue;
        }
        if (ch == '"') quoted = !quoted;
        if (ch == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

int bracket_balance(const std::string& s) {
    bool quoted = false;
    int bal = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char ch = s[i];
        if (ch == '\\' && quoted) {
            ++i;
            continue;
        }
        if (ch == '"') quoted = !quoted;
        if (quoted) continue;
        if (ch == '[') ++bal;
        if (ch == ']') --bal;
    }
    return bal;
}

std::size_t find_unquoted(const std::string& s, char target) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char ch = s[i];
        if (ch == '\\' && quoted) {
            ++i;
            continue;
        }
        if (ch == '"') quoted = !quoted;
        if (ch == target && !quoted) return i;
    }
    return std::string::npos;
}

void skip_ws(const std::string& s, std::size_t& i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r' || s[i] == '\n')) ++i;
}

ConfigValue parse_value(const std::string& s, std::size_t& i, int line, int col);

ConfigValue parse_list(const std::string& s, std::size_t& i, int line, int col) {
    ConfigValue v;
    v.is_list = true;
    v.line = line;
    v.col = col;
    ++i;  // consume '['
    skip_ws(s, i);
    if (i < s.size() && s[i] == ']') {
        ++i;
        return v;
    }
    while (true) {
        v.items.push_back(parse_value(s, i, line, col));
        skip_ws(s, i);
        if (i >= s.size()) throw ConfigError("unterminated list", line, col);
        if (s[i] == ',') {
            ++i;
            skip_ws(s, i);
            continue;
        }
        if (s[i] == ']') {
            ++i;
            return v;
        }
        throw ConfigError("expected ',' or ']' in list", line, col + static_cast<int>(i));
    }
}

ConfigValue parse_value(const std::string& s, std::size_t& i, int line, int col) {
    skip_ws(s, i);
    if (i >= s.size()) throw ConfigError("missing value", line, col);
    if (s[i] == '[') return parse_list(s, i, line, col);

    ConfigValue v;
    v.line = line;
    v.col = col + static_cast<int>(i);
    if (s[i] == '"') {
        ++i;
        std::string out;
        while (i < s.size() && s[i] != '"') {
            if (s[i] == '\\' && i + 1 < s.size()) ++i;
            out += s[i++];
        }
        if (i >= s.size()) throw ConfigError("unterminated string", line, col);
        ++i;  // closing quote
        v.scalar = out;
        return v;
    }
    std::size_t start = i;
    while (i < s.size() && s[i] != ',' && s[i] != ']') ++i;
    v.scalar = trim(s.substr(start, i - start));
    if (v.scalar.empty()) throw ConfigError("missing value", line, col);
    return v;
}

bool needs_quoting(const std::string& s) {
    if (s.empty()) return true;
    if (std::isspace(static_cast<unsigned char>(s.front())) ||
        std::isspace(static_cast<unsigned char>(s.back())))
        return true;
    for (char ch : s)
        if (ch == ',' || ch == '[' || ch == ']' || ch == '{' || ch == '}' || ch == '"' ||
            ch == '#' || ch == '=' || ch == '\n')
            return true;
    return false;
}

void emit_value(const ConfigValue& v, std::string& out) {
    if (v.is_list) {
        out += '[';
        for (std::size_t i = 0; i < v.items.size(); ++i) {
            if (i) out += ", ";
            emit_value(v.items[i], out);
        }
        out += ']';
        return;
    }
    if (!needs_quoting(v.scalar)) {
        out += v.scalar;
        return;
    }
    out += '"';
    for (char ch : v.scalar) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    out += '"';
}

void emit_block_body(const ConfigBlock& b, int depth, std::string& out) {
    const std::string indent(2 * static_cast<std::size_t>(depth), ' ');
    for (const auto& [key, value] : b.values) {
        out += indent;
        out += key;
        out += " = ";
        emit_value(value, out);
        out += '\n';
    }
    for (const auto& [key, block] : b.blocks) {
        out += indent;
        out += key;
        out += " {\n";
        emit_block_body(block, depth + 1, out);
        out += indent;
        out += "}\n";
    }
}

}  // namespace

double ConfigValue::as_real() const {
    if (is_list) throw ConfigError("expected a number, found a list", line, col);
    errno = 0;
    char* end = nullptr;
    double x = std::strtod(scalar.c_str(), &end);
    if (errno != 0 || end == scalar.c_str() || *end != '\0')
        throw ConfigError("'" + scalar + "' is not a number", line, col);
    return x;
}

long ConfigValue::as_int() const {
    if (is_list) throw ConfigError("expected an integer, found a list", line, col);
    errno = 0;
    char* end = nullptr;
    long x = std::strtol(scalar.c_str(), &end, 10);
    if (errno != 0 || end == scalar.c_str() || *end != '\0')
        throw ConfigError("'" + scalar + "' is not an integer", line, col);
    return x;
}

bool ConfigValue::as_bool() const {
    if (is_list) throw ConfigError("expected true/false, found a list", line, col);
    if (scalar == "true") return true;
    if (scalar == "false") return false;
    throw ConfigError("'" + scalar + "' is not true/false", line, col);
}

const std::string& ConfigValue::as_string() const {
    if (is_list) throw ConfigError("expected a string, found a list", line, col);
    return scalar;
}

std::vector<double> ConfigValue::as_reals() const {
    if (!is_list) throw ConfigError("expected a list of numbers", line, col);
    std::vector<double> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(it.as_real());
    return out;
}

std::vector<int> ConfigValue::as_ints() const {
    if (!is_list) throw ConfigError("expected a list of integers", line, col);
    std::vector<int> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(static_cast<int>(it.as_int()));
    return out;
}

ConfigValue ConfigValue::string(std::string s) {
    ConfigValue v;
    v.scalar = std::move(s);
    return v;
}

ConfigValue ConfigValue::number(double x) {
    ConfigValue v;
    v.scalar = format_number(x);
    return v;
}

ConfigValue ConfigValue::integer(long x) {
    ConfigValue v;
    v.scalar = std::to_string(x);
    return v;
}

ConfigValue ConfigValue::boolean(bool b) {
    ConfigValue v;
    v.scalar = b ? "true" : "false";
    return v;
}

ConfigValue ConfigValue::list(std::vector<ConfigValue> elems) {
    ConfigValue v;
    v.is_list = true;
    v.items = std::move(elems);
    return v;
}

const ConfigValue* ConfigBlock::find(const std::string& key) const {
    for (const auto& [k, v] : values)
        if (k == key) return &v;
    return nullptr;
}

const ConfigValue& ConfigBlock::at(const std::string& key) const {
    if (const ConfigValue* v = find(key)) return *v;
    throw ConfigError("missing required key '" + key + "'", line, col);
}

const ConfigBlock* ConfigBlock::find_block(const std::string& key) const {
    for (const auto& [k, b] : blocks)
        if (k == key) return &b;
    return nullptr;
}

const ConfigBlock& ConfigBlock::at_block(const std::string& key) const {
    if (const ConfigBlock* b = find_block(key)) return *b;
    throw ConfigError("missing required block '" + key + "'", line, col);
}

std::vector<const ConfigBlock*> ConfigBlock::blocks_named(const std::string& key) const {
    std::vector<const ConfigBlock*> out;
    for (const auto& [k, b] : blocks)
        if (k == key) out.push_back(&b);
    return out;
}

double ConfigBlock::real_or(const std::string& key, double fallback) const {
    const ConfigValue* v = find(key);
    return v ? v->as_real() : fallback;
}

long ConfigBlock::int_or(const std::string& key, long fallback) const {
    const ConfigValue* v = find(key);
    return v ? v->as_int() : fallback;
}

bool ConfigBlock::bool_or(const std::string& key, bool fallback) const {
    const ConfigValue* v = find(key);
    return v ? v->as_bool() : fallback;
}

std::string ConfigBlock::string_or(const std::string& key, const std::string& fallback) const {
    const ConfigValue* v = find(key);
    return v ? v->as_string() : fallback;
}

ConfigValue& ConfigBlock::set(const std::string& key, ConfigValue v) {
    values.emplace_back(key, std::move(v));
    return values.back().second;
}

ConfigBlock& ConfigBlock::add_block(const std::string& key) {
    blocks.emplace_back(key, ConfigBlock{});
    return blocks.back().second;
}

ConfigBlock parse_config(const std::string& text, const std::string& source_name) {
    std::vector<std::string> lines;
    {
        std::string cur;
        for (char ch : text) {
            if (ch == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        lines.push_back(cur);
    }
    const std::string where = source_name.empty() ? "" : source_name + ": ";

    ConfigBlock root;
    std::vector<ConfigBlock*> stack{&root};
    std::vector<int> open_lines{0};

    for (std::size_t li = 0; li < lines.size(); ++li) {
        const int ln = static_cast<int>(li + 1);
        std::string s = trim(strip_comment(lines[li]));
        if (s.empty()) continue;

        if (s == "}") {
            if (stack.size() == 1) throw ConfigError(where + "unmatched '}'", ln, 1);
            stack.pop_back();
            open_lines.pop_back();
            continue;
        }
        if (s.back() == '{') {
            std::string key = trim(s.substr(0, s.size() - 1));
            if (key.empty() || key.find_first_of(" \t={}[]\"") != std::string::npos)
                throw ConfigError(where + "bad block name '" + key + "'", ln, 1);
            ConfigBlock& child = stack.back()->add_block(key);
            child.line = ln;
            child.col = 1;
            stack.push_back(&child);
            open_lines.push_back(ln);
            continue;
        }
        std::size_t eq = find_unquoted(s, '=');
        if (eq == std::string::npos)
            throw ConfigError(where + "expected 'key = value' or a block", ln, 1);
        std::string key = trim(s.substr(0, eq));
        if (key.empty() || key.find_first_of(" \t={}[]\"") != std::string::npos)
            throw ConfigError(where + "bad key '" + key + "'", ln, 1);
        std::string vtext = s.substr(eq + 1);
        while (bracket_balance(vtext) > 0) {
            if (++li >= lines.size())
                throw ConfigError(where + "unterminated list for key '" + key + "'", ln, 1);
            vtext += ' ';
            vtext += strip_comment(lines[li]);
        }
        std::size_t pos = 0;
        ConfigValue v = parse_value(vtext, pos, ln, static_cast<int>(eq) + 2);
        skip_ws(vtext, pos);
        if (pos != vtext.size())
            throw ConfigError(where + "trailing characters after value for key '" + key + "'",
                              ln, static_cast<int>(eq + 2 + pos));
        stack.back()->set(key, std::move(v));
    }
    if (stack.size() != 1)
        throw ConfigError(where + "unclosed block", open_lines.back(), 1);
    return root;
}

ConfigBlock parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string emit_config(const ConfigBlock& root) {
    std::string out;
    emit_block_body(root, 0, out);
    return out;
}

}  // namespace rmp
