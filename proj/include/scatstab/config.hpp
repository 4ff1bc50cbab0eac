#pragma once

// Experiment configuration files: a nested key-value text format.
//
// Grammar (one entry per line, '#' starts a comment):
//   file   := entry*
//   entry  := key '=' value | key '{' entry* '}'
//   key    := [A-Za-z_][A-Za-z0-9_-]*
//   value  := rest of line, trimmed (numbers/vectors parsed on demand)
//
// Keys may repeat (used for repeated `module` blocks). Readers track which
// child entries they consume; anything left over is an unknown-key error.

#include <cctype>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace scatstab {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigNode {
    std::string key;
    std::string value;  // empty for block nodes
    bool is_block = false;
    int line = 0;
    std::vector<ConfigNode> children;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(k[0])) && k[0] != '_') return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

}  // namespace detail

inline ConfigNode parse_config_text(const std::string& text) {
    ConfigNode root;
    root.is_block = true;
    std::vector<ConfigNode*> stack{&root};
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::size_t hash = raw.find('#');
        std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line == "}") {
            if (stack.size() == 1) throw ConfigError("line " + std::to_string(lineno) + ": unmatched '}'");
            stack.pop_back();
            continue;
        }
        ConfigNode node;
        node.line = lineno;
        if (line.back() == '{') {
            node.key = detail::trim(line.substr(0, line.size() - 1));
            node.is_block = true;
            if (!detail::valid_key(node.key))
                throw ConfigError("line " + std::to_string(lineno) + ": bad block key '" + node.key + "'");
            stack.back()->children.push_back(std::move(node));
            stack.push_back(&stack.back()->children.back());
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value' or 'key {'");
        node.key = detail::trim(line.substr(0, eq));
        node.value = detail::trim(line.substr(eq + 1));
        if (!detail::valid_key(node.key))
            throw ConfigError("line " + std::to_string(lineno) + ": bad key '" + node.key + "'");
        if (node.value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + node.key + "'");
        stack.back()->children.push_back(std::move(node));
    }
    if (stack.size() != 1) throw ConfigError("unterminated block (missing '}')");
    return root;
}

// Read-only view over a block that records consumed children; call
// `finish()` once done so unknown keys become errors.
class ConfigCursor {
public:
    ConfigCursor(const ConfigNode& node, std::string path)
        : node_(node), path_(std::move(path)), used_(node.children.size(), false) {}

    bool has(const std::string& key) const { return find(key) != node_.children.size(); }

    std::string get_string(const std::string& key) {
        const ConfigNode& c = take(key, /*block=*/false);
        return c.value;
    }

    std::string get_string(const std::string& key, const std::string& fallback) {
        return has(key) ? get_string(key) : fallback;
    }

    double get_double(const std::string& key) { return to_double(take(key, false)); }
    double get_double(const std::string& key, double fallback) {
        return has(key) ? get_double(key) : fallback;
    }

    long get_int(const std::string& key) {
        const ConfigNode& c = take(key, false);
        try {
            std::size_t pos = 0;
            const long v = std::stol(c.value, &pos);
            if (pos != c.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError(where(c) + ": '" + key + "' expects an integer, got '" + c.value + "'");
        }
    }
    long get_int(const std::string& key, long fallback) { return has(key) ? get_int(key) : fallback; }

    bool get_bool(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const ConfigNode& c = take(key, false);
        if (c.value == "true" || c.value == "on" || c.value == "1") return true;
        if (c.value == "false" || c.value == "off" || c.value == "0") return false;
        throw ConfigError(where(c) + ": '" + key + "' expects true/false");
    }

    std::vector<double> get_doubles(const std::string& key) {
        const ConfigNode& c = take(key, false);
        std::istringstream in(c.value);
        std::vector<double> out;
        std::string tok;
        while (in >> tok) out.push_back(to_double_token(c, tok));
        if (out.empty()) throw ConfigError(where(c) + ": '" + key + "' expects numbers");
        return out;
    }

    ConfigCursor block(const std::string& key) {
        const ConfigNode& c = take(key, /*block=*/true);
        return ConfigCursor(c, path_.empty() ? key : path_ + "." + key);
    }

    // All blocks with the given key, in file order.
    std::vector<ConfigCursor> blocks(const std::string& key) {
        std::vector<ConfigCursor> out;
        for (std::size_t i = 0; i < node_.children.size(); ++i) {
            if (node_.children[i].key != key) continue;
            if (!node_.children[i].is_block) throw ConfigError(where(node_.children[i]) + ": '" + key + "' must be a block");
            used_[i] = true;
            out.emplace_back(node_.children[i], path_.empty() ? key : path_ + "." + key);
        }
        return out;
    }

    // Error on any child that was never consumed.
    void finish() const {
        for (std::size_t i = 0; i < node_.children.size(); ++i) {
            if (!used_[i])
                throw ConfigError(where(node_.children[i]) + ": unknown key '" + node_.children[i].key +
                                  "'" + (path_.empty() ? "" : " in block '" + path_ + "'"));
        }
    }

private:
    std::size_t find(const std::string& key) const {
        for (std::size_t i = 0; i < node_.children.size(); ++i)
            if (node_.children[i].key == key) return i;
        return node_.children.size();
    }

    const ConfigNode& take(const std::string& key, bool block) {
        const std::size_t i = find(key);
        if (i == node_.children.size())
            throw ConfigError("missing key '" + key + "'" +
                              (path_.empty() ? "" : " in block '" + path_ + "'"));
        const ConfigNode& c = node_.children[i];
        if (c.is_block != block)
            throw ConfigError(where(c) + ": '" + key + "' " + (block ? "must be a block" : "must be a value"));
        used_[i] = true;
        return c;
    }

    static std::string where(const ConfigNode& c) { return "line " + std::to_string(c.line); }

    double to_double(const ConfigNode& c) { return to_double_token(c, c.value); }

    double to_double_token(const ConfigNode& c, const std::string& tok) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError(where(c) + ": expected a number, got '" + tok + "'");
        }
    }

    const ConfigNode& node_;
    std::string path_;
    mutable std::vector<bool> used_;
};

}  // namespace scatstab
