#pragma once

// Experiment config files: a flat, typed key-value format with one level of
// [sections].
//
//     # rate versus bounded uncertainty
//     command = "sweep"
//     model = "logu"
//     sigma_n_db = -100
//     epsilon = 0.3
//
//     [sweep]
//     axis = "rho_db"
//     start = 0
//     stop = 5
//     points = 26
//     outputs = ["rate", "threshold_approx"]
//
// Values are numbers, true/false, double-quoted strings, or flat lists of
// numbers and strings. Keys are validated against a fixed schema so typos fail
// loudly with the list of accepted keys.

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "covert/error.hpp"

namespace covert {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using ConfigScalar = std::variant<bool, double, std::string>;
using ConfigValue = std::variant<bool, double, std::string, std::vector<ConfigScalar>>;

struct ConfigEntry {
    std::string key;  ///< "section.name" or "name" at top level
    ConfigValue value;
    int line = 0;
};

/// Accepted keys, with the CLI flag each one feeds.
inline const std::map<std::string, std::string>& config_schema() {
    static const std::map<std::string, std::string> schema = {
        {"command", ""},
        {"model", "--model"},
        {"sigma_n_db", "--sigma-n-db"},
        {"rho_db", "--rho-db"},
        {"sigma_delta_db", "--sigma-delta-db"},
        {"epsilon", "--epsilon"},
        {"pw", "--pw"},
        {"gamma", "--gamma"},
        {"method", "--method"},
        {"sigma_w_db", "--sigma-w-db"},
        {"n", "--n"},
        {"out_dir", "--out-dir"},
        {"link.rb", "--rb"},
        {"link.rw", "--rw"},
        {"link.alpha", "--alpha"},
        {"link.sigma_b_db", "--sigma-b-db"},
        {"mc.seed", "--seed"},
        {"mc.trials", "--trials"},
        {"mc.confidence_z", "--confidence-z"},
        {"mc.workers", "--workers"},
        {"sweep.name", "--name"},
        {"sweep.figure", "--figure"},
        {"sweep.axis", "--axis"},
        {"sweep.start", "--start"},
        {"sweep.stop", "--stop"},
        {"sweep.points", "--points"},
        {"sweep.outputs", "--outputs"},
        {"sweep.epsilons", "--epsilons"},
    };
    return schema;
}

inline std::string format_number(double v, int digits = 17) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

class ConfigDocument {
  public:
    const std::vector<ConfigEntry>& entries() const { return entries_; }

    const ConfigEntry* find(std::string_view key) const {
        // Later assignments override earlier ones.
        for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
            if (it->key == key) return &*it;
        }
        return nullptr;
    }

    void set(std::string key, ConfigValue value, int line = 0) {
        entries_.push_back({std::move(key), std::move(value), line});
    }

    /// Flag/value tokens equivalent to this document, for prepending to argv.
    std::vector<std::string> to_cli_args() const {
        std::vector<std::string> args;
        for (const auto& e : entries_) {
            const auto& flag = config_schema().at(e.key);
            if (flag.empty()) continue;
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, bool>) {
                        args.push_back(flag);
                        args.push_back(v ? "true" : "false");
                    } else if constexpr (std::is_same_v<T, double>) {
                        args.push_back(flag);
                        args.push_back(format_number(v));
                    } else if constexpr (std::is_same_v<T, std::string>) {
                        args.push_back(flag);
                        args.push_back(v);
                    } else {
                        std::string joined;
                        for (const auto& item : v) {
                            if (!joined.empty()) joined += ',';
                            joined += scalar_text(item);
                        }
                        args.push_back(flag);
                        args.push_back(joined);
                    }
                },
                e.value);
        }
        return args;
    }

    /// Entry values as plain strings keyed by their bare (section-less) name.
    std::map<std::string, std::string> flat_strings() const {
        std::map<std::string, std::string> out;
        for (const auto& e : entries_) {
            const auto dot = e.key.find('.');
            const std::string bare = dot == std::string::npos ? e.key : e.key.substr(dot + 1);
            out[bare] = std::visit(
                [](const auto& v) -> std::string {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::vector<ConfigScalar>>) {
                        std::string joined;
                        for (const auto& item : v) {
                            if (!joined.empty()) joined += ',';
                            joined += scalar_text(item);
                        }
                        return joined;
                    } else {
                        return scalar_text(ConfigScalar{v});
                    }
                },
                e.value);
        }
        return out;
    }

    std::string to_text() const {
        std::ostringstream out;
        std::map<std::string, std::vector<const ConfigEntry*>> sections;
        for (const auto& e : entries_) {
            const auto dot = e.key.find('.');
            if (dot == std::string::npos) {
                out << e.key << " = " << value_text(e.value) << '\n';
            } else {
                sections[e.key.substr(0, dot)].push_back(&e);
            }
        }
        for (const auto& [name, items] : sections) {
            out << "\n[" << name << "]\n";
            for (const auto* e : items) out << e->key.substr(name.size() + 1) << " = " << value_text(e->value) << '\n';
        }
        return out.str();
    }

    static std::string scalar_text(const ConfigScalar& s) {
        if (const auto* b = std::get_if<bool>(&s)) return *b ? "true" : "false";
        if (const auto* d = std::get_if<double>(&s)) return format_number(*d);
        return std::get<std::string>(s);
    }

  private:
    static std::string quoted(const std::string& s) {
        std::string out = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        return out + '"';
    }

    static std::string scalar_literal(const ConfigScalar& s) {
        if (const auto* str = std::get_if<std::string>(&s)) return quoted(*str);
        return scalar_text(s);
    }

    static std::string value_text(const ConfigValue& v) {
        return std::visit(
            [](const auto& x) -> std::string {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, std::vector<ConfigScalar>>) {
                    std::string out = "[";
                    for (std::size_t i = 0; i < x.size(); ++i) out += (i ? ", " : "") + scalar_literal(x[i]);
                    return out + "]";
                } else {
                    return scalar_literal(ConfigScalar{x});
                }
            },
            v);
    }

    std::vector<ConfigEntry> entries_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

class ValueParser {
  public:
    ValueParser(std::string_view text, int line) : text_(text), line_(line) {}

    ConfigValue parse() {
        skip_ws();
        ConfigValue value;
        if (peek() == '[') {
            ++pos_;
            std::vector<ConfigScalar> items;
            skip_ws();
            if (peek() == ']') {
                ++pos_;
            } else {
                for (;;) {
                    items.push_back(scalar());
                    skip_ws();
                    if (peek() == ',') {
                        ++pos_;
                        continue;
                    }
                    if (peek() == ']') {
                        ++pos_;
                        break;
                    }
                    fail("expected ',' or ']' in list");
                }
            }
            value = std::move(items);
        } else {
            value = std::visit([](auto&& s) -> ConfigValue { return s; }, scalar());
        }
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] != '#') fail("unexpected trailing characters");
        return value;
    }

  private:
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("line " + std::to_string(line_) + ": " + msg);
    }

    ConfigScalar scalar() {
        skip_ws();
        if (peek() == '"') {
            ++pos_;
            std::string out;
            while (pos_ < text_.size() && text_[pos_] != '"') {
                if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
                out += text_[pos_++];
            }
            if (peek() != '"') fail("unterminated string");
            ++pos_;
            return out;
        }
        const std::size_t begin = pos_;
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' && text_[pos_] != '#' &&
               text_[pos_] != ' ' && text_[pos_] != '\t' && text_[pos_] != '\r')
            ++pos_;
        const std::string token(text_.substr(begin, pos_ - begin));
        if (token.empty()) fail("missing value");
        if (token == "true") return true;
        if (token == "false") return false;
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size() || errno == ERANGE)
            fail("cannot parse value '" + token + "' (strings must be double-quoted)");
        return v;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_;
};

}  // namespace detail

inline ConfigDocument parse_config(std::string_view text) {
    ConfigDocument doc;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            const auto close = line.find(']');
            if (close == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": missing ']'");
            section = std::string(detail::trim(line.substr(1, close - 1)));
            if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string name(detail::trim(line.substr(0, eq)));
        if (name.empty()) throw ConfigError("line " + std::to_string(line_no) + ": missing key");
        const std::string key = section.empty() ? name : section + "." + name;
        if (!config_schema().contains(key)) {
            std::string valid;
            for (const auto& [k, _] : config_schema()) valid += (valid.empty() ? "" : ", ") + k;
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'; valid keys: " + valid);
        }
        doc.set(key, detail::ValueParser(line.substr(eq + 1), line_no).parse(), line_no);
    }
    return doc;
}

inline ConfigDocument load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace covert
