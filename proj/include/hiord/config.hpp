#pragma once

// Reader for the scenario configuration dialect.
//
//   # comment to end of line
//   key = value            entries separated by newlines, ',' or ';'
//   key { ... }            shorthand for key = { ... }
//
// Values: numbers, "strings", true/false, bare identifiers (may contain '-'),
// [arrays], {tables}, tagged tables `ident { ... }`, and edge literals
// `receiver <- sender` or `receiver <- sender : weight`.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"

namespace hiord::config {

struct Position {
    int line = 1;
    int column = 1;
};

inline std::string to_string(const Position& p) { return std::to_string(p.line) + ":" + std::to_string(p.column); }

/// Syntax or schema error located in the source text.
class ParseError : public Error {
public:
    ParseError(Position pos, const std::string& message, const std::string& file = "")
        : Error((file.empty() ? "" : file + ": ") + "line " + std::to_string(pos.line) + ", column " +
                std::to_string(pos.column) + ": " + message),
          pos_(pos),
          message_(message) {}

    Position position() const { return pos_; }
    const std::string& message() const { return message_; }

private:
    Position pos_;
    std::string message_;
};

struct Value;

struct Entry {
    std::string key;
    std::shared_ptr<Value> value;
    Position pos;
};

struct Table {
    std::string tag;  // empty unless written as `tag { ... }`
    std::vector<Entry> entries;

    const Value* find(std::string_view key) const {
        for (const auto& e : entries)
            if (e.key == key) return e.value.get();
        return nullptr;
    }
    bool contains(std::string_view key) const { return find(key) != nullptr; }
};

struct Identifier {
    std::string name;
};

struct EdgeLiteral {
    long long receiver = 0;
    long long sender = 0;
    double weight = 1.0;
};

struct Number {
    double value = 0.0;
    bool integral = false;  // written without '.', exponent or fraction
};

using Array = std::vector<Value>;

struct Value {
    std::variant<Number, std::string, bool, Identifier, Array, Table, EdgeLiteral> data;
    Position pos;

    template <class T>
    const T* as() const { return std::get_if<T>(&data); }
    template <class T>
    bool is() const { return std::holds_alternative<T>(data); }

    const char* kind_name() const {
        switch (data.index()) {
            case 0: return "number";
            case 1: return "string";
            case 2: return "boolean";
            case 3: return "identifier";
            case 4: return "array";
            case 5: return "table";
            case 6: return "edge";
        }
        return "value";
    }
};

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : src_(text) {}

    Table parse_document() {
        Table root = parse_entries(/*closing=*/'\0');
        skip_space(true);
        if (!at_end()) fail("unexpected '" + std::string(1, peek()) + "'");
        return root;
    }

    Value parse_single_value() {
        skip_space(true);
        Value v = parse_value();
        skip_space(true);
        if (!at_end()) fail("unexpected '" + std::string(1, peek()) + "' after value");
        return v;
    }

private:
    std::string_view src_;
    std::size_t i_ = 0;
    Position pos_{};

    bool at_end() const { return i_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const { return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0'; }

    void advance() {
        if (src_[i_] == '\n') {
            ++pos_.line;
            pos_.column = 1;
        } else {
            ++pos_.column;
        }
        ++i_;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_, msg); }
    [[noreturn]] static void fail_at(Position p, const std::string& msg) { throw ParseError(p, msg); }

    /// Skips blanks and comments; newlines too when `newlines` is set. Returns
    /// true if a newline was crossed.
    bool skip_space(bool newlines) {
        bool crossed = false;
        while (!at_end()) {
            const char c = peek();
            if (c == '#') {
                while (!at_end() && peek() != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r') {
                advance();
            } else if (c == '\n' && newlines) {
                crossed = true;
                advance();
            } else {
                break;
            }
        }
        return crossed;
    }

    static bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
    static bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9') || c == '-'; }
    static bool digit(char c) { return c >= '0' && c <= '9'; }

    std::string parse_identifier() {
        if (!ident_start(peek())) fail("expected a key");
        const std::size_t b = i_;
        while (!at_end() && ident_char(peek())) advance();
        return std::string(src_.substr(b, i_ - b));
    }

    Table parse_entries(char closing) {
        Table t;
        for (;;) {
            skip_space(true);
            while (peek() == ',' || peek() == ';') {
                advance();
                skip_space(true);
            }
            if (at_end()) {
                if (closing != '\0') fail("unterminated table, expected '}'");
                return t;
            }
            if (peek() == closing) return t;
            const Position key_pos = pos_;
            std::string key = parse_identifier();
            if (t.contains(key)) fail_at(key_pos, "duplicate key '" + key + "'");
            skip_space(false);
            Value v;
            if (peek() == '=') {
                advance();
                skip_space(true);
                v = parse_value();
            } else if (peek() == '{') {
                v = parse_table("");
            } else {
                fail("expected '=' or '{' after key '" + key + "'");
            }
            t.entries.push_back({std::move(key), std::make_shared<Value>(std::move(v)), key_pos});
            const bool newline = skip_space(false) || peek() == '\n';
            if (!(newline || at_end() || peek() == ',' || peek() == ';' || peek() == closing))
                fail("expected a newline, ',' or ';' between entries");
        }
    }

    Value parse_table(std::string tag) {
        Value v;
        v.pos = pos_;
        advance();  // '{'
        Table t = parse_entries('}');
        advance();  // '}'
        t.tag = std::move(tag);
        v.data = std::move(t);
        return v;
    }

    Value parse_array() {
        Value v;
        v.pos = pos_;
        advance();  // '['
        Array items;
        for (;;) {
            skip_space(true);
            if (at_end()) fail("unterminated array, expected ']'");
            if (peek() == ']') break;
            items.push_back(parse_value());
            skip_space(true);
            if (peek() == ',') {
                advance();
                continue;
            }
            if (peek() != ']') fail("expected ',' or ']' in array");
        }
        advance();  // ']'
        v.data = std::move(items);
        return v;
    }

    Value parse_string() {
        Value v;
        v.pos = pos_;
        advance();  // '"'
        std::string out;
        for (;;) {
            if (at_end() || peek() == '\n') fail("unterminated string");
            const char c = peek();
            advance();
            if (c == '"') break;
            if (c == '\\') {
                if (at_end()) fail("unterminated escape");
                const char e = peek();
                advance();
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: fail(std::string("unknown escape '\\") + e + "'");
                }
            } else {
                out += c;
            }
        }
        v.data = std::move(out);
        return v;
    }

    Number parse_number_token() {
        const Position start = pos_;
        const std::size_t b = i_;
        bool integral = true;
        if (peek() == '+' || peek() == '-') advance();
        if (!digit(peek()) && !(peek() == '.' && digit(peek(1)))) fail("malformed number");
        while (digit(peek())) advance();
        if (peek() == '.') {
            integral = false;
            advance();
            while (digit(peek())) advance();
        }
        if (peek() == 'e' || peek() == 'E') {
            integral = false;
            advance();
            if (peek() == '+' || peek() == '-') advance();
            if (!digit(peek())) fail("malformed exponent");
            while (digit(peek())) advance();
        }
        if (ident_start(peek())) fail("unexpected character '" + std::string(1, peek()) + "' in number");
        std::string_view text = src_.substr(b, i_ - b);
        if (!text.empty() && text.front() == '+') text.remove_prefix(1);
        double value = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size()) fail_at(start, "number out of range");
        return {value, integral};
    }

    Value parse_value() {
        if (at_end()) fail("expected a value");
        const char c = peek();
        if (c == '[') return parse_array();
        if (c == '{') return parse_table("");
        if (c == '"') return parse_string();
        Value v;
        v.pos = pos_;
        if (digit(c) || c == '-' || c == '+' || c == '.') {
            const Number n = parse_number_token();
            skip_space(false);
            if (peek() == '<' && peek(1) == '-') {
                if (!n.integral) fail_at(v.pos, "edge endpoints must be integers");
                advance();
                advance();
                skip_space(false);
                const Position sp = pos_;
                const Number s = parse_number_token();
                if (!s.integral) fail_at(sp, "edge endpoints must be integers");
                EdgeLiteral e{static_cast<long long>(n.value), static_cast<long long>(s.value), 1.0};
                skip_space(false);
                if (peek() == ':') {
                    advance();
                    skip_space(false);
                    e.weight = parse_number_token().value;
                }
                v.data = e;
            } else {
                v.data = n;
            }
            return v;
        }
        if (ident_start(c)) {
            std::string id = parse_identifier();
            if (id == "true" || id == "false") {
                v.data = (id == "true");
                return v;
            }
            skip_space(false);
            if (peek() == '{') {
                Value t = parse_table(std::move(id));
                t.pos = v.pos;
                return t;
            }
            v.data = Identifier{std::move(id)};
            return v;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

}  // namespace detail

inline Table parse(std::string_view text) { return detail::Parser(text).parse_document(); }

inline Value parse_value(std::string_view text) { return detail::Parser(text).parse_single_value(); }

inline Table parse_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(e.position(), e.message(), path);
    }
}

/// Sets or replaces a top-level entry.
inline void set_entry(Table& t, const std::string& key, Value v) {
    for (auto& e : t.entries)
        if (e.key == key) {
            e.value = std::make_shared<Value>(std::move(v));
            return;
        }
    t.entries.push_back({key, std::make_shared<Value>(std::move(v)), Position{}});
}

}  // namespace hiord::config
