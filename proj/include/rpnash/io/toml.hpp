#pragma once

// Minimal TOML reader covering what run configs use: comments, [table],
// [[array-of-tables]], and key = value with strings, numbers, booleans and
// arrays of those (which may span lines). Produces a nlohmann::json object.

#include <cctype>
#include <charconv>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace rpnash::io {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

class TomlLine {
 public:
  TomlLine(std::string_view text, int line) : s_(text), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  std::string key() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '"') return quoted();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-'))
      ++pos_;
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  nlohmann::json value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return quoted();
    if (c == '[') {
      ++pos_;
      nlohmann::json arr = nlohmann::json::array();
      if (consume(']')) return arr;
      while (true) {
        arr.push_back(value());
        if (consume(']')) break;
        expect(',');
        if (consume(']')) break;  // trailing comma
      }
      return arr;
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' &&
           s_[pos_] != ' ' && s_[pos_] != '\t')
      ++pos_;
    const std::string_view tok = s_.substr(start, pos_ - start);
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok == "inf" || tok == "+inf") return "inf";
    std::string clean;
    for (char ch : tok)
      if (ch != '_') clean += ch;
    const bool integral = clean.find_first_of(".eE") == std::string::npos;
    if (integral) {
      long long v = 0;
      auto [p, ec] = std::from_chars(clean.data(), clean.data() + clean.size(), v);
      if (ec == std::errc() && p == clean.data() + clean.size()) return v;
    } else {
      double v = 0.0;
      auto [p, ec] = std::from_chars(clean.data(), clean.data() + clean.size(), v);
      if (ec == std::errc() && p == clean.data() + clean.size()) return v;
    }
    fail("cannot parse value '" + std::string(tok) + "'");
  }

 private:
  std::string quoted() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) {
        const char e = s_[++pos_];
        out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
      } else {
        out += s_[pos_];
      }
      ++pos_;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

// Net count of '[' minus ']' outside strings and comments.
inline int bracket_depth(std::string_view line) {
  int depth = 0;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '\\') ++i;
      else if (c == '"') quoted = false;
    } else if (c == '"') {
      quoted = true;
    } else if (c == '#') {
      break;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      --depth;
    }
  }
  return depth;
}

}  // namespace detail

inline nlohmann::json parse_toml(std::string_view text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* current = &root;
  int line_no = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string joined(text.substr(begin, end - begin));
    begin = end + 1;
    ++line_no;
    const int first_line = line_no;
    // Arrays may continue over several lines after "key = [".
    if (joined.find('=') != std::string::npos) {
      int depth = detail::bracket_depth(joined);
      while (depth > 0 && begin <= text.size()) {
        end = text.find('\n', begin);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view more = text.substr(begin, end - begin);
        joined += ' ';
        joined += more.substr(0, more.find('#'));
        depth += detail::bracket_depth(more);
        begin = end + 1;
        ++line_no;
      }
    }
    for (char& c : joined)
      if (c == '\r') c = ' ';
    std::string_view raw = joined;

    detail::TomlLine line(raw, first_line);
    if (line.at_end()) continue;
    if (line.consume('[')) {
      const bool array = line.consume('[');
      const std::string name = line.key();
      line.expect(']');
      if (array) line.expect(']');
      if (!line.at_end()) line.fail("unexpected text after table header");
      if (array) {
        nlohmann::json& arr = root[name];
        if (arr.is_null()) arr = nlohmann::json::array();
        if (!arr.is_array()) line.fail("'" + name + "' is already a table");
        arr.push_back(nlohmann::json::object());
        current = &arr.back();
      } else {
        if (root.contains(name)) line.fail("table '" + name + "' defined twice");
        root[name] = nlohmann::json::object();
        current = &root[name];
      }
      continue;
    }
    const std::string key = line.key();
    line.expect('=');
    nlohmann::json v = line.value();
    if (!line.at_end()) line.fail("unexpected text after value of '" + key + "'");
    if (current->contains(key)) line.fail("key '" + key + "' defined twice");
    (*current)[key] = std::move(v);
    if (begin > text.size()) break;
  }
  return root;
}

}  // namespace rpnash::io
