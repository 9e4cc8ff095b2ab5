#include "teamprod/toml.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <vector>

#include "teamprod/errors.hpp"

namespace teamprod {

namespace {

using nlohmann::json;

class Parser {
 public:
  Parser(std::string_view line, std::string loc) : s_(line), loc_(std::move(loc)) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(loc_ + ": " + msg); }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::vector<std::string> key_path() {
    std::vector<std::string> parts;
    do {
      skip_ws();
      parts.push_back(simple_key());
      skip_ws();
    } while (eat('.'));
    return parts;
  }

  json value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    char c = s_[pos_];
    if (c == '"' || c == '\'') return string_value();
    if (c == '[') return array_value();
    if (s_.substr(pos_, 4) == "true" && boundary(pos_ + 4)) {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false" && boundary(pos_ + 5)) {
      pos_ += 5;
      return false;
    }
    if (c == '{') fail("inline tables are not supported");
    return number();
  }

 private:
  bool boundary(std::size_t p) const {
    return p >= s_.size() || s_[p] == ' ' || s_[p] == '\t' || s_[p] == ',' || s_[p] == ']' ||
           s_[p] == '#';
  }

  std::string simple_key() {
    if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'')) return string_value().get<std::string>();
    auto start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-'))
      ++pos_;
    if (start == pos_) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  json string_value() {
    const char q = s_[pos_++];
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated string");
      char c = s_[pos_++];
      if (c == q) break;
      if (q == '"' && c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        char e = s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  json array_value() {
    ++pos_;
    json arr = json::array();
    while (true) {
      skip_ws();
      if (eat(']')) return arr;
      arr.push_back(value());
      skip_ws();
      if (eat(',')) continue;
      if (eat(']')) return arr;
      fail("expected ',' or ']' in array (arrays must fit on one line)");
    }
  }

  json number() {
    auto start = pos_;
    while (pos_ < s_.size() && !boundary(pos_)) ++pos_;
    std::string tok;
    for (char c : s_.substr(start, pos_ - start))
      if (c != '_') tok += c;
    if (tok.empty()) fail("missing value");
    std::string_view body = tok;
    bool neg = false;
    if (body.front() == '+' || body.front() == '-') {
      neg = body.front() == '-';
      body.remove_prefix(1);
    }
    if (body == "inf") return neg ? -std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    const bool is_float = body.find_first_of(".eE") != std::string_view::npos;
    if (!is_float) {
      std::int64_t v = 0;
      auto r = std::from_chars(body.data(), body.data() + body.size(), v);
      if (r.ec == std::errc() && r.ptr == body.data() + body.size()) return neg ? -v : v;
    } else {
      double v = 0.0;
      auto r = std::from_chars(body.data(), body.data() + body.size(), v);
      if (r.ec == std::errc() && r.ptr == body.data() + body.size()) return neg ? -v : v;
    }
    fail("cannot parse value '" + tok + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::string loc_;
};

std::string join(const std::vector<std::string>& parts, std::size_t n) {
  std::string out;
  for (std::size_t k = 0; k < n; ++k) out += (k ? "." : "") + parts[k];
  return out;
}

}  // namespace

nlohmann::json parse_toml(std::string_view text, const std::string& source) {
  json root = json::object();
  json* table = &root;
  std::vector<std::string> table_path;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = end + 1;
    Parser p(line, source + ":" + std::to_string(line_no));
    if (!p.at_end_or_comment()) {
      if (p.eat('[')) {
        if (p.eat('[')) p.fail("arrays of tables are not supported");
        table_path = p.key_path();
        if (!p.eat(']')) p.fail("expected ']' after table name");
        if (!p.at_end_or_comment()) p.fail("unexpected text after table header");
        table = &root;
        for (std::size_t k = 0; k < table_path.size(); ++k) {
          auto& next = (*table)[table_path[k]];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) p.fail("'" + join(table_path, k + 1) + "' is not a table");
          table = &next;
        }
      } else {
        auto key = p.key_path();
        if (!p.eat('=')) p.fail("expected '=' after key");
        auto v = p.value();
        if (!p.at_end_or_comment()) p.fail("unexpected text after value");
        json* dst = table;
        for (std::size_t k = 0; k + 1 < key.size(); ++k) {
          auto& next = (*dst)[key[k]];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) p.fail("'" + join(key, k + 1) + "' is not a table");
          dst = &next;
        }
        if (dst->contains(key.back())) p.fail("duplicate key '" + join(key, key.size()) + "'");
        (*dst)[key.back()] = std::move(v);
      }
    }
    if (end == text.size()) break;
  }
  return root;
}

}  // namespace teamprod
