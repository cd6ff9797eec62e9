#include "skillrrt/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "skillrrt/error.hpp"
#include "skillrrt/geometry.hpp"

namespace skillrrt::config {

double Value::as_number() const {
  if (const auto* d = std::get_if<double>(&data_)) return *d;
  Fail("expected a number");
}

std::int64_t Value::as_int() const {
  const double d = as_number();
  if (std::floor(d) != d || std::abs(d) > 9.0e15) Fail("expected an integer");
  return static_cast<std::int64_t>(d);
}

std::uint64_t Value::as_uint() const {
  const std::int64_t v = as_int();
  if (v < 0) Fail("expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

const std::string& Value::as_string() const {
  if (const auto* s = std::get_if<std::string>(&data_)) return *s;
  Fail("expected a string");
}

bool Value::as_bool() const {
  if (const auto* b = std::get_if<bool>(&data_)) return *b;
  Fail("expected true or false");
}

const Array& Value::as_array() const {
  if (const auto* a = std::get_if<std::shared_ptr<Array>>(&data_)) return **a;
  Fail("expected an array");
}

const Table& Value::as_table() const {
  if (const auto* t = std::get_if<std::shared_ptr<Table>>(&data_)) return **t;
  Fail("expected a table");
}

std::vector<double> Value::as_numbers() const {
  std::vector<double> out;
  for (const auto& v : as_array()) out.push_back(v.as_number());
  return out;
}

std::vector<std::string> Value::as_strings() const {
  std::vector<std::string> out;
  for (const auto& v : as_array()) out.push_back(v.as_string());
  return out;
}

bool Value::contains(const std::string& key) const {
  return is_table() && as_table().count(key) > 0;
}

const Value& Value::at(const std::string& key) const {
  const Table& t = as_table();
  auto it = t.find(key);
  if (it == t.end()) {
    throw ConfigError("missing required key", line_, path_.empty() ? key : path_ + "." + key);
  }
  return it->second;
}

double Value::number_or(const std::string& key, double fallback) const {
  return contains(key) ? at(key).as_number() : fallback;
}

std::int64_t Value::int_or(const std::string& key, std::int64_t fallback) const {
  return contains(key) ? at(key).as_int() : fallback;
}

std::string Value::string_or(const std::string& key, const std::string& fallback) const {
  return contains(key) ? at(key).as_string() : fallback;
}

bool Value::bool_or(const std::string& key, bool fallback) const {
  return contains(key) ? at(key).as_bool() : fallback;
}

void Value::Fail(const std::string& what) const { throw ConfigError(what, line_, path_); }

void AllowKeys(const Value& table, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : table.as_table()) {
    if (!allowed.count(k)) throw ConfigError("unknown key", v.line(), v.path());
  }
}

namespace {

std::string Join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

bool IsBareKeyChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Value Run() {
    root_ = Value(std::make_shared<Table>(), 1, "");
    current_ = &root_;
    current_path_.clear();
    while (!AtEnd()) ParseLine();
    return root_;
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  Value root_;
  Value* current_ = nullptr;
  std::string current_path_;

  bool AtEnd() const { return pos_ >= text_.size(); }
  char Peek() const { return AtEnd() ? '\0' : text_[pos_]; }

  [[noreturn]] void Error(const std::string& what, const std::string& key) const {
    throw ConfigError(what, line_, key);
  }

  void SkipSpaces() {
    while (!AtEnd() && (Peek() == ' ' || Peek() == '\t' || Peek() == '\r')) ++pos_;
  }

  void SkipComment() {
    if (Peek() == '#') {
      while (!AtEnd() && Peek() != '\n') ++pos_;
    }
  }

  // Whitespace, newlines and comments inside arrays.
  void SkipInsideArray() {
    for (;;) {
      SkipSpaces();
      SkipComment();
      if (Peek() == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      break;
    }
  }

  void ExpectLineEnd(const std::string& key) {
    SkipSpaces();
    SkipComment();
    if (AtEnd()) return;
    if (Peek() != '\n') Error("unexpected trailing characters", key);
    ++pos_;
    ++line_;
  }

  std::string ParseKey(const std::string& context) {
    SkipSpaces();
    if (Peek() == '"') return ParseString(context);
    const std::size_t start = pos_;
    while (!AtEnd() && (IsBareKeyChar(Peek()) || Peek() == '.')) ++pos_;
    if (start == pos_) Error("expected a key", context);
    return text_.substr(start, pos_ - start);
  }

  std::string ParseString(const std::string& key) {
    ++pos_;  // opening quote
    std::string out;
    while (!AtEnd() && Peek() != '"') {
      char c = text_[pos_++];
      if (c == '\n') Error("unterminated string", key);
      if (c == '\\') {
        if (AtEnd()) Error("unterminated string", key);
        const char e = text_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: Error(std::string("unknown escape \\") + e, key);
        }
      } else {
        out += c;
      }
    }
    if (AtEnd()) Error("unterminated string", key);
    ++pos_;
    return out;
  }

  Value* Descend(Value* node, const std::string& key, const std::string& path, bool array_tail) {
    auto& table = *std::get<std::shared_ptr<Table>>(node->storage());
    auto it = table.find(key);
    if (array_tail) {
      if (it == table.end()) {
        it = table.emplace(key, Value(std::make_shared<Array>(), line_, path)).first;
      }
      if (!it->second.is_array()) Error("key already defined as a non-array", path);
      auto& arr = *std::get<std::shared_ptr<Array>>(it->second.storage());
      const std::string elem_path = path + "[" + std::to_string(arr.size()) + "]";
      arr.emplace_back(std::make_shared<Table>(), line_, elem_path);
      return &arr.back();
    }
    if (it == table.end()) {
      it = table.emplace(key, Value(std::make_shared<Table>(), line_, path)).first;
    }
    if (it->second.is_table()) return &it->second;
    if (it->second.is_array() && !it->second.as_array().empty() &&
        it->second.as_array().back().is_table()) {
      return &std::get<std::shared_ptr<Array>>(it->second.storage())->back();
    }
    Error("key already defined as a value", path);
  }

  std::vector<std::string> SplitDotted(const std::string& key, const std::string& context) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : key) {
      if (c == '.') {
        if (cur.empty()) Error("empty key segment", context);
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (cur.empty()) Error("empty key segment", context);
    parts.push_back(cur);
    return parts;
  }

  void ParseHeader() {
    ++pos_;
    const bool array = Peek() == '[';
    if (array) ++pos_;
    const std::string name = ParseKey(current_path_);
    SkipSpaces();
    if (Peek() != ']') Error("expected ']' after table name", name);
    ++pos_;
    if (array) {
      if (Peek() != ']') Error("expected ']]' after array-of-tables name", name);
      ++pos_;
    }
    const auto parts = SplitDotted(name, name);
    Value* node = &root_;
    std::string path;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      path = Join(path, parts[i]);
      node = Descend(node, parts[i], path, array && i + 1 == parts.size());
    }
    current_ = node;
    current_path_ = node->path();
    ExpectLineEnd(name);
  }

  Value ParseValue(const std::string& path) {
    SkipSpaces();
    const int line = line_;
    const char c = Peek();
    if (c == '"') return Value(ParseString(path), line, path);
    if (c == '[') {
      ++pos_;
      auto arr = std::make_shared<Array>();
      SkipInsideArray();
      while (Peek() != ']') {
        if (AtEnd()) Error("unterminated array", path);
        arr->push_back(ParseValue(path + "[" + std::to_string(arr->size()) + "]"));
        SkipInsideArray();
        if (Peek() == ',') {
          ++pos_;
          SkipInsideArray();
        } else if (Peek() != ']') {
          Error("expected ',' or ']' in array", path);
        }
      }
      ++pos_;
      return Value(arr, line, path);
    }
    const std::size_t start = pos_;
    while (!AtEnd() && Peek() != ',' && Peek() != ']' && Peek() != '\n' && Peek() != '#') ++pos_;
    std::string token = text_.substr(start, pos_ - start);
    while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back()))) token.pop_back();
    if (token.empty()) Error("expected a value", path);
    if (token == "true") return Value(true, line, path);
    if (token == "false") return Value(false, line, path);
    return Value(ParseNumber(token, path), line, path);
  }

  double ParseNumber(const std::string& token, const std::string& path) {
    // Accepts plain numbers and the angle shorthands pi, -pi, pi/N, -pi/N, N*pi.
    std::string t = token;
    double sign = 1.0;
    if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
      if (t.size() > 1 && t[1] == 'p') {
        sign = t[0] == '-' ? -1.0 : 1.0;
        t = t.substr(1);
      }
    }
    if (t.rfind("pi", 0) == 0) {
      if (t == "pi") return sign * kPi;
      if (t.size() > 3 && t[2] == '/') return sign * kPi / ParsePlain(t.substr(3), token, path);
      Error("malformed number '" + token + "'", path);
    }
    const auto star = t.find("*pi");
    if (star != std::string::npos && star + 3 == t.size()) {
      return sign * ParsePlain(t.substr(0, star), token, path) * kPi;
    }
    return sign * ParsePlain(t, token, path);
  }

  double ParsePlain(const std::string& s, const std::string& token, const std::string& path) {
    if (s.empty()) Error("malformed number '" + token + "'", path);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) {
      Error("malformed number '" + token + "'", path);
    }
    return v;
  }

  void ParseLine() {
    SkipSpaces();
    SkipComment();
    if (AtEnd()) return;
    if (Peek() == '\n') {
      ++pos_;
      ++line_;
      return;
    }
    if (Peek() == '[') {
      ParseHeader();
      return;
    }
    const std::string key = ParseKey(current_path_);
    const std::string path = Join(current_path_, key);
    if (key.find('.') != std::string::npos) Error("dotted keys are not supported", path);
    SkipSpaces();
    if (Peek() != '=') Error("expected '=' after key", path);
    ++pos_;
    Value v = ParseValue(path);
    auto& table = *std::get<std::shared_ptr<Table>>(current_->storage());
    if (table.count(key)) Error("duplicate key", path);
    table.emplace(key, std::move(v));
    ExpectLineEnd(path);
  }
};

}  // namespace

Value Parse(const std::string& text) { return Parser(text).Run(); }

Value ParseFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

}  // namespace skillrrt::config
