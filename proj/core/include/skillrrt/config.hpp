#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace skillrrt::config {

// Hierarchical key-value text in a TOML subset:
//   # comment
//   key = 1.5 | "text" | true | [1, 2, [3, 4]] | pi/2
//   [table.sub]
//   [[array_of_tables]]
// Every value remembers its source line so that errors name line and key path.

class Value;
using Table = std::map<std::string, Value>;
using Array = std::vector<Value>;

class Value {
 public:
  using Storage = std::variant<std::monostate, double, std::string, bool, std::shared_ptr<Array>,
                               std::shared_ptr<Table>>;

  Value() = default;
  Value(Storage data, int line, std::string path)
      : data_(std::move(data)), line_(line), path_(std::move(path)) {}

  bool is_number() const { return std::holds_alternative<double>(data_); }
  bool is_string() const { return std::holds_alternative<std::string>(data_); }
  bool is_bool() const { return std::holds_alternative<bool>(data_); }
  bool is_array() const { return std::holds_alternative<std::shared_ptr<Array>>(data_); }
  bool is_table() const { return std::holds_alternative<std::shared_ptr<Table>>(data_); }

  double as_number() const;
  std::int64_t as_int() const;
  std::uint64_t as_uint() const;
  const std::string& as_string() const;
  bool as_bool() const;
  const Array& as_array() const;
  const Table& as_table() const;
  std::vector<double> as_numbers() const;
  std::vector<std::string> as_strings() const;

  /// Table lookups. `at` throws ConfigError naming the missing key path.
  bool contains(const std::string& key) const;
  const Value& at(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::int64_t int_or(const std::string& key, std::int64_t fallback) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  bool bool_or(const std::string& key, bool fallback) const;

  int line() const { return line_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void Fail(const std::string& what) const;

  Storage& storage() { return data_; }

 private:
  Storage data_;
  int line_ = 0;
  std::string path_;
};

/// Throws ConfigError naming the first key of `table` not in `keys`.
void AllowKeys(const Value& table, std::initializer_list<const char*> keys);

/// Parses text; throws ConfigError with line and key path on malformed input.
Value Parse(const std::string& text);
/// Reads and parses a file; throws IoError when it cannot be read.
Value ParseFile(const std::string& path);

}  // namespace skillrrt::config
