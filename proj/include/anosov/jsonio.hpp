#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace anosov::jsonio {

// Minimal JSON value for byte-stable report emission: keys are written
// sorted, floats as %.17g, no locale dependence. Parsing is not needed here
// (configs come in through nlohmann::json).
class JValue {
 public:
  using Object = std::vector<std::pair<std::string, JValue>>;
  using Array = std::vector<JValue>;

  JValue() : v_(nullptr) {}
  JValue(std::nullptr_t) : v_(nullptr) {}
  JValue(bool b) : v_(b) {}
  JValue(int i) : v_(static_cast<std::int64_t>(i)) {}
  JValue(std::int64_t i) : v_(i) {}
  JValue(std::size_t i) : v_(static_cast<std::int64_t>(i)) {}
  JValue(double d) : v_(d) {}
  JValue(const char* s) : v_(std::string(s)) {}
  JValue(std::string s) : v_(std::move(s)) {}
  JValue(Array a) : v_(std::move(a)) {}
  JValue(Object o) : v_(std::move(o)) {}

  static JValue object() { return JValue(Object{}); }
  static JValue array() { return JValue(Array{}); }

  // object field access; inserts on first use
  JValue& operator[](const std::string& key);
  void push_back(JValue v);

  bool is_object() const { return std::holds_alternative<Object>(v_); }
  bool is_array() const { return std::holds_alternative<Array>(v_); }

  void write(std::ostream& os, int indent = 0) const;
  std::string dump() const;

 private:
  std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, Array, Object> v_;
};

std::string format_double(double v);

// FNV-1a 64 over raw bytes, used as the config provenance hash
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace anosov::jsonio
