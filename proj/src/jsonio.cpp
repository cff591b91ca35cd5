#include "anosov/jsonio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace anosov::jsonio {

JValue& JValue::operator[](const std::string& key) {
  if (std::holds_alternative<std::nullptr_t>(v_)) v_ = Object{};
  if (!is_object()) throw std::logic_error("JValue: not an object");
  auto& obj = std::get<Object>(v_);
  for (auto& [k, v] : obj)
    if (k == key) return v;
  obj.emplace_back(key, JValue());
  return obj.back().second;
}

void JValue::push_back(JValue v) {
  if (std::holds_alternative<std::nullptr_t>(v_)) v_ = Array{};
  if (!is_array()) throw std::logic_error("JValue: not an array");
  std::get<Array>(v_).push_back(std::move(v));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_escaped(std::ostream& os, const std::string& s) {
  os << '"';
  for (char c : s) {
    switch (c) {
      case '"': os << "\\\""; break;
      case '\\': os << "\\\\"; break;
      case '\n': os << "\\n"; break;
      case '\t': os << "\\t"; break;
      case '\r': os << "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          os << buf;
        } else {
          os << c;
        }
    }
  }
  os << '"';
}

void pad(std::ostream& os, int indent) {
  for (int i = 0; i < indent; ++i) os << ' ';
}

}  // namespace

void JValue::write(std::ostream& os, int indent) const {
  if (std::holds_alternative<std::nullptr_t>(v_)) {
    os << "null";
  } else if (auto* b = std::get_if<bool>(&v_)) {
    os << (*b ? "true" : "false");
  } else if (auto* i = std::get_if<std::int64_t>(&v_)) {
    os << *i;
  } else if (auto* d = std::get_if<double>(&v_)) {
    os << format_double(*d);
  } else if (auto* s = std::get_if<std::string>(&v_)) {
    write_escaped(os, *s);
  } else if (auto* a = std::get_if<Array>(&v_)) {
    if (a->empty()) {
      os << "[]";
      return;
    }
    os << "[\n";
    for (std::size_t k = 0; k < a->size(); ++k) {
      pad(os, indent + 2);
      (*a)[k].write(os, indent + 2);
      if (k + 1 < a->size()) os << ',';
      os << '\n';
    }
    pad(os, indent);
    os << ']';
  } else {
    const auto& obj = std::get<Object>(v_);
    if (obj.empty()) {
      os << "{}";
      return;
    }
    std::vector<const std::pair<std::string, JValue>*> sorted;
    sorted.reserve(obj.size());
    for (const auto& kv : obj) sorted.push_back(&kv);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto* x, const auto* y) { return x->first < y->first; });
    os << "{\n";
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      pad(os, indent + 2);
      write_escaped(os, sorted[k]->first);
      os << ": ";
      sorted[k]->second.write(os, indent + 2);
      if (k + 1 < sorted.size()) os << ',';
      os << '\n';
    }
    pad(os, indent);
    os << '}';
  }
}

std::string JValue::dump() const {
  std::ostringstream os;
  write(os, 0);
  os << '\n';
  return os.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace anosov::jsonio
