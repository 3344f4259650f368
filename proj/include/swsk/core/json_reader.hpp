#pragma once

#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "swsk/core/errors.hpp"

namespace swsk {

// Path-tracking accessor over a JSON object. Every failure raises SchemaError
// naming the full path of the offending member.
class JsonReader {
 public:
  JsonReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  const nlohmann::json& raw() const { return j_; }
  const std::string& path() const { return path_; }
  bool has(std::string_view key) const { return j_.contains(key) && !j_.at(std::string(key)).is_null(); }

  std::string child_path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  [[noreturn]] void fail(const std::string& what) const { throw SchemaError(path_.empty() ? "$" : path_, what); }
  [[noreturn]] void fail(std::string_view key, const std::string& what) const {
    throw SchemaError(child_path(key), what);
  }

  /// Rejects members not in `allowed`; catches misspelt keys in config files.
  void only(std::initializer_list<std::string_view> allowed) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool ok = false;
      for (auto a : allowed) ok = ok || it.key() == a;
      if (!ok) throw SchemaError(child_path(it.key()), "unknown member");
    }
  }

  JsonReader object(std::string_view key) const {
    if (!has(key)) fail(key, "missing object");
    return JsonReader(j_.at(std::string(key)), child_path(key));
  }

  const nlohmann::json& array(std::string_view key) const {
    if (!has(key) || !j_.at(std::string(key)).is_array()) fail(key, "expected an array");
    return j_.at(std::string(key));
  }

  double number(std::string_view key) const {
    if (!has(key)) fail(key, "missing number");
    const auto& v = j_.at(std::string(key));
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  double number(std::string_view key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::optional<double> optional_number(std::string_view key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::int64_t integer(std::string_view key) const {
    if (!has(key)) fail(key, "missing integer");
    const auto& v = j_.at(std::string(key));
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(std::string_view key, std::int64_t fallback) const { return has(key) ? integer(key) : fallback; }

  std::uint64_t unsigned_integer(std::string_view key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(std::string(key));
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(key, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(std::string_view key) const {
    if (!has(key)) fail(key, "missing string");
    const auto& v = j_.at(std::string(key));
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::string string(std::string_view key, std::string fallback) const { return has(key) ? string(key) : fallback; }

  bool boolean(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(std::string(key));
    if (!v.is_boolean()) fail(key, "expected a boolean");
    return v.get<bool>();
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
};

}  // namespace swsk
