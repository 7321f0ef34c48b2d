#pragma once

// Field-path aware accessors over nlohmann::json used by the file loaders.

#include <algorithm>
#include <array>
#include <initializer_list>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sfgsta/errors.hpp"

namespace sfg::json_util {

/// Parses `text`; syntax errors become ValidationError with line and column.
inline nlohmann::json parse_document(std::string_view text, const std::string& what) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ValidationError(what + ": malformed JSON at line " + std::to_string(line) + ", column " +
                          std::to_string(column) + ": " + e.what());
  }
}

class Reader {
 public:
  Reader(const nlohmann::json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  const nlohmann::json& node() const { return node_; }
  bool has(const std::string& key) const { return node_.contains(key); }

  std::string field(const std::string& key) const { return path_ + "." + key; }

  const nlohmann::json& require(const std::string& key) const {
    auto it = node_.find(key);
    if (it == node_.end()) fail(field(key), "missing required field");
    return *it;
  }

  double number(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_number()) fail(field(key), "expected a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(const std::string& key) const {
    if (!has(key) || node_.at(key).is_null()) return std::nullopt;
    return number(key);
  }

  double number_or(const std::string& key, double fallback) const {
    return optional_number(key).value_or(fallback);
  }

  std::string string(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_string()) fail(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::optional<std::string> optional_string(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return string(key);
  }

  bool boolean_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) fail(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::size_t count_or(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      fail(field(key), "expected a non-negative integer");
    }
    return v.get<std::size_t>();
  }

  /// Rejects keys outside `allowed`, so a misspelt or wrongly-suffixed field
  /// is an error rather than a silently applied default.
  void only(std::initializer_list<std::string_view> allowed) const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), std::string_view(it.key())) == allowed.end()) {
        fail(field(it.key()), "unknown field");
      }
    }
  }

  Reader object(const std::string& key) const { return Reader(require(key), field(key)); }

  std::vector<double> number_array(const std::string& key, std::optional<std::size_t> size = {}) const {
    const auto& v = require(key);
    if (!v.is_array()) fail(field(key), "expected an array of numbers");
    if (size && v.size() != *size) {
      fail(field(key), "expected exactly " + std::to_string(*size) + " numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::array<double, 4> array4(const std::string& key) const {
    const auto v = number_array(key, 4);
    return {v[0], v[1], v[2], v[3]};
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& why) {
    throw ValidationError(where + ": " + why);
  }

 private:
  const nlohmann::json& node_;
  std::string path_;
};

}  // namespace sfg::json_util
