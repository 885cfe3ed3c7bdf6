#pragma once

// Small TOML subset for experiment configuration: [section] headers,
// `key = value` lines, '#' comments, and values that are numbers, booleans,
// double-quoted strings, or (possibly nested, possibly multi-line) arrays.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mcse/pipeline.hpp"

namespace mcse::config {

struct Value {
  using Array = std::vector<Value>;
  std::variant<double, bool, std::string, Array> data;

  double as_number(const std::string& key) const;
  bool as_bool(const std::string& key) const;
  const std::string& as_string(const std::string& key) const;
  const Array& as_array(const std::string& key) const;
};

class Document {
 public:
  static Document parse(std::string_view text);
  static Document load(const std::filesystem::path& path);

  // Keys are "section.key" (or "key" before the first section header).
  const Value* find(const std::string& key) const;
  const std::map<std::string, Value>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, Value> entries_;
};

EnhancementConfig to_enhancement_config(const Document& doc);
EnhancementConfig load_enhancement_config(const std::filesystem::path& path);

// Reads a geometry file: keys under [geometry] or at top level.
ArrayGeometry load_geometry(const std::filesystem::path& path);

// Full, commented config text that parses back to `config`.
std::string emit(const EnhancementConfig& config);

}  // namespace mcse::config
