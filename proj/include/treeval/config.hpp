#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treeval/bench.hpp"

namespace treeval {

/// One "key = value" line of an INI-style document.
struct IniEntry {
  std::string section;
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct IniDocument {
  std::string source;  // file name used in messages
  std::vector<IniEntry> entries;

  const IniEntry* find(std::string_view section, std::string_view key) const;
};

/// Sections in [brackets], "key = value" lines, '#' or ';' comments.
/// Duplicate keys and lines outside a section are errors.
IniDocument parse_ini(std::string_view text, std::string source = "<config>");

struct RunConfig {
  ExperimentPlan plan;
  BermudanPlan bermudan;
  Scale scale = Scale::Desk;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0 = all cores
  std::filesystem::path out = "treeval-out";
};

struct Overrides {
  std::optional<Scale> scale;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::filesystem::path> out;
};

/// Resolves a document against the presets. Unknown sections or keys and
/// invalid values raise ErrorKind::Config naming source:line and the key.
RunConfig build_config(const IniDocument& doc, const Overrides& ov = {});
RunConfig load_config(const std::filesystem::path& path, const Overrides& ov = {});

/// Resolved configuration as a document that build_config accepts again.
std::string render_snapshot(const RunConfig& cfg);
std::string render_snapshot(const ExperimentPlan& plan);
std::string render_snapshot(const BermudanPlan& plan);

Scale parse_scale(std::string_view s);
EstimatorKind parse_estimator(std::string_view s);

}  // namespace treeval
