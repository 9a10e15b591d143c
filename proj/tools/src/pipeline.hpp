#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace vulnsib::cli {

// Command-line values that replace config fields.
struct Overrides {
  std::optional<std::uint64_t> seed;       // "seed"
  std::optional<double> threshold;         // "threshold"
  std::optional<double> p;                 // "sampling.p"
  std::optional<std::string> out;          // "paths.out"
};

// The effective config: the JSON file with overrides applied. Relative paths
// resolve against the directory holding the config file.
class PipelineConfig {
 public:
  PipelineConfig(nlohmann::json doc, std::filesystem::path base_dir);

  static PipelineConfig load(const std::filesystem::path& path, const Overrides& overrides);

  const nlohmann::json& doc() const noexcept { return doc_; }
  std::uint64_t seed() const;
  // Explicit "<section>.seed" when present, else derived from the top seed.
  std::uint64_t stage_seed(const std::string& section) const;
  double threshold() const;

  std::filesystem::path out_dir() const;
  // "paths.<key>" resolved, or out_dir()/fallback when absent and a
  // fallback is given. Throws naming the field otherwise.
  std::filesystem::path path(const std::string& key, const std::string& fallback = {}) const;
  bool has_path(const std::string& key) const;

  // Typed lookups of dotted field names; throw ArgumentError naming the field.
  const nlohmann::json* find(const std::string& field) const;
  double real(const std::string& field, double fallback) const;
  std::int64_t integer(const std::string& field, std::int64_t fallback) const;
  std::string text(const std::string& field, const std::string& fallback) const;
  std::vector<std::string> texts(const std::string& field) const;
  std::vector<int> integers(const std::string& field, const std::vector<int>& fallback) const;

 private:
  nlohmann::json doc_;
  std::filesystem::path base_dir_;
};

inline const std::vector<std::string> kCommands{"ingest",   "synth",    "sample",  "train",
                                                "predict",  "consensus", "group",  "evaluate",
                                                "genexp",   "report"};

// Runs one pipeline command; artifacts go under the config's output
// directory. Throws on any error.
void run_command(const std::string& command, const PipelineConfig& config, std::ostream& log);

// Full command-line entry point. Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vulnsib::cli
