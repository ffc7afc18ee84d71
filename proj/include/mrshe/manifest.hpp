#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mrshe {

/// FNV-1a 64-bit content checksum, rendered as 16 hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

/// Run record: full config echo, code version, output inventory with
/// checksums. Wall-clock timings live in their own section so the scientific
/// outputs stay byte-comparable.
class RunManifest {
 public:
  RunManifest(nlohmann::json config_echo, std::string version);

  /// Writes content to output_dir/name and records it in the inventory.
  void write_output(const std::string& output_dir, const std::string& name,
                    const std::string& content);
  void add_timing(const std::string& stage, double seconds);

  nlohmann::json to_json() const;
  /// Serializes the manifest itself to output_dir/run_manifest.json.
  void write(const std::string& output_dir) const;

 private:
  struct Output {
    std::string path;
    std::size_t bytes;
    std::string checksum;
  };
  nlohmann::json config_echo_;
  std::string version_;
  std::vector<Output> outputs_;
  nlohmann::json timings_ = nlohmann::json::object();
};

}  // namespace mrshe
