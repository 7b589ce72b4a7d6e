#pragma once

#include "bandgen/metrics.hpp"
#include "bandgen/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace bandgen {

/// Every tunable of a train/eval run. Serialised as flat `key = value` lines
/// (a TOML subset: comments with '#', optional quotes around strings).
struct RunConfig {
    ModelConfig model;
    MetricConfig metrics;
    std::string mode = "bwr";
    std::uint64_t ordering_seed = 0;
    int bfs_samples = 100000;
    double val_fraction = 0.2;
    int workers = 1;

    /// Applies one key; throws InputError for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// Every key with its resolved value, sorted by key.
    std::map<std::string, std::string> echo() const;
    /// FNV-1a 64 of the echo, as 16 hex digits.
    std::string hash() const;
};

std::map<std::string, std::string> parse_kv(const std::string& text);
std::map<std::string, std::string> load_kv_file(const std::filesystem::path& path);
void apply_kv(RunConfig& cfg, const std::map<std::string, std::string>& kv);

std::string fnv1a_hex(const std::string& s);

} // namespace bandgen
