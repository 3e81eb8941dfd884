#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace basisgen {

std::string_view tool_version();

/// What a single CLI invocation did: its canonical configuration (file values
/// merged with flags), the provenance of its inputs and per-stage wall time.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config;
    std::map<std::string, std::string> inputs;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::map<std::string, std::string> results;

    /// FNV-1a over the command and config; excludes timings and inputs.
    std::string config_hash() const;
    std::string format() const;
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

/// Adds the elapsed time of its own lifetime to a manifest.
class StageTimer {
public:
    StageTimer(RunManifest& manifest, std::string stage);
    ~StageTimer();

    StageTimer(const StageTimer&) = delete;
    StageTimer& operator=(const StageTimer&) = delete;

private:
    RunManifest& manifest_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace basisgen
