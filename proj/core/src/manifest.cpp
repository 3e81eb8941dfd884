#include "basisgen/manifest.hpp"

#include "basisgen/coeffio.hpp"
#include "basisgen/text.hpp"

namespace basisgen {

#ifndef BASISGEN_VERSION
#define BASISGEN_VERSION "unknown"
#endif

std::string_view tool_version() { return BASISGEN_VERSION; }

std::string RunManifest::config_hash() const {
    return hex64(fnv1a64(format_key_values(config), fnv1a64(command)));
}

std::string RunManifest::format() const {
    std::map<std::string, std::string> entries;
    entries["command"] = command;
    entries["tool_version"] = std::string(tool_version());
    entries["config_hash"] = config_hash();
    for (const auto& [key, value] : config) {
        entries["config." + key] = value;
    }
    for (const auto& [key, value] : inputs) {
        entries["input." + key] = value;
    }
    for (const auto& [key, value] : results) {
        entries["result." + key] = value;
    }
    for (const auto& [stage, seconds] : stage_seconds) {
        entries["wall_seconds." + stage] = format_double(seconds);
    }
    return format_key_values(entries);
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    write_file(path, manifest.format());
}

StageTimer::StageTimer(RunManifest& manifest, std::string stage)
    : manifest_(manifest), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}

StageTimer::~StageTimer() {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    manifest_.stage_seconds.emplace_back(stage_, elapsed.count());
}

}  // namespace basisgen
