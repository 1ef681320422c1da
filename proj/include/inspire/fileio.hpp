#pragma once

#include "json.hpp"

#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace inspire::io {

using json = nlohmann::json;

// Serialize with invalid UTF-8 replaced instead of throwing.
std::string dump(const json& j, int indent = -1);

std::string read_file(const std::filesystem::path& path);

enum class FaultPoint { none, after_temp_write };

// Durable replace: write a sibling temp file, flush it, then rename over the
// target. Readers see either the old or the new bytes, never a torn file.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);

// Test hook: make the next write_atomic fail at the given point.
void inject_fault(FaultPoint point);

struct LineError {
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct JsonLines {
    std::vector<json> objects;
    std::vector<std::size_t> line_numbers;
    std::vector<LineError> errors;
};

// Parses one JSON object per line; blank lines ignored, bad lines reported
// with their position and skipped.
JsonLines parse_json_lines(std::string_view content);

// Artifact format versions are "MAJOR.MINOR"; unknown majors are rejected.
inline constexpr int kFormatMajor = 1;
inline constexpr std::string_view kFormatVersion = "1.0";
void check_format_version(const json& j, std::string_view artifact);

// Append-only line log; appends from concurrent writers are serialized.
class LineLog {
public:
    explicit LineLog(std::filesystem::path path);

    void append(const json& record);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::mutex mutex_;
};

}  // namespace inspire::io
