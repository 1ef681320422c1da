#include "inspire/fileio.hpp"
#include "inspire/error.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

namespace inspire::io {

namespace {
std::atomic<FaultPoint> g_fault{FaultPoint::none};

void write_and_sync(const std::filesystem::path& path, std::string_view bytes) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    std::size_t written = 0;
    while (written < bytes.size()) {
        const auto n = ::write(fd, bytes.data() + written, bytes.size() - written);
        if (n < 0) {
            ::close(fd);
            throw Error(ErrorCode::io, "write failed for " + path.string());
        }
        written += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
}
}  // namespace

std::string dump(const json& j, int indent) {
    return j.dump(indent, ' ', false, json::error_handler_t::replace);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::not_found, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void inject_fault(FaultPoint point) { g_fault.store(point); }

void write_atomic(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    write_and_sync(tmp, bytes);
    if (g_fault.exchange(FaultPoint::none) == FaultPoint::after_temp_write) {
        throw Error(ErrorCode::io, "injected fault before rename of " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::io, "rename failed for " + path.string() + ": " + ec.message());
}

JsonLines parse_json_lines(std::string_view content) {
    JsonLines out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        auto end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        ++line_no;
        auto line = content.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        bool blank = true;
        for (char c : line) {
            if (c != ' ' && c != '\t') {
                blank = false;
                break;
            }
        }
        if (!blank) {
            auto j = json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                out.errors.push_back({line_no, "malformed JSON"});
            } else if (!j.is_object()) {
                out.errors.push_back({line_no, "expected a JSON object"});
            } else {
                out.objects.push_back(std::move(j));
                out.line_numbers.push_back(line_no);
            }
        }
        if (end == content.size()) break;
        pos = end + 1;
    }
    return out;
}

void check_format_version(const json& j, std::string_view artifact) {
    const auto it = j.find("format_version");
    if (it == j.end() || !it->is_string()) {
        throw Error(ErrorCode::validation, std::string(artifact) + ": missing format_version");
    }
    const auto& v = it->get_ref<const std::string&>();
    int major = -1;
    try {
        major = std::stoi(v.substr(0, v.find('.')));
    } catch (const std::exception&) {
    }
    if (major != kFormatMajor) {
        throw Error(ErrorCode::validation,
                    std::string(artifact) + ": unsupported format_version " + v);
    }
}

LineLog::LineLog(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void LineLog::append(const json& record) {
    const auto line = dump(record) + "\n";
    std::lock_guard lock(mutex_);
    std::FILE* f = std::fopen(path_.c_str(), "ab");
    if (!f) throw Error(ErrorCode::io, "cannot append to " + path_.string());
    std::fwrite(line.data(), 1, line.size(), f);
    std::fflush(f);
    ::fsync(::fileno(f));
    std::fclose(f);
}

}  // namespace inspire::io
