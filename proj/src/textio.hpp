#pragma once

// Internal text-file helpers shared by the parsers. All formats handled by
// the toolkit are line oriented, use '#' for comments, and report errors
// with "path:line:" prefixes, so the plumbing lives here once.

#include "spectrafuse/error.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace spectrafuse::textio {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoError("read failed for " + path.string());
    }
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

/// Strips a trailing '#' comment, then surrounding whitespace.
inline std::string_view strip_comment(std::string_view line) {
    if (auto pos = line.find('#'); pos != std::string_view::npos) {
        line = line.substr(0, pos);
    }
    return trim(line);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

/// A non-blank content line together with its 1-based line number.
struct Line {
    std::size_t number;
    std::string_view text;
};

/// Returns the content lines of a text blob: comments stripped, blank
/// lines dropped, original line numbers preserved for error messages.
inline std::vector<Line> content_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view raw = (eol == std::string_view::npos)
                                   ? text.substr(pos)
                                   : text.substr(pos, eol - pos);
        ++number;
        std::string_view body = strip_comment(raw);
        if (!body.empty()) {
            lines.push_back({number, body});
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return lines;
}

[[noreturn]] inline void fail_line(const std::filesystem::path& path, std::size_t line,
                                   const std::string& message) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": " + message);
}

inline std::int64_t parse_int(std::string_view token, const std::filesystem::path& path,
                              std::size_t line, std::string_view what) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        fail_line(path, line,
                  "invalid " + std::string(what) + " '" + std::string(token) + "'");
    }
    return value;
}

inline double parse_double(std::string_view token, const std::filesystem::path& path,
                           std::size_t line, std::string_view what) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        fail_line(path, line,
                  "invalid " + std::string(what) + " '" + std::string(token) + "'");
    }
    return value;
}

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

/// Fixed-point formatting with the given number of decimals.
inline std::string format_fixed(double value, int decimals) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::fixed, decimals);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace spectrafuse::textio
