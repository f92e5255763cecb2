#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

/// Self-cleaning unique directory for test artifacts.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned> counter{0};
        static const unsigned run_tag = std::random_device{}();
        path = std::filesystem::temp_directory_path() /
               ("spectrafuse_test_" + std::to_string(run_tag) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }

    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

/// Runs f, which must throw E, and returns the exception message.
template <typename E, typename F>
std::string message_of(F&& f) {
    try {
        f();
    } catch (const E& e) {
        return e.what();
    }
    return "<no exception thrown>";
}
