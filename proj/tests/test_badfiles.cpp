#include "doctest.h"

#include "bad_corpus.hpp"
#include "spectrafuse/error.hpp"
#include "temp_dir.hpp"

#include <filesystem>
#include <string>

using namespace spectrafuse;

#ifndef SPECTRAFUSE_FIXTURES_DIR
#error "SPECTRAFUSE_FIXTURES_DIR must point at the fixture tree"
#endif

TEST_CASE("every malformed input names the file and the defect") {
    std::filesystem::path base = SPECTRAFUSE_FIXTURES_DIR;
    base /= "bad";
    REQUIRE(std::filesystem::is_directory(base));
    CHECK(testing::bad_corpus().size() >= 12);

    for (const auto& entry : testing::bad_corpus()) {
        CAPTURE(entry.name);
        auto path = base / entry.name;
        REQUIRE(std::filesystem::exists(path));
        std::string msg;
        try {
            entry.load(path);
        } catch (const ParseError& e) {
            msg = e.what();
        } catch (const std::exception& e) {
            FAIL("wrong exception type for ", entry.name, ": ", e.what());
        }
        if (msg.empty()) {
            FAIL("no exception thrown for ", entry.name);
        }
        CHECK_MESSAGE(msg.find(entry.expected) != std::string::npos,
                      entry.name, " message was: ", msg);
        CHECK_MESSAGE(msg.find(entry.name) != std::string::npos,
                      entry.name, " message does not name the file: ", msg);
    }
}

TEST_CASE("missing files raise io errors that name the path") {
    auto missing = std::filesystem::path("/nonexistent") / "nope.txt";
    auto msg = message_of<IoError>([&] { read_detections(missing); });
    CHECK(msg.find("nope.txt") != std::string::npos);
    CHECK_THROWS_AS(read_manifest(missing), IoError);
    CHECK_THROWS_AS(read_scene_spec(missing), IoError);
    CHECK_THROWS_AS(read_image(missing), IoError);
}
