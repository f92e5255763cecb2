#pragma once

#include <stdexcept>
#include <string>

namespace spectrafuse {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem-level failure: missing file, unwritable path.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed file content. Messages name the offending line or byte offset.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Value or configuration violating a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// External detector process failed, timed out, or produced no usable output.
class DetectorError : public Error {
public:
    DetectorError(const std::string& what, int exit_status = -1)
        : Error(what), exit_status_(exit_status) {}

    int exit_status() const { return exit_status_; }

private:
    int exit_status_;
};

/// Evaluation-domain error, e.g. a detection rate with no ground truth.
class EvalError : public Error {
public:
    using Error::Error;
};

}  // namespace spectrafuse
