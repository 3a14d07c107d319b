#pragma once

#include <stdexcept>
#include <string>

namespace viewfuse {

/// Base class for every error raised by the library. The CLI maps these to
/// exit code 2 (data error).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDepthError : public Error {
public:
    using Error::Error;
};

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

class InvalidCameraError : public Error {
public:
    using Error::Error;
};

class MissingFileError : public Error {
public:
    explicit MissingFileError(const std::string& path)
        : Error("missing file: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class MalformedFileError : public Error {
public:
    MalformedFileError(const std::string& path, const std::string& what)
        : Error("malformed file " + path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

/// A hole has no valid depth in its surrounding band.
class UnfillableError : public Error {
public:
    using Error::Error;
};

/// Too few clutter vertices agree with captured depth in any view.
class MisalignmentError : public Error {
public:
    using Error::Error;
};

class BackendError : public Error {
public:
    using Error::Error;
};

class GridTooLargeError : public Error {
public:
    using Error::Error;
};

}  // namespace viewfuse
