#pragma once

#include <stdexcept>
#include <string>

namespace va {

// Base class for all errors raised by this library. CLI maps subclasses
// to exit codes; tests match on the concrete types.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class NonInvertibleError : public Error {
public:
    explicit NonInvertibleError(const std::string& msg) : Error(msg) {}
};

class PointAtInfinityError : public Error {
public:
    explicit PointAtInfinityError(const std::string& msg) : Error(msg) {}
};

class DegenerateAngleError : public Error {
public:
    explicit DegenerateAngleError(const std::string& msg) : Error(msg) {}
};

class MalformedFileError : public Error {
public:
    explicit MalformedFileError(const std::string& msg) : Error(msg) {}
};

class ImageTooSmallError : public Error {
public:
    explicit ImageTooSmallError(const std::string& msg) : Error(msg) {}
};

class GridOutOfBoundsError : public Error {
public:
    explicit GridOutOfBoundsError(const std::string& msg) : Error(msg) {}
};

class DimensionMismatchError : public Error {
public:
    explicit DimensionMismatchError(const std::string& msg) : Error(msg) {}
};

class DegenerateDataError : public Error {
public:
    explicit DegenerateDataError(const std::string& msg) : Error(msg) {}
};

class NonPositiveInputError : public Error {
public:
    explicit NonPositiveInputError(const std::string& msg) : Error(msg) {}
};

class EmptyWindowSetError : public Error {
public:
    explicit EmptyWindowSetError(const std::string& msg) : Error(msg) {}
};

class MissingCacheEntryError : public Error {
public:
    explicit MissingCacheEntryError(const std::string& msg) : Error(msg) {}
};

class InsufficientDiversityError : public Error {
public:
    explicit InsufficientDiversityError(const std::string& msg) : Error(msg) {}
};

class EmptyCurveError : public Error {
public:
    explicit EmptyCurveError(const std::string& msg) : Error(msg) {}
};

class InvalidConfigError : public Error {
public:
    explicit InvalidConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace va
