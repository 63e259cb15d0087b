#pragma once

#include <stdexcept>
#include <string>

namespace ttrp {

/// Operand extents or factorizations do not agree.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A linear or multi-index lies outside its shape.
class IndexError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Malformed or unreadable input data (IDX files, datasets).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An internal numerical invariant was violated.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace ttrp
