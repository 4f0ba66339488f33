#pragma once

#include <stdexcept>
#include <string>

namespace scesame {

enum class ErrorKind {
    MalformedInput,
    EmptyMask,
    Parameter,
    Shape,
    InvalidAffinity,
    Assignment,
    EmptySelection,
    TooFewMasks,
    EmptyDataset,
    Numeric,
    Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace scesame
