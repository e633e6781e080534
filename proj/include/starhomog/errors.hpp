#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace starhomog {

/// A group index was requested that has no edges at the current stage.
class EmptyGroupError : public std::runtime_error {
public:
    EmptyGroupError(std::size_t group, std::size_t n)
        : std::runtime_error("coefficient group " + std::to_string(group + 1) +
                             " has no edges at stage n=" + std::to_string(n)),
          group_(group), n_(n) {}

    std::size_t group() const noexcept { return group_; }
    std::size_t stage() const noexcept { return n_; }

private:
    std::size_t group_;
    std::size_t n_;
};

/// A non-positive pivot was met during the structured elimination.
class NumericalBreakdown : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The rate quotient is undefined (zero gap or a vanishing denominator).
class UndefinedRate : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace starhomog
