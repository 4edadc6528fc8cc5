#pragma once

#include <stdexcept>
#include <string>

namespace ttts {

/// Invalid argument: bad index, mismatched shape, malformed rank chain.
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// A requested materialization exceeds its configured size cap.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// Normal equations could not be factorized (sigma = 0 and rank deficient).
class SingularError : public std::runtime_error {
public:
    explicit SingularError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or truncated tensor file.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ttts
