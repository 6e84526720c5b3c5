#pragma once

#include <stdexcept>
#include <string>

namespace wsperc {

/// Invalid parameters, mismatched dimensions or unusable inputs.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Green kernel evaluated on the diagonal.
class SingularityError : public std::domain_error {
public:
    explicit SingularityError(const std::string& what) : std::domain_error(what) {}
};

/// Branching simulation exceeded the expected-offspring guard.
class ExplosionError : public std::overflow_error {
public:
    explicit ExplosionError(const std::string& what) : std::overflow_error(what) {}
};

/// Output file could not be opened or written.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

}  // namespace wsperc
