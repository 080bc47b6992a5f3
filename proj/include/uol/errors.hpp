#pragma once

#include <stdexcept>
#include <string>

namespace uol {

/// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Caller broke a sequencing or shape contract (wrong vector length, sets not
/// nested, closed-loop rule without a learner).
class contract_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Invalid experiment configuration; `key()` names the offending entry.
class config_error : public std::runtime_error {
public:
    config_error(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// File could not be read or written; the message carries the path.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace uol
