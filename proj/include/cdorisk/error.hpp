#pragma once

#include <stdexcept>
#include <string>

namespace cdorisk {

// Argument outside an operation's domain (negative time, p outside (0,1), ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// f(lo) and f(hi) have the same sign.
class NoBracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The CDS consistency condition cannot be met, e.g. R_m below market recovery.
class InfeasibleCalibration : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Unknown or already-defaulted name in a settlement or risk request.
class NameError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed portfolio, config or model spec.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cdorisk
