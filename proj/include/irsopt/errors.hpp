// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace irsopt {

// Caller broke a precondition (shape mismatch, empty batch, unbound root, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// tau outside the open interval (0, 1).
class DegenerateSplit : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class SingularChannel : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Raised by the autodiff tape when an op is evaluated outside its domain.
class NumericDomainError : public std::domain_error {
public:
    NumericDomainError(std::string op, const std::string& what)
        : std::domain_error(op + ": " + what), op_(std::move(op)) {}
    const std::string& op() const noexcept { return op_; }

private:
    std::string op_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateReport : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace irsopt
