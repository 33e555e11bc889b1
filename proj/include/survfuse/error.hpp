#pragma once

#include <stdexcept>
#include <string>

namespace survfuse {

// Bad input: malformed files, violated preconditions. CLI exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical or I/O failure while running an otherwise valid request. CLI exit code 2.
class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Newton iterations exhausted or coefficients diverging (monotone likelihood).
class ConvergenceError : public RuntimeFailure {
public:
    using RuntimeFailure::RuntimeFailure;
};

class SingularHessianError : public RuntimeFailure {
public:
    SingularHessianError(const std::string& what, double condition)
        : RuntimeFailure(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

// Non-finite loss during training.
class DivergenceError : public RuntimeFailure {
public:
    DivergenceError(const std::string& what, int epoch)
        : RuntimeFailure(what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

}  // namespace survfuse
