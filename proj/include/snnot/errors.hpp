#pragma once

#include <stdexcept>
#include <string>

namespace snnot {

// Base for every error raised by the library. The CLI maps each subclass to
// its own exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Out-of-range index, bad order, mismatched lengths.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// OLS window too short or normal equations singular.
class DegenerateWindowError : public Error {
public:
    using Error::Error;
};

// Self-normalizer not invertible at candidate k.
class SingularNormalizerError : public Error {
public:
    SingularNormalizerError(int k, const std::string& what) : Error(what), k_(k) {}
    int candidate() const noexcept { return k_; }

private:
    int k_;
};

// Candidate summation range empty for a given k.
class InfeasibleCandidateError : public Error {
public:
    using Error::Error;
};

class IntervalTooShortError : public Error {
public:
    using Error::Error;
};

class NoCandidateError : public Error {
public:
    using Error::Error;
};

// Trimming pair, Monte Carlo sizes or interval sets that cannot work together.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace snnot
