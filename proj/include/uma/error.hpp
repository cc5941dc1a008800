#pragma once

#include <stdexcept>
#include <string>

namespace uma {

/// Bad configuration or malformed input detected before any work starts.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Endpoint unreachable or persistently failing after retries.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Embedding provider could not produce vectors.
class ProviderFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Judge endpoint unavailable when a judge-mode score was requested.
class JudgeUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The system segment alone does not fit the prompt budget.
class BudgetTooSmall : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation that requires the other phase was invoked directly.
class PhaseViolationError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class EmptyCorpus : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyStream : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Timeline sampling asked for more distinct dates than the range holds.
class RangeTooSmall : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Current/reference per-token log-probability lists differ in length.
class LengthMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A trajectory in an objective group carries no token log-probabilities.
class MissingLogprobs : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grouped trajectory logs do not form a complete N x M grid.
class GroupShapeMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A question template was applied to a slice with no transactions.
class NoMatchingRecords : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace uma
