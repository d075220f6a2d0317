#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace thermkit {

/// Base of every domain failure raised by the library. The CLI maps these to
/// exit code 2; anything else escaping main is a bug.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or unachievable geometry (fractions out of range, under-resolved
/// arrays, power regions that miss the mesh).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// An EMT formula whose denominator is not positive.
class SingularFormulaError : public Error {
public:
    using Error::Error;
};

/// Assembly-time singularity (no non-adiabatic boundary).
class SingularSystemError : public Error {
public:
    using Error::Error;
};

/// Iterative solver breakdown or non-convergence.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Iteration budget exhausted before reaching the tolerance. Carries the
/// relative-residual history for diagnosis.
class ConvergenceError : public SolverError {
public:
    ConvergenceError(const std::string& what, std::vector<double> history)
        : SolverError(what), history_(std::move(history)) {}

    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

/// Lookup failures: unknown case, material, core id.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Malformed stack or power documents.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Binary container failures. `kind` distinguishes header, truncation and
/// shape problems so callers can report them separately.
class FormatError : public Error {
public:
    enum class Kind { Magic, Truncated, Shape, Io };

    FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Degenerate datasets (zero-variance channels, empty splits).
class DatasetError : public Error {
public:
    using Error::Error;
};

}  // namespace thermkit
