#pragma once

#include <stdexcept>
#include <string>

namespace ctwpc {

enum class ErrorKind {
    InvalidSpec,
    AboveCutoff,
    AmplitudeOutOfRange,
    NoSolutionInBand,
    PumpAboveCutoff,
    WrongPropagationSigns,
    SectionMismatch,
    SingularNetwork,
    NonConvergence,
    DecompositionIllConditioned,
    NoPeakAboveThreshold,
    NonUniformGrid,
    Config,
    Io,
};

const char* to_string(ErrorKind kind);

/// Base for every failure raised by the library. The kind is machine-readable
/// and ends up in the CLI error JSON.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class NonConvergence : public Error {
public:
    NonConvergence(int iterations, double residual, const std::string& what)
        : Error(ErrorKind::NonConvergence, what), iterations_(iterations), residual_(residual) {}

    [[nodiscard]] int iterations() const noexcept { return iterations_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

}  // namespace ctwpc
