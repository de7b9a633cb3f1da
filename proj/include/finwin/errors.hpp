#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace finwin {

/// Base class for all errors thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A history has (numerically) zero probability; carries the offending
/// observation index within the fold that produced it.
struct ZeroLikelihood : Error {
    std::size_t step;
    explicit ZeroLikelihood(std::size_t step_)
        : Error("zero-likelihood history at observation index " + std::to_string(step_)),
          step(step_) {}
};

/// An enumeration would exceed the configured size limit.
struct CapacityExceeded : Error {
    std::size_t requested;
    std::size_t limit;
    CapacityExceeded(std::size_t requested_, std::size_t limit_)
        : Error("enumeration size " + std::to_string(requested_) + " exceeds limit " +
                std::to_string(limit_)),
          requested(requested_), limit(limit_) {}
};

/// Operation on an empty quantized belief set.
struct EmptySet : Error {
    EmptySet() : Error("quantized belief set is empty") {}
};

/// Value iteration hit its iteration cap before meeting the tolerance.
struct NotConverged : Error {
    int iterations;
    double residual;
    NotConverged(int iterations_, double residual_)
        : Error("value iteration did not converge after " + std::to_string(iterations_) +
                " iterations (residual " + std::to_string(residual_) + ")"),
          iterations(iterations_), residual(residual_) {}
};

/// A closed-form bound was requested outside its validity region; names the
/// violated inequality and by how much.
struct PreconditionViolated : Error {
    std::string condition;
    double margin;
    PreconditionViolated(const std::string& condition_, double margin_)
        : Error("precondition violated: " + condition_ + " (margin " +
                std::to_string(margin_) + ")"),
          condition(condition_), margin(margin_) {}
};

/// The state metric has a zero off-diagonal entry where a ratio needs it.
struct DegenerateMetric : Error {
    std::size_t x, y;
    DegenerateMetric(std::size_t x_, std::size_t y_)
        : Error("state metric is zero between distinct states " + std::to_string(x_) +
                " and " + std::to_string(y_)),
          x(x_), y(y_) {}
};

/// A prior puts mass on a state the anchor gives zero mass.
struct AbsoluteContinuityViolated : Error {
    std::size_t state;
    explicit AbsoluteContinuityViolated(std::size_t state_)
        : Error("prior is not absolutely continuous w.r.t. the anchor: state " +
                std::to_string(state_)),
          state(state_) {}
};

/// A curve cannot be normalized because its anchor value is zero.
struct DegenerateNormalization : Error {
    std::string curve;
    explicit DegenerateNormalization(const std::string& curve_)
        : Error("cannot normalize curve with zero anchor value: " + curve_), curve(curve_) {}
};

/// A matrix expected to be row-stochastic is not.
struct MalformedKernel : Error {
    using Error::Error;
};

}  // namespace finwin
