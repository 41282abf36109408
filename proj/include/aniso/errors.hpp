#pragma once

#include <stdexcept>
#include <string>

namespace aniso {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

/// Some eigenvalue modulus fails the strict > 1 gate.
struct NotExpansive : Error {
    using Error::Error;
};

struct Singular : Error {
    using Error::Error;
};

/// The matrix power series for the ellipsoid form failed to converge.
struct SeriesDivergence : Error {
    using Error::Error;
};

/// A quasi-norm index left the evaluator's index range. Never clamped:
/// a silent clamp would corrupt decay-slope fits downstream.
struct IndexSaturation : Error {
    using Error::Error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

/// Random bump collapsed under moment projection; caller retries with a new seed.
struct DegenerateProjection : Error {
    using Error::Error;
};

/// Convolution kernel narrower than ~8 grid cells at some scale.
struct GridTooCoarse : Error {
    using Error::Error;
};

/// Extrapolated shell-integral tail exceeds 10% of the computed part.
struct TailDominant : Error {
    using Error::Error;
};

/// Config failed validation; message carries field-level diagnostics.
struct ConfigInvalid : Error {
    using Error::Error;
};

} // namespace aniso
