#pragma once

#include <stdexcept>
#include <string>

namespace twinbeam {

/// Base class for all twinbeam errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its allowed domain (efficiency, cutoff, order, ...).
struct InvalidArgument : Error {
  using Error::Error;
};

/// The conditioning outcome has zero probability, e.g. heralding on one
/// detected photon with a dead (eta = 0) detector.
struct ZeroHeraldProbability : Error {
  using Error::Error;
};

/// Normalized factorial moments divide by <n>^m and are undefined at <n> = 0.
struct ZeroMeanState : Error {
  using Error::Error;
};

/// CAR <= 1 carries no pair correlation beyond accidentals, so the mean
/// photon number inversions 1/(CAR-1) and (1-1/CAR)^-1 are undefined.
struct CarNotAboveUnity : Error {
  using Error::Error;
};

/// Klyshko ratios need a nonzero singles rate in the reference arm.
struct ZeroSingles : Error {
  using Error::Error;
};

/// No events matched the heralding condition.
struct NoHeraldEvents : Error {
  using Error::Error;
};

/// Count data with no pulses.
struct EmptyData : Error {
  using Error::Error;
};

/// Statistics too thin for the requested quantity.
struct InsufficientData : Error {
  using Error::Error;
};

/// Malformed counts or distribution file.
struct CsvFormatError : Error {
  using Error::Error;
};

}  // namespace twinbeam
