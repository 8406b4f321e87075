#pragma once

#include <stdexcept>
#include <string>

namespace multireg {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pose fit is not identifiable (too few weighted pairs, collinear sources).
struct DegenerateInput : Error {
  using Error::Error;
};

/// No initial cluster admits a pose fit.
struct NoValidCluster : Error {
  using Error::Error;
};

/// Malformed file content; the message carries path and line number.
struct ParseError : Error {
  using Error::Error;
};

/// Index coverage violation in a labels file (missing or duplicate index).
struct CoverageError : Error {
  using Error::Error;
};

struct EmptySet : Error {
  using Error::Error;
};

/// Metric requested on a labeling without any non-outlier cluster.
struct NoClusters : Error {
  using Error::Error;
};

/// Invalid configuration; the message names the offending field.
struct ConfigError : Error {
  using Error::Error;
};

/// Unreadable input resource (object source file, output directory).
struct FileError : Error {
  using Error::Error;
};

}  // namespace multireg
