#pragma once

#include <stdexcept>
#include <string>

namespace wdc {

/// Invalid parameters or configuration (bad units, out-of-range values).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data (files, tracks, histograms).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A least-squares fit that did not converge or had nothing to fit.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace wdc
