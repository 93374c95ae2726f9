#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasetrack {

using cplx = std::complex<double>;
using RealVec = std::vector<double>;
using ComplexVec = std::vector<cplx>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Raised when a filter cannot be designed for the requested parameters
/// (rank deficiency, ill-conditioning, complex residue, bad arguments).
class DesignError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for invalid numeric input to a streaming or analysis routine.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace phasetrack
