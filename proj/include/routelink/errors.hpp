#ifndef ROUTELINK_ERRORS_HPP
#define ROUTELINK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace routelink {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input files (network, observations, schedule, config) that fail to parse
/// or violate a structural invariant.
class ParseError : public Error {
public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// The likelihood cannot be evaluated: a route with data has zero log-scale
/// variance. The clamp on rho is supposed to prevent this; if it fires the
/// caller should widen the clamp or inspect the network.
class DegenerateLikelihood : public Error {
public:
  explicit DegenerateLikelihood(const std::string& msg) : Error(msg) {}
};

} // namespace routelink

#endif
