#ifndef TFEM_ERRORS_HPP
#define TFEM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tfem {

// Base class for all errors thrown by the library.  Catching tfem::Error
// is enough to intercept anything the solver can raise.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files (mesh JSON, CLI range syntax).
class ParseError : public Error {
public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Structurally well-formed input that violates a mesh or option invariant
// (duplicate ids, out-of-range connectivity, empty face set, bad parameters).
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Geometry the algorithms cannot handle: degenerate elements, ambiguous
// root classification, quadrature domains that fail to converge.
class GeometryError : public Error {
public:
  explicit GeometryError(const std::string& msg) : Error(msg) {}
};

// Linear algebra failures: rank-deficient reduced systems, factorization
// breakdown, residuals above tolerance.
class SolveError : public Error {
public:
  explicit SolveError(const std::string& msg) : Error(msg) {}
};

} // namespace tfem

#endif
