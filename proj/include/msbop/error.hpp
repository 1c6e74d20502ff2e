#ifndef MSBOP_ERROR_HPP
#define MSBOP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace msbop {

// Broad failure classes; the CLI maps each to an exit code.
enum class ErrorKind {
  config,     // bad parameters, unknown names, inconsistent settings
  data,       // malformed files, shape/alignment mismatch, too little data
  numerical,  // degenerate factors, non-finite intermediate values
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

// Raised when a requested computation has fewer samples than it needs
// (fewer points than clusters, a scale longer than every signal, ...).
struct InsufficientDataError : DataError {
  explicit InsufficientDataError(const std::string& what) : DataError(what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

}  // namespace msbop

#endif
