#ifndef OPEVAL_ERROR_HPP
#define OPEVAL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace opeval {

// Failure classes surfaced by the CLI as one-line diagnostics with distinct
// exit codes.
enum class ErrorClass {
  kParse,             // malformed input file
  kValidation,        // inputs parse but violate a dataset/model invariant
  kConfig,            // bad scenario or simulation configuration
  kPositivity,        // policy uses a location with propensity <= floor
  kInfeasible,        // assignment cannot satisfy the capacity constraints
  kUndefinedEstimate, // estimator undefined on these inputs (e.g. no overlap)
};

const char* error_class_name(ErrorClass c);

class Error : public std::runtime_error {
 public:
  Error(ErrorClass error_class, const std::string& message)
      : std::runtime_error(message), class_(error_class) {}

  ErrorClass error_class() const { return class_; }

 private:
  ErrorClass class_;
};

[[noreturn]] inline void fail(ErrorClass c, const std::string& message) {
  throw Error(c, message);
}

}  // namespace opeval

#endif  // OPEVAL_ERROR_HPP
