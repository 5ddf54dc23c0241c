#pragma once

#include <stdexcept>
#include <string>

namespace qnmsusy {

/// Base for all library failures. The CLI maps these to exit status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual const char* code() const noexcept { return "error"; }
};

/// Invalid arguments or malformed input data (bad segments, mismatched grids).
class InvalidInput : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* code() const noexcept override { return "invalid_input"; }
};

/// Integration produced a non-finite value.
class PropagationError : public Error {
 public:
  PropagationError(const std::string& what, double last_good_x)
      : Error(what), last_good_x_(last_good_x) {}
  [[nodiscard]] double last_good_x() const noexcept { return last_good_x_; }
  [[nodiscard]] const char* code() const noexcept override { return "propagation"; }

 private:
  double last_good_x_;
};

class ContourError : public Error {
 public:
  enum class Reason { TooCoarse, Degenerate };
  ContourError(const std::string& what, Reason reason) : Error(what), reason_(reason) {}
  [[nodiscard]] Reason reason() const noexcept { return reason_; }
  [[nodiscard]] const char* code() const noexcept override {
    return reason_ == Reason::TooCoarse ? "contour_too_coarse" : "contour_degenerate";
  }

 private:
  Reason reason_;
};

class UnclassifiableError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* code() const noexcept override { return "unclassifiable"; }
};

class NotFoundError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* code() const noexcept override { return "not_found"; }
};

/// A mode with vanishing generalized norm was used where a nonzero norm is
/// required; such modes belong to a Jordan block (see jordan.hpp).
class JordanBlockError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* code() const noexcept override { return "jordan_block"; }
};

class IneligibleGenerator : public Error {
 public:
  enum class Reason { Node, NonNegativeOmegaSq, NotImaginary, MixedType };
  IneligibleGenerator(const std::string& what, Reason reason) : Error(what), reason_(reason) {}
  [[nodiscard]] Reason reason() const noexcept { return reason_; }
  [[nodiscard]] const char* code() const noexcept override { return "ineligible_generator"; }

 private:
  Reason reason_;
};

class ExcludedSubspaceError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* code() const noexcept override { return "excluded_subspace"; }
};

/// Two independent numerical routes disagreed beyond tolerance.
class ConsistencyError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* code() const noexcept override { return "consistency"; }
};

}  // namespace qnmsusy
