#ifndef MCPRIOQ_ERRORS_HPP_
#define MCPRIOQ_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mcprioq {

/// Rejected caller input: malformed node ids, out-of-range factors or
/// thresholds, bad configuration.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed transition stream or snapshot. Carries the 1-based line number
/// of the offending line.
class FormatError : public InputError {
 public:
  FormatError(std::uint64_t line, const std::string& message)
      : InputError("line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::uint64_t line() const noexcept { return line_; }

 private:
  std::uint64_t line_;
};

/// A structural invariant of the graph did not hold (ordering, counter
/// conservation, reclamation canary).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mcprioq

#endif  // MCPRIOQ_ERRORS_HPP_
