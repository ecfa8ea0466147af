#ifndef MCDEP_ERROR_HPP_
#define MCDEP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace mcdep {

// Malformed input text (bad column count, non-numeric head, bad UTF-8 ...).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Well-formed text that violates a structural invariant (cycles, multiple
// roots, wrong edge count ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation called outside its precondition (illegal action, empty sentence).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mcdep

#endif  // MCDEP_ERROR_HPP_
