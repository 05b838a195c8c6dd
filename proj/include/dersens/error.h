#ifndef DERSENS_ERROR_H_
#define DERSENS_ERROR_H_

#include <limits>
#include <stdexcept>
#include <string>

namespace dersens {

// Bad user input: syntax errors, unknown names, malformed files. CLI exit 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax error with a 1-based source position.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, int line, int column)
      : InputError(what + " at line " + std::to_string(line) + ", column " +
                   std::to_string(column)),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// The requested privacy parameters cannot be met. Carries the smallest
// smoothness and epsilon that would work. CLI exit 2.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double min_beta, double min_epsilon)
      : std::runtime_error(what), min_beta_(min_beta), min_epsilon_(min_epsilon) {}
  double min_beta() const { return min_beta_; }
  double min_epsilon() const { return min_epsilon_; }

 private:
  double min_beta_;
  double min_epsilon_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace dersens

#endif  // DERSENS_ERROR_H_
