#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vpfp {

/// Arithmetic expressions for potentials and initial data.
///
/// Grammar: numbers, + - * / ^ (right-associative), parentheses, unary minus, the functions
/// sin cos tan exp log sqrt abs tanh cosh sinh, the constant pi, named constants supplied at
/// parse time and the variables listed at parse time (for example x and v).
/// Parsed once; evaluation is read-only and thread-safe.
class Expression {
 public:
  Expression() = default;

  static Expression parse(const std::string& text, const std::vector<std::string>& variables,
                          const std::map<std::string, double>& constants = {});

  /// values[i] is the value of variables[i].
  double operator()(std::span<const double> values) const;
  double operator()(std::initializer_list<double> values) const {
    return (*this)(std::span<const double>(values.begin(), values.size()));
  }

  const std::string& text() const noexcept { return text_; }
  bool empty() const noexcept { return !root_; }
  /// True when the expression reads the variable at this index.
  bool uses(std::size_t variable) const;

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace vpfp
