#pragma once

#include <memory>
#include <string>

#include "locfield/core.hpp"
#include "locfield/covariance.hpp"

namespace locfield {

/// Parsed arithmetic expression in the coordinates x and y.
///
/// Grammar: numbers, x, y, pi, + - * / ^, unary minus, parentheses and the
/// functions sin, cos, exp, log, sqrt, abs.
class Expression {
 public:
  static Expression parse(const std::string& text);

  [[nodiscard]] double operator()(const Location& t) const;
  [[nodiscard]] const std::string& text() const { return text_; }
  /// True when the expression mentions neither x nor y.
  [[nodiscard]] bool is_constant() const;
  /// Dimension needed to evaluate: 0 for constants, 1 with x only, 2 with y.
  [[nodiscard]] int required_dim() const { return required_dim_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  int required_dim_ = 0;
};

/// Constant functions stay constant so the stationary fast paths apply.
LocalParamFunction to_param_function(const Expression& e);

}  // namespace locfield
