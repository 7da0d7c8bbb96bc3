#pragma once

#include <memory>
#include <string>

#include "dualext/types.hpp"

namespace dualext {

/// Parse failure at a 1-based column of the expression text.
class ExpressionError : public Error {
 public:
  ExpressionError(int column, const std::string& what) : Error(ErrorCode::parse_error, what), column_(column) {}
  int column() const noexcept { return column_; }

 private:
  int column_;
};

/// Expressions in x over the complex numbers:
///   + - * / ^, unary minus, parentheses
///   numbers (1, 2.5, 1e-3) with an optional i suffix (0.375i), the unit i, pi
///   exp(.), sin(.), cos(.), and ind(a, b) = 1 on [a, b), 0 elsewhere
/// Derivatives up to second order are carried alongside the value.
class Expression {
 public:
  struct Node;

  static Expression parse(const std::string& text);

  const std::string& source() const { return source_; }
  bool depends_on_x() const;

  Complex value(double x) const;
  /// Constant value of an expression without x.
  Complex constant() const;
  /// Closed form with first and second derivatives.
  Formula formula() const;

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace dualext
