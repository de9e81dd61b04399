#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

namespace ptrack {

// Closed-form scalar expressions over ambient coordinates, used for target
// densities and distortion maps.
//
// Grammar:
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := unary ('^' factor)?          right-associative
//   unary   := '-' unary | primary
//   primary := number | 'x' | 'y' | 'z' | 'pi'
//            | ('sin'|'cos'|'exp') '(' expr ')' | '(' expr ')'
class Expression {
public:
  Expression() = default;  // empty; eval() == 0

  static Expression parse(const std::string& text);

  double eval(const Eigen::Vector3d& p) const;

  // Value and ambient gradient in one pass.
  double eval_with_gradient(const Eigen::Vector3d& p, Eigen::Vector3d& grad) const;

  Eigen::Vector3d gradient(const Eigen::Vector3d& p) const {
    Eigen::Vector3d g;
    eval_with_gradient(p, g);
    return g;
  }

  bool empty() const { return root_ == nullptr; }
  const std::string& text() const { return text_; }

  struct Node;  // implementation detail

private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace ptrack
