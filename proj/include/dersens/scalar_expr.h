#ifndef DERSENS_SCALAR_EXPR_H_
#define DERSENS_SCALAR_EXPR_H_

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dersens/error.h"
#include "dersens/norm.h"

namespace dersens {

// Column values of one (joined) row, addressed as "alias.column".
class ValueSource {
 public:
  virtual ~ValueSource() = default;
  virtual double Number(const std::string& ref) const = 0;
  virtual std::string Text(const std::string& ref) const = 0;
};

// Numeric bindings only; text lookups fail.
class MapSource : public ValueSource {
 public:
  explicit MapSource(Assignment values) : values_(std::move(values)) {}
  double Number(const std::string& ref) const override;
  std::string Text(const std::string& ref) const override;

 private:
  Assignment values_;
};

// Boolean condition over insensitive data, kept opaque to the calculus.
class Predicate {
 public:
  virtual ~Predicate() = default;
  virtual bool Eval(const ValueSource& row) const = 0;
  virtual std::string Sql() const = 0;
};
using PredPtr = std::shared_ptr<const Predicate>;

class ScalarExpr;
using ExprPtr = std::shared_ptr<const ScalarExpr>;

enum class Op {
  kConst,         // value
  kCol,           // sensitive column (a variable of the norm)
  kFixed,         // insensitive numeric column, constant under neighbors
  kPower,         // child^value, value >= 0
  kExp,           // e^(value * child)
  kLn,            // ln|child|
  kSigmoid,       // e^(a g) / (e^(a g) + 1), a = value
  kSigmoidDeriv,  // a e^(a g) / (e^(a g) + 1)^2
  kTauoid,        // 2 / (e^(-a g) + e^(a g))
  kSum,
  kProd,
  kMin,
  kMax,
  kLpNorm,     // ||children||_value, value may be kInf
  kScaleNorm,  // value * |child|
  kSign,
  kCase,       // children[0] >= children[1] ? children[2] : children[3]
  kGuard,      // children[0] == 0 ? 0 : children[0] * children[1]
  kIndicator,  // 1 if predicate holds else 0
};

class ScalarExpr {
 public:
  Op op() const { return op_; }
  double value() const { return value_; }
  const std::string& name() const { return name_; }
  const std::vector<ExprPtr>& children() const { return children_; }
  const ExprPtr& child() const { return children_[0]; }
  const PredPtr& predicate() const { return predicate_; }
  bool is_const() const { return op_ == Op::kConst; }

  static ExprPtr Make(Op op, double value, std::string name,
                      std::vector<ExprPtr> children, PredPtr predicate);

 private:
  ScalarExpr() = default;
  Op op_ = Op::kConst;
  double value_ = 0.0;
  std::string name_;
  std::vector<ExprPtr> children_;
  PredPtr predicate_;
};

// Factories. They fold constants among direct children but never flatten
// nested sums or products, so printed trees keep the shape they were built
// with.
ExprPtr Const(double c);
ExprPtr Col(std::string ref);
ExprPtr Fixed(std::string ref);
// r >= 0 stays a power; r < 0 becomes e^(r ln|g|).
ExprPtr Power(ExprPtr g, double r);
ExprPtr Exp(double r, ExprPtr g);
ExprPtr Ln(ExprPtr g);
// alpha > 0.
ExprPtr Sigmoid(double alpha, ExprPtr g);
ExprPtr SigmoidDeriv(double alpha, ExprPtr g);
ExprPtr Tauoid(double alpha, ExprPtr g);
ExprPtr Sum(std::vector<ExprPtr> terms);
ExprPtr Prod(std::vector<ExprPtr> factors);
ExprPtr Min(std::vector<ExprPtr> args);
ExprPtr Max(std::vector<ExprPtr> args);
ExprPtr LpNorm(double p, std::vector<ExprPtr> args);
ExprPtr ScaleNorm(double a, ExprPtr g);
ExprPtr Abs(ExprPtr g);
ExprPtr Sign(ExprPtr g);
ExprPtr Case(ExprPtr lhs, ExprPtr rhs, ExprPtr then_expr, ExprPtr else_expr);
ExprPtr Guard(ExprPtr a, ExprPtr b);
ExprPtr Indicator(PredPtr predicate);

ExprPtr Neg(ExprPtr g);
ExprPtr Sub(ExprPtr a, ExprPtr b);
// a / b desugared as a * sign(b) * e^(-ln|b|); constant b becomes 1/b.
ExprPtr Div(ExprPtr a, ExprPtr b);

double Eval(const ExprPtr& e, const ValueSource& row);
double Eval(const ExprPtr& e, const Assignment& row);

// PostgreSQL expression text.
std::string ToSql(const ExprPtr& e);

// Sensitive columns (kCol) referenced by e.
std::set<std::string> SensitiveColumns(const ExprPtr& e);
bool IsPublic(const ExprPtr& e);

// Replaces kCol nodes whose name is in `fixed` by kFixed nodes.
ExprPtr FixColumns(const ExprPtr& e, const std::set<std::string>& fixed);

// Symbolic partial derivative with respect to a sensitive column.
ExprPtr Derivative(const ExprPtr& e, const std::string& var);

}  // namespace dersens

#endif  // DERSENS_SCALAR_EXPR_H_
