#ifndef DERSENS_SQL_H_
#define DERSENS_SQL_H_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dersens/error.h"

namespace dersens {

struct SqlExpr;
using SqlExprPtr = std::shared_ptr<const SqlExpr>;

struct SqlExpr {
  enum class Kind { kNumber, kString, kColumn, kNegate, kBinary, kCall };
  Kind kind = Kind::kNumber;
  double number = 0.0;
  // String literal, column reference ("alias.col" or "col"), binary
  // operator ("+", "-", "*", "/") or lower-case function name.
  std::string text;
  std::vector<SqlExprPtr> args;
  int line = 0;
  int column = 0;
};

struct SqlPred;
using SqlPredPtr = std::shared_ptr<const SqlPred>;

struct SqlPred {
  enum class Kind { kCompare, kAnd, kOr, kXor, kNot, kIn, kBetween, kLike };
  Kind kind = Kind::kCompare;
  std::string op;  // "<", "<=", ">", ">=", "=", "<>"
  // Compare: lhs, rhs. In: probe then list. Between: x, lo, hi.
  // Like: x, pattern literal.
  std::vector<SqlExprPtr> exprs;
  std::vector<SqlPredPtr> children;
  bool negated = false;  // NOT IN, NOT BETWEEN, NOT LIKE
  int line = 0;
  int column = 0;
};

enum class Aggregator { kSum, kCount, kProduct, kMin, kMax };

struct TableRef {
  std::string table;
  std::string alias;  // equals table when no alias is given
};

struct QuerySpec {
  Aggregator aggregator = Aggregator::kSum;
  SqlExprPtr select;  // nullptr for count(*)
  std::vector<TableRef> tables;
  SqlPredPtr where;  // nullptr when absent
};

QuerySpec ParseQuery(std::string_view sql);

std::string ToString(Aggregator a);
std::string ToSql(const SqlExpr& e);
std::string ToSql(const SqlPred& p);
std::string ToSql(const QuerySpec& q);

bool Equal(const SqlExpr& a, const SqlExpr& b);
bool Equal(const SqlPred& a, const SqlPred& b);
bool Equal(const QuerySpec& a, const QuerySpec& b);

// SQL LIKE with '%' and '_' wildcards.
bool LikeMatch(std::string_view text, std::string_view pattern);

}  // namespace dersens

#endif  // DERSENS_SQL_H_
