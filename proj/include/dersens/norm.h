#ifndef DERSENS_NORM_H_
#define DERSENS_NORM_H_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dersens/error.h"

namespace dersens {

class NormExpr;
using NormPtr = std::shared_ptr<const NormExpr>;
using Assignment = std::map<std::string, double>;

// Composite seminorm over named variables. Immutable; build with the static
// factories, which check the invariants.
class NormExpr {
 public:
  enum class Kind { kVar, kScale, kCombine };

  static NormPtr Var(std::string name);
  // a > 0.
  static NormPtr Scale(double a, NormPtr child);
  // p >= 1 or kInf; at least one child.
  static NormPtr Combine(double p, std::vector<NormPtr> children);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double factor() const { return value_; }
  double p() const { return value_; }
  const std::vector<NormPtr>& children() const { return children_; }

 private:
  NormExpr(Kind kind, std::string name, double value,
           std::vector<NormPtr> children)
      : kind_(kind),
        name_(std::move(name)),
        value_(value),
        children_(std::move(children)) {}

  Kind kind_;
  std::string name_;
  double value_;
  std::vector<NormPtr> children_;
};

// q = p/(p-1), with 1 <-> infinity.
double DualExponent(double p);

// ||v||_p of the absolute values; p may be kInf.
double LpCombine(const std::vector<double>& values, double p);

NormPtr ParseNorm(std::string_view text);
std::string ToString(const NormPtr& n);
bool StructurallyEqual(const NormPtr& a, const NormPtr& b);

double EvalNorm(const NormPtr& n, const Assignment& x);
std::set<std::string> Variables(const NormPtr& n);

// Renames every variable through `rename`; used to qualify table columns.
NormPtr RenameVariables(const NormPtr& n,
                        const std::map<std::string, std::string>& rename);

// Pushes scalings to the leaves, flattens same-exponent nesting, merges
// repeated leaves of one combinator and collapses single-child combinators.
NormPtr Normalize(const NormPtr& n);

struct HammerBound {
  double exponent = 1.0;
  std::map<std::string, double> coefficient;
};

struct HammerBounds {
  HammerBound lower;  // ||alpha x||_p <= ||x||_n, p the largest exponent used
  HammerBound upper;  // ||x||_n <= ||alpha x||_q, q the smallest exponent used
};

HammerBounds ComputeHammerBounds(const NormPtr& n);

struct CompareResult {
  bool proved = false;
  std::vector<std::string> derivation;
  std::string hint;  // outermost unmatched pair when !proved
};

// Tries to prove nq(x) <= ndb(x) for all x with the structural rules:
// leaf scale comparison, subnorm embedding, injective matching under
// p >= q, and ungrouping.
CompareResult Compare(const NormPtr& nq, const NormPtr& ndb);

enum class ScalingMethod { kIdentity, kStraightforward, kElaborate };

struct ScalingWitness {
  // Multiplier applied to every occurrence of the variable inside nq.
  std::map<std::string, double> factor;
  double global = 1.0;
  ScalingMethod method = ScalingMethod::kIdentity;

  double Effective(const std::string& var) const;
};

std::string ToString(ScalingMethod m);

// Returns nq with every variable x replaced by factor[x]*x.
NormPtr ApplyScaling(const NormPtr& nq, const ScalingWitness& w);

ScalingWitness ScaleStraightforward(const NormPtr& nq, const NormPtr& ndb);

// Recursive structural matching with min-weight assignments; falls back to
// the straightforward witness if matching fails or gives a weaker result.
ScalingWitness ScaleElaborate(const NormPtr& nq, const NormPtr& ndb);

}  // namespace dersens

#endif  // DERSENS_NORM_H_
