#ifndef DERSENS_SMOOTH_H_
#define DERSENS_SMOOTH_H_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dersens/norm.h"
#include "dersens/scalar_expr.h"

namespace dersens {

// The composite norm the catalog rules measure f in: sums, products and
// extrema combine child norms with l1, an lp norm of disjoint arguments with
// lp. Returns nullptr when f has no sensitive column.
NormPtr QueryNorm(const ExprPtr& f);

// Dual-norm combination of per-block sensitivities: lq with q = p/(p-1).
ExprPtr CombineDs(std::vector<ExprPtr> parts, double p);

// ||grad f|| in the dual of `norm`, built from symbolic partial derivatives.
// Each variable may occur once in the normalized norm.
ExprPtr DsExpr(const ExprPtr& f, const NormPtr& norm);

// Dual norm of the central-difference gradient at `point`.
double FiniteDiffDs(const ExprPtr& f, const NormPtr& norm,
                    const Assignment& point, double h);

// Catalog bounds for f with every sensitive column x read as y / scale[x],
// i.e. measured in the scaled variable y. `b` is the smoothness given to
// each identity leaf; everything else follows from the rules.
struct Analysis {
  ExprPtr ubf;
  double beta_f = 0.0;
  ExprPtr ubds;  // nullptr when the rule provides no derivative bound
  double beta_ds = 0.0;
  double ds_sup = 0.0;     // sup of ubds over all inputs, may be kInf
  double value_sup = 0.0;  // sup of |f| over all inputs, may be kInf
};

Analysis Analyze(const ExprPtr& f, const std::map<std::string, double>& scale,
                 double b);

// Largest leaf smoothing b whose achieved smoothness stays <= beta. The
// achieved smoothness must be nondecreasing in b. Throws InfeasibleError
// with the limit as b -> 0 when even that exceeds beta.
double SolveSmoothing(const std::function<double(double)>& achieved,
                      double beta);

struct SmoothBound {
  ExprPtr ubf;
  ExprPtr ubds;
  double beta = 0.0;       // achieved, w.r.t. the declared norm
  double smoothing = 0.0;  // leaf b used
  ScalingWitness witness;
};

// Bounds for f that are beta-smooth w.r.t. `norm`; the query norm of f is
// aligned to `norm` with ScaleElaborate.
SmoothBound ComputeSmoothBound(const ExprPtr& f, double beta,
                               const NormPtr& norm);

}  // namespace dersens

#endif  // DERSENS_SMOOTH_H_
