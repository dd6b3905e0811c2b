#pragma once

// Combination functions C_m for p-values, e-values and raw statistics.
//
// Every combiner is symmetric in its inputs. P-values entering a logarithm or
// the normal quantile are clamped to [kMinProbability, kMaxProbability]; each
// clamp is counted in Diagnostics so experiments can report that it never
// fired.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mnm/rng.hpp"

namespace mnm {

struct Diagnostics {
  std::uint64_t clamped_pvalues = 0;
  std::uint64_t evalue_overflows = 0;

  Diagnostics& operator+=(const Diagnostics& o) {
    clamped_pvalues += o.clamped_pvalues;
    evalue_overflows += o.evalue_overflows;
    return *this;
  }
  bool operator==(const Diagnostics&) const = default;
};

/// sum_j -2 log p_j; chi^2_{2m} under the null.
double fisher(std::span<const double> p, Diagnostics* diag = nullptr);
/// sum_j -log(1 - p_j).
double pearson(std::span<const double> p, Diagnostics* diag = nullptr);
/// sum_j -log(p_j (1 - p_j)).
double mudholkar_george(std::span<const double> p, Diagnostics* diag = nullptr);
/// m^{-1/2} sum_j (p_j - 1/2).
double edgington(std::span<const double> p);
/// m^{-1/2} sum_j Phi^{-1}(p_j); N(0, 1) under the null.
double stouffer(std::span<const double> p, Diagnostics* diag = nullptr);
/// -m min_j(-log(1 - p_j)); 1 - (1 - min p)^m = 1 - exp(value) is uniform
/// under the null.
double tippett(std::span<const double> p);
/// (m^{-1} sum_j p_j^r)^{1/r}; r = 0 is the geometric mean, r = -inf the
/// minimum and r = +inf the maximum.
double generalized_mean(std::span<const double> p, double r);

enum class EvalueMode { product, average };

/// sum_j log e_j; finite whenever all e_j > 0.
double evalue_log_product(std::span<const double> e);
/// prod_j e_j or m^{-1} sum_j e_j. A product that overflows returns +inf; use
/// evalue_log_product for thresholding.
double evalue_combine(std::span<const double> e, EvalueMode mode);

double sum(std::span<const double> s);

enum class CombinerMethod {
  fisher,
  pearson,
  mudholkar_george,
  edgington,
  stouffer,
  tippett,
  generalized_mean,
  evalue_product,
  evalue_average,
  sum,
};

/// Constants (L, p, q) of |C(s) - C(s')| <= L (sum_j |s_j - s'_j|^p)^q.
struct HolderConstants {
  double lipschitz = 1.0;
  double power = 1.0;
  double outer = 1.0;
};

class Combiner {
 public:
  Combiner(CombinerMethod method, double r = 1.0);

  /// Parses the config names: "fisher", "pearson", "mudholkar_george",
  /// "edgington", "stouffer", "tippett", "generalized_mean(<r>)" with r a
  /// number, "inf" or "-inf", "evalue_product", "evalue_average", "sum".
  /// Throws ConfigError.
  static Combiner parse(std::string_view name);

  CombinerMethod method() const noexcept { return method_; }
  double r() const noexcept { return r_; }
  std::string name() const;
  bool takes_pvalues() const noexcept;

  double operator()(std::span<const double> values,
                    Diagnostics* diag = nullptr) const;

  /// Holder constants for m inputs where a closed form is known.
  std::optional<HolderConstants> holder_constants(int m) const;

 private:
  CombinerMethod method_;
  double r_;
};

struct HolderReport {
  double max_ratio = 0.0;
  std::uint64_t pairs = 0;
  std::uint64_t skipped = 0;
  std::uint64_t violations = 0;
  bool pass = true;
};

using CombineFn = std::function<double(std::span<const double>)>;
using PairSampler =
    std::function<std::pair<std::vector<double>, std::vector<double>>(RandomStream&)>;

/// Samples `trials` pairs and records the largest ratio
/// |C(s) - C(s')| / (sum |s_j - s'_j|^p)^q. Pairs with s = s' are skipped.
/// A pair violates the bound when the numerator exceeds L times the
/// denominator by more than the rounding error of evaluating C.
HolderReport holder_certificate(const CombineFn& combine, HolderConstants c,
                                const PairSampler& sampler, std::uint64_t trials,
                                RandomStream stream);

}  // namespace mnm
