#include "mnm/combine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "mnm/error.hpp"
#include "mnm/specfun.hpp"

namespace mnm {

namespace {

double clamped(double p, Diagnostics* diag) {
  bool moved = false;
  const double c = clamp_probability(p, &moved);
  if (moved && diag != nullptr) ++diag->clamped_pvalues;
  return c;
}

// Fisher only needs the lower clamp; log(1) is fine.
double clamped_below(double p, Diagnostics* diag) {
  if (p == 1.0) return p;
  return clamped(p, diag);
}

double inv_sqrt_m(std::span<const double> v) {
  return 1.0 / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

double fisher(std::span<const double> p, Diagnostics* diag) {
  double s = 0.0;
  for (double v : p) s -= 2.0 * std::log(clamped_below(v, diag));
  return s;
}

double pearson(std::span<const double> p, Diagnostics* diag) {
  double s = 0.0;
  for (double v : p) s -= std::log1p(-clamped(v, diag));
  return s;
}

double mudholkar_george(std::span<const double> p, Diagnostics* diag) {
  double s = 0.0;
  for (double v : p) {
    const double c = clamped(v, diag);
    s -= std::log(c) + std::log1p(-c);
  }
  return s;
}

double edgington(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) s += v - 0.5;
  return s * inv_sqrt_m(p);
}

double stouffer(std::span<const double> p, Diagnostics* diag) {
  double s = 0.0;
  for (double v : p) s += std_normal_quantile(clamped(v, diag));
  return s * inv_sqrt_m(p);
}

double tippett(std::span<const double> p) {
  double smallest = std::numeric_limits<double>::infinity();
  for (double v : p) smallest = std::min(smallest, -std::log1p(-v));
  return -static_cast<double>(p.size()) * smallest;
}

double generalized_mean(std::span<const double> p, double r) {
  if (p.empty()) throw std::invalid_argument("generalized_mean: empty input");
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  if (r == -std::numeric_limits<double>::infinity()) return *lo;
  if (r == std::numeric_limits<double>::infinity()) return *hi;
  const double m = static_cast<double>(p.size());
  if (r == 0.0) {
    if (*lo == 0.0) return 0.0;
    double s = 0.0;
    for (double v : p) s += std::log(v);
    return std::exp(s / m);
  }
  // Scale by the dominating entry so p_j^r cannot overflow for large |r|.
  const double ref = r < 0.0 ? *lo : *hi;
  if (ref == 0.0) return 0.0;
  double s = 0.0;
  for (double v : p) s += std::pow(v / ref, r);
  return ref * std::pow(s / m, 1.0 / r);
}

double evalue_log_product(std::span<const double> e) {
  double s = 0.0;
  for (double v : e) s += std::log(v);
  return s;
}

double evalue_combine(std::span<const double> e, EvalueMode mode) {
  if (mode == EvalueMode::product) {
    if (std::any_of(e.begin(), e.end(), [](double v) { return v == 0.0; })) {
      return 0.0;
    }
    return std::exp(evalue_log_product(e));
  }
  return std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
}

double sum(std::span<const double> s) {
  return std::accumulate(s.begin(), s.end(), 0.0);
}

Combiner::Combiner(CombinerMethod method, double r) : method_(method), r_(r) {
  if (method == CombinerMethod::generalized_mean && std::isnan(r)) {
    throw ConfigError("generalized_mean: r must not be NaN");
  }
}

Combiner Combiner::parse(std::string_view name) {
  if (name == "fisher") return Combiner(CombinerMethod::fisher);
  if (name == "pearson") return Combiner(CombinerMethod::pearson);
  if (name == "mudholkar_george") return Combiner(CombinerMethod::mudholkar_george);
  if (name == "edgington") return Combiner(CombinerMethod::edgington);
  if (name == "stouffer") return Combiner(CombinerMethod::stouffer);
  if (name == "tippett") return Combiner(CombinerMethod::tippett);
  if (name == "evalue_product") return Combiner(CombinerMethod::evalue_product);
  if (name == "evalue_average") return Combiner(CombinerMethod::evalue_average);
  if (name == "sum") return Combiner(CombinerMethod::sum);
  constexpr std::string_view prefix = "generalized_mean(";
  if (name.starts_with(prefix) && name.ends_with(")")) {
    const std::string_view arg =
        name.substr(prefix.size(), name.size() - prefix.size() - 1);
    if (arg == "inf" || arg == "+inf") {
      return Combiner(CombinerMethod::generalized_mean,
                      std::numeric_limits<double>::infinity());
    }
    if (arg == "-inf") {
      return Combiner(CombinerMethod::generalized_mean,
                      -std::numeric_limits<double>::infinity());
    }
    double r = 0.0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), r);
    if (ec == std::errc() && ptr == arg.data() + arg.size() && std::isfinite(r)) {
      return Combiner(CombinerMethod::generalized_mean, r);
    }
  }
  throw ConfigError("unknown combiner '" + std::string(name) + "'");
}

std::string Combiner::name() const {
  switch (method_) {
    case CombinerMethod::fisher:
      return "fisher";
    case CombinerMethod::pearson:
      return "pearson";
    case CombinerMethod::mudholkar_george:
      return "mudholkar_george";
    case CombinerMethod::edgington:
      return "edgington";
    case CombinerMethod::stouffer:
      return "stouffer";
    case CombinerMethod::tippett:
      return "tippett";
    case CombinerMethod::evalue_product:
      return "evalue_product";
    case CombinerMethod::evalue_average:
      return "evalue_average";
    case CombinerMethod::sum:
      return "sum";
    case CombinerMethod::generalized_mean: {
      if (std::isinf(r_)) return r_ > 0 ? "generalized_mean(inf)" : "generalized_mean(-inf)";
      char buf[64];
      const auto res = std::to_chars(buf, buf + sizeof buf, r_);
      return "generalized_mean(" + std::string(buf, res.ptr) + ")";
    }
  }
  return "unknown";
}

bool Combiner::takes_pvalues() const noexcept {
  switch (method_) {
    case CombinerMethod::evalue_product:
    case CombinerMethod::evalue_average:
    case CombinerMethod::sum:
      return false;
    default:
      return true;
  }
}

double Combiner::operator()(std::span<const double> v, Diagnostics* diag) const {
  switch (method_) {
    case CombinerMethod::fisher:
      return fisher(v, diag);
    case CombinerMethod::pearson:
      return pearson(v, diag);
    case CombinerMethod::mudholkar_george:
      return mudholkar_george(v, diag);
    case CombinerMethod::edgington:
      return edgington(v);
    case CombinerMethod::stouffer:
      return stouffer(v, diag);
    case CombinerMethod::tippett:
      return tippett(v);
    case CombinerMethod::generalized_mean:
      return generalized_mean(v, r_);
    case CombinerMethod::evalue_product:
      return evalue_combine(v, EvalueMode::product);
    case CombinerMethod::evalue_average:
      return evalue_combine(v, EvalueMode::average);
    case CombinerMethod::sum:
      return sum(v);
  }
  return 0.0;
}

std::optional<HolderConstants> Combiner::holder_constants(int m) const {
  const double md = static_cast<double>(m);
  switch (method_) {
    case CombinerMethod::edgington:
      return HolderConstants{1.0 / std::sqrt(md), 1.0, 1.0};
    case CombinerMethod::evalue_average:
      return HolderConstants{1.0 / md, 1.0, 1.0};
    case CombinerMethod::sum:
      return HolderConstants{1.0, 1.0, 1.0};
    case CombinerMethod::generalized_mean:
      if (r_ == 1.0) return HolderConstants{1.0 / md, 1.0, 1.0};
      if (std::isinf(r_)) return HolderConstants{1.0, 1.0, 1.0};
      return std::nullopt;
    default:
      // Log- and quantile-based combiners are Holder only on the transformed
      // scale S = -log p etc.; see the certificate tests.
      return std::nullopt;
  }
}

HolderReport holder_certificate(const CombineFn& combine, HolderConstants c,
                                const PairSampler& sampler, std::uint64_t trials,
                                RandomStream stream) {
  if (trials < 1) throw std::invalid_argument("holder_certificate: trials >= 1");
  HolderReport rep;
  for (std::uint64_t t = 0; t < trials; ++t) {
    auto [s, s2] = sampler(stream);
    if (s.size() != s2.size()) {
      throw std::invalid_argument("holder_certificate: pair sizes differ");
    }
    double dist = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      dist += std::pow(std::fabs(s[j] - s2[j]), c.power);
    }
    if (dist == 0.0) {
      ++rep.skipped;
      continue;
    }
    const double a = combine(s);
    const double b = combine(s2);
    const double num = std::fabs(a - b);
    const double bound = std::pow(dist, c.outer);
    ++rep.pairs;
    rep.max_ratio = std::max(rep.max_ratio, num / bound);
    double magnitude = std::fabs(a) + std::fabs(b);
    for (std::size_t j = 0; j < s.size(); ++j) {
      magnitude += c.lipschitz * (std::fabs(s[j]) + std::fabs(s2[j]));
    }
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * magnitude;
    if (num > c.lipschitz * bound + slack) ++rep.violations;
  }
  rep.pass = rep.violations == 0;
  return rep;
}

}  // namespace mnm
