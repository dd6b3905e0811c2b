#include "mnm/emit.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mnm/error.hpp"

namespace mnm {

namespace {

using nlohmann::json;

json scenario_json(const Scenario& s) {
  json j{{"d", s.d},
         {"n", s.n},
         {"m", s.m},
         {"rho", s.rho},
         {"signal_law", std::string(to_string(s.law))}};
  if (s.law == SignalLaw::fixed) j["f"] = s.fixed_signal;
  return j;
}

std::string csv_prefix(std::string_view echo) {
  if (echo.empty()) return {};
  return "# config: " + std::string(echo) + "\n";
}

std::string roc_csv(const std::vector<RocCurve>& curves, std::string_view echo) {
  std::string out = csv_prefix(echo) + "alpha,fpr,tpr,test,reps,seed\n";
  for (const RocCurve& c : curves) {
    for (const RocPoint& p : c.points) {
      out += format_real(p.alpha) + ',' + format_real(p.fpr) + ',' +
             format_real(p.tpr) + ',' + c.test + ',' + std::to_string(c.reps) +
             ',' + std::to_string(c.seed) + '\n';
    }
  }
  return out;
}

std::string risk_csv(const std::vector<RiskEstimate>& rs, std::string_view echo) {
  std::string out = csv_prefix(echo) +
                    "test,alpha,type1,type1_band,type2,type2_band,reps,seed,d,n,m,rho,signal_law\n";
  for (const RiskEstimate& r : rs) {
    out += r.test + ',' + format_real(r.alpha) + ',' + format_real(r.type1) + ',' +
           format_real(r.type1_band) + ',' + format_real(r.type2) + ',' +
           format_real(r.type2_band) + ',' + std::to_string(r.reps) + ',' +
           std::to_string(r.seed) + ',' + std::to_string(r.scenario.d) + ',' +
           std::to_string(r.scenario.n) + ',' + std::to_string(r.scenario.m) + ',' +
           format_real(r.scenario.rho) + ',' + std::string(to_string(r.scenario.law)) +
           '\n';
  }
  return out;
}

std::string rates_csv(const RateSweepResult& r, std::string_view echo) {
  std::string out = csv_prefix(echo) +
                    "d,m,n,c,rate,rho2,test,alpha,power,band,supported,reps,seed\n";
  for (const RateCell& c : r.cells) {
    out += std::to_string(c.d) + ',' + std::to_string(c.m) + ',' +
           std::to_string(c.n) + ',' + format_real(c.c) + ',' +
           std::string(to_string(c.formula)) + ',' + format_real(c.rho2) + ',' +
           c.test + ',' + format_real(c.alpha) + ',' + format_real(c.power) + ',' +
           format_real(c.band) + ',' + (c.supported ? "1" : "0") + ',' +
           std::to_string(c.reps) + ',' + std::to_string(c.seed) + '\n';
  }
  return out;
}

std::string calibration_csv(const std::vector<CalibrationRecord>& recs,
                            std::string_view echo) {
  std::string out = csv_prefix(echo) + "test,d,n,m,alpha,kappa,reps,seed\n";
  for (const CalibrationRecord& r : recs) {
    for (std::size_t i = 0; i < r.table.alphas.size(); ++i) {
      out += r.test + ',' + std::to_string(r.scenario.d) + ',' +
             std::to_string(r.scenario.n) + ',' + std::to_string(r.scenario.m) + ',' +
             format_real(r.table.alphas[i]) + ',' + format_real(r.table.kappas[i]) +
             ',' + std::to_string(r.table.reps) + ',' + std::to_string(r.table.seed) +
             '\n';
    }
  }
  return out;
}

std::string quantize_csv(const std::vector<QuantizeRow>& rows, std::string_view echo) {
  std::string out = csv_prefix(echo) + "x,bits,approx,error,bound\n";
  for (const QuantizeRow& q : rows) {
    out += format_real(q.x) + ',' + std::to_string(q.bits) + ',' +
           format_real(q.approx) + ',' + format_real(q.error) + ',' +
           format_real(q.bound) + '\n';
  }
  return out;
}

json results_json(const std::vector<RocCurve>& curves) {
  json arr = json::array();
  for (const RocCurve& c : curves) {
    json pts = json::array();
    for (const RocPoint& p : c.points) {
      pts.push_back({{"alpha", p.alpha}, {"fpr", p.fpr}, {"tpr", p.tpr}});
    }
    arr.push_back({{"test", c.test},
                   {"scenario", scenario_json(c.scenario)},
                   {"points", pts},
                   {"reps", c.reps},
                   {"seed", c.seed},
                   {"supported", c.supported}});
  }
  return arr;
}

json results_json(const std::vector<RiskEstimate>& rs) {
  json arr = json::array();
  for (const RiskEstimate& r : rs) {
    arr.push_back({{"test", r.test},
                   {"scenario", scenario_json(r.scenario)},
                   {"alpha", r.alpha},
                   {"type1", r.type1},
                   {"type1_band", r.type1_band},
                   {"type2", r.type2},
                   {"type2_band", r.type2_band},
                   {"reps", r.reps},
                   {"seed", r.seed}});
  }
  return arr;
}

json results_json(const RateSweepResult& r) {
  json cells = json::array();
  for (const RateCell& c : r.cells) {
    cells.push_back({{"d", c.d},
                     {"m", c.m},
                     {"n", c.n},
                     {"c", c.c},
                     {"rate", std::string(to_string(c.formula))},
                     {"rho2", c.rho2},
                     {"test", c.test},
                     {"alpha", c.alpha},
                     {"power", c.power},
                     {"band", c.band},
                     {"supported", c.supported},
                     {"reps", c.reps},
                     {"seed", c.seed}});
  }
  json elbow = json::array();
  for (const ElbowRow& e : r.elbow) {
    elbow.push_back({{"d", e.d},
                     {"m", e.m},
                     {"n", e.n},
                     {"c", e.c},
                     {"directional_test", e.directional_test},
                     {"directional_power", e.directional_power},
                     {"chisq_power", e.chisq_power},
                     {"gap", e.gap},
                     {"band", e.band}});
  }
  return {{"cells", cells}, {"elbow", elbow}};
}

json results_json(const std::vector<CalibrationRecord>& recs) {
  json arr = json::array();
  for (const CalibrationRecord& r : recs) {
    arr.push_back({{"test", r.test},
                   {"scenario", scenario_json(r.scenario)},
                   {"alphas", r.table.alphas},
                   {"kappas", r.table.kappas},
                   {"reps", r.table.reps},
                   {"seed", r.table.seed},
                   {"stream", r.table.stream_path},
                   {"warnings", r.table.warnings}});
  }
  return arr;
}

json results_json(const std::vector<QuantizeRow>& rows) {
  json arr = json::array();
  for (const QuantizeRow& q : rows) {
    arr.push_back({{"x", q.x},
                   {"bits", q.bits},
                   {"approx", q.approx},
                   {"error", q.error},
                   {"bound", q.bound}});
  }
  return arr;
}

std::string roc_svg(const std::vector<RocCurve>& curves) {
  constexpr double size = 400.0;
  constexpr double pad = 40.0;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  auto px = [&](double v) { return format_real(pad + v * size); };
  auto py = [&](double v) { return format_real(pad + (1.0 - v) * size); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * pad + 200
    << "\" height=\"" << size + 2 * pad << "\">\n";
  s << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << size
    << "\" height=\"" << size << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1)
    << "\" y2=\"" << py(1) << "\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n";
  s << "<text x=\"" << pad + size / 2 << "\" y=\"" << size + 1.8 * pad
    << "\" text-anchor=\"middle\">FPR</text>\n";
  s << "<text x=\"12\" y=\"" << pad + size / 2 << "\">TPR</text>\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = colors[i % std::size(colors)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"" << px(0)
      << ',' << py(0);
    for (const RocPoint& p : curves[i].points) s << ' ' << px(p.fpr) << ',' << py(p.tpr);
    s << ' ' << px(1) << ',' << py(1) << "\"/>\n";
    s << "<text x=\"" << size + pad + 10 << "\" y=\"" << pad + 16 * (i + 1)
      << "\" fill=\"" << color << "\">" << curves[i].test << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  if (name == "svg") return OutputFormat::svg;
  throw ConfigError("unknown output format '" + std::string(name) +
                    "' (expected csv, json, svg)");
}

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string render(const ResultSet& results, OutputFormat format,
                   std::string_view config_echo) {
  if (format == OutputFormat::svg) {
    if (const auto* curves = std::get_if<std::vector<RocCurve>>(&results)) {
      return roc_svg(*curves);
    }
    throw ConfigError("svg output is only available for ROC curves");
  }
  if (format == OutputFormat::json) {
    json doc;
    doc["config"] = config_echo.empty() ? json(nullptr) : json::parse(config_echo);
    doc["results"] = std::visit([](const auto& r) { return results_json(r); }, results);
    return doc.dump(2) + "\n";
  }
  return std::visit(
      [&](const auto& r) -> std::string {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, std::vector<RocCurve>>) {
          return roc_csv(r, config_echo);
        } else if constexpr (std::is_same_v<T, std::vector<RiskEstimate>>) {
          return risk_csv(r, config_echo);
        } else if constexpr (std::is_same_v<T, RateSweepResult>) {
          return rates_csv(r, config_echo);
        } else if constexpr (std::is_same_v<T, std::vector<CalibrationRecord>>) {
          return calibration_csv(r, config_echo);
        } else {
          return quantize_csv(r, config_echo);
        }
      },
      results);
}

void emit(const ResultSet& results, OutputFormat format,
          const std::filesystem::path& path, std::string_view config_echo) {
  const std::string text = render(results, format, config_echo);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out.flush()) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace mnm
