#include "ldgmin/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ldgmin/errors.hpp"

#ifndef LDGMIN_VERSION
#define LDGMIN_VERSION "0.0.0"
#endif

namespace ldgmin {

std::string benchmark_name(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::OptimalDesign: return "odp";
    case BenchmarkId::PLaplace4: return "plaplace4";
    case BenchmarkId::Bingham: return "bingham";
  }
  return "odp";
}

BenchmarkId parse_benchmark(const std::string& name) {
  if (name == "odp") return BenchmarkId::OptimalDesign;
  if (name == "plaplace4") return BenchmarkId::PLaplace4;
  if (name == "bingham") return BenchmarkId::Bingham;
  throw ConfigError("unknown benchmark '" + name + "' (expected odp, plaplace4 or bingham)");
}

BoundarySpec BenchmarkSpec::boundary() const {
  return id == BenchmarkId::PLaplace4 ? BoundarySpec::reentrant_edges() : BoundarySpec::all_dirichlet();
}

ProblemConfig BenchmarkSpec::problem() const {
  ProblemConfig cfg;
  cfg.degree = k;
  cfg.r = r;
  cfg.s = s;
  cfg.boundary = boundary();
  switch (id) {
    case BenchmarkId::OptimalDesign:
      cfg.density = optimal_design(design);
      break;
    case BenchmarkId::PLaplace4:
      cfg.density = p_laplace(p);
      break;
    case BenchmarkId::Bingham:
      cfg.density = bingham_regularized(mu, g, epsilon);
      cfg.estimator_density = bingham(mu, g);
      cfg.epsilon = epsilon;
      break;
  }
  return cfg;
}

BenchmarkSpec defaults(BenchmarkId id) {
  BenchmarkSpec spec;
  spec.id = id;
  return spec;
}

std::string library_version() { return LDGMIN_VERSION; }

BenchmarkSpec RunManifest::spec() const {
  BenchmarkSpec out = defaults(parse_benchmark(benchmark));
  out.k = k;
  out.r = r;
  out.s = s;
  out.epsilon = epsilon;
  return out;
}

AdaptConfig RunManifest::adapt() const {
  AdaptConfig cfg;
  cfg.theta = theta;
  if (mode == "uniform") {
    cfg.mode = RefinementMode::Uniform;
  } else if (mode == "adaptive") {
    cfg.mode = RefinementMode::Adaptive;
  } else {
    throw ConfigError("unknown mode '" + mode + "' (expected uniform or adaptive)");
  }
  cfg.max_levels = levels;
  cfg.ndof_budget = ndof_budget;
  return cfg;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["benchmark"] = benchmark;
  j["k"] = k;
  j["r"] = r;
  j["s"] = s;
  j["epsilon"] = epsilon;
  j["theta"] = theta;
  j["mode"] = mode;
  j["levels"] = levels;
  j["ndof_budget"] = ndof_budget;
  j["deterministic"] = deterministic;
  j["version"] = version;
  j["timestamp"] = timestamp;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  RunManifest m;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    m.benchmark = j.at("benchmark").get<std::string>();
    m.k = j.at("k").get<int>();
    m.r = j.at("r").get<double>();
    m.s = j.at("s").get<double>();
    m.epsilon = j.at("epsilon").get<double>();
    m.theta = j.at("theta").get<double>();
    m.mode = j.at("mode").get<std::string>();
    m.levels = j.at("levels").get<int>();
    m.ndof_budget = j.at("ndof_budget").get<long>();
    m.deterministic = j.value("deterministic", false);
    m.version = j.value("version", std::string());
    m.timestamp = j.value("timestamp", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  parse_benchmark(m.benchmark);
  m.adapt();
  return m;
}

namespace {

std::string real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_history_csv(std::ostream& out, const std::vector<ConvergenceRecord>& history, bool zero_time) {
  out << "level,ndof,hmax,eta,Eh,Ehdual,gap,EvC,EstarRT,iters,seconds,cells\n";
  for (const ConvergenceRecord& r : history) {
    out << r.level << ',' << r.ndof << ',' << real(r.h_max) << ',' << real(r.eta) << ',' << real(r.energy) << ','
        << real(r.dual_energy) << ',' << real(r.gap) << ',' << real(r.primal) << ',' << real(r.dual) << ','
        << r.iterations << ',' << real(zero_time ? 0.0 : r.seconds) << ',' << r.cells << '\n';
  }
}

void write_convergence_svg(std::ostream& out, const std::vector<PlotSeries>& series, int k) {
  const double width = 640, height = 480, left = 70, right = 150, top = 30, bottom = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < s.ndof.size(); ++i) {
      if (!(s.eta[i] > 0.0) || !(s.ndof[i] > 0.0)) continue;
      xmin = std::min(xmin, s.ndof[i]);
      xmax = std::max(xmax, s.ndof[i]);
      ymin = std::min(ymin, s.eta[i]);
      ymax = std::max(ymax, s.eta[i]);
    }
  }
  if (!(xmax > 0.0)) {
    xmin = 1.0; xmax = 10.0; ymin = 0.1; ymax = 1.0;
  }
  const double lx0 = std::floor(std::log10(xmin)), lx1 = std::max(lx0 + 1, std::ceil(std::log10(xmax)));
  const double ly0 = std::floor(std::log10(ymin)), ly1 = std::max(ly0 + 1, std::ceil(std::log10(ymax)));
  auto px = [&](double x) { return left + (std::log10(x) - lx0) / (lx1 - lx0) * (width - left - right); };
  auto py = [&](double y) { return height - bottom - (std::log10(y) - ly0) / (ly1 - ly0) * (height - top - bottom); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (double e = lx0; e <= lx1; e += 1.0) {
    const double x = px(std::pow(10.0, e));
    out << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\"" << height - bottom
        << "\" stroke=\"#ddd\"/>\n<text x=\"" << x << "\" y=\"" << height - bottom + 18
        << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  for (double e = ly0; e <= ly1; e += 1.0) {
    const double y = py(std::pow(10.0, e));
    out << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - right << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << e
        << "</text>\n";
  }
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right << "\" height=\""
      << height - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">ndof</text>\n";
  out << "<text x=\"16\" y=\"" << (top + height - bottom) / 2 << "\" transform=\"rotate(-90 16 "
      << (top + height - bottom) / 2 << ")\" text-anchor=\"middle\">eta</text>\n";

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  int index = 0;
  for (const PlotSeries& s : series) {
    const char* color = colors[index % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.ndof.size(); ++i)
      if (s.eta[i] > 0.0) out << px(s.ndof[i]) << ',' << py(s.eta[i]) << ' ';
    out << "\"/>\n";
    for (std::size_t i = 0; i < s.ndof.size(); ++i)
      if (s.eta[i] > 0.0)
        out << "<circle cx=\"" << px(s.ndof[i]) << "\" cy=\"" << py(s.eta[i]) << "\" r=\"2.5\" fill=\"" << color
            << "\"/>\n";
    out << "<text x=\"" << width - right + 10 << "\" y=\"" << top + 16 * (index + 1) << "\" fill=\"" << color << "\">"
        << s.label << "</text>\n";
    ++index;
  }

  // Reference slopes through the upper-left corner of the data box.
  const double slopes[] = {-1.0 / 3.0, -static_cast<double>(k)};
  const char* labels[] = {"ndof^(-1/3)", nullptr};
  for (int i = 0; i < 2; ++i) {
    const double x0 = xmin, y0 = ymax;
    const double x1 = std::min(xmax, x0 * 10.0);
    const double y1 = y0 * std::pow(x1 / x0, slopes[i]);
    out << "<line x1=\"" << px(x0) << "\" y1=\"" << py(y0) << "\" x2=\"" << px(x1) << "\" y2=\""
        << py(std::max(y1, std::pow(10.0, ly0))) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    out << "<text x=\"" << width - right + 10 << "\" y=\"" << top + 16 * (index + 1 + i) << "\" fill=\"gray\">"
        << (labels[i] ? std::string(labels[i]) : "ndof^(-" + std::to_string(k) + ")") << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace ldgmin
