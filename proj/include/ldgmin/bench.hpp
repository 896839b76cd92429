#ifndef LDGMIN_BENCH_HPP
#define LDGMIN_BENCH_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "ldgmin/adapt.hpp"
#include "ldgmin/densities.hpp"
#include "ldgmin/ldg.hpp"

namespace ldgmin {

enum class BenchmarkId { OptimalDesign, PLaplace4, Bingham };

/// "odp", "plaplace4" or "bingham".
std::string benchmark_name(BenchmarkId id);
/// Throws ConfigError for an unknown name.
BenchmarkId parse_benchmark(const std::string& name);

/// Parameters of one benchmark on the L-shaped domain with f = 1.
struct BenchmarkSpec {
  BenchmarkId id = BenchmarkId::OptimalDesign;
  int k = 1;
  double r = 2.0;
  double s = 1.0;
  OptimalDesignParameters design;  // odp
  double p = 4.0;                  // plaplace4
  double mu = 1.0;                 // bingham
  double g = 0.2;
  double epsilon = 1e-5;

  /// Solve configuration. Bingham solves with the regularized density and
  /// estimates with the plain one.
  ProblemConfig problem() const;
  BoundarySpec boundary() const;
};

BenchmarkSpec defaults(BenchmarkId id);

/// Run description written next to the history.
struct RunManifest {
  std::string benchmark = "odp";
  int k = 1;
  double r = 2.0;
  double s = 1.0;
  double epsilon = 1e-5;
  double theta = 0.5;
  std::string mode = "adaptive";
  int levels = 10;
  long ndof_budget = 0;
  bool deterministic = false;
  std::string version;
  std::string timestamp;

  BenchmarkSpec spec() const;
  AdaptConfig adapt() const;
  std::string to_json() const;
  /// Throws ConfigError on malformed input or unknown values.
  static RunManifest from_json(const std::string& text);
};

std::string library_version();

/// Columns level,ndof,hmax,eta,Eh,Ehdual,gap,EvC,EstarRT,iters,seconds,cells;
/// reals with 17 significant digits. zero_time writes 0 in the seconds column.
void write_history_csv(std::ostream& out, const std::vector<ConvergenceRecord>& history, bool zero_time = false);

struct PlotSeries {
  std::string label;
  std::vector<double> ndof;
  std::vector<double> eta;
};

/// Log-log plot of eta against ndof with reference slopes -1/3 and -k.
void write_convergence_svg(std::ostream& out, const std::vector<PlotSeries>& series, int k);

}  // namespace ldgmin

#endif  // LDGMIN_BENCH_HPP
