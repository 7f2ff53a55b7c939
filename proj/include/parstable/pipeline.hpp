#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parstable/estimation.hpp"
#include "parstable/par_model.hpp"
#include "parstable/random.hpp"
#include "parstable/stable.hpp"

namespace parstable {

// CSV input ------------------------------------------------------------------

struct CsvColumns {
  /// Column holding the time label; it is checked for presence only.
  std::string time_column = "t";
  /// Value columns in order; empty means every column except the time column.
  std::vector<std::string> value_columns;
};

/// Reads a comma-separated table with a header row. Rows with missing or
/// non-numeric values are rejected with DataError. Observation k (1-based)
/// is treated as time k, so phase 1 is the first row.
MultiTrajectory read_trajectory_csv(std::istream& is, const CsvColumns& columns = {});

// Deterministic components ---------------------------------------------------

struct DeterministicComponents {
  std::size_t period = 1;
  std::vector<double> intercept;                 ///< per component
  std::vector<double> slope;                     ///< per time step
  std::vector<std::vector<double>> periodic_mean;  ///< [component][phase - 1]

  std::size_t dim() const noexcept { return intercept.size(); }
  /// Trend plus periodic mean of component i at time t (t = 1 is phase 1).
  double value(std::size_t i, long t) const;
};

/// Least-squares line removed first, then the per-phase sample means of the
/// detrended series. Requires L >= 2T.
std::pair<DeterministicComponents, MultiTrajectory> fit_deterministic(const MultiTrajectory& traj,
                                                                      std::size_t period);

/// traj + deterministic part, using each observation's time label.
MultiTrajectory add_deterministic(const MultiTrajectory& traj, const DeterministicComponents& det);

// Diagnostics ----------------------------------------------------------------

struct ComponentDiagnostics {
  double alpha;
  double scale;
  std::optional<double> ad_p_value;  ///< absent when no simulations were requested
  std::optional<double> ad_statistic;
};

struct DiagnosticsReport {
  std::vector<ComponentDiagnostics> components;
  std::vector<long> lags;  ///< -h_max..h_max
  /// auto_ncv[i][k]: normalized auto-covariation of component i at lags[k].
  std::vector<std::vector<double>> auto_ncv;
  /// cross_ncv[{i, j}][k] for i != j.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> cross_ncv;
  /// m = 2 only: spectral measure of the scale-normalized residuals.
  std::optional<DiscreteSpectralMeasure> spectral_measure;
};

/// McCulloch fits, Anderson-Darling p-values (n_sims bootstrap draws; 0
/// skips the test), normalized auto and cross covariation over lags and, for
/// two components, the residual spectral measure. Requires L >= 200.
DiagnosticsReport diagnose_residuals(const MultiTrajectory& residuals, std::size_t period,
                                     std::size_t h_max, std::size_t n_sims, RandomStream& rng);

/// `residual,ad_p_value,alpha` rows named Z1..Zm.
void write_diagnostics_table(std::ostream& os, const DiagnosticsReport& report);
/// `lag,kind,i,j,ncv` long-format rows.
void write_ncv_csv(std::ostream& os, const DiagnosticsReport& report);

// Fitting --------------------------------------------------------------------

struct FitOptions {
  Method method = Method::YwCv;
  std::optional<double> alpha;  ///< YW-T only; estimated when absent
  std::size_t h_max = 10;
  std::size_t n_sims = 1000;
  std::uint64_t seed = 1;
  EstimationOptions estimation;
};

struct FitResult {
  DeterministicComponents deterministic;
  EstimationResult estimation;
  MultiTrajectory residuals;
  DiagnosticsReport diagnostics;
  /// Theta-hat with alpha equal to the mean of the residual alpha estimates
  /// and the estimated residual noise measure.
  ParModel model;
};

/// Noise measure fitted to PAR residuals: the projection-method estimate for
/// two components, independent axis atoms with gamma = sigma^alpha / 2 per
/// direction otherwise.
DiscreteSpectralMeasure fit_noise_measure(const MultiTrajectory& residuals, double alpha,
                                          const std::vector<ComponentDiagnostics>& marginals);

FitResult fit_par1(const MultiTrajectory& traj, std::size_t period, const FitOptions& options = {});

// Predictive simulation ------------------------------------------------------

struct QuantilePaths {
  std::vector<double> qs;
  long t0 = 1;
  /// lines[k] is m x L: pointwise quantile of order qs[k].
  std::vector<RowMatrix> lines;
};

/// Pointwise quantiles over n_paths simulated trajectories of length L with
/// the deterministic part added back. Path k draws from rng.substream(k).
/// Requires n_paths >= 100.
QuantilePaths simulate_quantile_lines(const ParModel& model, const DeterministicComponents& det,
                                      std::size_t n_paths, const std::vector<double>& qs,
                                      std::size_t length, RandomStream& rng,
                                      std::optional<std::size_t> burn_in = std::nullopt);

/// At every t = 2..L the quantiles of Theta(t) x(t-1) + Z over n_paths noise
/// draws, where x is the observed series minus its deterministic part, which
/// is then added back.
QuantilePaths one_step_quantiles(const ParModel& model, const DeterministicComponents& det,
                                 const MultiTrajectory& traj, const std::vector<double>& qs,
                                 std::size_t n_paths, RandomStream& rng);

/// Fraction of observations lying between the lowest and highest lines,
/// over all components and the common time range.
double band_coverage(const QuantilePaths& paths, const MultiTrajectory& traj);

/// `t,q,x1,...,xm` long-format rows.
void write_quantile_paths_csv(std::ostream& os, const QuantilePaths& paths);

// Configuration --------------------------------------------------------------

struct PipelineConfig {
  std::optional<std::size_t> period;
  std::optional<Method> method;
  std::optional<double> alpha;
  std::optional<std::size_t> burn_in;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_paths;
  std::optional<std::vector<double>> quantiles;
  std::optional<std::size_t> h_max;
  std::optional<std::size_t> n_sims;
};

/// JSON object with any of the PipelineConfig keys. Unknown keys and
/// ill-typed values raise DataError.
PipelineConfig parse_pipeline_config(std::istream& is);

// Model files ----------------------------------------------------------------

/// JSON: {"alpha": a, "theta": [T x m x m], "noise": {"points": [K x m],
/// "weights": [K]}}.
void write_model_json(std::ostream& os, const ParModel& model);
ParModel read_model_json(std::istream& is);

/// JSON: {"period": T, "intercept": [...], "slope": [...],
/// "periodic_mean": [m x T]}.
void write_deterministic_json(std::ostream& os, const DeterministicComponents& det);
DeterministicComponents read_deterministic_json(std::istream& is);

}  // namespace parstable
