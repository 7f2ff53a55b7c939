#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "parstable/estimation.hpp"
#include "parstable/par_model.hpp"

namespace parstable {

/// Two-dimensional model with period 3 and four noise atoms.
ParModel model1_preset(double alpha = 1.8);
/// Three-dimensional model with period 2 and eight noise atoms.
ParModel model2_preset(double alpha = 1.8);

struct McConfig {
  ParModel model;
  std::vector<std::size_t> lengths{1000};
  std::size_t replicates = 200;
  std::vector<double> alphas{1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9};
  std::vector<Method> methods{Method::YwCv, Method::YwT};
  std::uint64_t seed = 1;
  /// Worker threads; results do not depend on this.
  std::size_t threads = 1;
  /// Every replicate reuses substream 0 (degenerate replication, for tests).
  bool common_stream = false;
  SimulationOptions simulation;
  EstimationOptions estimation;
};

struct McCell {
  Method method;
  double alpha;
  std::size_t length;
  std::size_t v, i, j;  ///< 1-based
  double median, q05, q25, q75, q95;
  double true_value;
};

struct McFailures {
  Method method;
  double alpha;
  std::size_t length;
  std::size_t failed;
  std::size_t attempted;
};

struct McReport {
  std::vector<McCell> cells;
  std::vector<McFailures> failures;

  const McCell& cell(Method method, double alpha, std::size_t length, std::size_t v,
                     std::size_t i, std::size_t j) const;
};

/// For every (alpha, L) the model is simulated M times, replicate k drawing
/// from substream k of the base seed, and each trajectory is estimated by
/// every requested method. Failed replicates are excluded and counted;
/// NumericalError is thrown when more than 20% of a (method, alpha, L) group
/// fail.
McReport run_mc_study(const McConfig& config);

/// `method,alpha,L,v,i,j,median,q05,q95,true_value`.
void write_mc_csv(std::ostream& os, const McReport& report);

}  // namespace parstable
