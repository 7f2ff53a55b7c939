#include "parstable/monte_carlo.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "parstable/errors.hpp"
#include "parstable/format.hpp"
#include "parstable/stats.hpp"

namespace parstable {

ParModel model1_preset(double alpha) {
  std::vector<Eigen::MatrixXd> theta(3, Eigen::MatrixXd(2, 2));
  theta[0] << 0.5, 0.1, -0.6, 0.4;
  theta[1] << 0.8, -0.1, 0.3, 0.7;
  theta[2] << 0.1, -0.4, -0.5, 0.3;
  const double c = std::sqrt(3.0) / 2.0;
  Eigen::MatrixXd half(2, 2);
  half << 0.5, -0.5,
          c, c;
  const std::array<double, 2> w{0.5, 0.2};
  return ParModel(std::move(theta), alpha, DiscreteSpectralMeasure::symmetrized(half, w));
}

ParModel model2_preset(double alpha) {
  std::vector<Eigen::MatrixXd> theta(2, Eigen::MatrixXd(3, 3));
  theta[0] << 0.8, -0.2, 0.7,
              0.1, 0.5, -0.6,
              0.4, 0.3, -0.1;
  theta[1] << 0.4, -0.1, 0.3,
              0.5, -0.2, 0.4,
              -0.3, 0.8, -0.6;
  const double z1 = 0.5, z2 = 0.5, z3 = std::sqrt(2.0) / 2.0;
  Eigen::MatrixXd half(3, 4);
  half << z1, -z1, z1, z1,
          z2, z2, -z2, z2,
          z3, z3, z3, -z3;
  const std::array<double, 4> w{0.1, 0.2, 0.3, 0.5};
  return ParModel(std::move(theta), alpha, DiscreteSpectralMeasure::symmetrized(half, w));
}

const McCell& McReport::cell(Method method, double alpha, std::size_t length, std::size_t v,
                             std::size_t i, std::size_t j) const {
  for (const auto& c : cells) {
    if (c.method == method && c.alpha == alpha && c.length == length && c.v == v && c.i == i &&
        c.j == j) {
      return c;
    }
  }
  throw std::out_of_range("no such Monte Carlo cell");
}

namespace {

using Estimates = std::vector<std::optional<std::vector<Eigen::MatrixXd>>>;

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(threads, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) fn(k);
    });
  }
  for (auto& t : pool) t.join();
}

void validate(const McConfig& cfg) {
  if (cfg.replicates < 2) throw std::invalid_argument("Monte Carlo needs at least 2 replicates");
  if (cfg.lengths.empty() || cfg.alphas.empty() || cfg.methods.empty()) {
    throw std::invalid_argument("Monte Carlo needs lengths, alphas and methods");
  }
  for (std::size_t L : cfg.lengths) {
    if (L < 4 * cfg.model.period()) throw std::invalid_argument("every length must be >= 4T");
  }
  for (double a : cfg.alphas) {
    if (!(a > 1.0 && a <= 2.0)) throw std::invalid_argument("alpha must lie in (1, 2]");
  }
}

}  // namespace

McReport run_mc_study(const McConfig& cfg) {
  validate(cfg);
  const RandomStream base(cfg.seed);
  const std::size_t period = cfg.model.period();
  const auto m = static_cast<Eigen::Index>(cfg.model.dim());
  const std::size_t n_methods = cfg.methods.size();
  constexpr std::array<double, 5> qs{0.05, 0.25, 0.5, 0.75, 0.95};

  McReport report;
  for (double alpha : cfg.alphas) {
    const ParModel model = cfg.model.with_alpha(alpha);
    for (std::size_t L : cfg.lengths) {
      // results[method][replicate]
      std::vector<Estimates> results(n_methods, Estimates(cfg.replicates));
      parallel_for(cfg.replicates, cfg.threads, [&](std::size_t k) {
        RandomStream rng = base.substream(cfg.common_stream ? 0 : k);
        std::optional<MultiTrajectory> traj;
        try {
          traj.emplace(simulate_par1(model, L, rng, cfg.simulation));
        } catch (const Error&) {
          return;
        }
        for (std::size_t q = 0; q < n_methods; ++q) {
          try {
            auto est = estimate(*traj, period, cfg.methods[q], alpha, cfg.estimation);
            if (est.all_converged()) results[q][k] = std::move(est.theta_hat);
          } catch (const Error&) {
          }
        }
      });

      for (std::size_t q = 0; q < n_methods; ++q) {
        std::size_t failed = 0;
        for (const auto& r : results[q]) failed += r.has_value() ? 0 : 1;
        report.failures.push_back({cfg.methods[q], alpha, L, failed, cfg.replicates});
        if (5 * failed > cfg.replicates) {
          std::ostringstream os;
          os << "Monte Carlo aborted: " << failed << " of " << cfg.replicates << " replicates failed ("
             << to_string(cfg.methods[q]) << ", alpha " << alpha << ", L " << L << ")";
          throw NumericalError(os.str());
        }
        std::vector<double> vals;
        for (std::size_t v = 1; v <= period; ++v) {
          for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
              vals.clear();
              for (const auto& r : results[q]) {
                if (r) vals.push_back((*r)[v - 1](i, j));
              }
              const auto qv = quantiles(vals, qs);
              report.cells.push_back(McCell{cfg.methods[q], alpha, L, v,
                                            static_cast<std::size_t>(i + 1),
                                            static_cast<std::size_t>(j + 1), qv[2], qv[0], qv[1],
                                            qv[3], qv[4], model.theta(v)(i, j)});
            }
          }
        }
      }
    }
  }
  return report;
}

void write_mc_csv(std::ostream& os, const McReport& report) {
  os << "method,alpha,L,v,i,j,median,q05,q95,true_value\n";
  for (const auto& c : report.cells) {
    os << to_string(c.method) << ',' << format_double(c.alpha) << ',' << c.length << ',' << c.v
       << ',' << c.i << ',' << c.j << ',' << format_double(c.median) << ','
       << format_double(c.q05) << ',' << format_double(c.q95) << ','
       << format_double(c.true_value) << '\n';
  }
}

}  // namespace parstable
