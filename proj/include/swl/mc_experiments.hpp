#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <exception>
#include <map>
#include <memory>
#include <thread>
#include <vector>

// Boost 1.74's pchip calls isnan unqualified.
#include <cmath>
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "swl/errors.hpp"
#include "swl/limit_dists.hpp"
#include "swl/quaternion.hpp"
#include "swl/rng.hpp"

namespace swl {

struct TrialBatch {
  SpikedParams params;
  Ensemble ensemble = Ensemble::quaternionic;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  RescaleMap map;
  std::vector<double> raw_max;
  std::vector<double> rescaled;
};

/// Largest sample eigenvalue of one trial.
inline double trial_max_eigenvalue(const SpikedParams& p, Ensemble e, const RngStream& rng) {
  switch (e) {
    case Ensemble::quaternionic:
    case Ensemble::quaternionic_white:
      return hermitian_eigenvalues(sample_matrix(p, rng)).back();
    case Ensemble::complex:
    case Ensemble::complex_white: {
      const Eigen::VectorXd ev = detail::hermitian_spectrum(sample_complex_matrix(p, rng));
      return ev(ev.size() - 1);
    }
  }
  return 0.0;
}

/// Runs `trials` independent trials. Trial t draws from RngStream{seed, t};
/// threads take a strided share of the indices and write into slot t, so the
/// batch does not depend on `threads`. threads = 0 uses the hardware count.
inline TrialBatch run_trials(const SpikedParams& params, Ensemble ensemble, std::size_t trials,
                             std::uint64_t seed, unsigned threads = 0) {
  if (trials < 1) throw InvalidParams("run_trials: trials must be >= 1");
  params.validate();
  if (ensemble == Ensemble::quaternionic_white || ensemble == Ensemble::complex_white)
    throw InvalidParams("run_trials: ensemble must be quaternionic or complex");

  TrialBatch b;
  b.params = params;
  b.ensemble = ensemble;
  b.trials = trials;
  b.seed = seed;
  b.map = rescale_map(params, ensemble);
  b.raw_max.assign(trials, 0.0);
  b.rescaled.assign(trials, 0.0);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, trials));

  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned id) {
    try {
      for (std::size_t t = id; t < trials; t += threads) {
        const double lam = trial_max_eigenvalue(params, ensemble, RngStream{seed, t});
        b.raw_max[t] = lam;
        b.rescaled[t] = b.map.apply(lam);
      }
    } catch (...) {
      errors[id] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned id = 0; id < threads; ++id) pool.emplace_back(work, id);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return b;
}

/// Two-sided Kolmogorov-Smirnov distance between the empirical CDF of
/// `sample` and `cdf`.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InvalidParams("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

inline double ks_statistic(const TrialBatch& batch, const std::function<double(double)>& cdf) {
  return ks_statistic(batch.rescaled, cdf);
}

/// A limit CDF sampled on a uniform grid and interpolated by a monotone
/// cubic. Outside the grid the end values are held.
class TabulatedCdf {
 public:
  TabulatedCdf(Family f, double lo = -7.0, double hi = 5.0, double step = 0.1, int nodes = 96)
      : family_(f), lo_(lo), hi_(hi) {
    if (!(hi > lo) || !(step > 0.0)) throw InvalidParams("TabulatedCdf: bad grid");
    const int n = static_cast<int>(std::lround((hi - lo) / step)) + 1;
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = lo + (hi - lo) * i / (n - 1);
      ys[i] = limit_cdf(LimitFamily{f, nodes, 40.0}, xs[i]);
    }
    front_ = ys.front();
    back_ = ys.back();
    interp_ = std::make_shared<Interp>(std::move(xs), std::move(ys));
  }

  Family family() const { return family_; }

  double operator()(double t) const {
    if (family_ == Family::Gaussian) return standard_normal_cdf(t);
    if (t <= lo_) return front_;
    if (t >= hi_) return back_;
    return std::clamp((*interp_)(t), 0.0, 1.0);
  }

 private:
  using Interp = boost::math::interpolators::pchip<std::vector<double>>;
  Family family_;
  double lo_, hi_;
  double front_ = 0.0, back_ = 1.0;
  std::shared_ptr<Interp> interp_;
};

/// Builds tables lazily and keeps them for reuse across a sweep.
class LawTables {
 public:
  const TabulatedCdf& get(Family f) {
    auto it = tables_.find(f);
    if (it == tables_.end()) it = tables_.emplace(f, TabulatedCdf(f)).first;
    return it->second;
  }

 private:
  std::map<Family, TabulatedCdf> tables_;
};

struct PhaseRow {
  double a = 0.0;
  Regime regime = Regime::subcritical;
  double ks_gse = 0.0;
  double ks_goe = 0.0;
  double ks_gaussian = 0.0;
  Family best = Family::GSE;     // law with the smallest KS distance
  Family expected = Family::GSE; // law the phase diagram predicts

  bool matches() const { return best == expected; }
};

/// KS distances of a batch against the three quaternionic limit laws.
inline PhaseRow phase_row(const TrialBatch& batch, LawTables& tables) {
  PhaseRow r;
  r.a = batch.params.a;
  r.regime = batch.map.regime;
  r.ks_gse = ks_statistic(batch, std::cref(tables.get(Family::GSE)));
  r.ks_goe = ks_statistic(batch, std::cref(tables.get(Family::GOE)));
  r.ks_gaussian = ks_statistic(batch, standard_normal_cdf);
  r.best = Family::GSE;
  double best = r.ks_gse;
  if (r.ks_goe < best) best = r.ks_goe, r.best = Family::GOE;
  if (r.ks_gaussian < best) r.best = Family::Gaussian;
  switch (r.regime) {
    case Regime::subcritical: r.expected = Family::GSE; break;
    case Regime::critical: r.expected = Family::GOE; break;  // F_GSE1 = F_GOE
    case Regime::supercritical: r.expected = Family::Gaussian; break;
  }
  return r;
}

/// One row per spike value, quaternionic ensemble with M = gamma^2 N.
inline std::vector<PhaseRow> phase_sweep(int N, double gamma, const std::vector<double>& a_grid,
                                         std::size_t trials, std::uint64_t seed,
                                         LawTables* tables = nullptr, unsigned threads = 0) {
  if (a_grid.empty()) throw InvalidParams("phase_sweep: empty a-grid");
  LawTables local;
  LawTables& t = tables ? *tables : local;
  std::vector<PhaseRow> rows;
  for (double a : a_grid) {
    const SpikedParams p = SpikedParams::from_gamma(N, gamma, a);
    rows.push_back(phase_row(run_trials(p, Ensemble::quaternionic, trials, seed, threads), t));
  }
  return rows;
}

}  // namespace swl
