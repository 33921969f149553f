#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "swl/swl.hpp"

namespace {

enum Exit { kOk = 0, kVerifyFail = 1, kUsage = 2, kConvergence = 3, kNumeric = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string family;
  int n = 0;
  int m_samples = 0;
  double gamma = 0.0;
  double a = 0.0;
  std::string ensemble = "quaternionic";
  double t_min = 0.0;
  double t_max = 0.0;
  int steps = 0;
  int quad_nodes = 0;
  long long trials = 0;
  unsigned long long seed = 20240601ULL;
  std::string out;
  std::string selector;
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes to --out, or stdout when it is empty. LF line endings either way.
void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw UsageError("cannot open output file " + o.out);
  f << text;
}

std::vector<double> uniform_grid(const Options& o) {
  if (o.steps < 2) throw UsageError("--steps must be >= 2");
  if (!(o.t_min < o.t_max)) throw UsageError("--t-min must be below --t-max");
  std::vector<double> t(o.steps);
  for (int i = 0; i < o.steps; ++i) t[i] = o.t_min + (o.t_max - o.t_min) * i / (o.steps - 1);
  return t;
}

int quad_nodes_or(const Options& o, int fallback) {
  if (o.quad_nodes > 0) return o.quad_nodes;
  if (const char* env = std::getenv("SWL_QUAD_NODES")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 16 || v > 512)
      throw UsageError(std::string("SWL_QUAD_NODES must be an integer in [16, 512], got '") + env + "'");
    return static_cast<int>(v);
  }
  return fallback;
}

swl::SpikedParams params_from(const Options& o, bool need_m) {
  if (o.n < 1) throw UsageError("--n must be >= 1");
  try {
    if (o.m_samples > 0 && o.gamma > 0.0)
      throw UsageError("give only one of --m-samples and --gamma");
    if (o.m_samples > 0) return swl::SpikedParams(o.m_samples, o.n, o.a);
    if (o.gamma > 0.0) return swl::SpikedParams::from_gamma(o.n, o.gamma, o.a);
  } catch (const swl::InvalidParams& e) {
    throw UsageError(e.what());
  }
  if (need_m) throw UsageError("--m-samples or --gamma is required");
  return swl::SpikedParams(o.n, o.n, o.a);
}

int cmd_dist(const Options& o) {
  if (o.family.empty()) throw UsageError("--family is required");
  swl::Family f;
  try {
    f = swl::parse_family(o.family);
  } catch (const swl::InvalidParams& e) {
    throw UsageError(e.what());
  }
  const std::vector<double> ts = uniform_grid(o);
  const int m = quad_nodes_or(o, 96);
  if (m < 16 || m > 256) throw UsageError("--quad-nodes must lie in [16, 256] for dist");
  const swl::LimitFamily fam{f, m, 40.0};
  std::string csv = "T,F\n";
  for (double t : ts) csv += fmt17(t) + "," + fmt17(swl::limit_cdf(fam, t)) + "\n";
  emit(o, csv);
  return kOk;
}

int cmd_finite_cdf(const Options& o) {
  const swl::SpikedParams p = params_from(o, true);
  if (p.M > swl::kMaxFiniteM)
    throw UsageError("finite-cdf supports M <= " + std::to_string(swl::kMaxFiniteM));
  const std::vector<double> ts = uniform_grid(o);
  if (!(o.t_min > 0.0)) throw UsageError("--t-min must be positive for finite-cdf");
  const int m = quad_nodes_or(o, 64);
  if (m < 16 || m > 256) throw UsageError("--quad-nodes must lie in [16, 256] for finite-cdf");
  std::string csv = "T,P\n";
  for (double t : ts) csv += fmt17(t) + "," + fmt17(swl::finite_cdf(p, t, m)) + "\n";
  emit(o, csv);
  return kOk;
}

int cmd_mc(const Options& o) {
  const swl::SpikedParams p = params_from(o, false);
  if (o.trials < 1) throw UsageError("--trials must be >= 1");
  swl::Ensemble e;
  if (o.ensemble == "quaternionic") e = swl::Ensemble::quaternionic;
  else if (o.ensemble == "complex") e = swl::Ensemble::complex;
  else throw UsageError("--ensemble must be quaternionic or complex");

  const swl::TrialBatch b = swl::run_trials(p, e, static_cast<std::size_t>(o.trials), o.seed);
  swl::LawTables tables;
  const double ks_gse = swl::ks_statistic(b, std::cref(tables.get(swl::Family::GSE)));
  const double ks_goe = swl::ks_statistic(b, std::cref(tables.get(swl::Family::GOE)));
  const double ks_gau = swl::ks_statistic(b, swl::standard_normal_cdf);

  std::string csv = "trial,raw_max,rescaled\n";
  for (std::size_t t = 0; t < b.trials; ++t)
    csv += std::to_string(t) + "," + fmt17(b.raw_max[t]) + "," + fmt17(b.rescaled[t]) + "\n";
  csv += "# ks_gse=" + fmt17(ks_gse) + " ks_goe=" + fmt17(ks_goe) + " ks_gaussian=" + fmt17(ks_gau) +
         " regime=" + swl::regime_name(b.map.regime) + "\n";
  emit(o, csv);
  return kOk;
}

struct Reporter {
  bool all_ok = true;
  void line(const std::string& name, double residual, double threshold) {
    const bool ok = residual < threshold;
    all_ok = all_ok && ok;
    if (ok)
      std::cout << "ok " << name << " residual=" << fmt17(residual) << "\n";
    else
      std::cout << "FAIL " << name << " residual=" << fmt17(residual) << " threshold=" << fmt17(threshold)
                << "\n";
  }
};

void verify_identities(Reporter& r, std::uint64_t seed) {
  double cv = 0.0, l1 = 0.0, jk = 0.0, tri = 0.0;
  for (const auto& row : swl::identity_sweep(seed)) {
    if (row.check == "confluent_vandermonde") cv = std::max(cv, row.residual);
    else if (row.check == "lemma1") l1 = std::max(l1, row.residual);
    else if (row.check == "jack_identity") jk = std::max(jk, row.residual);
    else tri = std::max(tri, row.residual);
  }
  r.line("confluent_vandermonde", cv, 1e-10);
  r.line("lemma1", l1, 1e-10);
  r.line("jack_identity", jk, 1e-10);
  r.line("lemma1_vs_jack", tri, 1e-12);
  using R = swl::Rational;
  const R defect = swl::jack_identity_defect({R(13, 10), R(7, 10)}, 4);
  r.line("jack_identity_exact", std::abs(boost::rational_cast<double>(defect)), 1e-300);
  r.line("joint_density", swl::check_joint_density(swl::SpikedParams(3, 2, 0.5), 1000000, seed), 0.01);
}

void verify_skew(Reporter& r) {
  for (const auto& p : {swl::SpikedParams(3, 2, 0.5), swl::SpikedParams(5, 3, 0.7), swl::SpikedParams(8, 5, 2.0)}) {
    std::ostringstream name;
    name << "skew_gram_N" << p.N << "_M" << p.M << "_a" << p.a;
    r.line(name.str(), swl::skew_orthogonality_residual(p), 1e-8);
  }
  double g = 0.0;
  for (int M : {2, 5})
    for (double a : {0.0, 0.5, 2.0}) {
      const swl::SpikedParams p(M, 1, a);
      for (int i = 1; i <= 10; ++i) {
        const double t = 0.3 * i * (1.0 + a);
        const double want = boost::math::gamma_p(2.0 * M, 2.0 * M * t / (1.0 + a));
        g = std::max(g, std::abs(swl::finite_cdf(p, t) - want));
      }
    }
  r.line("finite_cdf_n1_gamma", g, 1e-8);
  double db = 0.0;
  const swl::SpikedParams p(3, 2, 0.5);
  for (double t : {1.0, 2.0, 3.0}) db = std::max(db, std::abs(swl::finite_cdf(p, t) - swl::debruijn_cdf_oracle(p, t)));
  r.line("finite_cdf_debruijn", db, 1e-6);
}

void verify_painleve(Reporter& r) {
  for (double t : {-2.0, 0.0, 2.0}) {
    const swl::TwResiduals res = swl::tw_identity_check(t);
    r.line("painleve_resolvent_T" + fmt17(t), res.resolvent_value, 1e-4);
    r.line("painleve_inner_product_T" + fmt17(t), res.inner_product, 1e-4);
  }
}

int cmd_verify(const Options& o) {
  const std::string& s = o.selector;
  if (s != "identities" && s != "skew" && s != "painleve" && s != "all")
    throw UsageError("verify selector must be identities, skew, painleve or all (got '" + s + "')");
  Reporter r;
  if (s == "identities" || s == "all") verify_identities(r, o.seed);
  if (s == "skew" || s == "all") verify_skew(r);
  if (s == "painleve" || s == "all") verify_painleve(r);
  std::cout.flush();
  return r.all_ok ? kOk : kVerifyFail;
}

void add_range_flags(CLI::App* c, Options& o) {
  c->add_option("--t-min", o.t_min, "Left end of the T grid");
  c->add_option("--t-max", o.t_max, "Right end of the T grid");
  c->add_option("--steps", o.steps, "Number of grid points (>= 2)");
  c->add_option("--quad-nodes", o.quad_nodes, "Quadrature nodes (default $SWL_QUAD_NODES)");
}

void add_param_flags(CLI::App* c, Options& o) {
  c->add_option("--n", o.n, "Dimension N");
  c->add_option("--m-samples", o.m_samples, "Sample count M");
  c->add_option("--gamma", o.gamma, "Aspect ratio gamma, M = gamma^2 N");
  c->add_option("--a", o.a, "Spike: population eigenvalue 1 + a");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Rank-one quaternionic spiked Wishart lab"};
  app.require_subcommand(1);

  auto* dist = app.add_subcommand("dist", "Tabulate a limit law as T,F");
  dist->add_option("--family", o.family, "gue|gue1|goe|gse|gse1|gaussian");
  add_range_flags(dist, o);

  auto* fin = app.add_subcommand("finite-cdf", "Tabulate P(max lambda <= T) at finite N, M as T,P");
  add_param_flags(fin, o);
  add_range_flags(fin, o);

  auto* mc = app.add_subcommand("mc", "Monte Carlo maxima as trial,raw_max,rescaled");
  add_param_flags(mc, o);
  mc->add_option("--ensemble", o.ensemble, "quaternionic|complex");
  mc->add_option("--trials", o.trials, "Number of trials");

  auto* ver = app.add_subcommand("verify", "Run numerical self-checks");
  ver->add_option("selector", o.selector, "identities|skew|painleve|all")->required();

  for (auto* c : {dist, fin, mc, ver}) {
    c->add_option("--seed", o.seed, "Master seed");
    c->add_option("--out", o.out, "Output file (default stdout)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*dist) return cmd_dist(o);
    if (*fin) return cmd_finite_cdf(o);
    if (*mc) return cmd_mc(o);
    if (*ver) return cmd_verify(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const swl::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return kConvergence;
  } catch (const swl::Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  }
  return kUsage;
}
