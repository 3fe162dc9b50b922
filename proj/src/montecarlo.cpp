#include "pglfree/montecarlo.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#include <Eigen/Dense>

#include "pglfree/kernels.hpp"

namespace pglfree {

const char* to_string(BoundFormula f) noexcept {
  switch (f) {
    case BoundFormula::alon_roichman: return "alon-roichman";
    case BoundFormula::girth: return "girth";
    case BoundFormula::est_l: return "est-l";
  }
  return "unknown";
}

double alon_roichman_bound(std::uint64_t order, std::uint32_t k, double eps) noexcept {
  return 1.0 - 4.0 * static_cast<double>(order) * std::exp(-static_cast<double>(k) * eps * eps / (16.0 * std::log(2.0)));
}

double girth_bound(std::uint32_t p, std::uint32_t k, std::uint32_t ell) noexcept {
  return 1.0 - std::pow(2.0 * k, ell + 1.0) * 3.0 * ell / p;
}

std::vector<PglElement> sample_tuple(const GroupTable& table, std::uint32_t k, std::uint64_t seed,
                                     std::string_view tag, std::uint32_t trial) {
  Stream rng(seed, tag, table.prime(), k, trial);
  std::vector<PglElement> out;
  out.reserve(k);
  for (std::uint32_t i = 0; i < k; ++i) out.push_back(sample_uniform(table, rng));
  return out;
}

namespace {

/// Runs body(t) for every trial in parallel and rethrows the error of the smallest trial.
template <class Body>
void for_trials(std::uint32_t trials, Body body) {
  std::vector<std::exception_ptr> errors(trials);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
    try {
      body(static_cast<std::uint32_t>(t));
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_config(const TrialConfig& cfg) {
  if (cfg.trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
  if (cfg.k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
}

void accumulate(TrialResult& r, const std::vector<std::uint8_t>& inconclusive) {
  r.successes = 0;
  r.inconclusive = 0;
  for (std::size_t t = 0; t < r.outcomes.size(); ++t) {
    r.successes += r.outcomes[t];
    r.inconclusive += inconclusive[t];
  }
  r.vacuous = r.theoretical_bound <= 0.0;
}

}  // namespace

TrialResult ar_trials(const TrialConfig& cfg, const GapOptions& gap) {
  check_config(cfg);
  const auto table = table_for(cfg.p);
  TrialResult r;
  r.config = cfg;
  r.formula = BoundFormula::alon_roichman;
  r.theoretical_bound = alon_roichman_bound(table->order(), cfg.k, cfg.eps);
  r.outcomes.assign(cfg.trials, 0);
  std::vector<std::uint8_t> inconclusive(cfg.trials, 0);
  GapOptions go = gap;
  go.parallel = false;
  go.power.parallel = false;
  for_trials(cfg.trials, [&](std::uint32_t t) {
    const auto gens = sample_tuple(*table, cfg.k, cfg.seed, "ar-trial", t);
    const std::uint64_t power_seed = Stream(cfg.seed, "ar-power", cfg.p, cfg.k, t).key();
    const GapCertificate c = certify_gap(*table, gens, cfg.eps, go, power_seed);
    r.outcomes[t] = c.verdict == GapVerdict::certified ? 1 : 0;
    inconclusive[t] = c.verdict == GapVerdict::inconclusive ? 1 : 0;
  });
  accumulate(r, inconclusive);
  return r;
}

std::vector<ReducedWord> all_reduced_words(std::uint32_t k, std::uint32_t max_len) {
  std::vector<ReducedWord> out;
  std::vector<std::uint32_t> codes;
  const std::uint32_t ncodes = 2 * k;
  auto rec = [&](auto&& self, std::uint32_t depth) -> void {
    if (depth > 0) out.push_back(detail::word_from_codes(codes));
    if (depth == max_len) return;
    for (std::uint32_t c = 0; c < ncodes; ++c) {
      if (depth > 0 && (c ^ 1u) == codes.back()) continue;
      codes.push_back(c);
      self(self, depth + 1);
      codes.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

bool law_check(const ReducedWord& w, std::uint32_t p, std::uint64_t budget) {
  const auto table = table_for(p);
  const std::uint32_t k = w.symbol_count();
  unsigned __int128 total = 1;
  for (std::uint32_t i = 0; i < k; ++i) {
    total *= table->order();
    if (total > budget) throw Error(ErrorKind::BudgetExceeded, "law check needs |Gamma_p|^k <= budget");
  }
  return kernels::parallel::count_word_solutions(*table, w, k) == static_cast<std::uint64_t>(total);
}

LawScreen screen_laws(std::uint32_t p, std::uint32_t k, std::uint32_t ell, std::uint64_t seed,
                      std::uint64_t exhaustive_budget) {
  const auto table = table_for(p);
  LawScreen screen;
  const auto words = all_reduced_words(k, ell);
  screen.words = words.size();
  constexpr int kRandomTries = 64;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const ReducedWord& w = words[i];
    bool found = false;
    for (int t = 0; t < kRandomTries && !found; ++t) {
      const auto subst = sample_tuple(*table, k, seed, "law-screen", static_cast<std::uint32_t>(i * kRandomTries + t));
      found = !evaluate(w, subst, *table).is_identity();
    }
    if (found) continue;
    bool law = true;
    try {
      law = law_check(w, p, exhaustive_budget);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::BudgetExceeded) throw;
    }
    if (law) {
      screen.suspect = w;
      return screen;
    }
  }
  screen.passed = true;
  return screen;
}

TrialResult girth_trials(const TrialConfig& cfg, const RelationOptions& opts) {
  check_config(cfg);
  if (cfg.ell < 1) throw Error(ErrorKind::InvalidArgument, "ell must be >= 1");
  const auto table = table_for(cfg.p);
  TrialResult r;
  r.config = cfg;
  r.formula = BoundFormula::girth;
  r.theoretical_bound = girth_bound(cfg.p, cfg.k, cfg.ell);
  r.applicable = 3ULL * cfg.k <= cfg.p - 1ULL && screen_laws(cfg.p, cfg.k, cfg.ell, cfg.seed).passed;
  r.outcomes.assign(cfg.trials, 0);
  std::vector<std::uint8_t> inconclusive(cfg.trials, 0);
  RelationOptions ro = opts;
  ro.parallel = false;
  for_trials(cfg.trials, [&](std::uint32_t t) {
    const auto gens = sample_tuple(*table, cfg.k, cfg.seed, "girth-trial", t);
    const RelationReport rep = check_no_relations(gens, cfg.ell, *table, ro);
    r.outcomes[t] = rep.clean() ? 1 : 0;
    inconclusive[t] = rep.inconclusive ? 1 : 0;
  });
  accumulate(r, inconclusive);
  return r;
}

DecompositionCheck ts_decomposition_check(const GroupTable& table, std::span<const PglElement> gens,
                                          std::uint64_t limit) {
  if (table.order() > limit) throw Error(ErrorKind::TooLarge, "dense decomposition check above order " +
                                                               std::to_string(limit));
  if (gens.empty()) throw Error(ErrorKind::InvalidArgument, "empty generator list");
  const auto n = static_cast<Eigen::Index>(table.order());
  using Mat = Eigen::MatrixXd;
  using CMat = Eigen::MatrixXcd;
  const Mat proj = Mat::Identity(n, n) - Mat::Constant(n, n, 1.0 / static_cast<double>(n));
  Mat a = Mat::Zero(n, n);
  DecompositionCheck out;
  out.x_min = 1.0;
  out.x_max = 0.0;
  for (const auto& g : gens) {
    Mat lam = Mat::Zero(n, n);
    for (Eigen::Index y = 0; y < n; ++y) lam(table.index_of(mul(g, table.element(static_cast<std::uint32_t>(y)))), y) = 1.0;
    a += lam;
    const Mat x = (2.0 * Mat::Identity(n, n) + lam + lam.transpose()) / 4.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(x, Eigen::EigenvaluesOnly);
    out.x_min = std::min(out.x_min, es.eigenvalues().minCoeff());
    out.x_max = std::max(out.x_max, es.eigenvalues().maxCoeff());
  }
  a /= static_cast<double>(gens.size());
  const Mat a0 = proj * a * proj;
  const Mat t = (a0 + a0.transpose()) / 2.0;
  const std::complex<double> i(0.0, 1.0);
  const CMat s = i * (a0 - a0.transpose()).cast<std::complex<double>>() / 2.0;
  const CMat recon = t.cast<std::complex<double>>() - i * s;
  out.residual = (recon - a0.cast<std::complex<double>>()).cwiseAbs().maxCoeff();
  out.t_norm = Eigen::SelfAdjointEigenSolver<Mat>(t, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
  out.s_norm = Eigen::SelfAdjointEigenSolver<CMat>(s, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
  out.norm = Eigen::BDCSVD<Mat>(a0).singularValues()(0);
  constexpr double tol = 1e-12;
  out.ok = out.residual <= tol && out.x_min >= -tol && out.x_max <= 1.0 + tol && out.t_norm <= 1.0 + tol &&
           out.s_norm <= 1.0 + tol && out.norm <= out.t_norm + out.s_norm + tol;
  return out;
}

ExactCount exact_word_count(const ReducedWord& w, std::uint32_t p, std::uint32_t k, const CountBudget& budget) {
  if (w.symbol_count() > k) throw Error(ErrorKind::IndexOutOfRange, "word uses more than k symbols");
  const auto table = table_for(p);
  ExactCount ec{.word = w};
  ec.p = p;
  ec.k = k;
  ec.total = boost::multiprecision::pow(BigInt(table->order()), k);
  if (ec.total > budget.tuples) throw Error(ErrorKind::BudgetExceeded, "|Gamma_p|^k exceeds the exhaustive budget");
  ec.count_u = budget.parallel ? kernels::parallel::count_word_solutions(*table, w, k)
                               : kernels::serial::count_word_solutions(*table, w, k);
  ec.is_law = ec.count_u == ec.total;
  const BigInt ell = w.size();
  const BigInt pp = p;
  const BigInt pm1 = p - 1;
  ec.est_bound = BigRational(ell * boost::multiprecision::pow(pp, 3 * k - 1), boost::multiprecision::pow(pm1, 3 * k));
  ec.u_bound = BigRational(ell * boost::multiprecision::pow(pp, 4 * k - 1), boost::multiprecision::pow(pm1, k));
  ec.u_bound_ok = ec.is_law || BigRational(ec.count_u) <= ec.u_bound;
  ec.est_ok = ec.is_law || BigRational(ec.count_u, ec.total) <= ec.est_bound;
  const BigInt lifted_space = boost::multiprecision::pow(pp, 4 * k);
  if (budget.lift && k <= 16 && lifted_space <= budget.lifted) {
    const LiftedCounts lc = budget.parallel ? kernels::parallel::count_lifted(p, w, k)
                                            : kernels::serial::count_lifted(p, w, k);
    ec.lifted = LiftedCount{lc.scalar_all, lc.scalar_invertible};
    ec.covering_ok = ec.lifted->v == boost::multiprecision::pow(pm1, k) * ec.count_u;
    ec.w_bound_ok = ec.is_law || ec.lifted->w <= ell * boost::multiprecision::pow(pp, 4 * k - 1);
  }
  return ec;
}

std::string trial_header() {
  return "formula\tp\tk\teps\tell\ttrials\tseed\tsuccesses\tfraction\tbound\tvacuous\tapplicable\tinconclusive\n";
}

std::string trial_row(const TrialResult& r) {
  std::ostringstream os;
  char buf[96];
  os << to_string(r.formula) << '\t' << r.config.p << '\t' << r.config.k << '\t';
  std::snprintf(buf, sizeof buf, "%.6g", r.config.eps);
  os << buf << '\t' << r.config.ell << '\t' << r.config.trials << '\t' << r.config.seed << '\t' << r.successes << '\t';
  std::snprintf(buf, sizeof buf, "%.6f\t%.9g", r.fraction(), r.theoretical_bound);
  os << buf << '\t' << (r.vacuous ? 1 : 0) << '\t' << (r.applicable ? 1 : 0) << '\t' << r.inconclusive << '\n';
  return os.str();
}

}  // namespace pglfree
