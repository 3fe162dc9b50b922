#include "pglfree/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "pglfree/error.hpp"

namespace pglfree {

namespace bmp = boost::multiprecision;
using BigInt = bmp::cpp_int;
using Wide = bmp::number<bmp::cpp_int_backend<1024, 1024, bmp::unsigned_magnitude, bmp::checked, void>>;

namespace {

void check_gens(const GroupTable& table, std::span<const PglElement> gens) {
  if (gens.empty()) throw Error(ErrorKind::InvalidArgument, "generator list is empty");
  for (const auto& g : gens) {
    if (g.modulus() != table.prime()) throw Error(ErrorKind::ModulusMismatch, "generator not in table");
  }
}

PermutationSet left_perms(const GroupTable& table, std::span<const PglElement> gens) {
  PermutationSet out;
  out.size = table.order();
  out.count = static_cast<std::uint32_t>(gens.size());
  out.data.resize(out.size * out.count);
  for (std::uint32_t f = 0; f < out.count; ++f) {
    for (std::uint32_t x = 0; x < out.size; ++x) {
      out.data[std::size_t{f} * out.size + x] = table.index_of(mul(gens[f], table.element(x)));
    }
  }
  return out;
}

BigInt to_big(unsigned __int128 v) {
  BigInt r = static_cast<std::uint64_t>(v >> 64);
  r <<= 64;
  r |= static_cast<std::uint64_t>(v);
  return r;
}
BigInt to_big(const Wide& v) { return BigInt(v); }

template <class Count>
BigInt walk_count_impl(const GroupTable& table, const std::vector<std::uint32_t>& support,
                       const std::vector<std::uint64_t>& weights, std::uint32_t m, bool parallel) {
  const std::uint64_t n = table.order();
  PermutationSet right;
  right.size = n;
  right.count = static_cast<std::uint32_t>(support.size());
  right.data.resize(n * right.count);
  for (std::uint32_t f = 0; f < right.count; ++f) {
    const PglElement dinv = inv(table.element(support[f]));
    for (std::uint32_t y = 0; y < n; ++y) {
      right.data[std::size_t{f} * n + y] = table.index_of(mul(table.element(y), dinv));
    }
  }
  const std::uint32_t a = (m + 1) / 2;
  const std::uint32_t b = m / 2;
  std::vector<Count> cur(n, Count(0)), next(n, Count(0)), saved;
  cur[table.identity_index()] = 1;
  if (b == 0) saved = cur;
  for (std::uint32_t step = 1; step <= a; ++step) {
    if (parallel) {
      kernels::parallel::convolve_counts<Count>(cur, right, weights, next);
    } else {
      kernels::serial::convolve_counts<Count>(cur, right, weights, next);
    }
    std::swap(cur, next);
    if (step == b) saved = cur;
  }
  Count total = 0;
  for (std::uint32_t x = 0; x < n; ++x) total += cur[x] * saved[table.inv_index(x)];
  return to_big(total);
}

BigInt walk_count(const GroupTable& table, std::span<const PglElement> gens, std::uint32_t m, bool parallel) {
  check_gens(table, gens);
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "trace order must be >= 1");
  // D(x) = #{(i, j) : g_i^-1 g_j = x}; c_m = D^{*m}(e).
  std::map<std::uint32_t, std::uint64_t> dist;
  for (const auto& gi : gens) {
    const PglElement gi_inv = inv(gi);
    for (const auto& gj : gens) ++dist[table.index_of(mul(gi_inv, gj))];
  }
  std::vector<std::uint32_t> support;
  std::vector<std::uint64_t> weights;
  for (const auto& [x, w] : dist) {
    support.push_back(x);
    weights.push_back(w);
  }
  const double bits = 2.0 * m * std::log2(static_cast<double>(gens.size())) +
                      std::log2(static_cast<double>(table.order())) + 4.0;
  try {
    if (bits < 126.0) return walk_count_impl<unsigned __int128>(table, support, weights, m, parallel);
    return walk_count_impl<Wide>(table, support, weights, m, parallel);
  } catch (const std::overflow_error&) {
    throw Error(ErrorKind::BudgetExceeded, "walk count exceeds 1024-bit counters; lower the trace order");
  }
}

/// Smallest double u (found by upward bumping) with u^{2m} * den >= num, checked exactly.
double rounded_up_root(const BigInt& num, const BigInt& den, std::uint32_t m) {
  const auto ratio = static_cast<long double>(bmp::cpp_bin_float_quad(num) / bmp::cpp_bin_float_quad(den));
  double u = static_cast<double>(std::pow(ratio, 1.0L / (2.0L * m)));
  const std::uint32_t power = 2 * m;
  for (int attempt = 0; attempt < 200; ++attempt) {
    int e = 0;
    const double f = std::frexp(u, &e);
    const auto mant = static_cast<std::int64_t>(std::ldexp(f, 53));
    const int exp2 = e - 53;
    BigInt lhs = bmp::pow(BigInt(mant), power) * den;
    BigInt rhs = num;
    if (exp2 < 0) {
      rhs <<= static_cast<unsigned>(-exp2) * power;
    } else {
      lhs <<= static_cast<unsigned>(exp2) * power;
    }
    if (lhs >= rhs) return u;
    u = std::nextafter(u * (1.0 + 1e-15), 2.0 * u + 1.0);
  }
  throw Error(ErrorKind::InvalidArgument, "could not round trace bound upward");
}

}  // namespace

AveragingOperator::AveragingOperator(const GroupTable& table, std::span<const PglElement> gens) {
  check_gens(table, gens);
  push_ = left_perms(table, gens);
  std::vector<PglElement> inverses;
  inverses.reserve(gens.size());
  for (const auto& g : gens) inverses.push_back(inv(g));
  pull_ = left_perms(table, inverses);
  block_ = table.order();
}

AveragingOperator::AveragingOperator(PermutationSet push, PermutationSet pull, std::uint64_t block)
    : push_(std::move(push)), pull_(std::move(pull)), block_(block) {
  if (push_.size != pull_.size || push_.count != pull_.count || push_.count == 0 || block_ == 0 ||
      push_.size % block_ != 0) {
    throw Error(ErrorKind::InvalidArgument, "inconsistent permutation data");
  }
}

void AveragingOperator::apply(std::span<const double> v, std::span<double> out, bool parallel) const {
  if (parallel) {
    kernels::parallel::average_gather(pull_, v, out);
  } else {
    kernels::serial::average_gather(pull_, v, out);
  }
}

void AveragingOperator::apply_adjoint(std::span<const double> v, std::span<double> out, bool parallel) const {
  if (parallel) {
    kernels::parallel::average_gather(push_, v, out);
  } else {
    kernels::serial::average_gather(push_, v, out);
  }
}

NormEstimate estimate_norm_power(const AveragingOperator& op, const PowerOptions& opts, Stream& rng) {
  std::vector<double> start(op.dimension());
  for (auto& x : start) x = 2.0 * rng.uniform01() - 1.0;
  return estimate_norm_power(op, opts, start);
}

NormEstimate estimate_norm_power(const AveragingOperator& op, const PowerOptions& opts, std::span<const double> start) {
  const std::size_t n = op.dimension();
  if (start.size() != n) throw Error(ErrorKind::InvalidArgument, "start vector has the wrong dimension");
  const bool par = opts.parallel;
  auto dot = [par](std::span<const double> x, std::span<const double> y) {
    return par ? kernels::parallel::dot(x, y) : kernels::serial::dot(x, y);
  };
  auto project = [&](std::span<double> x) {
    if (par) {
      kernels::parallel::subtract_block_means(x, op.block());
    } else {
      kernels::serial::subtract_block_means(x, op.block());
    }
  };
  NormEstimate est;
  if (op.block() == 1) {  // the complement is {0}
    est.converged = true;
    return est;
  }
  std::vector<double> v(start.begin(), start.end()), u(n), w(n);
  project(v);
  double nv = std::sqrt(dot(v, v));
  if (!(nv > 0.0)) throw Error(ErrorKind::InvalidArgument, "start vector is block-constant");
  for (auto& x : v) x /= nv;
  double best_rho = 0.0;
  for (std::uint32_t it = 1; it <= opts.max_iter; ++it) {
    est.iterations = it;
    op.apply(v, u, par);
    const double rho = dot(u, u);
    op.apply_adjoint(u, w, par);
    project(w);
    best_rho = std::max(best_rho, rho);
    est.lower_bound = std::sqrt(best_rho);
    const double nw = std::sqrt(dot(w, w));
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = w[i] - rho * v[i];
      r2 += d * d;
    }
    est.residual = std::sqrt(r2);
    if (opts.stop_above && est.lower_bound > *opts.stop_above) return est;
    if (nw < 1e-150 || rho < 1e-28 || est.residual <= opts.tol * rho) {
      est.converged = true;
      return est;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  return est;
}

std::string trace_walk_count(const GroupTable& table, std::span<const PglElement> gens, std::uint32_t m,
                             bool parallel) {
  return walk_count(table, gens, m, parallel).str();
}

TraceBound trace_bound_from_count(std::uint64_t order, std::uint64_t k, std::uint32_t m, const std::string& c_m) {
  BigInt count(c_m);
  const BigInt den = bmp::pow(BigInt(k), 2 * m);
  const BigInt num = BigInt(order) * count - den;
  if (num < 0) throw Error(ErrorKind::Format, "walk count below the trivial-representation contribution");
  TraceBound tb;
  tb.m = m;
  tb.c_m = count.str();
  tb.numerator = num.str();
  tb.denominator = den.str();
  if (num == 0) {
    tb.degenerate = true;
    tb.upper = 0.0;
  } else {
    tb.upper = rounded_up_root(num, den, m);
  }
  return tb;
}

TraceBound certify_norm_trace(const GroupTable& table, std::span<const PglElement> gens, std::uint32_t m,
                              bool parallel) {
  const BigInt count = walk_count(table, gens, m, parallel);
  return trace_bound_from_count(table.order(), gens.size(), m, count.str());
}

std::uint32_t default_trace_order(std::uint64_t order, double eps) noexcept {
  if (!(eps > 0.0) || eps >= 1.0) return 6;
  const double denom = 2.0 * std::log(1.0 / eps) - 0.05;
  if (denom <= 0.0) return 6;
  const double m = std::ceil(std::log(static_cast<double>(order)) / denom);
  return static_cast<std::uint32_t>(std::clamp(m, 2.0, 6.0));
}

std::vector<double> dense_singular_values(const AveragingOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.dimension());
  const auto block = static_cast<Eigen::Index>(op.block());
  const auto& pull = op.pull();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  const double w = 1.0 / pull.count;
  for (std::uint32_t f = 0; f < pull.count; ++f) {
    const auto row = pull.row(f);
    for (Eigen::Index x = 0; x < n; ++x) t(x, static_cast<Eigen::Index>(row[static_cast<std::size_t>(x)])) += w;
  }
  // T (I - E) with E the block-mean projector; T commutes with E.
  for (Eigen::Index start = 0; start < n; start += block) {
    const Eigen::VectorXd mean = t.middleCols(start, block).rowwise().sum() / static_cast<double>(block);
    t.middleCols(start, block).colwise() -= mean;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(t);
  const auto& s = svd.singularValues();
  return std::vector<double>(s.data(), s.data() + s.size());
}

double dense_norm(const AveragingOperator& op) {
  const auto s = dense_singular_values(op);
  return s.empty() ? 0.0 : s.front();
}

const char* to_string(GapVerdict v) noexcept {
  switch (v) {
    case GapVerdict::certified: return "certified";
    case GapVerdict::refuted: return "refuted";
    case GapVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

const char* to_string(GapMethod m) noexcept {
  switch (m) {
    case GapMethod::trace: return "trace";
    case GapMethod::dense: return "dense";
    case GapMethod::power_refute: return "power";
    case GapMethod::automatic: return "auto";
  }
  return "auto";
}

GapVerdict gap_verdict_from_string(const std::string& s) {
  if (s == "certified") return GapVerdict::certified;
  if (s == "refuted") return GapVerdict::refuted;
  if (s == "inconclusive") return GapVerdict::inconclusive;
  throw Error(ErrorKind::Format, "unknown gap verdict: " + s);
}

GapMethod gap_method_from_string(const std::string& s) {
  if (s == "trace") return GapMethod::trace;
  if (s == "dense") return GapMethod::dense;
  if (s == "power" || s == "power-refute") return GapMethod::power_refute;
  if (s == "auto") return GapMethod::automatic;
  throw Error(ErrorKind::InvalidArgument, "unknown gap method: " + s);
}

GapCertificate certify_gap(const GroupTable& table, std::span<const PglElement> gens, double eps,
                           const GapOptions& opts, std::uint64_t seed) {
  check_gens(table, gens);
  if (!(eps > 0.0) || eps > 1.0) throw Error(ErrorKind::InvalidArgument, "eps must lie in (0, 1]");
  GapCertificate cert;
  cert.p = table.prime();
  cert.gens.assign(gens.begin(), gens.end());
  cert.eps = eps;
  cert.seed = seed;

  const bool want_power = opts.method == GapMethod::power_refute || opts.method == GapMethod::automatic;
  const bool want_trace = opts.method == GapMethod::trace || opts.method == GapMethod::automatic;
  const bool want_dense = opts.method == GapMethod::dense ||
                          (opts.method == GapMethod::automatic && table.order() <= opts.dense_limit);
  if (opts.method == GapMethod::dense && table.order() > opts.dense_limit) {
    throw Error(ErrorKind::TooLarge, "dense oracle disabled above order " + std::to_string(opts.dense_limit));
  }

  std::optional<AveragingOperator> op;
  if (want_power || want_dense) op.emplace(table, gens);

  if (want_power) {
    PowerOptions po = opts.power;
    po.parallel = opts.parallel;
    po.stop_above = eps + kRefuteMargin;
    Stream rng(seed, "power-iteration", table.prime(), gens.size());
    cert.estimate = estimate_norm_power(*op, po, rng);
    if (cert.estimate.lower_bound > eps + kRefuteMargin) {
      cert.verdict = GapVerdict::refuted;
      cert.method = "power";
      return cert;
    }
    if (opts.method == GapMethod::power_refute) return cert;
  }

  if (want_trace) {
    std::vector<std::uint32_t> orders;
    if (opts.trace_order) {
      orders.push_back(*opts.trace_order);
    } else {
      const std::uint32_t m0 = default_trace_order(table.order(), eps);
      orders.push_back(m0);
      if (opts.method == GapMethod::automatic) {
        for (std::uint32_t m = std::max(12u, 2 * m0); m <= opts.max_trace_order; m *= 2) orders.push_back(m);
      }
    }
    for (std::uint32_t m : orders) {
      TraceBound tb;
      try {
        tb = certify_norm_trace(table, gens, m, opts.parallel);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::BudgetExceeded || m == orders.front()) throw;
        break;
      }
      cert.trace = tb;
      cert.estimate.trace_order = m;
      if (tb.upper <= eps) {
        cert.estimate.certified_upper = tb.upper;
        cert.verdict = GapVerdict::certified;
        cert.method = "trace";
        return cert;
      }
    }
  }

  if (want_dense) {
    const double dn = dense_norm(*op);
    cert.dense_norm = dn;
    if (dn + kDenseMargin <= eps) {
      cert.estimate.certified_upper = dn + kDenseMargin;
      cert.verdict = GapVerdict::certified;
      cert.method = "dense";
    } else if (dn - kDenseMargin > eps) {
      cert.verdict = GapVerdict::refuted;
      cert.method = "dense";
    }
  }
  return cert;
}

GapRecheck recheck_gap(const GapCertificate& cert, std::uint64_t dense_limit, bool parallel) {
  GapRecheck out;
  char buf[128];
  const auto table = table_for(cert.p);
  check_gens(*table, cert.gens);
  if (cert.verdict == GapVerdict::inconclusive) {
    out.ok = !cert.certified_upper();
    out.detail = "inconclusive, nothing claimed";
    return out;
  }
  if (cert.verdict == GapVerdict::certified) {
    if (!cert.certified_upper()) {
      out.detail = "certified without an upper bound";
    } else if (cert.method == "trace" && cert.trace) {
      const TraceBound tb = certify_norm_trace(*table, cert.gens, cert.trace->m, parallel);
      out.ok = tb.c_m == cert.trace->c_m && tb.upper == cert.trace->upper && tb.upper == *cert.certified_upper() &&
               tb.upper <= cert.eps;
      out.detail = "trace m=" + std::to_string(tb.m) + " c_m=" + tb.c_m;
    } else if (cert.method == "dense" && cert.dense_norm) {
      const double dn = dense_norm(AveragingOperator(*table, cert.gens));
      out.ok = std::abs(dn - *cert.dense_norm) <= kDenseMargin && dn + kDenseMargin <= cert.eps;
      std::snprintf(buf, sizeof buf, "dense %.12f", dn);
      out.detail = buf;
    } else {
      out.detail = "unsupported method " + cert.method;
    }
    return out;
  }
  // refuted
  const AveragingOperator op(*table, cert.gens);
  double lower = 0.0;
  if (table->order() <= dense_limit) {
    lower = dense_norm(op) - kDenseMargin;
    std::snprintf(buf, sizeof buf, "dense lower %.12f", lower);
  } else {
    // delta_e has a nonzero component in every isotypic subspace
    std::vector<double> start(op.dimension(), 0.0);
    start[table->identity_index()] = 1.0;
    PowerOptions po;
    po.parallel = parallel;
    po.stop_above = cert.eps + kRefuteMargin;
    lower = estimate_norm_power(op, po, start).lower_bound;
    std::snprintf(buf, sizeof buf, "power lower %.12f", lower);
  }
  out.ok = lower > cert.eps;
  out.detail = buf;
  return out;
}

std::uint64_t closure_size(const GroupTable& table, std::span<const PglElement> gens) {
  check_gens(table, gens);
  std::vector<PglElement> letters;
  for (const auto& g : gens) {
    letters.push_back(g);
    letters.push_back(inv(g));
  }
  std::vector<char> seen(table.order(), 0);
  std::vector<std::uint32_t> queue{table.identity_index()};
  seen[table.identity_index()] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const PglElement& x = table.element(queue[head]);
    for (const auto& l : letters) {
      const std::uint32_t y = table.index_of(mul(l, x));
      if (!seen[y]) {
        seen[y] = 1;
        queue.push_back(y);
      }
    }
  }
  return queue.size();
}

bool check_generation(const GroupTable& table, std::span<const PglElement> gens) {
  return closure_size(table, gens) == table.order();
}

}  // namespace pglfree
