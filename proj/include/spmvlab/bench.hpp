#pragma once

// Timed SpMV measurement loops.
//
//   YAX  repeated y = A x with fixed buffers.
//   IOS  the output of each product becomes the next input (buffer swap).
//   CG   conjugate gradient; only the A p product of each iteration is timed.
//
// A record holds warmup + iters durations; summaries drop the warmup prefix.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <omp.h>

#include "spmvlab/kernels.hpp"
#include "spmvlab/matcore.hpp"
#include "spmvlab/random.hpp"

namespace spmvlab {

class BenchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Yax, Ios, Cg };

inline std::string mode_name(Mode m) {
  switch (m) {
    case Mode::Yax: return "yax";
    case Mode::Ios: return "ios";
    case Mode::Cg: return "cg";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "yax") return Mode::Yax;
  if (s == "ios") return Mode::Ios;
  if (s == "cg") return Mode::Cg;
  throw BenchError(fmt::format("unknown mode '{}'", s));
}

struct BenchConfig {
  Mode mode = Mode::Ios;
  std::size_t iters = 50;
  std::size_t warmup = 1;
  ScheduleSpec schedule;
  std::uint64_t rng_seed = 0;
  /// IOS only: rescale x to unit max-norm every K iterations, outside the
  /// timed region. 0 disables (the plain swap loop).
  std::size_t ios_renorm_every = 0;
  /// CG only: stop once ||r|| <= cg_tolerance * ||b||. 0 runs all iterations.
  double cg_tolerance = 0.0;
};

struct BenchRecord {
  std::string matrix_name;
  std::string reorder_name;
  Mode mode = Mode::Ios;
  ScheduleSpec schedule;
  std::size_t warmup = 0;
  std::vector<double> durations_ms;  // warmup + measured iterations
  std::uint64_t nnz = 0;
  index_t nrows = 0;
  std::uint64_t seed = 0;
  bool nonfinite = false;       // a non-finite value appeared in the vectors
  bool low_confidence = false;  // timer resolution > 1% of the median duration

  unsigned threads() const { return schedule.threads; }

  /// 2 nnz flops per product: one multiply and one add per stored nonzero.
  double flops() const { return 2.0 * static_cast<double>(nnz); }

  std::vector<double> gflops() const {
    std::vector<double> out;
    out.reserve(durations_ms.size());
    for (double ms : durations_ms) out.push_back(flops() / (ms * 1e6));
    return out;
  }
};

struct SummaryRow {
  double median_ms = 0;
  double mean_ms = 0;
  double stdev_ms = 0;
  double gflops_median = 0;
  double gflops_mean = 0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw BenchError("median of empty sequence");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

/// Median, mean and sample standard deviation of the post-warmup durations;
/// GFLOPs is taken at the median duration.
inline SummaryRow summarize(const BenchRecord& rec) {
  if (rec.warmup >= rec.durations_ms.size())
    throw BenchError("summarize: every iteration was warmup");
  const std::vector<double> d(rec.durations_ms.begin() + static_cast<std::ptrdiff_t>(rec.warmup),
                              rec.durations_ms.end());
  SummaryRow s;
  s.median_ms = median(d);
  s.mean_ms = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  double ss = 0;
  for (double v : d) ss += (v - s.mean_ms) * (v - s.mean_ms);
  s.stdev_ms = d.size() > 1 ? std::sqrt(ss / static_cast<double>(d.size() - 1)) : 0.0;
  s.gflops_median = rec.flops() / (s.median_ms * 1e6);
  double g = 0;
  for (double v : d) g += rec.flops() / (v * 1e6);
  s.gflops_mean = g / static_cast<double>(d.size());
  return s;
}

// ---------------------------------------------------------------------------
// Parallel vector helpers used by CG. Blocks follow static_block_partition.

/// Dot product with per-block partial sums combined in block order, so the
/// result depends only on the thread count.
inline double dot(std::span<const double> x, std::span<const double> y, unsigned threads = 1) {
  if (x.size() != y.size()) throw BenchError("dot: length mismatch");
  if (threads < 1) throw BenchError("dot: threads must be >= 1");
  const auto part = static_block_partition(static_cast<index_t>(x.size()), threads);
  std::vector<double> partial(threads, 0.0);
#pragma omp parallel for num_threads(threads) schedule(static, 1)
  for (int t = 0; t < static_cast<int>(threads); ++t) {
    double s = 0.0;
    for (index_t i = part.begin(t); i < part.end(t); ++i) s += x[i] * y[i];
    partial[t] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

/// Smallest observable nonzero tick of the monotonic clock, in ms.
inline double timer_resolution_ms() {
  static const double res = [] {
    double best = 1e300;
    for (int i = 0; i < 64; ++i) {
      const auto a = Clock::now();
      auto b = Clock::now();
      while (b == a) b = Clock::now();
      best = std::min(best, elapsed_ms(a, b));
    }
    return best;
  }();
  return res;
}

inline std::vector<double> seeded_uniform(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& e : v) e = uniform01(rng);
  return v;
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

inline BenchRecord make_record(const CsrMatrix& a, const BenchConfig& cfg) {
  if (cfg.iters < 1) throw BenchError("bench: iters must be >= 1");
  cfg.schedule.validate();
  BenchRecord rec;
  rec.mode = cfg.mode;
  rec.schedule = cfg.schedule;
  rec.warmup = cfg.warmup;
  rec.nnz = a.nnz();
  rec.nrows = a.nrows();
  rec.seed = cfg.rng_seed;
  rec.durations_ms.reserve(cfg.iters + cfg.warmup);
  return rec;
}

inline void flag_resolution(BenchRecord& rec) {
  const std::vector<double> d(rec.durations_ms.begin() +
                                  static_cast<std::ptrdiff_t>(std::min(rec.warmup, rec.durations_ms.size())),
                              rec.durations_ms.end());
  if (d.empty()) return;
  rec.low_confidence = timer_resolution_ms() > 0.01 * median(d);
}

/// Durations are recorded strictly positive; a product faster than one
/// clock tick is charged one tick and the record is flagged.
inline double positive_duration(double ms) {
  return ms > 0 ? ms : timer_resolution_ms();
}

}  // namespace detail

/// Buffers as the loop leaves them. YAX: x is the fixed input and y the last
/// product. IOS: x is what the next product would read (the latest output)
/// and y the previous input.
struct VectorRun {
  BenchRecord record;
  std::vector<double> x;
  std::vector<double> y;
};

/// YAX loop: x filled once, every iteration writes the same y.
inline VectorRun run_yax(const CsrMatrix& a, const BenchConfig& cfg) {
  if (cfg.mode != Mode::Yax) throw BenchError("run_yax: config mode is not yax");
  VectorRun run{detail::make_record(a, cfg), detail::seeded_uniform(a.ncols(), cfg.rng_seed),
                std::vector<double>(a.nrows(), 0.0)};
  const ParallelSpmv spmv(a, cfg.schedule);
  for (std::size_t i = 0; i < cfg.warmup + cfg.iters; ++i) {
    const auto t0 = detail::Clock::now();
    spmv(run.x, run.y);
    const auto t1 = detail::Clock::now();
    run.record.durations_ms.push_back(detail::positive_duration(detail::elapsed_ms(t0, t1)));
  }
  run.record.nonfinite = !detail::all_finite(run.y);
  detail::flag_resolution(run.record);
  return run;
}

/// IOS loop: after each timed product the input and output buffers trade
/// places (the vectors are swapped, never copied). Optional renormalization
/// happens outside the timed region.
inline VectorRun run_ios(const CsrMatrix& a, const BenchConfig& cfg,
                         std::span<const double> x0 = {}) {
  if (cfg.mode != Mode::Ios) throw BenchError("run_ios: config mode is not ios");
  if (!a.square()) throw BenchError("run_ios: matrix must be square");
  VectorRun run{detail::make_record(a, cfg), {}, std::vector<double>(a.nrows(), 0.0)};
  if (x0.empty()) {
    run.x = detail::seeded_uniform(a.ncols(), cfg.rng_seed);
  } else {
    if (x0.size() != a.ncols()) throw BenchError("run_ios: x0 length mismatch");
    run.x.assign(x0.begin(), x0.end());
  }
  const ParallelSpmv spmv(a, cfg.schedule);
  bool nonfinite = false;
  for (std::size_t i = 0; i < cfg.warmup + cfg.iters; ++i) {
    const auto t0 = detail::Clock::now();
    spmv(run.x, run.y);
    const auto t1 = detail::Clock::now();
    run.record.durations_ms.push_back(detail::positive_duration(detail::elapsed_ms(t0, t1)));
    std::swap(run.x, run.y);

    if (cfg.ios_renorm_every > 0 && (i + 1) % cfg.ios_renorm_every == 0) {
      double peak = 0;
      for (double v : run.x) {
        if (!std::isfinite(v)) nonfinite = true;
        peak = std::max(peak, std::abs(v));
      }
      if (peak > 0 && std::isfinite(peak))
        for (double& v : run.x) v /= peak;
    }
  }
  run.record.nonfinite = nonfinite || !detail::all_finite(run.y) || !detail::all_finite(run.x);
  detail::flag_resolution(run.record);
  return run;
}

struct CgSummary {
  std::size_t iterations = 0;
  double final_residual = 0;  // ||r|| / ||b|| from the recurrence
  bool converged = false;
  bool breakdown = false;  // p^T A p <= 0: matrix is not positive definite
  std::string diagnostic;
  std::vector<double> residual_history;  // relative residual after each iteration, [0] = initial
};

struct CgRun {
  BenchRecord record;
  CgSummary summary;
  std::vector<double> solution;
};

/// Conjugate gradient from x0 = 0 (r0 = b, p0 = r0). Each iteration times the
/// A p product only; the vector updates run in parallel regions with the
/// schedule's thread count. Runs warmup + iters iterations at most.
inline CgRun run_cg(const CsrMatrix& a, const BenchConfig& cfg, std::span<const double> b = {}) {
  if (cfg.mode != Mode::Cg) throw BenchError("run_cg: config mode is not cg");
  if (!a.square()) throw BenchError("run_cg: matrix must be square");
  const index_t m = a.nrows();
  const unsigned threads = cfg.schedule.threads;
  const int mi = static_cast<int>(m);

  std::vector<double> rhs;
  if (b.empty()) {
    // b = A 1 so the exact solution is the all-ones vector.
    rhs = spmv_sequential(a, std::vector<double>(m, 1.0));
  } else {
    if (b.size() != m) throw BenchError("run_cg: b length mismatch");
    rhs.assign(b.begin(), b.end());
  }

  CgRun run{detail::make_record(a, cfg), {}, std::vector<double>(m, 0.0)};
  std::vector<double>& x = run.solution;
  std::vector<double> r = rhs, p = rhs, ap(m, 0.0);
  const ParallelSpmv spmv(a, cfg.schedule);

  const double b_norm = std::sqrt(dot(rhs, rhs, threads));
  const double scale = b_norm > 0 ? b_norm : 1.0;
  double rs_old = dot(r, r, threads);
  auto& summary = run.summary;
  summary.residual_history.push_back(std::sqrt(rs_old) / scale);
  if (rs_old == 0.0) {
    summary.converged = true;
    return run;
  }

  for (std::size_t iter = 0; iter < cfg.warmup + cfg.iters; ++iter) {
    const auto t0 = detail::Clock::now();
    spmv(p, ap);
    const auto t1 = detail::Clock::now();
    run.record.durations_ms.push_back(detail::positive_duration(detail::elapsed_ms(t0, t1)));

    const double pap = dot(p, ap, threads);
    if (!(pap > 0.0)) {
      summary.breakdown = true;
      summary.diagnostic = fmt::format(
          "p^T A p = {} at iteration {}: matrix is not positive definite", pap, iter);
      break;
    }
    const double alpha = rs_old / pap;

#pragma omp parallel for num_threads(threads) schedule(static)
    for (int i = 0; i < mi; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }

    const double rs_new = dot(r, r, threads);
    const double beta = rs_new / rs_old;

#pragma omp parallel for num_threads(threads) schedule(static)
    for (int i = 0; i < mi; ++i) p[i] = r[i] + beta * p[i];

    rs_old = rs_new;
    summary.iterations = iter + 1;
    summary.residual_history.push_back(std::sqrt(rs_new) / scale);
    if (rs_new == 0.0 || std::sqrt(rs_new) <= cfg.cg_tolerance * scale) {
      summary.converged = true;
      break;
    }
  }
  summary.final_residual = summary.residual_history.back();
  run.record.nonfinite = !detail::all_finite(x);
  if (run.record.durations_ms.size() > run.record.warmup) detail::flag_resolution(run.record);
  return run;
}

}  // namespace spmvlab
