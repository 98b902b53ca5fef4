#pragma once

// CSR SpMV kernels and the row-to-thread scheduling policies they run under.
//
// Every policy gives each row to exactly one worker and computes it with the
// same inner loop, so the output is bitwise identical to the sequential
// kernel regardless of policy or thread count.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <omp.h>

#include "spmvlab/matcore.hpp"

namespace spmvlab {

class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Policy { StaticBlock, StaticCyclic, Dynamic, Guided, NnzBalanced };

inline constexpr Policy kAllPolicies[] = {Policy::StaticBlock, Policy::StaticCyclic,
                                          Policy::Dynamic, Policy::Guided, Policy::NnzBalanced};

/// Scheduling policy, chunk size and thread count. `chunk` is ignored by
/// StaticBlock and NnzBalanced.
struct ScheduleSpec {
  Policy policy = Policy::StaticBlock;
  index_t chunk = 0;
  unsigned threads = 1;

  bool uses_chunk() const {
    return policy != Policy::StaticBlock && policy != Policy::NnzBalanced;
  }

  void validate() const {
    if (threads < 1) throw ScheduleError("schedule: threads must be >= 1");
    if (uses_chunk() && chunk < 1) throw ScheduleError("schedule: chunk must be >= 1");
  }

  /// Policy name as used in result files: static, dynamic, guided, nnz.
  /// StaticCyclic shares the "static" name and is told apart by its chunk.
  std::string policy_name() const {
    switch (policy) {
      case Policy::StaticBlock:
      case Policy::StaticCyclic: return "static";
      case Policy::Dynamic: return "dynamic";
      case Policy::Guided: return "guided";
      case Policy::NnzBalanced: return "nnz";
    }
    return "?";
  }

  index_t effective_chunk() const { return uses_chunk() ? chunk : 0; }

  /// "static", "static:16", "dynamic:1", "guided:64", "nnz".
  std::string descriptor() const {
    return uses_chunk() ? fmt::format("{}:{}", policy_name(), chunk) : policy_name();
  }

  /// Inverse of descriptor(); "static:0" is the block schedule.
  static ScheduleSpec parse(std::string_view text, unsigned threads) {
    ScheduleSpec s;
    s.threads = threads;
    std::string_view name = text;
    std::optional<index_t> chunk;
    if (auto colon = text.find(':'); colon != std::string_view::npos) {
      name = text.substr(0, colon);
      auto num = text.substr(colon + 1);
      index_t c = 0;
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), c);
      if (ec != std::errc{} || ptr != num.data() + num.size())
        throw ScheduleError(fmt::format("schedule: bad chunk in '{}'", text));
      chunk = c;
    }
    if (name == "static") {
      s.policy = chunk && *chunk > 0 ? Policy::StaticCyclic : Policy::StaticBlock;
    } else if (name == "dynamic") {
      s.policy = Policy::Dynamic;
    } else if (name == "guided") {
      s.policy = Policy::Guided;
    } else if (name == "nnz") {
      s.policy = Policy::NnzBalanced;
      if (chunk && *chunk != 0) throw ScheduleError("schedule: nnz takes no chunk");
    } else {
      throw ScheduleError(fmt::format("schedule: unknown policy '{}'", name));
    }
    if (s.uses_chunk()) s.chunk = chunk.value_or(1);
    s.validate();
    return s;
  }

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// Contiguous row panels, one per thread: thread t owns rows
/// [panel_start[t], panel_start[t+1]).
class RowPartition {
 public:
  explicit RowPartition(std::vector<index_t> panel_start) : panel_start_(std::move(panel_start)) {
    if (panel_start_.size() < 2) throw ScheduleError("partition: need at least one panel");
    if (panel_start_.front() != 0) throw ScheduleError("partition: panel_start[0] != 0");
    if (!std::is_sorted(panel_start_.begin(), panel_start_.end()))
      throw ScheduleError("partition: panel_start must be nondecreasing");
  }

  unsigned threads() const { return static_cast<unsigned>(panel_start_.size() - 1); }
  index_t nrows() const { return panel_start_.back(); }
  index_t begin(unsigned t) const { return panel_start_[t]; }
  index_t end(unsigned t) const { return panel_start_[t + 1]; }
  std::span<const index_t> panel_start() const { return panel_start_; }

  friend bool operator==(const RowPartition&, const RowPartition&) = default;

 private:
  std::vector<index_t> panel_start_;
};

/// Ceiling split: thread t owns [ceil(m t / T), ceil(m (t+1) / T)).
inline RowPartition static_block_partition(index_t m, unsigned threads) {
  if (threads < 1) throw ScheduleError("partition: threads must be >= 1");
  std::vector<index_t> start(threads + 1);
  for (unsigned t = 0; t <= threads; ++t)
    start[t] = static_cast<index_t>((std::uint64_t{m} * t + threads - 1) / threads);
  return RowPartition(std::move(start));
}

/// Panels with roughly equal nonzero counts. Boundary k is the first row r
/// whose prefix row_ptr[r] reaches k * nnz / threads, so every panel carries
/// at most fair_load + max_row_nnz nonzeros.
inline RowPartition nnz_balanced_partition(const CsrMatrix& a, unsigned threads) {
  if (threads < 1) throw ScheduleError("partition: threads must be >= 1");
  const auto row_ptr = a.row_ptr();
  const std::uint64_t nnz = a.nnz();
  std::vector<index_t> start(threads + 1, 0);
  start[threads] = a.nrows();
  for (unsigned k = 1; k < threads; ++k) {
    // row_ptr[r] >= k * nnz / threads, compared exactly in integers.
    auto it = std::partition_point(row_ptr.begin(), row_ptr.end(), [&](index_t prefix) {
      return std::uint64_t{prefix} * threads < k * nnz;
    });
    start[k] = static_cast<index_t>(std::min<std::ptrdiff_t>(it - row_ptr.begin(), a.nrows()));
    start[k] = std::max(start[k], start[k - 1]);
  }
  return RowPartition(std::move(start));
}

// ---------------------------------------------------------------------------
// Kernels

namespace detail {
inline void check_dims(const CsrMatrix& a, std::size_t nx, std::size_t ny) {
  if (nx != a.ncols())
    throw MatrixError(fmt::format("spmv: x has length {}, expected {}", nx, a.ncols()));
  if (ny != a.nrows())
    throw MatrixError(fmt::format("spmv: y has length {}, expected {}", ny, a.nrows()));
}

inline void spmv_rows(const index_t* __restrict row_ptr, const index_t* __restrict cols,
                      const double* __restrict vals, const double* __restrict x,
                      double* __restrict y, index_t first, index_t last) {
  for (index_t r = first; r < last; ++r) {
    double sum = 0.0;
    for (index_t idx = row_ptr[r]; idx < row_ptr[r + 1]; ++idx) sum += vals[idx] * x[cols[idx]];
    y[r] = sum;
  }
}
}  // namespace detail

inline void spmv_sequential(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  detail::check_dims(a, x.size(), y.size());
  detail::spmv_rows(a.row_ptr().data(), a.cols().data(), a.values().data(), x.data(), y.data(),
                    0, a.nrows());
}

inline std::vector<double> spmv_sequential(const CsrMatrix& a, std::span<const double> x) {
  std::vector<double> y(a.nrows());
  spmv_sequential(a, x, y);
  return y;
}

/// Parallel SpMV bound to one matrix and schedule. Row panels for the
/// partition-based policies are computed once at construction, outside any
/// timed region. The matrix must outlive the kernel.
class ParallelSpmv {
 public:
  ParallelSpmv(const CsrMatrix& a, ScheduleSpec schedule) : a_(&a), schedule_(schedule) {
    schedule_.validate();
    if (schedule_.policy == Policy::StaticBlock)
      partition_ = static_block_partition(a.nrows(), schedule_.threads);
    else if (schedule_.policy == Policy::NnzBalanced)
      partition_ = nnz_balanced_partition(a, schedule_.threads);
  }

  ParallelSpmv(const CsrMatrix& a, ScheduleSpec schedule, RowPartition partition)
      : a_(&a), schedule_(schedule), partition_(std::move(partition)) {
    schedule_.validate();
    if (schedule_.policy != Policy::StaticBlock && schedule_.policy != Policy::NnzBalanced)
      throw ScheduleError("explicit partitions apply only to static and nnz schedules");
    if (partition_->threads() != schedule_.threads || partition_->nrows() != a.nrows())
      throw ScheduleError("partition does not match matrix rows or thread count");
  }

  const ScheduleSpec& schedule() const { return schedule_; }
  const std::optional<RowPartition>& partition() const { return partition_; }

  /// Runs `body(first, last)` over disjoint row ranges covering [0, nrows)
  /// according to the schedule, inside one fork-join region. `body` must be
  /// safe to call concurrently for disjoint ranges.
  template <class Body>
  void for_each_chunk(Body&& body) const {
    const index_t m = a_->nrows();
    const unsigned workers = schedule_.threads;
    if (workers == 1) {
      body(index_t{0}, m);
      return;
    }

    // Shared cursor for Dynamic and Guided.
    std::atomic<std::uint64_t> cursor{0};
    const std::uint64_t chunk = schedule_.chunk;
    const auto clip = [m](std::uint64_t v) { return static_cast<index_t>(std::min<std::uint64_t>(v, m)); };

#pragma omp parallel num_threads(workers)
    {
      // If the runtime grants fewer threads than requested, the logical
      // workers are folded onto the ones that exist.
      const auto tid = static_cast<unsigned>(omp_get_thread_num());
      const auto team = static_cast<unsigned>(omp_get_num_threads());
      switch (schedule_.policy) {
        case Policy::StaticBlock:
        case Policy::NnzBalanced:
          for (unsigned w = tid; w < workers; w += team)
            if (partition_->begin(w) < partition_->end(w))
              body(partition_->begin(w), partition_->end(w));
          break;
        case Policy::StaticCyclic:
          for (unsigned w = tid; w < workers; w += team)
            for (std::uint64_t first = std::uint64_t{w} * chunk; first < m;
                 first += chunk * workers)
              body(static_cast<index_t>(first), clip(first + chunk));
          break;
        case Policy::Dynamic:
          for (;;) {
            const std::uint64_t first = cursor.fetch_add(chunk, std::memory_order_relaxed);
            if (first >= m) break;
            body(static_cast<index_t>(first), clip(first + chunk));
          }
          break;
        case Policy::Guided:
          for (;;) {
            std::uint64_t first = cursor.load(std::memory_order_relaxed);
            std::uint64_t size = 0;
            do {
              if (first >= m) break;
              const std::uint64_t remaining = m - first;
              size = std::min(remaining, std::max((remaining + workers - 1) / workers, chunk));
            } while (!cursor.compare_exchange_weak(first, first + size,
                                                   std::memory_order_relaxed));
            if (first >= m) break;
            body(static_cast<index_t>(first), static_cast<index_t>(first + size));
          }
          break;
      }
    }
  }

  void operator()(std::span<const double> x, std::span<double> y) const {
    detail::check_dims(*a_, x.size(), y.size());
    const index_t* row_ptr = a_->row_ptr().data();
    const index_t* cols = a_->cols().data();
    const double* vals = a_->values().data();
    const double* xp = x.data();
    double* yp = y.data();
    for_each_chunk([=](index_t first, index_t last) {
      detail::spmv_rows(row_ptr, cols, vals, xp, yp, first, last);
    });
  }

 private:
  const CsrMatrix* a_;
  ScheduleSpec schedule_;
  std::optional<RowPartition> partition_;
};

inline std::vector<double> spmv_parallel(const CsrMatrix& a, std::span<const double> x,
                                         const ScheduleSpec& schedule) {
  std::vector<double> y(a.nrows());
  ParallelSpmv(a, schedule)(x, y);
  return y;
}

/// Row ranges handed out by the Guided policy when chunks are dispensed in
/// sequence: size = max(ceil(remaining / T), chunk), clipped to what is left.
inline std::vector<std::pair<index_t, index_t>> guided_chunks(index_t m, unsigned threads,
                                                               index_t chunk) {
  std::vector<std::pair<index_t, index_t>> out;
  std::uint64_t first = 0;
  while (first < m) {
    const std::uint64_t remaining = m - first;
    const std::uint64_t size =
        std::min<std::uint64_t>(remaining, std::max<std::uint64_t>((remaining + threads - 1) / threads, chunk));
    out.emplace_back(static_cast<index_t>(first), static_cast<index_t>(first + size));
    first += size;
  }
  return out;
}

}  // namespace spmvlab
