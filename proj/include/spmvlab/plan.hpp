#pragma once

// Benchmark plans: the cross product of matrices, reorderings, modes,
// schedules and thread counts, executed one cell at a time with resume.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "spmvlab/bench.hpp"
#include "spmvlab/csv.hpp"
#include "spmvlab/kernels.hpp"
#include "spmvlab/matcore.hpp"
#include "spmvlab/reorder.hpp"

namespace spmvlab {

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// identity | rcm | random:<seed> | external:<path>
struct ReorderSpec {
  enum class Kind { Identity, Rcm, Random, External };
  Kind kind = Kind::Identity;
  std::uint64_t seed = 0;
  std::filesystem::path file;

  static ReorderSpec parse(std::string_view text) {
    if (text == "identity") return {Kind::Identity, 0, {}};
    if (text == "rcm") return {Kind::Rcm, 0, {}};
    if (text.starts_with("random:")) {
      const auto num = text.substr(7);
      std::uint64_t seed = 0;
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), seed);
      if (ec != std::errc{} || ptr != num.data() + num.size() || num.empty())
        throw PlanError(fmt::format("reorder: bad seed in '{}'", text));
      return {Kind::Random, seed, {}};
    }
    if (text.starts_with("external:") && text.size() > 9)
      return {Kind::External, 0, std::filesystem::path(text.substr(9))};
    throw PlanError(fmt::format("reorder: unknown method '{}'", text));
  }

  /// Name recorded in result files. External orderings are named after the
  /// permutation file's stem.
  std::string label() const {
    switch (kind) {
      case Kind::Identity: return "identity";
      case Kind::Rcm: return "rcm";
      case Kind::Random: return fmt::format("random:{}", seed);
      case Kind::External: return fmt::format("external:{}", file.stem().string());
    }
    return "?";
  }

  Permutation permutation_for(const CsrMatrix& a) const {
    switch (kind) {
      case Kind::Identity: return identity_perm(a.nrows());
      case Kind::Rcm: return rcm_order(a);
      case Kind::Random: return random_perm(a.nrows(), seed);
      case Kind::External: {
        auto p = load_permutation_file(file);
        if (p.size() != a.nrows())
          throw PlanError(fmt::format("permutation '{}' has length {}, matrix has {} rows",
                                      file.string(), p.size(), a.nrows()));
        return p;
      }
    }
    throw PlanError("reorder: unreachable");
  }
};

inline std::string matrix_name(const std::filesystem::path& path) { return path.stem().string(); }

struct RunPlan {
  std::vector<std::filesystem::path> matrices;
  std::vector<ReorderSpec> reorderings{ReorderSpec{}};
  std::vector<Mode> modes{Mode::Ios};
  std::vector<std::string> schedules{"static"};
  std::vector<unsigned> threads{1};
  std::size_t iters = 50;
  std::size_t warmup = 1;
  std::uint64_t seed = 0;
  std::size_t ios_renorm_every = 0;
  std::string machine;
  std::filesystem::path output;

  void validate() const {
    if (matrices.empty()) throw PlanError("plan: no matrices");
    if (reorderings.empty() || modes.empty() || schedules.empty() || threads.empty())
      throw PlanError("plan: empty reorder, mode, schedule or thread list");
    if (iters < 1) throw PlanError("plan: iters must be >= 1");
    if (machine.empty()) throw PlanError("plan: machine name is empty");
    if (output.empty()) throw PlanError("plan: no output path");
    for (const auto& m : matrices)
      if (!std::filesystem::exists(m))
        throw PlanError(fmt::format("plan: matrix '{}' not found", m.string()));
    for (const auto& r : reorderings)
      if (r.kind == ReorderSpec::Kind::External && !std::filesystem::exists(r.file))
        throw PlanError(fmt::format("plan: permutation file '{}' not found", r.file.string()));
    for (const auto& s : schedules)
      for (unsigned t : threads) ScheduleSpec::parse(s, t);
  }

  std::size_t cell_count() const {
    return matrices.size() * reorderings.size() * modes.size() * schedules.size() * threads.size();
  }
};

struct PlanHooks {
  /// Called after each row is committed to disk.
  std::function<void(const BenchCsvRow&)> on_row;
  /// Called for cells that produced no row (e.g. CG breakdown).
  std::function<void(const std::string&)> on_warning;
};

struct PlanStats {
  std::size_t written = 0;
  std::size_t skipped = 0;  // already present in the output
  std::size_t failed = 0;
};

/// Runs every cell of the plan not already present in the output file.
inline PlanStats run_plan(const RunPlan& plan, const PlanHooks& hooks = {}) {
  plan.validate();
  auto done = completed_keys(plan.output);
  PlanStats stats;

  auto key_of = [&](const std::string& matrix, const ReorderSpec& r, Mode mode,
                    const ScheduleSpec& s) -> BenchCsvRow::Key {
    return {plan.machine, matrix, r.label(), mode_name(mode), s.policy_name(), s.effective_chunk(),
            s.threads};
  };
  auto warn = [&](const std::string& msg) {
    if (hooks.on_warning) hooks.on_warning(msg);
  };

  for (const auto& path : plan.matrices) {
    const std::string name = matrix_name(path);
    std::optional<CsrMatrix> original;
    for (const auto& reorder : plan.reorderings) {
      std::optional<CsrMatrix> permuted;
      for (Mode mode : plan.modes)
        for (const auto& sched_text : plan.schedules)
          for (unsigned t : plan.threads) {
            const auto sched = ScheduleSpec::parse(sched_text, t);
            if (done.contains(key_of(name, reorder, mode, sched))) {
              ++stats.skipped;
              continue;
            }
            if (!original) original = load_csr(path);
            if (!permuted) permuted = apply_symmetric_perm(*original, reorder.permutation_for(*original));

            BenchConfig cfg;
            cfg.mode = mode;
            cfg.iters = plan.iters;
            cfg.warmup = plan.warmup;
            cfg.schedule = sched;
            cfg.rng_seed = plan.seed;
            cfg.ios_renorm_every = plan.ios_renorm_every;

            BenchRecord rec;
            if (mode == Mode::Yax) {
              rec = run_yax(*permuted, cfg).record;
            } else if (mode == Mode::Ios) {
              rec = run_ios(*permuted, cfg).record;
            } else {
              auto cg = run_cg(*permuted, cfg);
              if (cg.summary.breakdown) warn(fmt::format("{} / {}: {}", name, reorder.label(),
                                                         cg.summary.diagnostic));
              rec = std::move(cg.record);
            }
            rec.matrix_name = name;
            rec.reorder_name = reorder.label();
            if (rec.durations_ms.size() <= rec.warmup) {
              warn(fmt::format("{} / {} / {} / {} / {}: no measured iterations, cell skipped", name,
                               reorder.label(), mode_name(mode), sched.descriptor(), t));
              ++stats.failed;
              continue;
            }
            if (rec.low_confidence)
              warn(fmt::format("{} / {} / {} / {} / {}: timer resolution above 1% of median", name,
                               reorder.label(), mode_name(mode), sched.descriptor(), t));

            const auto row = make_csv_row(plan.machine, rec);
            append_bench_row(plan.output, row);
            done.insert(row.key());
            ++stats.written;
            if (hooks.on_row) hooks.on_row(row);
          }
    }
  }
  return stats;
}

}  // namespace spmvlab
