#pragma once

// Metrics over benchmark results: performance profiles, win rates, speedup
// histograms, cross-machine consistency, nnz load imbalance and empirical
// CDFs.
//
// A "problem" is one (machine, matrix, mode, schedule, threads) cell; the
// reordering methods are compared within a problem. Speedup is always
// gflops(method) / gflops(baseline) for the same problem.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "spmvlab/kernels.hpp"
#include "spmvlab/matcore.hpp"

namespace spmvlab {

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResultRow {
  std::string machine;
  std::string matrix;
  std::string method;
  std::string mode;
  std::string schedule;
  unsigned threads = 1;
  double gflops = 0;
};

struct ProblemKey {
  std::string machine;
  std::string matrix;
  std::string mode;
  std::string schedule;
  unsigned threads = 1;

  friend auto operator<=>(const ProblemKey&, const ProblemKey&) = default;
  friend bool operator==(const ProblemKey&, const ProblemKey&) = default;
};

inline ProblemKey problem_of(const ResultRow& r) {
  return {r.machine, r.matrix, r.mode, r.schedule, r.threads};
}

/// Results keyed by (problem, method). Each key appears once and every
/// gflops value is positive.
class ResultTable {
 public:
  void add(ResultRow row) {
    if (!(row.gflops > 0) || !std::isfinite(row.gflops))
      throw AnalysisError(fmt::format("result for {}/{} has non-positive gflops", row.matrix,
                                      row.method));
    auto& cell = cells_[problem_of(row)];
    if (!cell.emplace(row.method, row.gflops).second)
      throw AnalysisError(fmt::format("duplicate result ({}, {}, {}, {}, {}, {})", row.machine,
                                      row.matrix, row.method, row.mode, row.schedule,
                                      row.threads));
    rows_.push_back(std::move(row));
  }

  const std::vector<ResultRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  /// method -> gflops for every problem.
  const std::map<ProblemKey, std::map<std::string, double>>& cells() const { return cells_; }

  std::optional<double> find(const ProblemKey& k, const std::string& method) const {
    auto it = cells_.find(k);
    if (it == cells_.end()) return std::nullopt;
    auto jt = it->second.find(method);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
  }

  template <class Pred>
  ResultTable filter(Pred&& keep) const {
    ResultTable out;
    for (const auto& r : rows_)
      if (keep(r)) out.add(r);
    return out;
  }

  std::vector<std::string> methods() const { return distinct(&ResultRow::method); }
  std::vector<std::string> machines() const { return distinct(&ResultRow::machine); }
  std::vector<std::string> matrices() const { return distinct(&ResultRow::matrix); }

 private:
  std::vector<std::string> distinct(std::string ResultRow::*field) const {
    std::set<std::string> s;
    for (const auto& r : rows_) s.insert(r.*field);
    return {s.begin(), s.end()};
  }

  std::vector<ResultRow> rows_;
  std::map<ProblemKey, std::map<std::string, double>> cells_;
};

// ---------------------------------------------------------------------------
// Performance profiles

struct ProfilePoint {
  double tau = 1;
  double fraction = 0;
};

struct ProfileCurve {
  std::string method;
  std::vector<ProfilePoint> points;
};

struct ProfileResult {
  std::vector<ProfileCurve> curves;
  std::size_t problems = 0;  // problems where every method has a result
  std::size_t excluded = 0;  // problems missing at least one method
};

namespace detail {
/// Per-problem ratio best / gflops(method) for problems that have every method.
inline std::vector<std::vector<double>> profile_ratios(const ResultTable& t,
                                                       std::span<const std::string> methods,
                                                       std::size_t& excluded) {
  std::vector<std::vector<double>> ratios(methods.size());
  excluded = 0;
  for (const auto& [key, by_method] : t.cells()) {
    std::vector<double> g;
    for (const auto& m : methods) {
      auto it = by_method.find(m);
      if (it == by_method.end()) break;
      g.push_back(it->second);
    }
    if (g.size() != methods.size()) {
      ++excluded;
      continue;
    }
    const double best = *std::max_element(g.begin(), g.end());
    for (std::size_t i = 0; i < g.size(); ++i) ratios[i].push_back(best / g[i]);
  }
  return ratios;
}
}  // namespace detail

/// Fraction of problems on which each method is within a factor tau of the
/// best method for that problem. Ties count for every tied method.
inline ProfileResult perf_profile(const ResultTable& t, std::span<const std::string> methods,
                                  std::span<const double> taus) {
  if (methods.empty()) throw AnalysisError("perf_profile: no methods");
  ProfileResult out;
  const auto ratios = detail::profile_ratios(t, methods, out.excluded);
  out.problems = ratios.front().size();
  for (std::size_t i = 0; i < methods.size(); ++i) {
    ProfileCurve curve{methods[i], {}};
    std::vector<double> sorted = ratios[i];
    std::sort(sorted.begin(), sorted.end());
    for (double tau : taus) {
      const auto within = std::upper_bound(sorted.begin(), sorted.end(), tau) - sorted.begin();
      const double frac = out.problems ? static_cast<double>(within) / out.problems : 0.0;
      curve.points.push_back({tau, frac});
    }
    out.curves.push_back(std::move(curve));
  }
  return out;
}

/// `n` evenly spaced taus from 1 to the largest observed ratio (inclusive).
inline std::vector<double> profile_taus(const ResultTable& t, std::span<const std::string> methods,
                                        std::size_t n) {
  std::size_t excluded = 0;
  double hi = 1.0;
  for (const auto& r : detail::profile_ratios(t, methods, excluded))
    for (double v : r) hi = std::max(hi, v);
  std::vector<double> taus;
  if (n < 2) return {hi};
  for (std::size_t i = 0; i < n; ++i)
    taus.push_back(i + 1 == n ? hi : 1.0 + (hi - 1.0) * static_cast<double>(i) / (n - 1));
  return taus;
}

// ---------------------------------------------------------------------------
// Pairwise comparisons

/// gflops pairs (a, b) for every problem where both methods have a result.
inline std::vector<std::pair<double, double>> aligned(const ResultTable& t, const std::string& a,
                                                      const std::string& b) {
  std::vector<std::pair<double, double>> out;
  for (const auto& [key, by_method] : t.cells()) {
    auto ia = by_method.find(a), ib = by_method.find(b);
    if (ia != by_method.end() && ib != by_method.end()) out.emplace_back(ia->second, ib->second);
  }
  return out;
}

/// Share of common problems where `a` is strictly faster than `b`.
inline double win_rate(const ResultTable& t, const std::string& a, const std::string& b) {
  const auto pairs = aligned(t, a, b);
  if (pairs.empty())
    throw AnalysisError(fmt::format("win_rate: no common problems for '{}' and '{}'", a, b));
  const auto wins = std::count_if(pairs.begin(), pairs.end(),
                                  [](const auto& p) { return p.first > p.second; });
  return static_cast<double>(wins) / static_cast<double>(pairs.size());
}

/// rates[i][j] = win_rate(methods[i], methods[j]).
inline std::vector<std::vector<double>> win_rate_matrix(const ResultTable& t,
                                                        std::span<const std::string> methods) {
  std::vector<std::vector<double>> rates(methods.size(), std::vector<double>(methods.size(), 0));
  for (std::size_t i = 0; i < methods.size(); ++i)
    for (std::size_t j = 0; j < methods.size(); ++j) rates[i][j] = win_rate(t, methods[i], methods[j]);
  return rates;
}

/// As win_rate_matrix, with -1 for pairs that share no problem.
inline std::vector<std::vector<double>> win_rate_matrix_lenient(
    const ResultTable& t, std::span<const std::string> methods) {
  std::vector<std::vector<double>> rates(methods.size(), std::vector<double>(methods.size(), -1));
  for (std::size_t i = 0; i < methods.size(); ++i)
    for (std::size_t j = 0; j < methods.size(); ++j)
      if (!aligned(t, methods[i], methods[j]).empty()) rates[i][j] = win_rate(t, methods[i], methods[j]);
  return rates;
}

inline std::vector<double> speedups(const ResultTable& t, const std::string& method,
                                    const std::string& baseline) {
  std::vector<double> out;
  for (auto [g, base] : aligned(t, method, baseline)) out.push_back(g / base);
  return out;
}

/// Bins [<1, [1,1.1), [1.1,1.25), [1.25,1.5), [1.5,2), >=2].
struct SpeedupHistogram {
  static constexpr std::array<double, 5> kEdges{1.0, 1.1, 1.25, 1.5, 2.0};
  static constexpr std::array<const char*, 6> kLabels{"<1",      "1-1.1", "1.1-1.25",
                                                      "1.25-1.5", "1.5-2", ">=2"};
  std::array<std::size_t, 6> counts{};

  static std::size_t bin_of(double speedup) {
    return static_cast<std::size_t>(
        std::upper_bound(kEdges.begin(), kEdges.end(), speedup) - kEdges.begin());
  }
  std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
};

inline SpeedupHistogram bin_speedups(std::span<const double> values) {
  SpeedupHistogram h;
  for (double s : values) ++h.counts[SpeedupHistogram::bin_of(s)];
  return h;
}

inline SpeedupHistogram speedup_bins(const ResultTable& t, const std::string& method,
                                     const std::string& baseline) {
  return bin_speedups(speedups(t, method, baseline));
}

// ---------------------------------------------------------------------------
// Cross-machine consistency

/// A matrix under one (mode, schedule, threads) configuration, across machines.
struct ConfigKey {
  std::string matrix;
  std::string mode;
  std::string schedule;
  unsigned threads = 1;

  friend auto operator<=>(const ConfigKey&, const ConfigKey&) = default;
  friend bool operator==(const ConfigKey&, const ConfigKey&) = default;
};

struct ConsistencyReport {
  std::string method;
  double tau = 0;
  std::size_t ccs_size = 0;
  std::size_t is_size = 0;
  std::size_t excluded = 0;               // configs missing a machine's result
  std::optional<double> consistent_pct;   // undefined when the candidate set is empty
  std::vector<ConfigKey> ccs;             // speedup > tau on some machine
  std::vector<ConfigKey> inconsistent;    // ... and speedup < 1 on some machine
};

/// Pools all machines in the table. A config enters the candidate set when
/// its speedup exceeds tau on at least one machine, and the inconsistent set
/// when it is also slowed down (speedup < 1) on at least one machine.
inline ConsistencyReport consistency(const ResultTable& t, const std::string& method,
                                     const std::string& baseline, double tau) {
  const auto machines = t.machines();
  if (machines.size() < 2) throw AnalysisError("consistency: needs results from >= 2 machines");

  std::map<ConfigKey, std::map<std::string, double>> per_config;
  std::set<ConfigKey> configs;
  for (const auto& [key, by_method] : t.cells()) {
    ConfigKey ck{key.matrix, key.mode, key.schedule, key.threads};
    configs.insert(ck);
    auto im = by_method.find(method), ib = by_method.find(baseline);
    if (im != by_method.end() && ib != by_method.end())
      per_config[ck][key.machine] = im->second / ib->second;
  }

  ConsistencyReport rep;
  rep.method = method;
  rep.tau = tau;
  for (const auto& ck : configs) {
    auto it = per_config.find(ck);
    if (it == per_config.end() || it->second.size() != machines.size()) {
      ++rep.excluded;
      continue;
    }
    bool candidate = false, slowed = false;
    for (const auto& [machine, s] : it->second) {
      candidate |= s > tau;
      slowed |= s < 1.0;
    }
    if (!candidate) continue;
    rep.ccs.push_back(ck);
    if (slowed) rep.inconsistent.push_back(ck);
  }
  rep.ccs_size = rep.ccs.size();
  rep.is_size = rep.inconsistent.size();
  if (rep.ccs_size > 0)
    rep.consistent_pct = 1.0 - static_cast<double>(rep.is_size) / static_cast<double>(rep.ccs_size);
  return rep;
}

// ---------------------------------------------------------------------------
// Load imbalance

struct ImbalanceReport {
  std::string matrix;
  std::string method;
  unsigned threads = 1;
  std::uint64_t max_load = 0;
  double fair_load = 0;
  double imbalance = 1;
};

inline std::vector<std::uint64_t> panel_loads(const CsrMatrix& a, const RowPartition& part) {
  if (part.nrows() != a.nrows())
    throw AnalysisError("load_imbalance: partition does not cover the matrix rows");
  const auto row_ptr = a.row_ptr();
  std::vector<std::uint64_t> loads(part.threads());
  for (unsigned t = 0; t < part.threads(); ++t)
    loads[t] = row_ptr[part.end(t)] - row_ptr[part.begin(t)];
  return loads;
}

/// max panel nnz / (total nnz / threads). An empty matrix is balanced (1.0).
inline ImbalanceReport load_imbalance(const CsrMatrix& a, const RowPartition& part,
                                      std::string matrix = {}, std::string method = {}) {
  const auto loads = panel_loads(a, part);
  ImbalanceReport rep{std::move(matrix), std::move(method), part.threads(), 0, 0, 1};
  rep.max_load = *std::max_element(loads.begin(), loads.end());
  rep.fair_load = static_cast<double>(a.nnz()) / part.threads();
  if (a.nnz() > 0) rep.imbalance = static_cast<double>(rep.max_load) / rep.fair_load;
  return rep;
}

// ---------------------------------------------------------------------------
// Empirical distributions

struct CdfPoint {
  double x = 0;
  double at_most = 0;   // fraction of samples <= x
  double at_least = 0;  // fraction of samples >= x
};

/// One point per distinct sample value, ascending.
inline std::vector<CdfPoint> cdf_points(std::span<const double> values) {
  if (values.empty()) throw AnalysisError("cdf_points: no samples");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  std::vector<CdfPoint> out;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    out.push_back({v[i], static_cast<double>(j) / n, static_cast<double>(v.size() - i) / n});
    i = j;
  }
  return out;
}

/// Average ranks (1-based), ties share the mean rank.
inline std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) r[idx[k]] = avg;
    i = j;
  }
  return r;
}

/// Spearman rank correlation (Pearson on average ranks). NaN when either
/// side is constant.
inline double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw AnalysisError("spearman: need two equal-length samples of size >= 2");
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// Ratios measured/real for the YAX and IOS methodologies, where "real" is
/// the CG result of the same (machine, matrix, method, schedule, threads).
struct MethodologyRatios {
  std::vector<double> yax;
  std::vector<double> ios;
};

inline MethodologyRatios methodology_ratios(const ResultTable& t) {
  std::map<std::tuple<std::string, std::string, std::string, std::string, unsigned>,
           std::map<std::string, double>>
      by_cell;
  for (const auto& r : t.rows())
    by_cell[{r.machine, r.matrix, r.method, r.schedule, r.threads}][r.mode] = r.gflops;
  MethodologyRatios out;
  for (const auto& [cell, modes] : by_cell) {
    auto cg = modes.find("cg");
    if (cg == modes.end()) continue;
    if (auto y = modes.find("yax"); y != modes.end()) out.yax.push_back(y->second / cg->second);
    if (auto i = modes.find("ios"); i != modes.end()) out.ios.push_back(i->second / cg->second);
  }
  return out;
}

}  // namespace spmvlab
