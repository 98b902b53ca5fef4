#pragma once

// Writes the analysis outputs for a result table: long-format CSVs plus SVG
// charts. Everything is sorted and formatted deterministically.

#include <cctype>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "spmvlab/analysis.hpp"
#include "spmvlab/csv.hpp"
#include "spmvlab/kernels.hpp"
#include "spmvlab/matcore.hpp"
#include "spmvlab/svg.hpp"

namespace spmvlab {

struct ReportOptions {
  std::filesystem::path out_dir;
  std::string baseline = "identity";
  std::vector<double> consistency_taus{1.1, 1.25, 1.5, 2.0};
  std::size_t profile_points = 101;
  bool svg = true;
};

struct ReportSummary {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

namespace detail {

/// (machine, mode, schedule, threads): one chart per slice.
using Slice = std::tuple<std::string, std::string, std::string, unsigned>;

inline std::string slug(std::string_view s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return out;
}

inline std::string slice_slug(const Slice& s) {
  return slug(fmt::format("{}_{}_{}_t{}", std::get<0>(s), std::get<1>(s), std::get<2>(s), std::get<3>(s)));
}

inline std::string num(double v) { return fmt::format("{}", v); }

class ReportWriter {
 public:
  ReportWriter(const std::filesystem::path& dir, ReportSummary& summary) : dir_(dir), summary_(summary) {
    std::filesystem::create_directories(dir_);
  }
  void write(const std::string& name, const std::string& content) {
    write_file_atomic(dir_ / name, content);
    summary_.files.push_back(name);
  }

 private:
  std::filesystem::path dir_;
  ReportSummary& summary_;
};

}  // namespace detail

/// Profiles, win rates, speedup bins and speedup CDFs per (machine, mode,
/// schedule, threads) slice; consistency per (mode, schedule, threads)
/// across machines; YAX/IOS vs CG ratio distributions.
inline ReportSummary write_report(const ResultTable& table, const ReportOptions& opt) {
  ReportSummary summary;
  detail::ReportWriter out(opt.out_dir, summary);

  std::map<detail::Slice, ResultTable> slices;
  for (const auto& r : table.rows()) slices[{r.machine, r.mode, r.schedule, r.threads}].add(r);

  std::string profiles = "machine,mode,schedule,threads,method,tau,fraction\n";
  std::string winrates = "machine,mode,schedule,threads,method_a,method_b,win_rate\n";
  std::string bins = "machine,mode,schedule,threads,method,baseline,bin,count\n";
  std::string cdfs = "machine,mode,schedule,threads,method,speedup,fraction_at_least\n";

  for (const auto& [slice, t] : slices) {
    const auto& [machine, mode, schedule, threads] = slice;
    const auto prefix = csv_line({machine, mode, schedule, fmt::format("{}", threads)});
    const std::string head = prefix.substr(0, prefix.size() - 1);
    const auto methods = t.methods();
    const auto slug = detail::slice_slug(slice);
    const std::string label = fmt::format("{} {} {} T={}", machine, mode, schedule, threads);

    // Performance profile.
    const auto taus = profile_taus(t, methods, opt.profile_points);
    const auto prof = perf_profile(t, methods, taus);
    if (prof.excluded > 0)
      summary.warnings.push_back(
          fmt::format("{}: {} matrices lack a result for some method and were excluded from the profile",
                      label, prof.excluded));
    std::vector<svg::Series> prof_series;
    for (const auto& curve : prof.curves) {
      svg::Series s{curve.method, {}};
      for (const auto& p : curve.points) {
        profiles += fmt::format("{},{},{},{}\n", head, csv_escape(curve.method), detail::num(p.tau),
                                detail::num(p.fraction));
        s.points.emplace_back(p.tau, p.fraction);
      }
      prof_series.push_back(std::move(s));
    }
    if (opt.svg && prof.problems > 0)
      out.write("profile_" + slug + ".svg",
                svg::line_chart("Performance profile: " + label, "tau", "fraction of matrices",
                                prof_series, /*step=*/true));

    // Pairwise win rates.
    const auto rates = win_rate_matrix_lenient(t, methods);
    for (std::size_t i = 0; i < methods.size(); ++i)
      for (std::size_t j = 0; j < methods.size(); ++j)
        if (rates[i][j] >= 0)
          winrates += fmt::format("{},{},{},{}\n", head, csv_escape(methods[i]), csv_escape(methods[j]),
                                  detail::num(rates[i][j]));
    if (opt.svg && methods.size() > 1)
      out.write("winrate_" + slug + ".svg",
                svg::heatmap("Win rate (row beats column): " + label, methods, methods, rates));

    // Speedup bins and reverse CDF against the baseline.
    std::vector<std::string> bar_methods;
    std::vector<std::vector<double>> bar_values;
    std::vector<svg::Series> cdf_series;
    for (const auto& m : methods) {
      if (m == opt.baseline) continue;
      const auto sp = speedups(t, m, opt.baseline);
      if (sp.empty()) continue;
      const auto h = bin_speedups(sp);
      std::vector<double> row;
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        bins += fmt::format("{},{},{},{},{}\n", head, csv_escape(m), csv_escape(opt.baseline),
                            SpeedupHistogram::kLabels[b], h.counts[b]);
        row.push_back(static_cast<double>(h.counts[b]));
      }
      bar_methods.push_back(m);
      bar_values.push_back(std::move(row));

      svg::Series s{m, {}};
      for (const auto& p : cdf_points(sp)) {
        cdfs += fmt::format("{},{},{},{}\n", head, csv_escape(m), detail::num(p.x), detail::num(p.at_least));
        s.points.emplace_back(p.x, p.at_least);
      }
      cdf_series.push_back(std::move(s));
    }
    if (opt.svg && !bar_methods.empty()) {
      out.write("speedup_bins_" + slug + ".svg",
                svg::bar_chart("Speedup over " + opt.baseline + ": " + label, "matrices",
                               bar_methods,
                               {SpeedupHistogram::kLabels.begin(), SpeedupHistogram::kLabels.end()},
                               bar_values, /*stacked=*/true));
      out.write("speedup_cdf_" + slug + ".svg",
                svg::line_chart("Reverse CDF of speedup: " + label, "speedup",
                                "fraction of matrices >= speedup", cdf_series, /*step=*/true));
    }
  }
  out.write("profiles.csv", profiles);
  out.write("winrates.csv", winrates);
  out.write("speedup_bins.csv", bins);
  out.write("speedup_cdf.csv", cdfs);

  // Consistency across machines.
  std::string cons = "mode,schedule,threads,method,tau,ccs_size,is_size,excluded,consistent_pct\n";
  if (table.machines().size() >= 2) {
    std::map<std::tuple<std::string, std::string, unsigned>, ResultTable> configs;
    for (const auto& r : table.rows()) configs[{r.mode, r.schedule, r.threads}].add(r);
    for (const auto& [cfg, t] : configs) {
      const auto& [mode, schedule, threads] = cfg;
      if (t.machines().size() < 2) continue;
      std::vector<std::string> cats;
      std::vector<std::string> notes;
      std::vector<std::vector<double>> vals;
      const auto methods = t.methods();
      for (double tau : opt.consistency_taus) {
        cats.push_back(fmt::format("tau={}", tau));
        std::vector<double> row;
        std::size_t candidates = 0;
        for (const auto& m : methods) {
          if (m == opt.baseline) continue;
          const auto rep = consistency(t, m, opt.baseline, tau);
          cons += csv_line({mode, schedule, fmt::format("{}", threads), m, detail::num(tau),
                            fmt::format("{}", rep.ccs_size), fmt::format("{}", rep.is_size),
                            fmt::format("{}", rep.excluded),
                            rep.consistent_pct ? detail::num(*rep.consistent_pct) : "undefined"});
          row.push_back(rep.consistent_pct.value_or(0.0));
          candidates += rep.ccs_size;
        }
        vals.push_back(std::move(row));
        notes.push_back(fmt::format("n={}", candidates));
      }
      std::vector<std::string> layer_names;
      for (const auto& m : methods)
        if (m != opt.baseline) layer_names.push_back(m);
      if (opt.svg && !layer_names.empty())
        out.write(detail::slug(fmt::format("consistency_{}_{}_t{}", mode, schedule, threads)) + ".svg",
                  svg::bar_chart(fmt::format("Consistent share across machines: {} {} T={}", mode,
                                             schedule, threads),
                                 "consistent fraction", cats, layer_names, vals, /*stacked=*/false,
                                 notes));
    }
  }
  out.write("consistency.csv", cons);

  // Benchmark methodology vs CG.
  const auto ratios = methodology_ratios(table);
  std::string meth = "methodology,ratio_to_cg,fraction_at_most,fraction_at_least\n";
  std::vector<svg::Series> meth_series;
  for (const auto& [name, values] : {std::pair{"yax", &ratios.yax}, std::pair{"ios", &ratios.ios}}) {
    if (values->empty()) continue;
    svg::Series s{name, {}};
    for (const auto& p : cdf_points(*values)) {
      meth += fmt::format("{},{},{},{}\n", name, detail::num(p.x), detail::num(p.at_most),
                          detail::num(p.at_least));
      s.points.emplace_back(p.x, p.at_least);
    }
    meth_series.push_back(std::move(s));
  }
  out.write("methodology_cdf.csv", meth);
  if (opt.svg && !meth_series.empty())
    out.write("methodology_cdf.svg",
              svg::line_chart("Measured / CG GFLOPs", "X / CG", "fraction of cells >= ratio",
                              meth_series, /*step=*/true));
  return summary;
}

/// nnz load imbalance of block-static and nnz-balanced partitions for each
/// matrix and thread count.
inline std::string imbalance_csv(const std::vector<std::pair<std::string, CsrMatrix>>& matrices,
                                 const std::vector<unsigned>& threads) {
  std::string out = "matrix,partition,threads,max_load,fair_load,imbalance\n";
  for (const auto& [name, a] : matrices)
    for (unsigned t : threads) {
      const auto st = load_imbalance(a, static_block_partition(a.nrows(), t), name, "static");
      const auto nb = load_imbalance(a, nnz_balanced_partition(a, t), name, "nnz");
      for (const auto& r : {st, nb})
        out += csv_line({r.matrix, r.method, fmt::format("{}", r.threads), fmt::format("{}", r.max_load),
                         detail::num(r.fair_load), detail::num(r.imbalance)});
    }
  return out;
}

}  // namespace spmvlab
