// spmvlab command-line driver.
//
//   spmvlab gen --banded -m 131072 -b 63 --seed 7 -o banded.mtx
//   spmvlab shuffle --seed 13 banded.mtx -o shuffled.mtx
//   spmvlab reorder --method rcm shuffled.mtx -o rcm.mtx --perm-out rcm.perm
//   spmvlab bench --matrix rcm.mtx --reorder identity --mode ios --threads 8 --out results.csv
//   spmvlab analyze --in results.csv --out-dir report
//
// Progress and warnings go to stderr; stdout carries only requested output.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "spmvlab/analysis.hpp"
#include "spmvlab/bench.hpp"
#include "spmvlab/csv.hpp"
#include "spmvlab/fetch.hpp"
#include "spmvlab/matcore.hpp"
#include "spmvlab/plan.hpp"
#include "spmvlab/reorder.hpp"
#include "spmvlab/report.hpp"

namespace fs = std::filesystem;
using namespace spmvlab;

namespace {

void save_matrix(const fs::path& path, const CsrMatrix& a) {
  const TripletMatrix t = is_symmetric(a) ? to_symmetric_triplets(a) : to_triplets(a);
  write_file_atomic(path, to_matrix_market(t));
}

std::string hostname() {
  char buf[256] = {0};
  if (::gethostname(buf, sizeof buf - 1) != 0 || !buf[0]) return "unknown";
  return buf;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  bool banded = false, laplacian = false, random = false, powerlaw = false;
  index_t m = 131072, halfband = 63, k = 64, n = 1024, min_degree = 2;
  double density = 0.01, alpha = 2.5;
  std::uint64_t seed = 0;
  fs::path out;
};

void add_gen(CLI::App& app) {
  auto a = std::make_shared<GenArgs>();
  auto* cmd = app.add_subcommand("gen", "Generate a synthetic symmetric matrix");
  auto* kinds = cmd->add_option_group("kind");
  kinds->add_flag("--banded", a->banded, "Banded matrix with random values");
  kinds->add_flag("--laplacian", a->laplacian, "5-point Laplacian on a k x k grid");
  kinds->add_flag("--random", a->random, "Random symmetric matrix with a nonzero diagonal");
  kinds->add_flag("--powerlaw", a->powerlaw, "Symmetric matrix with power-law row degrees");
  kinds->require_option(1);
  cmd->add_option("-m", a->m, "Rows of the banded matrix");
  cmd->add_option("-b,--halfband", a->halfband, "Half bandwidth of the banded matrix");
  cmd->add_option("-k", a->k, "Grid side of the Laplacian");
  cmd->add_option("-n", a->n, "Rows of the random and power-law matrices");
  cmd->add_option("--density", a->density, "Off-diagonal density of the random matrix");
  cmd->add_option("--min-degree", a->min_degree, "Minimum degree of the power-law matrix");
  cmd->add_option("--alpha", a->alpha, "Power-law exponent");
  cmd->add_option("--seed", a->seed, "Random seed");
  cmd->add_option("-o,--out", a->out, "Output .mtx file")->required();
  cmd->callback([a] {
    CsrMatrix m = a->banded      ? gen_banded(a->m, a->halfband, a->seed)
                  : a->laplacian ? gen_laplacian_2d(a->k)
                  : a->random    ? gen_random_symmetric(a->n, a->density, a->seed)
                                 : gen_powerlaw(a->n, a->min_degree, a->alpha, a->seed);
    save_matrix(a->out, m);
    fmt::print(stderr, "wrote {} ({} rows, {} nonzeros, bandwidth {})\n", a->out.string(), m.nrows(),
               m.nnz(), bandwidth(m));
  });
}

struct PermuteArgs {
  fs::path in, out, perm_out;
  std::uint64_t seed = 0;
  std::string method = "rcm";
};

void permute_and_save(const PermuteArgs& a, const ReorderSpec& spec) {
  const CsrMatrix m = load_csr(a.in);
  const Permutation p = spec.permutation_for(m);
  const CsrMatrix pm = apply_symmetric_perm(m, p);
  save_matrix(a.out, pm);
  if (!a.perm_out.empty()) save_permutation_file(a.perm_out, p);
  fmt::print("{}: bandwidth {} -> {}\n", spec.label(), bandwidth(m), bandwidth(pm));
}

void add_shuffle(CLI::App& app) {
  auto a = std::make_shared<PermuteArgs>();
  auto* cmd = app.add_subcommand("shuffle", "Apply a seeded random symmetric permutation");
  cmd->add_option("input", a->in, "Input .mtx file")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", a->out, "Output .mtx file")->required();
  cmd->add_option("--seed", a->seed, "Permutation seed");
  cmd->add_option("--perm-out", a->perm_out, "Also write the permutation");
  cmd->callback([a] { permute_and_save(*a, ReorderSpec{ReorderSpec::Kind::Random, a->seed, {}}); });
}

void add_reorder(CLI::App& app) {
  auto a = std::make_shared<PermuteArgs>();
  auto* cmd = app.add_subcommand("reorder", "Reorder a matrix symmetrically");
  cmd->add_option("input", a->in, "Input .mtx file")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", a->out, "Output .mtx file")->required();
  cmd->add_option("--method", a->method, "identity | rcm | random:<seed> | external:<perm file>");
  cmd->add_option("--perm-out", a->perm_out, "Also write the permutation");
  cmd->callback([a] { permute_and_save(*a, ReorderSpec::parse(a->method)); });
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::vector<fs::path> matrices;
  std::vector<std::string> reorder{"identity"};
  std::vector<std::string> modes{"ios"};
  std::vector<std::string> schedules{"static"};
  std::vector<unsigned> threads{1};
  std::size_t iters = 50, warmup = 1, renorm = 0;
  std::uint64_t seed = 0;
  std::string machine;
  fs::path out;
};

void add_bench(CLI::App& app) {
  auto a = std::make_shared<BenchArgs>();
  auto* cmd = app.add_subcommand("bench", "Run the benchmark cross product, appending to a CSV");
  cmd->add_option("--matrix", a->matrices, "Matrix Market files")->required()->check(CLI::ExistingFile);
  cmd->add_option("--reorder", a->reorder, "identity | rcm | random:<seed> | external:<perm file>");
  cmd->add_option("--mode", a->modes, "yax | ios | cg");
  cmd->add_option("--schedule", a->schedules, "static | static:<c> | dynamic:<c> | guided:<c> | nnz");
  cmd->add_option("--threads", a->threads, "Thread counts");
  cmd->add_option("--iters", a->iters, "Measured iterations per cell");
  cmd->add_option("--warmup", a->warmup, "Untimed leading iterations per cell");
  cmd->add_option("--seed", a->seed, "Seed for input vectors");
  cmd->add_option("--ios-renorm-every", a->renorm, "IOS: rescale x every K iterations (0 = never)");
  cmd->add_option("--machine", a->machine, "Machine label (default: hostname)");
  cmd->add_option("--out", a->out, "Output CSV (appended, resumable)")->required();
  cmd->callback([a] {
    RunPlan plan;
    plan.matrices = a->matrices;
    plan.reorderings.clear();
    for (const auto& r : a->reorder) plan.reorderings.push_back(ReorderSpec::parse(r));
    plan.modes.clear();
    for (const auto& m : a->modes) plan.modes.push_back(parse_mode(m));
    plan.schedules = a->schedules;
    plan.threads = a->threads;
    plan.iters = a->iters;
    plan.warmup = a->warmup;
    plan.seed = a->seed;
    plan.ios_renorm_every = a->renorm;
    plan.machine = a->machine.empty() ? hostname() : a->machine;
    plan.output = a->out;

    PlanHooks hooks;
    hooks.on_row = [](const BenchCsvRow& r) {
      fmt::print(stderr, "{} {} {} {} T={}: {:.3f} GFLOP/s\n", r.matrix, r.reorder, r.mode,
                 r.schedule_descriptor(), r.threads, r.gflops);
    };
    hooks.on_warning = [](const std::string& msg) { fmt::print(stderr, "warning: {}\n", msg); };
    const auto stats = run_plan(plan, hooks);
    fmt::print(stderr, "{} cells written, {} already present, {} failed\n", stats.written,
               stats.skipped, stats.failed);
  });
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::vector<fs::path> inputs;
  fs::path out_dir = "report";
  std::string baseline = "identity";
  std::vector<double> taus{1.1, 1.25, 1.5, 2.0};
  std::vector<fs::path> imbalance;
  std::vector<unsigned> imbalance_threads{8, 64};
  bool no_svg = false;
};

void add_analyze(CLI::App& app) {
  auto a = std::make_shared<AnalyzeArgs>();
  auto* cmd = app.add_subcommand("analyze", "Compute profiles, win rates, bins and consistency");
  cmd->add_option("--in", a->inputs, "Bench CSV files (rows are concatenated)")->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", a->out_dir, "Report directory");
  cmd->add_option("--baseline", a->baseline, "Reordering that speedups are measured against");
  cmd->add_option("--taus", a->taus, "Consistency thresholds");
  cmd->add_option("--imbalance", a->imbalance, "Matrices for the nnz load-imbalance table")
      ->check(CLI::ExistingFile);
  cmd->add_option("--imbalance-threads", a->imbalance_threads, "Thread counts for the imbalance table");
  cmd->add_flag("--no-svg", a->no_svg, "Only write CSV outputs");
  cmd->callback([a] {
    if (a->inputs.empty() && a->imbalance.empty())
      throw CLI::ValidationError("analyze", "nothing to do: pass --in and/or --imbalance");
    fs::create_directories(a->out_dir);
    if (!a->inputs.empty()) {
      std::vector<BenchCsvRow> rows;
      for (const auto& p : a->inputs) {
        auto part = read_bench_csv(p);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      ReportOptions opt;
      opt.out_dir = a->out_dir;
      opt.baseline = a->baseline;
      opt.consistency_taus = a->taus;
      opt.svg = !a->no_svg;
      const auto summary = write_report(to_result_table(rows), opt);
      for (const auto& w : summary.warnings) fmt::print(stderr, "warning: {}\n", w);
      fmt::print(stderr, "wrote {} files to {}\n", summary.files.size(), a->out_dir.string());
    }
    if (!a->imbalance.empty()) {
      std::vector<std::pair<std::string, CsrMatrix>> mats;
      for (const auto& p : a->imbalance) mats.emplace_back(matrix_name(p), load_csr(p));
      write_file_atomic(a->out_dir / "imbalance.csv", imbalance_csv(mats, a->imbalance_threads));
      fmt::print(stderr, "wrote {}\n", (a->out_dir / "imbalance.csv").string());
    }
  });
}

// ---------------------------------------------------------------------------

struct FetchArgs {
  fs::path manifest, cache;
  bool symmetric = false, offline = false, list = false;
  std::uint64_t min_rows = 0;
  unsigned jobs = 4, retries = 3;
};

void add_fetch(CLI::App& app) {
  auto a = std::make_shared<FetchArgs>();
  auto* cmd = app.add_subcommand("fetch", "Download manifest matrices into the cache");
  cmd->add_option("--manifest", a->manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
  cmd->add_flag("--symmetric", a->symmetric, "Keep symmetric matrices only");
  cmd->add_option("--min-rows", a->min_rows, "Keep matrices with more than this many rows");
  cmd->add_option("--cache", a->cache, "Cache directory (default: $SPMVLAB_CACHE)");
  cmd->add_flag("--offline", a->offline, "Use cached files only");
  cmd->add_flag("--list", a->list, "Print the selection and exit");
  cmd->add_option("--jobs", a->jobs, "Concurrent downloads")->check(CLI::Range(1, 4));
  cmd->add_option("--retries", a->retries, "Retries per file after the first attempt");
  cmd->callback([a] {
    const auto selected = select(read_manifest(a->manifest), {a->symmetric, a->min_rows});
    fmt::print(stderr, "{} matrices selected\n", selected.size());
    if (a->list) {
      for (const auto& e : selected) fmt::print("{}/{}\t{}\t{}\n", e.group, e.name, e.nrows, e.nnz);
      return;
    }
    FetchOptions opt;
    if (!a->cache.empty()) opt.cache_dir = a->cache;
    opt.offline = a->offline;
    opt.jobs = a->jobs;
    opt.retries = a->retries;
    const auto report = fetch_all(selected, opt);
    for (const auto& o : report.outcomes) {
      static constexpr const char* kStatus[] = {"cached", "downloaded", "missing", "FAILED"};
      fmt::print("{}\t{}\t{}{}\n", kStatus[static_cast<int>(o.status)], o.name, o.path.string(),
                 o.message.empty() ? "" : "\t" + o.message);
    }
    if (!report.ok()) throw CLI::RuntimeError("some matrices could not be fetched", 2);
  });
}

void add_refresh(CLI::App& app) {
  auto src = std::make_shared<std::string>("https://sparse.tamu.edu/files/ssstats.csv");
  auto out = std::make_shared<fs::path>();
  auto* cmd = app.add_subcommand("refresh", "Rebuild a manifest from the collection index");
  cmd->add_option("--ssstats", *src, "Index file path or URL");
  cmd->add_option("-o,--out", *out, "Manifest CSV to write")->required();
  cmd->callback([src, out] {
    const std::string text = fs::exists(*src) ? read_file(*src) : curl_download(*src);
    const auto entries = manifest_from_ssstats(text);
    write_file_atomic(*out, format_manifest(entries));
    fmt::print(stderr, "{} entries, {} symmetric with more than 10000 rows\n", entries.size(),
               select(entries, {true, 10000}).size());
  });
}

void add_preflight(CLI::App& app) {
  auto threads = std::make_shared<std::vector<unsigned>>();
  auto* cmd = app.add_subcommand("preflight", "Report the core count and check thread counts");
  cmd->add_option("--threads", *threads, "Thread counts you plan to use");
  cmd->callback([threads] {
    const unsigned cores = std::thread::hardware_concurrency();
    fmt::print("logical cores: {}\n", cores);
    fmt::print("suggested threads (cores - 1): {}\n", cores > 1 ? cores - 1 : 1);
    for (const char* var : {"OMP_PROC_BIND", "OMP_PLACES"}) {
      const char* v = std::getenv(var);
      fmt::print("{}: {}\n", var, v ? v : "(unset)");
    }
    for (unsigned t : *threads)
      if (cores && t >= cores)
        fmt::print(stderr, "warning: {} threads >= {} logical cores; timings will include contention\n",
                   t, cores);
    if (!std::getenv("OMP_PROC_BIND"))
      fmt::print(stderr, "hint: export OMP_PROC_BIND=close OMP_PLACES=cores to pin threads\n");
    fmt::print(stderr, "hint: bind to one NUMA node with numactl --cpunodebind=0 --membind=0\n");
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmarks CSR SpMV under matrix reorderings and analyzes the results"};
  app.require_subcommand(1);
  add_fetch(app);
  add_refresh(app);
  add_gen(app);
  add_shuffle(app);
  add_reorder(app);
  add_bench(app);
  add_analyze(app);
  add_preflight(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
