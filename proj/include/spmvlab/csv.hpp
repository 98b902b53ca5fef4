#pragma once

// Benchmark result files. One row per (machine, matrix, reorder, mode,
// schedule, threads) cell, appended by whole-file rewrite and rename so an
// interrupted run leaves every row either complete or absent.

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "spmvlab/analysis.hpp"
#include "spmvlab/bench.hpp"
#include "spmvlab/matcore.hpp"

namespace spmvlab {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// RFC 4180 style fields: quoted when they contain a comma, quote or newline.
inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(fields[i]);
  }
  out += '\n';
  return out;
}

/// Splits CSV text into records. Quoted fields may contain commas, quotes
/// and newlines. A final record without a trailing newline is rejected when
/// `require_terminated` is set.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text,
                                                       bool require_terminated = false) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = field_started = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n') {
      rec.push_back(std::move(field));
      field.clear();
      field_started = false;
      if (!(rec.size() == 1 && rec[0].empty())) records.push_back(std::move(rec));
      rec.clear();
    } else if (c != '\r') {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw CsvError("csv: unterminated quoted field");
  if (field_started || !rec.empty()) {
    if (require_terminated) throw CsvError("csv: last record is not newline-terminated");
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Bench schema

inline constexpr std::string_view kBenchHeader =
    "machine,matrix,reorder,mode,schedule,chunk,threads,iters,warmup,nnz,nrows,median_ms,gflops,"
    "mean_ms,stdev_ms,nonfinite_flag,seed";

struct BenchCsvRow {
  std::string machine;
  std::string matrix;
  std::string reorder;
  std::string mode;
  std::string schedule;  // policy name: static, dynamic, guided, nnz
  index_t chunk = 0;     // 0 for block-static and nnz
  unsigned threads = 1;
  std::size_t iters = 0;
  std::size_t warmup = 0;
  std::uint64_t nnz = 0;
  index_t nrows = 0;
  double median_ms = 0;
  double gflops = 0;
  double mean_ms = 0;
  double stdev_ms = 0;
  bool nonfinite = false;
  std::uint64_t seed = 0;

  /// "static", "static:16", "dynamic:1", ...
  std::string schedule_descriptor() const {
    return chunk > 0 ? fmt::format("{}:{}", schedule, chunk) : schedule;
  }

  using Key = std::tuple<std::string, std::string, std::string, std::string, std::string, index_t,
                         unsigned>;
  Key key() const { return {machine, matrix, reorder, mode, schedule, chunk, threads}; }

  std::string to_line() const {
    return csv_line({machine, matrix, reorder, mode, schedule, fmt::format("{}", chunk),
                     fmt::format("{}", threads), fmt::format("{}", iters),
                     fmt::format("{}", warmup), fmt::format("{}", nnz), fmt::format("{}", nrows),
                     fmt::format("{}", median_ms), fmt::format("{}", gflops),
                     fmt::format("{}", mean_ms), fmt::format("{}", stdev_ms),
                     nonfinite ? "1" : "0", fmt::format("{}", seed)});
  }
};

/// Builds the CSV row for a finished record.
inline BenchCsvRow make_csv_row(const std::string& machine, const BenchRecord& rec) {
  const auto s = summarize(rec);
  BenchCsvRow row;
  row.machine = machine;
  row.matrix = rec.matrix_name;
  row.reorder = rec.reorder_name;
  row.mode = mode_name(rec.mode);
  row.schedule = rec.schedule.policy_name();
  row.chunk = rec.schedule.effective_chunk();
  row.threads = rec.schedule.threads;
  row.iters = rec.durations_ms.size() - rec.warmup;
  row.warmup = rec.warmup;
  row.nnz = rec.nnz;
  row.nrows = rec.nrows;
  row.median_ms = s.median_ms;
  row.gflops = s.gflops_median;
  row.mean_ms = s.mean_ms;
  row.stdev_ms = s.stdev_ms;
  row.nonfinite = rec.nonfinite;
  row.seed = rec.seed;
  return row;
}

namespace detail {
template <class T>
T csv_number(const std::string& s, std::string_view column) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw CsvError(fmt::format("bench csv: bad value '{}' in column {}", s, column));
  return v;
}
}  // namespace detail

inline std::vector<BenchCsvRow> parse_bench_csv(std::string_view text) {
  auto records = parse_csv(text, /*require_terminated=*/true);
  if (records.empty()) throw CsvError("bench csv: missing header");
  if (csv_line(records.front()) != std::string(kBenchHeader) + "\n")
    throw CsvError("bench csv: unexpected header");
  std::vector<BenchCsvRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() != 17) throw CsvError(fmt::format("bench csv: row {} has {} fields", i, f.size()));
    BenchCsvRow r;
    r.machine = f[0];
    r.matrix = f[1];
    r.reorder = f[2];
    r.mode = f[3];
    r.schedule = f[4];
    r.chunk = detail::csv_number<index_t>(f[5], "chunk");
    r.threads = detail::csv_number<unsigned>(f[6], "threads");
    r.iters = detail::csv_number<std::size_t>(f[7], "iters");
    r.warmup = detail::csv_number<std::size_t>(f[8], "warmup");
    r.nnz = detail::csv_number<std::uint64_t>(f[9], "nnz");
    r.nrows = detail::csv_number<index_t>(f[10], "nrows");
    r.median_ms = detail::csv_number<double>(f[11], "median_ms");
    r.gflops = detail::csv_number<double>(f[12], "gflops");
    r.mean_ms = detail::csv_number<double>(f[13], "mean_ms");
    r.stdev_ms = detail::csv_number<double>(f[14], "stdev_ms");
    r.nonfinite = f[15] == "1";
    r.seed = detail::csv_number<std::uint64_t>(f[16], "seed");
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<BenchCsvRow> read_bench_csv(const std::filesystem::path& path) {
  return parse_bench_csv(read_file(path));
}

/// Keys already present in `path`; empty when the file does not exist.
inline std::set<BenchCsvRow::Key> completed_keys(const std::filesystem::path& path) {
  std::set<BenchCsvRow::Key> keys;
  if (!std::filesystem::exists(path)) return keys;
  for (const auto& r : read_bench_csv(path)) keys.insert(r.key());
  return keys;
}

/// Replaces `path` with `content` through a temporary file, fsync and
/// rename, so readers observe either the old or the new file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  const auto tmp = std::filesystem::path(path.string() + fmt::format(".tmp.{}", ::getpid()));
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw CsvError(fmt::format("cannot create '{}': {}", tmp.string(), std::strerror(errno)));
  std::size_t done = 0;
  while (done < content.size()) {
    const auto n = ::write(fd, content.data() + done, content.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      std::filesystem::remove(tmp);
      throw CsvError(fmt::format("write to '{}' failed: {}", tmp.string(), std::strerror(err)));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0)
    throw CsvError(fmt::format("flushing '{}' failed: {}", tmp.string(), std::strerror(errno)));
  std::filesystem::rename(tmp, path);
}

/// Appends one row to a bench CSV, creating it with a header if needed.
inline void append_bench_row(const std::filesystem::path& path, const BenchCsvRow& row) {
  std::string content;
  if (std::filesystem::exists(path)) {
    content = read_file(path);
    parse_bench_csv(content);  // refuse to extend a file with a foreign header
  } else {
    content = std::string(kBenchHeader) + "\n";
  }
  content += row.to_line();
  write_file_atomic(path, content);
}

/// Result table view of bench rows (method = reorder name, schedule =
/// descriptor including chunk).
inline ResultTable to_result_table(const std::vector<BenchCsvRow>& rows) {
  ResultTable t;
  for (const auto& r : rows)
    t.add({r.machine, r.matrix, r.reorder, r.mode, r.schedule_descriptor(), r.threads, r.gflops});
  return t;
}

}  // namespace spmvlab
