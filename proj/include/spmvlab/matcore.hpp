#pragma once

// Sparse matrix storage, Matrix Market I/O, synthetic generators and the
// dense reference product used as a test oracle.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "spmvlab/random.hpp"

namespace spmvlab {

/// Row/column index type. Matches the 32-bit indices of the reference kernel.
using index_t = std::uint32_t;

class MatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Entry {
  index_t row = 0;
  index_t col = 0;
  double value = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
  friend auto operator<=>(const Entry& a, const Entry& b) {
    return std::pair{a.row, a.col} <=> std::pair{b.row, b.col};
  }
};

/// Coordinate-form matrix as read from disk. When `symmetric` is set only the
/// lower triangle (row >= col) is stored.
struct TripletMatrix {
  index_t nrows = 0;
  index_t ncols = 0;
  std::vector<Entry> entries;
  bool symmetric = false;

  friend bool operator==(const TripletMatrix&, const TripletMatrix&) = default;
};

/// Compressed sparse row matrix. Immutable after construction; the
/// constructor enforces the CSR invariants (monotone row pointers, strictly
/// increasing columns within a row, consistent array lengths).
class CsrMatrix {
 public:
  CsrMatrix() : row_ptr_(1, 0) {}

  CsrMatrix(index_t nrows, index_t ncols, std::vector<index_t> row_ptr,
            std::vector<index_t> cols, std::vector<double> values)
      : nrows_(nrows),
        ncols_(ncols),
        row_ptr_(std::move(row_ptr)),
        cols_(std::move(cols)),
        values_(std::move(values)) {
    validate();
  }

  index_t nrows() const noexcept { return nrows_; }
  index_t ncols() const noexcept { return ncols_; }
  std::size_t nnz() const noexcept { return cols_.size(); }
  bool square() const noexcept { return nrows_ == ncols_; }

  std::span<const index_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const index_t> cols() const noexcept { return cols_; }
  std::span<const double> values() const noexcept { return values_; }

  index_t row_nnz(index_t r) const { return row_ptr_[r + 1] - row_ptr_[r]; }
  std::span<const index_t> row_cols(index_t r) const {
    return std::span(cols_).subspan(row_ptr_[r], row_nnz(r));
  }
  std::span<const double> row_values(index_t r) const {
    return std::span(values_).subspan(row_ptr_[r], row_nnz(r));
  }

  index_t max_row_nnz() const {
    index_t best = 0;
    for (index_t r = 0; r < nrows_; ++r) best = std::max(best, row_nnz(r));
    return best;
  }

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  void validate() const {
    if (row_ptr_.size() != static_cast<std::size_t>(nrows_) + 1)
      throw MatrixError("csr: row_ptr length must be nrows+1");
    if (cols_.size() != values_.size())
      throw MatrixError("csr: cols and values lengths differ");
    if (row_ptr_.front() != 0) throw MatrixError("csr: row_ptr[0] != 0");
    if (row_ptr_.back() != cols_.size())
      throw MatrixError("csr: row_ptr[nrows] != nnz");
    for (index_t r = 0; r < nrows_; ++r) {
      if (row_ptr_[r] > row_ptr_[r + 1])
        throw MatrixError(fmt::format("csr: row_ptr decreases at row {}", r));
      for (index_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        if (cols_[k] >= ncols_)
          throw MatrixError(fmt::format("csr: column {} out of range in row {}", cols_[k], r));
        if (k > row_ptr_[r] && cols_[k - 1] >= cols_[k])
          throw MatrixError(fmt::format("csr: columns not strictly increasing in row {}", r));
      }
    }
  }

  index_t nrows_ = 0;
  index_t ncols_ = 0;
  std::vector<index_t> row_ptr_;
  std::vector<index_t> cols_;
  std::vector<double> values_;
};

struct MatrixMeta {
  std::string name;
  index_t nrows = 0;
  std::size_t nnz = 0;
  bool is_symmetric = false;
  index_t bandwidth = 0;
};

// ---------------------------------------------------------------------------
// Matrix Market

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
T parse_number(std::string_view tok, std::size_t line_no) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw MatrixError(fmt::format("matrix market line {}: bad number '{}'", line_no, tok));
  return v;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}
  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++line_no_;
    return true;
  }
  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace detail

/// Parses a Matrix Market coordinate file (real or integer field, general or
/// symmetric). Indices are converted to 0-based.
inline TripletMatrix parse_matrix_market(std::string_view text) {
  detail::LineReader reader(text);
  std::string_view line;
  if (!reader.next(line)) throw MatrixError("matrix market: empty input");

  auto banner = detail::split_ws(line);
  if (banner.size() != 5 || detail::lower(banner[0]) != "%%matrixmarket")
    throw MatrixError("matrix market: missing %%MatrixMarket banner");
  if (detail::lower(banner[1]) != "matrix")
    throw MatrixError("matrix market: object must be 'matrix'");
  if (detail::lower(banner[2]) != "coordinate")
    throw MatrixError("matrix market: only coordinate format is supported");
  const std::string field = detail::lower(banner[3]);
  if (field == "pattern" || field == "complex")
    throw MatrixError(fmt::format("matrix market: unsupported field '{}'", field));
  if (field != "real" && field != "integer")
    throw MatrixError(fmt::format("matrix market: unknown field '{}'", field));
  const std::string symmetry = detail::lower(banner[4]);
  if (symmetry != "general" && symmetry != "symmetric")
    throw MatrixError(fmt::format("matrix market: unsupported symmetry '{}'", symmetry));

  TripletMatrix t;
  t.symmetric = symmetry == "symmetric";

  std::uint64_t declared = 0;
  bool have_size = false;
  while (reader.next(line)) {
    auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0].front() == '%') continue;
    if (toks.size() != 3)
      throw MatrixError(fmt::format("matrix market line {}: malformed size line", reader.line_no()));
    const auto nr = detail::parse_number<std::uint64_t>(toks[0], reader.line_no());
    const auto nc = detail::parse_number<std::uint64_t>(toks[1], reader.line_no());
    declared = detail::parse_number<std::uint64_t>(toks[2], reader.line_no());
    if (nr > std::numeric_limits<index_t>::max() || nc > std::numeric_limits<index_t>::max())
      throw MatrixError("matrix market: dimensions exceed 32-bit index range");
    const std::uint64_t expanded = t.symmetric ? 2 * declared : declared;
    if (expanded >= (std::uint64_t{1} << 32))
      throw MatrixError("matrix market: nnz exceeds 32-bit index range");
    t.nrows = static_cast<index_t>(nr);
    t.ncols = static_cast<index_t>(nc);
    have_size = true;
    break;
  }
  if (!have_size) throw MatrixError("matrix market: missing size line");
  if (t.symmetric && t.nrows != t.ncols)
    throw MatrixError("matrix market: symmetric matrix must be square");

  t.entries.reserve(declared);
  while (t.entries.size() < declared && reader.next(line)) {
    auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0].front() == '%') continue;
    if (toks.size() != 3)
      throw MatrixError(fmt::format("matrix market line {}: expected 'row col value'", reader.line_no()));
    const auto r = detail::parse_number<std::uint64_t>(toks[0], reader.line_no());
    const auto c = detail::parse_number<std::uint64_t>(toks[1], reader.line_no());
    const auto v = detail::parse_number<double>(toks[2], reader.line_no());
    if (r < 1 || r > t.nrows || c < 1 || c > t.ncols)
      throw MatrixError(fmt::format("matrix market line {}: index ({}, {}) outside {}x{}",
                                    reader.line_no(), r, c, t.nrows, t.ncols));
    if (t.symmetric && c > r)
      throw MatrixError(fmt::format(
          "matrix market line {}: upper-triangle entry in symmetric file", reader.line_no()));
    t.entries.push_back({static_cast<index_t>(r - 1), static_cast<index_t>(c - 1), v});
  }
  if (t.entries.size() != declared)
    throw MatrixError(fmt::format("matrix market: expected {} entries, found {}", declared,
                                  t.entries.size()));
  while (reader.next(line)) {
    auto toks = detail::split_ws(line);
    if (!toks.empty() && toks[0].front() != '%')
      throw MatrixError(fmt::format("matrix market line {}: trailing data", reader.line_no()));
  }
  return t;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline TripletMatrix read_matrix_market(const std::filesystem::path& path) {
  return parse_matrix_market(read_file(path));
}

/// Writes `t` in coordinate format. Values use the shortest representation
/// that round-trips exactly.
inline void write_matrix_market(std::ostream& out, const TripletMatrix& t) {
  out << "%%MatrixMarket matrix coordinate real " << (t.symmetric ? "symmetric" : "general")
      << '\n';
  out << t.nrows << ' ' << t.ncols << ' ' << t.entries.size() << '\n';
  fmt::memory_buffer buf;
  for (const auto& e : t.entries) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{} {} {}\n", e.row + 1, e.col + 1, e.value);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

inline std::string to_matrix_market(const TripletMatrix& t) {
  std::ostringstream os;
  write_matrix_market(os, t);
  return os.str();
}

// ---------------------------------------------------------------------------
// Conversions

/// Mirrors every stored off-diagonal entry of a symmetric triplet matrix.
/// Throws if `t` is already general.
inline TripletMatrix expand_symmetric(const TripletMatrix& t) {
  if (!t.symmetric) throw MatrixError("expand_symmetric: matrix is not marked symmetric");
  TripletMatrix out{t.nrows, t.ncols, {}, false};
  out.entries.reserve(2 * t.entries.size());
  out.entries = t.entries;
  for (const auto& e : t.entries)
    if (e.row != e.col) out.entries.push_back({e.col, e.row, e.value});
  return out;
}

/// Builds CSR from a general triplet matrix. Duplicate coordinates are an
/// error rather than being summed.
inline CsrMatrix coo_to_csr(const TripletMatrix& t) {
  if (t.symmetric) throw MatrixError("coo_to_csr: expand symmetric storage first");
  if (t.entries.size() >= (std::size_t{1} << 32))
    throw MatrixError("coo_to_csr: nnz exceeds 32-bit index range");

  std::vector<index_t> row_ptr(static_cast<std::size_t>(t.nrows) + 1, 0);
  for (const auto& e : t.entries) {
    if (e.row >= t.nrows || e.col >= t.ncols)
      throw MatrixError(fmt::format("coo_to_csr: entry ({}, {}) out of range", e.row, e.col));
    ++row_ptr[e.row + 1];
  }
  for (index_t r = 0; r < t.nrows; ++r) row_ptr[r + 1] += row_ptr[r];

  std::vector<index_t> next(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<index_t> cols(t.entries.size());
  std::vector<double> values(t.entries.size());
  for (const auto& e : t.entries) {
    const index_t k = next[e.row]++;
    cols[k] = e.col;
    values[k] = e.value;
  }

  std::vector<std::pair<index_t, double>> row;
  for (index_t r = 0; r < t.nrows; ++r) {
    const index_t b = row_ptr[r], e = row_ptr[r + 1];
    row.clear();
    for (index_t k = b; k < e; ++k) row.emplace_back(cols[k], values[k]);
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& c) { return a.first < c.first; });
    for (index_t k = b; k < e; ++k) {
      if (k > b && row[k - b].first == row[k - b - 1].first)
        throw MatrixError(fmt::format("coo_to_csr: duplicate coordinate ({}, {})", r,
                                      row[k - b].first));
      cols[k] = row[k - b].first;
      values[k] = row[k - b].second;
    }
  }
  return CsrMatrix(t.nrows, t.ncols, std::move(row_ptr), std::move(cols), std::move(values));
}

/// General (fully stored) triplets in row-major order.
inline TripletMatrix to_triplets(const CsrMatrix& a) {
  TripletMatrix t{a.nrows(), a.ncols(), {}, false};
  t.entries.reserve(a.nnz());
  for (index_t r = 0; r < a.nrows(); ++r) {
    auto cols = a.row_cols(r);
    auto vals = a.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) t.entries.push_back({r, cols[k], vals[k]});
  }
  return t;
}

/// Lower-triangle symmetric triplets. `a` must be numerically symmetric.
inline TripletMatrix to_symmetric_triplets(const CsrMatrix& a);

/// Matrix Market text straight into CSR (symmetric storage is expanded).
inline CsrMatrix load_csr_text(std::string_view text) {
  auto t = parse_matrix_market(text);
  return coo_to_csr(t.symmetric ? expand_symmetric(t) : t);
}

inline CsrMatrix load_csr(const std::filesystem::path& path) { return load_csr_text(read_file(path)); }

// ---------------------------------------------------------------------------
// Structure queries

inline index_t bandwidth(const CsrMatrix& a) {
  index_t bw = 0;
  for (index_t r = 0; r < a.nrows(); ++r)
    for (index_t c : a.row_cols(r)) bw = std::max(bw, r > c ? r - c : c - r);
  return bw;
}

namespace detail {
inline bool has_entry(const CsrMatrix& a, index_t r, index_t c, double* value = nullptr) {
  auto cols = a.row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return false;
  if (value) *value = a.row_values(r)[static_cast<std::size_t>(it - cols.begin())];
  return true;
}
}  // namespace detail

/// True when the sparsity pattern equals its transpose.
inline bool is_structurally_symmetric(const CsrMatrix& a) {
  if (!a.square()) return false;
  for (index_t r = 0; r < a.nrows(); ++r)
    for (index_t c : a.row_cols(r))
      if (!detail::has_entry(a, c, r)) return false;
  return true;
}

/// True when A equals its transpose, values included.
inline bool is_symmetric(const CsrMatrix& a) {
  if (!a.square()) return false;
  for (index_t r = 0; r < a.nrows(); ++r) {
    auto cols = a.row_cols(r);
    auto vals = a.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      double v = 0;
      if (!detail::has_entry(a, cols[k], r, &v) || v != vals[k]) return false;
    }
  }
  return true;
}

inline TripletMatrix to_symmetric_triplets(const CsrMatrix& a) {
  if (!is_symmetric(a)) throw MatrixError("to_symmetric_triplets: matrix is not symmetric");
  TripletMatrix t{a.nrows(), a.ncols(), {}, true};
  for (index_t r = 0; r < a.nrows(); ++r) {
    auto cols = a.row_cols(r);
    auto vals = a.row_values(r);
    for (std::size_t k = 0; k < cols.size() && cols[k] <= r; ++k)
      t.entries.push_back({r, cols[k], vals[k]});
  }
  return t;
}

inline MatrixMeta matrix_meta(std::string name, const CsrMatrix& a) {
  return {std::move(name), a.nrows(), a.nnz(), is_symmetric(a), bandwidth(a)};
}

// ---------------------------------------------------------------------------
// Generators. All are symmetric with values uniform in [0.1, 1.0) unless noted.

namespace detail {
inline double positive_value(Rng& rng) { return 0.1 + 0.9 * uniform01(rng); }

/// Builds a symmetric CSR from lower-triangle entries (row >= col).
inline CsrMatrix from_lower(index_t n, std::vector<Entry> lower) {
  TripletMatrix t{n, n, std::move(lower), true};
  return coo_to_csr(expand_symmetric(t));
}
}  // namespace detail

/// Symmetric banded matrix with nonzeros exactly where |i - j| <= halfband.
inline CsrMatrix gen_banded(index_t m, index_t halfband, std::uint64_t seed) {
  if (halfband >= m && !(m == 0 && halfband == 0))
    throw MatrixError(fmt::format("gen_banded: halfband {} must be < m {}", halfband, m));
  Rng rng(seed);
  std::vector<Entry> lower;
  lower.reserve(static_cast<std::size_t>(m) * (halfband + 1));
  for (index_t i = 0; i < m; ++i) {
    const index_t first = i >= halfband ? i - halfband : 0;
    for (index_t j = first; j <= i; ++j) lower.push_back({i, j, detail::positive_value(rng)});
  }
  return detail::from_lower(m, std::move(lower));
}

/// 5-point finite-difference Laplacian on a k x k grid with Dirichlet
/// boundary (diagonal 4, neighbours -1). Symmetric positive definite.
inline CsrMatrix gen_laplacian_2d(index_t k) {
  const index_t n = k * k;
  std::vector<Entry> lower;
  lower.reserve(static_cast<std::size_t>(n) * 3);
  for (index_t gy = 0; gy < k; ++gy)
    for (index_t gx = 0; gx < k; ++gx) {
      const index_t i = gy * k + gx;
      if (gy > 0) lower.push_back({i, i - k, -1.0});
      if (gx > 0) lower.push_back({i, i - 1, -1.0});
      lower.push_back({i, i, 4.0});
    }
  return detail::from_lower(n, std::move(lower));
}

/// Random symmetric matrix: full diagonal plus each strictly-lower entry
/// present with probability `density`.
inline CsrMatrix gen_random_symmetric(index_t n, double density, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Entry> lower;
  for (index_t i = 0; i < n; ++i) {
    for (index_t j = 0; j < i; ++j)
      if (uniform01(rng) < density) lower.push_back({i, j, detail::positive_value(rng)});
    lower.push_back({i, i, detail::positive_value(rng)});
  }
  return detail::from_lower(n, std::move(lower));
}

/// Symmetric matrix with a heavy-tailed row-length distribution. Row i
/// draws a Pareto-distributed number of partners (minimum `min_degree`,
/// tail exponent `alpha`) uniformly among the other rows; the diagonal is
/// always stored.
inline CsrMatrix gen_powerlaw(index_t n, index_t min_degree, double alpha,
                              std::uint64_t seed) {
  if (n == 0) return detail::from_lower(0, {});
  Rng rng(seed);
  std::vector<std::pair<index_t, index_t>> edges;
  for (index_t i = 0; i < n; ++i) {
    const double u = 1.0 - uniform01(rng);
    const double draw = static_cast<double>(min_degree) * std::pow(u, -1.0 / alpha);
    const auto degree = static_cast<index_t>(std::min<double>(draw, n - 1));
    for (index_t d = 0; d < degree; ++d) {
      const auto j = static_cast<index_t>(uniform_below(rng, n));
      if (j != i) edges.emplace_back(std::max(i, j), std::min(i, j));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<Entry> lower;
  lower.reserve(edges.size() + n);
  for (auto [r, c] : edges) lower.push_back({r, c, detail::positive_value(rng)});
  for (index_t i = 0; i < n; ++i) lower.push_back({i, i, detail::positive_value(rng)});
  return detail::from_lower(n, std::move(lower));
}

// ---------------------------------------------------------------------------
// Reference product

/// y = A x through an explicit dense copy of A. O(nrows * ncols) memory;
/// intended for verification only. Symmetric storage is mirrored.
inline std::vector<double> dense_spmv_oracle(const TripletMatrix& t, std::span<const double> x) {
  if (x.size() != t.ncols)
    throw MatrixError(fmt::format("dense_spmv_oracle: x has length {}, expected {}", x.size(),
                                  t.ncols));
  std::vector<double> dense(static_cast<std::size_t>(t.nrows) * t.ncols, 0.0);
  auto at = [&](index_t r, index_t c) -> double& {
    return dense[static_cast<std::size_t>(r) * t.ncols + c];
  };
  for (const auto& e : t.entries) {
    at(e.row, e.col) += e.value;
    if (t.symmetric && e.row != e.col) at(e.col, e.row) += e.value;
  }
  std::vector<double> y(t.nrows, 0.0);
  for (index_t r = 0; r < t.nrows; ++r) {
    double sum = 0.0;
    for (index_t c = 0; c < t.ncols; ++c) sum += at(r, c) * x[c];
    y[r] = sum;
  }
  return y;
}

}  // namespace spmvlab
