#pragma once

// Symmetric row/column relabelings: construction, application, the native
// Reverse Cuthill-McKee ordering and the text permutation file format.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "spmvlab/matcore.hpp"
#include "spmvlab/random.hpp"

namespace spmvlab {

class PermutationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bijection on [0, n) stored in gather form: `new_to_old()[k]` is the
/// original index placed at new position k. Applying it to A produces
/// B = P A P^T with B[k][l] = A[new_to_old[k]][new_to_old[l]].
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<index_t> new_to_old) : new_to_old_(std::move(new_to_old)) {
    std::vector<bool> seen(new_to_old_.size(), false);
    for (std::size_t k = 0; k < new_to_old_.size(); ++k) {
      const index_t old = new_to_old_[k];
      if (old >= new_to_old_.size())
        throw PermutationError(
            fmt::format("permutation: index {} at position {} out of range", old, k));
      if (seen[old])
        throw PermutationError(fmt::format("permutation: index {} appears twice", old));
      seen[old] = true;
    }
  }

  static Permutation identity(index_t n) {
    std::vector<index_t> p(n);
    std::iota(p.begin(), p.end(), index_t{0});
    return Permutation(std::move(p));
  }

  std::size_t size() const noexcept { return new_to_old_.size(); }
  index_t operator[](std::size_t k) const { return new_to_old_[k]; }
  std::span<const index_t> new_to_old() const noexcept { return new_to_old_; }

  /// Scatter form: old_to_new()[old] = new position.
  std::vector<index_t> old_to_new() const {
    std::vector<index_t> inv(new_to_old_.size());
    for (std::size_t k = 0; k < new_to_old_.size(); ++k)
      inv[new_to_old_[k]] = static_cast<index_t>(k);
    return inv;
  }

  Permutation inverse() const { return Permutation(old_to_new()); }

  bool is_identity() const {
    for (std::size_t k = 0; k < new_to_old_.size(); ++k)
      if (new_to_old_[k] != k) return false;
    return true;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<index_t> new_to_old_;
};

inline Permutation identity_perm(index_t n) { return Permutation::identity(n); }

/// Composition such that apply(apply(A, first), second) == apply(A, compose(first, second)).
inline Permutation compose(const Permutation& first, const Permutation& second) {
  if (first.size() != second.size())
    throw PermutationError("compose: permutation lengths differ");
  std::vector<index_t> out(first.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = first[second[k]];
  return Permutation(std::move(out));
}

/// Uniform random permutation (Fisher-Yates), deterministic per (n, seed).
inline Permutation random_perm(index_t n, std::uint64_t seed) {
  std::vector<index_t> p(n);
  std::iota(p.begin(), p.end(), index_t{0});
  Rng rng(seed);
  for (index_t i = n; i > 1; --i) {
    const auto j = static_cast<index_t>(uniform_below(rng, i));
    std::swap(p[i - 1], p[j]);
  }
  return Permutation(std::move(p));
}

/// (P x)[k] = x[new_to_old[k]].
template <class T>
std::vector<T> permute_vector(std::span<const T> x, const Permutation& p) {
  if (x.size() != p.size()) throw PermutationError("permute_vector: length mismatch");
  std::vector<T> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[p[k]];
  return out;
}

/// B = P A P^T. Columns are re-sorted within each row.
inline CsrMatrix apply_symmetric_perm(const CsrMatrix& a, const Permutation& p) {
  if (!a.square() || p.size() != a.nrows())
    throw PermutationError(fmt::format("apply_symmetric_perm: permutation of length {} for {}x{}",
                                       p.size(), a.nrows(), a.ncols()));
  const index_t n = a.nrows();
  const auto old_to_new = p.old_to_new();

  std::vector<index_t> row_ptr(static_cast<std::size_t>(n) + 1, 0);
  for (index_t k = 0; k < n; ++k) row_ptr[k + 1] = row_ptr[k] + a.row_nnz(p[k]);

  std::vector<index_t> cols(a.nnz());
  std::vector<double> values(a.nnz());
  std::vector<std::pair<index_t, double>> row;
  for (index_t k = 0; k < n; ++k) {
    const index_t old = p[k];
    auto src_cols = a.row_cols(old);
    auto src_vals = a.row_values(old);
    row.clear();
    for (std::size_t i = 0; i < src_cols.size(); ++i)
      row.emplace_back(old_to_new[src_cols[i]], src_vals[i]);
    std::sort(row.begin(), row.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t i = 0; i < row.size(); ++i) {
      cols[row_ptr[k] + i] = row[i].first;
      values[row_ptr[k] + i] = row[i].second;
    }
  }
  return CsrMatrix(n, n, std::move(row_ptr), std::move(cols), std::move(values));
}

// ---------------------------------------------------------------------------
// Reverse Cuthill-McKee

namespace detail {

/// Off-diagonal adjacency of a structurally symmetric matrix.
struct Adjacency {
  std::vector<index_t> offsets;
  std::vector<index_t> neighbors;

  explicit Adjacency(const CsrMatrix& a) : offsets(static_cast<std::size_t>(a.nrows()) + 1, 0) {
    neighbors.reserve(a.nnz());
    for (index_t r = 0; r < a.nrows(); ++r) {
      for (index_t c : a.row_cols(r))
        if (c != r) neighbors.push_back(c);
      offsets[r + 1] = static_cast<index_t>(neighbors.size());
    }
  }

  index_t size() const { return static_cast<index_t>(offsets.size() - 1); }
  index_t degree(index_t v) const { return offsets[v + 1] - offsets[v]; }
  std::span<const index_t> of(index_t v) const {
    return std::span(neighbors).subspan(offsets[v], degree(v));
  }
};

/// Breadth-first level structure rooted at `root`. `mark` must be zero for
/// every vertex in root's component; it is restored before returning.
struct LevelStructure {
  std::vector<index_t> order;         // vertices in BFS order
  std::vector<std::size_t> level_at;  // start of each level in `order`, plus end

  std::size_t depth() const { return level_at.size() - 1; }
  std::span<const index_t> last_level() const {
    return std::span(order).subspan(level_at[depth() - 1]);
  }
};

inline LevelStructure build_levels(const Adjacency& g, index_t root, std::vector<char>& mark) {
  LevelStructure ls;
  ls.order.push_back(root);
  mark[root] = 1;
  std::size_t begin = 0;
  while (begin < ls.order.size()) {
    const std::size_t end = ls.order.size();
    ls.level_at.push_back(begin);
    for (std::size_t i = begin; i < end; ++i)
      for (index_t w : g.of(ls.order[i]))
        if (!mark[w]) {
          mark[w] = 1;
          ls.order.push_back(w);
        }
    begin = end;
  }
  ls.level_at.push_back(ls.order.size());
  for (index_t v : ls.order) mark[v] = 0;
  return ls;
}

/// George-Liu pseudo-peripheral node search starting from `start`.
inline index_t pseudo_peripheral(const Adjacency& g, index_t start, std::vector<char>& mark) {
  index_t root = start;
  LevelStructure ls = build_levels(g, root, mark);
  for (;;) {
    index_t candidate = ls.last_level().front();
    for (index_t v : ls.last_level()) {
      const auto dv = g.degree(v), dc = g.degree(candidate);
      if (dv < dc || (dv == dc && v < candidate)) candidate = v;
    }
    LevelStructure next = build_levels(g, candidate, mark);
    if (next.depth() <= ls.depth()) return root;
    root = candidate;
    ls = std::move(next);
  }
}

}  // namespace detail

/// Cuthill-McKee order before reversal: position k holds an original index.
/// Components are visited in order of their smallest vertex; vertices with
/// no off-diagonal neighbours are appended at the end in ascending order.
inline std::vector<index_t> cuthill_mckee_order(const CsrMatrix& a) {
  if (!a.square()) throw MatrixError("rcm: matrix must be square");
  if (!is_structurally_symmetric(a))
    throw MatrixError("rcm: matrix is not structurally symmetric");

  const detail::Adjacency g(a);
  const index_t n = g.size();
  std::vector<char> visited(n, 0);
  std::vector<char> mark(n, 0);
  std::vector<index_t> order;
  order.reserve(n);
  std::vector<index_t> fresh;

  for (index_t v = 0; v < n; ++v) {
    if (visited[v] || g.degree(v) == 0) continue;

    // Lowest-degree vertex of this component seeds the peripheral search.
    const detail::LevelStructure comp = detail::build_levels(g, v, mark);
    index_t seed = v;
    for (index_t u : comp.order)
      if (g.degree(u) < g.degree(seed) || (g.degree(u) == g.degree(seed) && u < seed)) seed = u;
    const index_t start = detail::pseudo_peripheral(g, seed, mark);

    std::size_t head = order.size();
    order.push_back(start);
    visited[start] = 1;
    while (head < order.size()) {
      const index_t u = order[head++];
      fresh.clear();
      for (index_t w : g.of(u))
        if (!visited[w]) {
          visited[w] = 1;
          fresh.push_back(w);
        }
      std::sort(fresh.begin(), fresh.end(), [&](index_t x, index_t y) {
        return g.degree(x) != g.degree(y) ? g.degree(x) < g.degree(y) : x < y;
      });
      order.insert(order.end(), fresh.begin(), fresh.end());
    }
  }
  for (index_t v = 0; v < n; ++v)
    if (g.degree(v) == 0) order.push_back(v);
  return order;
}

/// Reverse Cuthill-McKee ordering of a structurally symmetric matrix.
inline Permutation rcm_order(const CsrMatrix& a) {
  auto order = cuthill_mckee_order(a);
  std::reverse(order.begin(), order.end());
  return Permutation(std::move(order));
}

// ---------------------------------------------------------------------------
// Permutation files: "perm <n>" header, then n lines of 0-based original
// indices in new_to_old order. Lines starting with '%' are comments.

inline Permutation parse_permutation(std::string_view text) {
  detail::LineReader reader(text);
  std::string_view line;
  std::size_t declared = 0;
  bool have_header = false;
  std::vector<index_t> p;
  while (reader.next(line)) {
    auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0].front() == '%') continue;
    if (!have_header) {
      if (toks.size() != 2 || toks[0] != "perm")
        throw PermutationError(
            fmt::format("permutation file line {}: expected 'perm <n>' header", reader.line_no()));
      declared = detail::parse_number<std::size_t>(toks[1], reader.line_no());
      have_header = true;
      p.reserve(declared);
      continue;
    }
    if (toks.size() != 1)
      throw PermutationError(
          fmt::format("permutation file line {}: expected one index", reader.line_no()));
    if (p.size() == declared)
      throw PermutationError(fmt::format("permutation file: more than {} entries", declared));
    p.push_back(detail::parse_number<index_t>(toks[0], reader.line_no()));
  }
  if (!have_header) throw PermutationError("permutation file: missing 'perm <n>' header");
  if (p.size() != declared)
    throw PermutationError(
        fmt::format("permutation file: header declares {} entries, found {}", declared, p.size()));
  return Permutation(std::move(p));
}

inline std::string format_permutation(const Permutation& p) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "perm {}\n", p.size());
  for (index_t v : p.new_to_old()) fmt::format_to(std::back_inserter(buf), "{}\n", v);
  return fmt::to_string(buf);
}

inline Permutation load_permutation_file(const std::filesystem::path& path) {
  return parse_permutation(read_file(path));
}

inline void save_permutation_file(const std::filesystem::path& path, const Permutation& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PermutationError(fmt::format("cannot write '{}'", path.string()));
  out << format_permutation(p);
}

}  // namespace spmvlab
