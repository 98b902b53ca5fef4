#include <gtest/gtest.h>

#include <vector>

#include "oracles.hpp"
#include "spmvlab/matcore.hpp"

using namespace spmvlab;

namespace {

const char* kSmallGeneral =
    "%%MatrixMarket matrix coordinate real general\n"
    "% a comment\n"
    "3 4 4\n"
    "1 1 2.5\n"
    "3 4 -1\n"
    "2 2 1e-3\n"
    "1 3 7\n";

}  // namespace

TEST(MatrixMarket, ParsesGeneralCoordinate) {
  const auto t = parse_matrix_market(kSmallGeneral);
  EXPECT_EQ(t.nrows, 3u);
  EXPECT_EQ(t.ncols, 4u);
  EXPECT_FALSE(t.symmetric);
  ASSERT_EQ(t.entries.size(), 4u);
  EXPECT_EQ(t.entries[1].row, 2u);
  EXPECT_EQ(t.entries[1].col, 3u);
  EXPECT_EQ(t.entries[1].value, -1.0);

  const auto a = coo_to_csr(t);
  EXPECT_EQ(a.nnz(), 4u);
  EXPECT_EQ((std::vector<index_t>(a.row_ptr().begin(), a.row_ptr().end())),
            (std::vector<index_t>{0, 2, 3, 4}));
  EXPECT_EQ(a.row_cols(0)[0], 0u);
  EXPECT_EQ(a.row_cols(0)[1], 2u);
}

TEST(MatrixMarket, SymmetricIsExpanded) {
  const char* text =
      "%%MatrixMarket matrix coordinate integer symmetric\n"
      "3 3 3\n"
      "1 1 4\n"
      "2 1 -1\n"
      "3 3 2\n";
  const auto a = load_csr_text(text);
  EXPECT_EQ(a.nnz(), 4u);
  EXPECT_TRUE(is_symmetric(a));
  double v = 0;
  ASSERT_TRUE(detail::has_entry(a, 0, 1, &v));
  EXPECT_EQ(v, -1.0);
}

TEST(MatrixMarket, RejectsUnsupportedAndMalformed) {
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n"),
               MatrixError);
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n"),
               MatrixError);
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\n1\n"), MatrixError);
  EXPECT_THROW(parse_matrix_market("1 1 1\n1 1 1\n"), MatrixError);
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n"),
               MatrixError);
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"),
               MatrixError);
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1\n"),
               MatrixError);
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n"),
               MatrixError);
}

TEST(CooToCsr, DuplicatesAreAnError) {
  TripletMatrix t{2, 2, {{0, 0, 1.0}, {1, 1, 2.0}, {0, 0, 3.0}}, false};
  EXPECT_THROW(coo_to_csr(t), MatrixError);
}

TEST(CsrMatrix, ConstructorEnforcesInvariants) {
  EXPECT_THROW(CsrMatrix(2, 2, {0, 1}, {0}, {1.0}), MatrixError);              // row_ptr length
  EXPECT_THROW(CsrMatrix(2, 2, {0, 2, 1}, {0, 1}, {1.0, 1.0}), MatrixError);   // decreasing
  EXPECT_THROW(CsrMatrix(1, 2, {0, 2}, {1, 0}, {1.0, 1.0}), MatrixError);      // unsorted cols
  EXPECT_THROW(CsrMatrix(1, 2, {0, 1}, {2}, {1.0}), MatrixError);              // col range
  EXPECT_NO_THROW(CsrMatrix(2, 2, {0, 1, 2}, {1, 0}, {1.0, 1.0}));
}

TEST(MatrixMarket, WriteReadRoundTripIsExact) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto a = gen_random_symmetric(60, 0.1, seed);
    const auto text = to_matrix_market(to_symmetric_triplets(a));
    EXPECT_EQ(load_csr_text(text), a);
    const auto general = to_matrix_market(to_triplets(a));
    EXPECT_EQ(load_csr_text(general), a);
    EXPECT_EQ(to_matrix_market(to_symmetric_triplets(load_csr_text(text))), text);
  }
}

TEST(Generators, BandedHasExactStructure) {
  const auto a = gen_banded(100, 5, 7);
  const auto d = oracle::dense(a);
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) {
      const bool inside = std::abs(i - j) <= 5;
      EXPECT_EQ(d[i][j] != 0.0, inside) << i << "," << j;
      if (inside) {
        EXPECT_GE(d[i][j], 0.1);
        EXPECT_LT(d[i][j], 1.0);
        EXPECT_EQ(d[i][j], d[j][i]);
      }
    }
  EXPECT_EQ(bandwidth(a), 5u);
  EXPECT_EQ(gen_banded(100, 5, 7), a);
  EXPECT_NE(gen_banded(100, 5, 8), a);
  EXPECT_THROW(gen_banded(4, 4, 0), MatrixError);
}

TEST(Generators, LaplacianStencil) {
  const auto a = gen_laplacian_2d(4);
  EXPECT_EQ(a.nrows(), 16u);
  EXPECT_EQ(a.nnz(), 16u + 2 * 2 * 4 * 3);
  EXPECT_TRUE(is_symmetric(a));
  const auto d = oracle::dense(a);
  EXPECT_EQ(d[5][5], 4.0);
  EXPECT_EQ(d[5][1], -1.0);
  EXPECT_EQ(d[5][4], -1.0);
  EXPECT_EQ(d[3][4], 0.0);  // no wrap across grid rows
}

TEST(Generators, RandomAndPowerLawAreSymmetricAndSeeded) {
  const auto r = gen_random_symmetric(200, 0.05, 11);
  EXPECT_TRUE(is_symmetric(r));
  EXPECT_EQ(r, gen_random_symmetric(200, 0.05, 11));
  for (index_t i = 0; i < r.nrows(); ++i) EXPECT_TRUE(detail::has_entry(r, i, i));

  const auto p = gen_powerlaw(2000, 2, 2.0, 5);
  EXPECT_TRUE(is_symmetric(p));
  EXPECT_EQ(p, gen_powerlaw(2000, 2, 2.0, 5));
  // Heavy tail: the longest row is far above the mean.
  const double mean = static_cast<double>(p.nnz()) / p.nrows();
  EXPECT_GT(p.max_row_nnz(), 8 * mean);
}

TEST(Queries, BandwidthMatchesDenseScan) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = gen_random_symmetric(80, 0.03, seed);
    EXPECT_EQ(bandwidth(a), oracle::bandwidth(a));
  }
}

TEST(Queries, SymmetryChecks) {
  const auto a = coo_to_csr({2, 2, {{0, 1, 1.0}, {1, 0, 2.0}}, false});
  EXPECT_TRUE(is_structurally_symmetric(a));
  EXPECT_FALSE(is_symmetric(a));
  const auto b = coo_to_csr({2, 2, {{0, 1, 1.0}}, false});
  EXPECT_FALSE(is_structurally_symmetric(b));
  EXPECT_THROW(expand_symmetric({2, 2, {{0, 1, 1.0}}, false}), MatrixError);
}

TEST(DenseOracle, MirrorsSymmetricStorage) {
  TripletMatrix t{2, 2, {{0, 0, 2.0}, {1, 0, 3.0}}, true};
  const auto y = dense_spmv_oracle(t, std::vector<double>{1.0, 10.0});
  EXPECT_EQ(y, (std::vector<double>{32.0, 3.0}));
  EXPECT_THROW(dense_spmv_oracle(t, std::vector<double>{1.0}), MatrixError);
}
