#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "spmvlab/kernels.hpp"
#include "spmvlab/reorder.hpp"

using namespace spmvlab;

TEST(Permutation, RejectsNonBijections) {
  EXPECT_THROW(Permutation({0, 0}), PermutationError);
  EXPECT_THROW(Permutation({0, 2}), PermutationError);
  EXPECT_NO_THROW(Permutation({1, 0}));
  EXPECT_TRUE(identity_perm(5).is_identity());
}

TEST(Permutation, DirectionConvention) {
  // new_to_old = [2, 0, 1]: position 0 holds old index 2.
  const Permutation p({2, 0, 1});
  EXPECT_EQ(p.old_to_new(), (std::vector<index_t>{1, 2, 0}));
  const std::vector<int> x{10, 20, 30};
  EXPECT_EQ(permute_vector(std::span<const int>(x), p), (std::vector<int>{30, 10, 20}));
  EXPECT_EQ(compose(p, p.inverse()), identity_perm(3));
  EXPECT_EQ(compose(p.inverse(), p), identity_perm(3));
}

TEST(Permutation, ComposeMatchesSequentialApplication) {
  const auto a = gen_random_symmetric(50, 0.1, 4);
  const auto p = random_perm(50, 1), q = random_perm(50, 2);
  EXPECT_EQ(apply_symmetric_perm(apply_symmetric_perm(a, p), q), apply_symmetric_perm(a, compose(p, q)));
}

TEST(Permutation, RandomIsSeededAndUniformish) {
  EXPECT_EQ(random_perm(100, 9), random_perm(100, 9));
  EXPECT_NE(random_perm(100, 9), random_perm(100, 10));
  // Every position sees many different values across seeds.
  std::vector<std::set<index_t>> seen(8);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto p = random_perm(8, s);
    for (index_t k = 0; k < 8; ++k) seen[k].insert(p[k]);
  }
  for (const auto& s : seen) EXPECT_EQ(s.size(), 8u);
}

TEST(ApplySymmetricPerm, MatchesDenseDefinition) {
  const auto a = gen_random_symmetric(40, 0.15, 3);
  const auto p = random_perm(40, 5);
  const auto b = apply_symmetric_perm(a, p);
  const auto da = oracle::dense(a), db = oracle::dense(b);
  for (index_t k = 0; k < 40; ++k)
    for (index_t l = 0; l < 40; ++l) EXPECT_EQ(db[k][l], da[p[k]][p[l]]);
  EXPECT_THROW(apply_symmetric_perm(a, random_perm(39, 0)), PermutationError);
}

TEST(ApplySymmetricPerm, CommutesWithSpmv) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = gen_random_symmetric(120, 0.05, seed);
    const auto p = random_perm(120, seed + 100);
    std::vector<double> x(120);
    std::iota(x.begin(), x.end(), 1.0);
    const auto lhs = spmv_sequential(apply_symmetric_perm(a, p), permute_vector(std::span<const double>(x), p));
    const auto ax = spmv_sequential(a, x);
    const auto rhs = permute_vector(std::span<const double>(ax), p);
    EXPECT_LE(oracle::rel_err(lhs, rhs), 1e-12);
  }
}

TEST(Rcm, RecoversBandOfShuffledBandedMatrix) {
  const auto a = gen_banded(4096, 8, 7);
  const auto s = apply_symmetric_perm(a, random_perm(4096, 13));
  const auto r = apply_symmetric_perm(s, rcm_order(s));
  EXPECT_EQ(bandwidth(a), 8u);
  EXPECT_EQ(bandwidth(s), 4056u);
  EXPECT_EQ(bandwidth(r), 8u);
}

TEST(Rcm, ReducesLaplacianBandwidth) {
  const auto l = gen_laplacian_2d(32);
  const auto s = apply_symmetric_perm(l, random_perm(l.nrows(), 3));
  const auto r = apply_symmetric_perm(s, rcm_order(s));
  EXPECT_LE(bandwidth(r), 2 * 32u);
  EXPECT_LT(bandwidth(r), bandwidth(s) / 10);
}

TEST(Rcm, PathGraphIsOrderedEndToEnd) {
  // Path 0-1-2-3-4 relabelled as 2-4-0-3-1; RCM must lay it out as a path.
  const std::vector<index_t> chain{2, 4, 0, 3, 1};
  TripletMatrix t{5, 5, {}, false};
  for (index_t i = 0; i < 5; ++i) t.entries.push_back({i, i, 1.0});
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    t.entries.push_back({chain[k], chain[k + 1], 1.0});
    t.entries.push_back({chain[k + 1], chain[k], 1.0});
  }
  const auto a = coo_to_csr(t);
  EXPECT_EQ(bandwidth(apply_symmetric_perm(a, rcm_order(a))), 1u);
  // Cuthill-McKee starts at the lower-indexed end of the path, 1; RCM reverses.
  EXPECT_EQ(cuthill_mckee_order(a), (std::vector<index_t>{1, 3, 0, 4, 2}));
}

TEST(Rcm, ComponentsAndIsolatedVertices) {
  // Components {1,4} and {2,5}; vertices 0 and 3 have no neighbours.
  TripletMatrix t{6, 6, {}, false};
  for (index_t i = 0; i < 6; ++i) t.entries.push_back({i, i, 1.0});
  for (auto [u, v] : {std::pair<index_t, index_t>{1, 4}, {2, 5}}) {
    t.entries.push_back({u, v, 1.0});
    t.entries.push_back({v, u, 1.0});
  }
  const auto a = coo_to_csr(t);
  EXPECT_EQ(cuthill_mckee_order(a), (std::vector<index_t>{1, 4, 2, 5, 0, 3}));
  EXPECT_EQ(rcm_order(a).new_to_old()[0], 3u);
}

TEST(Rcm, IsDeterministicAndValid) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = gen_powerlaw(500, 1, 2.0, seed);
    const auto p = rcm_order(a);
    EXPECT_EQ(p.size(), 500u);
    EXPECT_EQ(rcm_order(a), p);
  }
}

TEST(Rcm, RejectsUnsymmetricPattern) {
  const auto a = coo_to_csr({2, 2, {{0, 1, 1.0}}, false});
  EXPECT_THROW(rcm_order(a), MatrixError);
}

TEST(PermutationFile, RoundTripAndErrors) {
  const auto p = random_perm(17, 3);
  EXPECT_EQ(parse_permutation(format_permutation(p)), p);
  EXPECT_EQ(parse_permutation("% from a partitioner\nperm 3\n2\n% middle\n0\n1\n"), Permutation({2, 0, 1}));
  EXPECT_THROW(parse_permutation("3\n2\n0\n1\n"), PermutationError);
  EXPECT_THROW(parse_permutation("perm 3\n2\n0\n"), PermutationError);
  EXPECT_THROW(parse_permutation("perm 2\n0\n1\n1\n"), PermutationError);
  EXPECT_THROW(parse_permutation("perm 2\n0\n0\n"), PermutationError);

  const auto path = std::filesystem::temp_directory_path() / "spmvlab_test_perm.perm";
  save_permutation_file(path, p);
  EXPECT_EQ(load_permutation_file(path), p);
  std::filesystem::remove(path);
}
