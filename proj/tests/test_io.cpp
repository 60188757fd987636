#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "mindiag/io.hpp"
#include "mindiag/optimize.hpp"
#include "test_support.hpp"

using namespace mindiag;
using namespace mindiag::io;

namespace {

const std::filesystem::path kData = MINDIAG_TEST_DATA;

std::string field_of(std::string_view text) {
  try {
    parse_problem(text);
  } catch (const InputError& e) {
    return e.field();
  }
  return "<accepted>";
}

double min_eig(const RMatrix& m) { return eigendecompose(m).lambda_min(); }

}  // namespace

TEST(ProblemFile, ParsesRealAndComplexInput) {
  const ProblemFile p = parse_problem(R"({"n": 2, "real": [[0, 1], [1, 0]]})");
  EXPECT_EQ(p.matrix.dim(), 2);
  EXPECT_EQ(p.matrix(0, 1), Complex(1.0));
  EXPECT_TRUE(p.metadata.empty());

  const ProblemFile c = parse_problem(
      R"({"n": 2, "real": [[1, 0], [0, 2]], "imag": [[0, -1], [1, 0]], "metadata": {"source": "pauli"}})");
  EXPECT_EQ(c.matrix(0, 1), Complex(0.0, -1.0));
  EXPECT_EQ(c.matrix(1, 0), Complex(0.0, 1.0));
  EXPECT_EQ(c.metadata.at("source"), "pauli");
}

TEST(ProblemFile, MalformedInputNamesTheField) {
  EXPECT_EQ(field_of("{not json"), "");
  EXPECT_EQ(field_of("[1, 2]"), "");
  EXPECT_EQ(field_of(R"({"real": [[1]]})"), "n");
  EXPECT_EQ(field_of(R"({"n": 0, "real": []})"), "n");
  EXPECT_EQ(field_of(R"({"n": 1.5, "real": [[1]]})"), "n");
  EXPECT_EQ(field_of(R"({"n": 2})"), "real");
  EXPECT_EQ(field_of(R"({"n": 2, "real": [[0, 1]]})"), "real");
  EXPECT_EQ(field_of(R"({"n": 2, "real": [[0, 1], [1]]})"), "real[1]");
  EXPECT_EQ(field_of(R"({"n": 2, "real": [[0, "a"], [1, 0]]})"), "real[0][1]");
  EXPECT_EQ(field_of(R"({"n": 2, "real": [[0, 1], [2, 0]]})"), "real");
  EXPECT_EQ(field_of(R"({"n": 2, "real": [[0, 1], [1, 0]], "imag": [[0, 1], [1, 0]]})"), "real/imag");
  EXPECT_EQ(field_of(R"({"n": 1, "real": [[1]], "metadata": {"k": 3}})"), "metadata.k");
  EXPECT_EQ(field_of(R"({"n": 1, "real": [[1]], "metadata": []})"), "metadata");
}

TEST(ProblemFile, DumpRoundTrips) {
  std::mt19937_64 rng(3);
  ProblemFile p{mindiag::testing::random_hermitian(4, rng), {{"seed", "3"}}};
  const ProblemFile back = parse_problem(dump_problem(p));
  EXPECT_EQ(back.matrix.matrix(), p.matrix.matrix());
  EXPECT_EQ(back.metadata, p.metadata);
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Sdpa, ScalarInput) {
  const SdpaProblem p = sdpa_from_problem(HermitianMatrix(RMatrix(RMatrix::Constant(1, 1, 2.5))));
  EXPECT_EQ(p.variables, 2);
  EXPECT_EQ(p.block_sizes, (std::vector<int>{2, 2}));
  EXPECT_EQ(p.objective, (std::vector<double>{1.0, 0.0}));
  // Block 1: w - (a + x1) >= 0 twice; block 2: w + (a + x1) >= 0 twice.
  for (int block : {1, 2}) {
    const double s = block == 1 ? 1.0 : -1.0;
    EXPECT_EQ(sdpa_block_matrix(p, 0, block), RMatrix(s * 2.5 * RMatrix::Identity(2, 2)));
    EXPECT_EQ(sdpa_block_matrix(p, 1, block), RMatrix(RMatrix::Identity(2, 2)));
    EXPECT_EQ(sdpa_block_matrix(p, 2, block), RMatrix(-s * RMatrix::Identity(2, 2)));
  }
}

TEST(Sdpa, RealInputGivesDuplicatedDiagonalBlocks) {
  RMatrix a(2, 2);
  a << 1, 2, 2, -3;
  const SdpaProblem p = sdpa_from_problem(HermitianMatrix(a));
  const RMatrix f0 = sdpa_block_matrix(p, 0, 1);
  EXPECT_EQ(f0.topLeftCorner(2, 2), a);
  EXPECT_EQ(f0.bottomRightCorner(2, 2), a);
  EXPECT_EQ(f0.topRightCorner(2, 2).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Sdpa, EntriesSortedAndUpperTriangular) {
  std::mt19937_64 rng(5);
  const SdpaProblem p = sdpa_from_problem(mindiag::testing::random_hermitian(4, rng));
  for (std::size_t i = 0; i < p.entries.size(); ++i) {
    const auto& e = p.entries[i];
    EXPECT_LE(e.row, e.col);
    EXPECT_NE(e.value, 0.0);
    if (i > 0) {
      const auto& d = p.entries[i - 1];
      EXPECT_LT(std::tie(d.matrix, d.block, d.row, d.col), std::tie(e.matrix, e.block, e.row, e.col));
    }
  }
}

TEST(Sdpa, WriteParseRoundTrip) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    const SdpaProblem p = sdpa_from_problem(mindiag::testing::random_hermitian(1 + rep, rng));
    const SdpaProblem q = parse_sdpa(write_sdpa(p, {"comment"}));
    EXPECT_EQ(q.variables, p.variables);
    EXPECT_EQ(q.block_sizes, p.block_sizes);
    EXPECT_EQ(q.objective, p.objective);
    EXPECT_EQ(q.entries, p.entries);
  }
}

TEST(Sdpa, ParserAcceptsGrammarVariants) {
  const SdpaProblem p = parse_sdpa(
      "* a comment\n\"another\"\n2 = mDIM\n1 = nBLOCK\n{2}\n{1.0, 0}\n0 1 1 1 -1\n1,1,1,1,1\n2 1 2 1 0.5\n");
  EXPECT_EQ(p.variables, 2);
  EXPECT_EQ(p.block_sizes, std::vector<int>{2});
  ASSERT_EQ(p.entries.size(), 3u);
  EXPECT_EQ(p.entries[2].row, 1);  // lower-triangle input is mirrored
  EXPECT_EQ(p.entries[2].col, 2);
  EXPECT_THROW(parse_sdpa("2\n1\n2\n1 0\n0 1 3 3 1\n"), InputError);
  EXPECT_THROW(parse_sdpa("2\n1\n2\n1 0\n5 1 1 1 1\n"), InputError);
  EXPECT_THROW(parse_sdpa("2\n1\n2\n1\n"), InputError);
  EXPECT_THROW(parse_sdpa("2\n1\n2\n1 0\n0 1 1\n"), InputError);
}

TEST(Sdpa, OptimumOfLibraryIsFeasibleForTheExport) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    const HermitianMatrix a = mindiag::testing::random_hermitian(2 + rep, rng);
    const OptimizeResult r = dispatch(a);
    const SdpaProblem p = parse_sdpa(write_sdpa(sdpa_from_problem(a)));
    RVector y(p.variables);
    y << r.phi_star, r.x_star.values();
    for (int block = 1; block <= 2; ++block) {
      RMatrix s = -sdpa_block_matrix(p, 0, block);
      for (int k = 1; k <= p.variables; ++k) s += y(k - 1) * sdpa_block_matrix(p, k, block);
      EXPECT_GE(min_eig(s), -1e-9);
      // Tight at the optimum: some slack eigenvalue vanishes.
      EXPECT_LE(min_eig(s), 1e-9);
    }
  }
}

TEST(SdpaGolden, ExportIsByteIdentical) {
  const std::string json = read_file(kData / "golden_3x3.json");
  const ProblemFile problem = parse_problem(json);
  EXPECT_EQ(write_sdpa(sdpa_from_problem(problem.matrix), sdpa_header(3, sha256_hex(json))), read_file(kData / "golden_3x3.dat-s"));
}

TEST(SdpaGolden, ExternalOptimumMatchesLibrary) {
  std::ifstream in(kData / "golden_3x3.optimum");
  std::string line;
  double external = 0.0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') external = std::stod(line);
  const ProblemFile problem = parse_problem(read_file(kData / "golden_3x3.json"));
  const OptimizeResult r = dispatch(problem.matrix);
  EXPECT_EQ(r.certificate.verdict, Verdict::minimal);
  EXPECT_NEAR(r.phi_star, external, 1e-5);
}
