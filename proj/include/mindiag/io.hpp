#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mindiag/hermitian.hpp"

namespace mindiag::io {

/// Malformed input. field() names the offending JSON field, or is empty
/// when the document itself is unreadable.
class InputError : public std::runtime_error {
 public:
  InputError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// { "n": 3, "real": [[...], ...], "imag": [[...], ...], "metadata": {"k": "v"} }
/// with imag and metadata optional.
struct ProblemFile {
  HermitianMatrix matrix;
  std::map<std::string, std::string> metadata;
};

ProblemFile parse_problem(std::string_view json_text);
std::string dump_problem(const ProblemFile& problem);

/// Whole file as bytes; throws InputError on I/O failure.
std::string read_file(const std::filesystem::path& path);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

// SDPA sparse format ("dat-s"): minimize c^T y subject to
// sum_i F_i y_i - F_0 >= 0, block diagonal.
struct SdpaEntry {
  int matrix = 0;  // 0 for F_0
  int block = 1;
  int row = 1;     // 1-based, row <= col
  int col = 1;
  double value = 0.0;

  friend bool operator==(const SdpaEntry&, const SdpaEntry&) = default;
};

struct SdpaProblem {
  int variables = 0;
  std::vector<int> block_sizes;
  std::vector<double> objective;
  std::vector<SdpaEntry> entries;  // sorted by (matrix, block, row, col)
};

/// Variables (w, x_1, ..., x_n); blocks w I - emb(A0 + Diag x) >= 0 and
/// w I + emb(A0 + Diag x) >= 0 with emb the real 2n x 2n embedding.
SdpaProblem sdpa_from_problem(const HermitianMatrix& a0);

/// Header comments recording n, the variable layout and the input digest.
std::vector<std::string> sdpa_header(Eigen::Index n, std::string_view input_sha256);

/// Comment lines, then m, nBlocks, block sizes, c and one entry per line.
std::string write_sdpa(const SdpaProblem& p, const std::vector<std::string>& comments = {});

/// Reads the sparse grammar: leading comment lines start with '"' or '*';
/// separators may be spaces, tabs, commas or braces. Throws InputError.
SdpaProblem parse_sdpa(std::string_view text);

/// Dense symmetric F_k for one block, from the parsed entries.
RMatrix sdpa_block_matrix(const SdpaProblem& p, int matrix, int block);

}  // namespace mindiag::io
