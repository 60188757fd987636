#include "mindiag/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace mindiag::io {

namespace {

using nlohmann::json;

RMatrix parse_square(const json& doc, const std::string& field, Eigen::Index n) {
  const auto it = doc.find(field);
  if (it == doc.end()) throw InputError(field, "missing");
  if (!it->is_array() || static_cast<Eigen::Index>(it->size()) != n)
    throw InputError(field, "expected an array of " + std::to_string(n) + " rows");
  RMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = (*it)[static_cast<std::size_t>(i)];
    const std::string where = field + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw InputError(where, "expected an array of " + std::to_string(n) + " numbers");
    for (Eigen::Index j = 0; j < n; ++j) {
      const json& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number()) throw InputError(where + "[" + std::to_string(j) + "]", "expected a number");
      m(i, j) = v.get<double>();
      if (!std::isfinite(m(i, j))) throw InputError(where + "[" + std::to_string(j) + "]", "not finite");
    }
  }
  return m;
}

json matrix_rows(const RMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Shortest decimal that round-trips.
std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

ProblemFile parse_problem(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError("", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("", "top level must be an object");
  const auto n_it = doc.find("n");
  if (n_it == doc.end()) throw InputError("n", "missing");
  if (!n_it->is_number_integer() || n_it->get<long long>() < 1) throw InputError("n", "expected a positive integer");
  const auto n = static_cast<Eigen::Index>(n_it->get<long long>());

  const RMatrix re = parse_square(doc, "real", n);
  const RMatrix im = doc.contains("imag") ? parse_square(doc, "imag", n) : RMatrix::Zero(n, n);

  ProblemFile out;
  try {
    out.matrix = HermitianMatrix::from_parts(re, im);
  } catch (const std::invalid_argument& e) {
    throw InputError(doc.contains("imag") ? "real/imag" : "real", std::string("not Hermitian: ") + e.what());
  }
  if (const auto m = doc.find("metadata"); m != doc.end()) {
    if (!m->is_object()) throw InputError("metadata", "expected an object of strings");
    for (const auto& [key, value] : m->items()) {
      if (!value.is_string()) throw InputError("metadata." + key, "expected a string");
      out.metadata.emplace(key, value.get<std::string>());
    }
  }
  return out;
}

std::string dump_problem(const ProblemFile& problem) {
  nlohmann::ordered_json doc;
  const CMatrix& a = problem.matrix.matrix();
  doc["n"] = a.rows();
  doc["real"] = matrix_rows(a.real());
  if (a.imag().cwiseAbs().maxCoeff() > 0.0) doc["imag"] = matrix_rows(a.imag());
  if (!problem.metadata.empty()) doc["metadata"] = problem.metadata;
  return doc.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

SdpaProblem sdpa_from_problem(const HermitianMatrix& a0) {
  const int n = static_cast<int>(a0.dim());
  const RMatrix emb = complex_to_real_embed(a0);
  SdpaProblem p;
  p.variables = n + 1;
  p.block_sizes = {2 * n, 2 * n};
  p.objective.assign(static_cast<std::size_t>(n + 1), 0.0);
  p.objective[0] = 1.0;
  for (int block = 1; block <= 2; ++block) {
    const double sign = block == 1 ? 1.0 : -1.0;
    for (int i = 0; i < 2 * n; ++i)
      for (int j = i; j < 2 * n; ++j)
        if (emb(i, j) != 0.0) p.entries.push_back({0, block, i + 1, j + 1, sign * emb(i, j)});
    for (int i = 0; i < 2 * n; ++i) p.entries.push_back({1, block, i + 1, i + 1, 1.0});
    for (int k = 0; k < n; ++k) {
      p.entries.push_back({k + 2, block, k + 1, k + 1, -sign});
      p.entries.push_back({k + 2, block, n + k + 1, n + k + 1, -sign});
    }
  }
  std::sort(p.entries.begin(), p.entries.end(), [](const SdpaEntry& a, const SdpaEntry& b) {
    return std::tie(a.matrix, a.block, a.row, a.col) < std::tie(b.matrix, b.block, b.row, b.col);
  });
  return p;
}

std::vector<std::string> sdpa_header(Eigen::Index n, std::string_view input_sha256) {
  const std::string k = std::to_string(n);
  return {"mindiag: minimize w s.t. w I -/+ emb(A0 + Diag(x)) >= 0, emb = [[Re, -Im], [Im, Re]]",
          "n = " + k + "; variables: 1 = w, 2.." + std::to_string(n + 1) + " = x_1..x_" + k +
              "; blocks 1 and 2 have size " + std::to_string(2 * n),
          "input sha256 " + std::string(input_sha256)};
}

std::string write_sdpa(const SdpaProblem& p, const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) out += "\" " + c + "\n";
  out += std::to_string(p.variables) + "\n";
  out += std::to_string(p.block_sizes.size()) + "\n";
  for (std::size_t b = 0; b < p.block_sizes.size(); ++b)
    out += (b ? " " : "") + std::to_string(p.block_sizes[b]);
  out += "\n";
  for (std::size_t i = 0; i < p.objective.size(); ++i) out += (i ? " " : "") + format_number(p.objective[i]);
  out += "\n";
  for (const auto& e : p.entries)
    out += std::to_string(e.matrix) + " " + std::to_string(e.block) + " " + std::to_string(e.row) + " " +
           std::to_string(e.col) + " " + format_number(e.value) + "\n";
  return out;
}

SdpaProblem parse_sdpa(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      if (header && (line[first] == '"' || line[first] == '*')) continue;
      header = false;
      for (char& ch : line)
        if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')' || ch == '\r') ch = ' ';
      lines.push_back(line);
    }
  }
  std::size_t li = 0;
  auto first_token = [&](const char* what) {
    if (li >= lines.size()) throw InputError(what, "unexpected end of file");
    std::istringstream ls(lines[li++]);
    long v = 0;
    if (!(ls >> v)) throw InputError(what, "expected an integer");
    return v;
  };
  // Reads count numbers that may span several lines, ignoring the rest of
  // the last line.
  auto numbers = [&](std::size_t count, const char* what) {
    std::vector<double> out;
    while (out.size() < count) {
      if (li >= lines.size()) throw InputError(what, "unexpected end of file");
      std::istringstream ls(lines[li++]);
      double v = 0.0;
      while (out.size() < count && ls >> v) out.push_back(v);
    }
    return out;
  };

  SdpaProblem p;
  const long m = first_token("mDIM");
  if (m < 1) throw InputError("mDIM", "must be positive");
  p.variables = static_cast<int>(m);
  const long nb = first_token("nBLOCK");
  if (nb < 1) throw InputError("nBLOCK", "must be positive");
  for (double s : numbers(static_cast<std::size_t>(nb), "bLOCKsTRUCT")) {
    if (s == 0.0 || s != std::floor(s)) throw InputError("bLOCKsTRUCT", "block sizes must be nonzero integers");
    p.block_sizes.push_back(static_cast<int>(s));
  }
  p.objective = numbers(static_cast<std::size_t>(m), "c");

  for (; li < lines.size(); ++li) {
    std::istringstream ls(lines[li]);
    std::array<double, 5> f{};
    if (!(ls >> f[0] >> f[1] >> f[2] >> f[3] >> f[4]))
      throw InputError("entry " + std::to_string(p.entries.size() + 1), "expected 5 numbers");
    SdpaEntry e{static_cast<int>(f[0]), static_cast<int>(f[1]), static_cast<int>(f[2]), static_cast<int>(f[3]), f[4]};
    const std::string where = "entry " + std::to_string(p.entries.size() + 1);
    if (e.matrix < 0 || e.matrix > m) throw InputError(where, "matrix index out of range");
    if (e.block < 1 || e.block > nb) throw InputError(where, "block index out of range");
    const int size = std::abs(p.block_sizes[static_cast<std::size_t>(e.block - 1)]);
    if (e.row < 1 || e.col < 1 || e.row > size || e.col > size) throw InputError(where, "position out of range");
    if (e.row > e.col) std::swap(e.row, e.col);
    p.entries.push_back(e);
  }
  return p;
}

RMatrix sdpa_block_matrix(const SdpaProblem& p, int matrix, int block) {
  if (block < 1 || block > static_cast<int>(p.block_sizes.size())) throw std::out_of_range("block index");
  const int size = std::abs(p.block_sizes[static_cast<std::size_t>(block - 1)]);
  RMatrix f = RMatrix::Zero(size, size);
  for (const auto& e : p.entries) {
    if (e.matrix != matrix || e.block != block) continue;
    f(e.row - 1, e.col - 1) = e.value;
    f(e.col - 1, e.row - 1) = e.value;
  }
  return f;
}

}  // namespace mindiag::io
