#pragma once

#include <string>

#include "json.hpp"
#include "mindiag/optimize.hpp"
#include "mindiag/rank_one.hpp"

namespace mindiag::cli {

using Json = nlohmann::ordered_json;

struct RunInfo {
  std::string command;
  std::string input_sha256;
  OptimizeParams params;
  CertifyOptions certify;
  std::uint64_t seed = 0;
  int starts = 1;
};

Json vector_json(const RVector& v);
Json complex_matrix_json(const CMatrix& m);
Json certificate_json(const MinimalityCertificate& c);

/// Keys in a fixed order; equal inputs give byte-identical dumps.
Json optimize_report(const RunInfo& info, const OptimizeResult& r);
Json certify_report(const RunInfo& info, const RealDiagonal& x, const MinimalityCertificate& c);
Json rank_one_report(const UnitVector& h, const RankOneSolution& s);

std::string optimize_summary(const OptimizeResult& r);
std::string certify_summary(const MinimalityCertificate& c);
std::string rank_one_summary(const Json& report);

}  // namespace mindiag::cli
