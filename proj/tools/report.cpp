#include "report.hpp"

#include <sstream>

namespace mindiag::cli {

namespace {

Json tolerances_json(const RunInfo& info) {
  Json t;
  t["gap_tol"] = info.params.gap_tol;
  t["cluster_tol"] = info.params.cluster_tol;
  t["tie_tol"] = info.certify.tie_tol;
  t["eps_min"] = info.params.eps_min;
  return t;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string join(const RVector& v) {
  std::ostringstream os;
  os.precision(12);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v(i);
  return os.str();
}

}  // namespace

Json vector_json(const RVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json complex_matrix_json(const CMatrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    re.push_back(vector_json(m.row(i).real().transpose()));
    im.push_back(vector_json(m.row(i).imag().transpose()));
  }
  Json out;
  out["real"] = std::move(re);
  out["imag"] = std::move(im);
  return out;
}

Json certificate_json(const MinimalityCertificate& c) {
  Json j;
  j["verdict"] = to_string(c.verdict);
  j["side"] = to_string(c.side);
  j["norm"] = c.norm;
  j["lambda_max"] = c.lambda_max;
  j["lambda_min"] = c.lambda_min;
  j["top_multiplicity"] = c.qmax ? Json(c.qmax->multiplicity()) : Json(nullptr);
  j["bottom_multiplicity"] = c.qmin ? Json(c.qmin->multiplicity()) : Json(nullptr);
  j["gap"] = optional_number(c.gap);
  j["duality_gap"] = optional_number(c.duality_gap);
  j["moment_iterations"] = c.iterations;
  j["u"] = c.u ? complex_matrix_json(*c.u) : Json(nullptr);
  j["v"] = c.v ? complex_matrix_json(*c.v) : Json(nullptr);
  j["intersection_point"] = c.intersection_point ? vector_json(*c.intersection_point) : Json(nullptr);
  j["descent_direction"] = c.descent_direction ? vector_json(*c.descent_direction) : Json(nullptr);
  j["descent_slope"] = optional_number(c.descent_slope);
  j["note"] = c.note;
  return j;
}

Json optimize_report(const RunInfo& info, const OptimizeResult& r) {
  Json j;
  j["command"] = info.command;
  j["input_sha256"] = info.input_sha256;
  j["n"] = r.x_star.size();
  j["seed"] = info.seed;
  j["starts"] = info.starts;
  j["max_iters"] = info.params.max_iters;
  j["step_rule"] = to_string(info.params.step_rule);
  j["tolerances"] = tolerances_json(info);
  j["method"] = r.method;
  j["start_index"] = r.start_index;
  j["iterations"] = r.iterations;
  j["phi_star"] = r.phi_star;
  j["x_star"] = vector_json(r.x_star.values());
  j["verdict"] = to_string(r.certificate.verdict);
  j["gap"] = optional_number(r.certificate.gap);
  j["certificate"] = certificate_json(r.certificate);
  Json trace = Json::array();
  for (const auto& t : r.trace) trace.push_back(Json::array({t.iteration, t.phi}));
  j["trace"] = std::move(trace);
  return j;
}

Json certify_report(const RunInfo& info, const RealDiagonal& x, const MinimalityCertificate& c) {
  Json j;
  j["command"] = info.command;
  j["input_sha256"] = info.input_sha256;
  j["n"] = x.size();
  j["tolerances"] = tolerances_json(info);
  j["phi"] = c.norm;
  j["x"] = vector_json(x.values());
  j["verdict"] = to_string(c.verdict);
  j["gap"] = optional_number(c.gap);
  j["certificate"] = certificate_json(c);
  return j;
}

Json rank_one_report(const UnitVector& h, const RankOneSolution& s) {
  Json j;
  j["command"] = "rank1";
  j["h"] = complex_matrix_json(h.values().transpose());
  j["case"] = to_string(s.case_tag);
  j["big_index"] = s.big_index >= 0 ? Json(s.big_index) : Json(nullptr);
  j["minimal_norm"] = s.minimal_norm;
  j["diagonal"] = vector_json(s.diagonal.values());
  j["unique"] = s.unique;
  if (s.case_tag != RankOneCase::big_coordinate) {
    const UnitVector k = orthogonal_partner(h);
    j["partner"] = complex_matrix_json(k.values().transpose());
    const RVector lengths = h.squared_moduli();
    j["polygon_angles"] = vector_json(closed_polygon_angles({lengths.data(), static_cast<std::size_t>(lengths.size())}));
    Json witnesses = Json::array();
    for (Eigen::Index j0 = 0; j0 < h.size(); ++j0) {
      if (std::abs(h[j0]) > 1e-12) continue;
      const NonuniquePair pair = nonunique_diagonals(h, j0);
      Json w;
      w["index"] = j0;
      w["plus"] = vector_json(RVector(pair.plus.diagonal_entries() - lengths));
      w["minus"] = vector_json(RVector(pair.minus.diagonal_entries() - lengths));
      witnesses.push_back(std::move(w));
    }
    j["zero_coordinate_witnesses"] = std::move(witnesses);
  }
  return j;
}

std::string optimize_summary(const OptimizeResult& r) {
  std::ostringstream os;
  os.precision(15);
  os << "method    " << r.method << " (start " << r.start_index << ", " << r.iterations << " iterations)\n";
  os << "phi*      " << r.phi_star << "\n";
  os << "verdict   " << to_string(r.certificate.verdict);
  if (r.certificate.gap) os << " (gap " << *r.certificate.gap << ")";
  os << "\n";
  if (!r.certificate.note.empty()) os << "note      " << r.certificate.note << "\n";
  os << "x*        " << join(r.x_star.values()) << "\n";
  return os.str();
}

std::string certify_summary(const MinimalityCertificate& c) {
  std::ostringstream os;
  os.precision(15);
  os << "norm      " << c.norm << "\n";
  os << "side      " << to_string(c.side) << "\n";
  os << "verdict   " << to_string(c.verdict);
  if (c.gap) os << " (gap " << *c.gap << ")";
  os << "\n";
  if (c.descent_direction) os << "descent   " << join(*c.descent_direction) << "\n";
  if (!c.note.empty()) os << "note      " << c.note << "\n";
  return os.str();
}

std::string rank_one_summary(const Json& report) {
  std::ostringstream os;
  os.precision(15);
  os << "case      " << report["case"].get<std::string>();
  if (!report["big_index"].is_null()) os << " (j0 = " << report["big_index"].get<long>() << ")";
  os << "\n";
  os << "norm      " << report["minimal_norm"].get<double>() << "\n";
  os << "unique    " << (report["unique"].get<bool>() ? "yes" : "no") << "\n";
  auto row = [&](const Json& a) {
    std::ostringstream r;
    r.precision(12);
    bool first = true;
    for (const auto& v : a) {
      r << (first ? "" : " ") << v.get<double>();
      first = false;
    }
    return r.str();
  };
  os << "diagonal  " << row(report["diagonal"]) << "\n";
  if (report.contains("partner")) {
    os << "partner   re " << row(report["partner"]["real"][0]) << "\n";
    os << "          im " << row(report["partner"]["imag"][0]) << "\n";
    os << "angles    " << row(report["polygon_angles"]) << "\n";
    for (const auto& w : report["zero_coordinate_witnesses"]) {
      os << "witness   j0 = " << w["index"].get<long>() << "\n";
      os << "  +1/2    " << row(w["plus"]) << "\n";
      os << "  -1/2    " << row(w["minus"]) << "\n";
    }
  }
  return os.str();
}

}  // namespace mindiag::cli
