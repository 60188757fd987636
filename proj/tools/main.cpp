// mindiag: minimize, certify and export best diagonal approximants.
//
// Exit codes: 0 success / minimal, 1 not minimal (certify), 2 bad input or
// I/O failure, 3 inconclusive or solver failure.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mindiag/io.hpp"
#include "report.hpp"

namespace {

using namespace mindiag;
using mindiag::cli::Json;

enum Exit : int { kOk = 0, kNotMinimal = 1, kBadInput = 2, kInconclusive = 3 };

struct Common {
  std::string input;
  bool json = false;
  double gap_tol = OptimizeParams{}.gap_tol;
  double cluster_tol = OptimizeParams{}.cluster_tol;
};

void add_common(CLI::App& cmd, Common& c) {
  cmd.add_option("input", c.input, "problem file (JSON)")->required();
  cmd.add_flag("--json", c.json, "print the machine-readable report");
  cmd.add_option("--gap-tol", c.gap_tol, "certificate gap accepted as minimal")->capture_default_str();
  cmd.add_option("--cluster-tol", c.cluster_tol, "relative eigenvalue clustering tolerance")->capture_default_str();
}

struct Loaded {
  io::ProblemFile problem;
  std::string digest;
};

Loaded load(const std::string& path) {
  const std::string bytes = io::read_file(path);
  return {io::parse_problem(bytes), io::sha256_hex(bytes)};
}

void emit(bool as_json, const Json& report, const std::string& summary) {
  if (as_json)
    std::cout << report.dump(2) << "\n";
  else
    std::cout << summary;
}

int run_minimize(const Common& c, std::uint64_t seed, int starts, int max_iters, const std::string& rule) {
  const Loaded in = load(c.input);
  cli::RunInfo info;
  info.command = "minimize";
  info.input_sha256 = in.digest;
  info.params.gap_tol = c.gap_tol;
  info.params.cluster_tol = c.cluster_tol;
  info.params.max_iters = max_iters;
  info.params.step_rule = step_rule_from_string(rule);
  info.seed = seed;
  info.starts = starts;
  const OptimizeResult r = dispatch(in.problem.matrix, info.params, starts, seed);
  emit(c.json, cli::optimize_report(info, r), cli::optimize_summary(r));
  return r.certificate.verdict == Verdict::minimal ? kOk : kInconclusive;
}

int run_certify(const Common& c, const std::vector<double>& x_in) {
  const Loaded in = load(c.input);
  const Eigen::Index n = in.problem.matrix.dim();
  if (!x_in.empty() && static_cast<Eigen::Index>(x_in.size()) != n)
    throw io::InputError("--x", "expected " + std::to_string(n) + " values, got " + std::to_string(x_in.size()));
  const RealDiagonal x = x_in.empty() ? RealDiagonal::zero(n)
                                      : RealDiagonal(RVector(Eigen::Map<const RVector>(x_in.data(), n)));
  cli::RunInfo info;
  info.command = "certify";
  info.input_sha256 = in.digest;
  info.params.gap_tol = c.gap_tol;
  info.params.cluster_tol = c.cluster_tol;
  const MinimalityCertificate cert = certify_result(in.problem.matrix, x, info.params);
  emit(c.json, cli::certify_report(info, x, cert), cli::certify_summary(cert));
  switch (cert.verdict) {
    case Verdict::minimal: return kOk;
    case Verdict::not_minimal: return kNotMinimal;
    case Verdict::inconclusive: return kInconclusive;
  }
  return kInconclusive;
}

int run_export(const std::string& input, const std::string& out_path) {
  const Loaded in = load(input);
  const std::string text = io::write_sdpa(io::sdpa_from_problem(in.problem.matrix), io::sdpa_header(in.problem.matrix.dim(), in.digest));
  std::ofstream out(out_path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) throw io::InputError("", "cannot write " + out_path);
  return kOk;
}

std::vector<double> parse_numbers(const std::string& field, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw io::InputError(field, "not a number: '" + item + "'");
    }
  }
  return out;
}

int run_rank1(const std::string& file, const std::string& re_text, const std::string& im_text, bool as_json) {
  std::vector<double> re, im;
  if (!file.empty()) {
    const auto doc = nlohmann::json::parse(io::read_file(file), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw io::InputError("", "invalid JSON in " + file);
    auto numbers = [&](const char* key, std::vector<double>& dst) {
      if (!doc.contains(key)) return;
      if (!doc[key].is_array()) throw io::InputError(key, "expected an array of numbers");
      for (const auto& v : doc[key]) {
        if (!v.is_number()) throw io::InputError(key, "expected an array of numbers");
        dst.push_back(v.get<double>());
      }
    };
    numbers("real", re);
    numbers("imag", im);
    if (re.empty()) throw io::InputError("real", "missing");
  } else {
    if (re_text.empty()) throw io::InputError("--h", "give h as a file or with --h");
    re = parse_numbers("--h", re_text);
    if (!im_text.empty()) im = parse_numbers("--h-imag", im_text);
  }
  if (!im.empty() && im.size() != re.size()) throw io::InputError("imag", "length differs from real");
  CVector h(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) h(static_cast<Eigen::Index>(i)) = Complex(re[i], im.empty() ? 0.0 : im[i]);
  std::optional<UnitVector> u;
  try {
    u.emplace(h, 1e-8);
  } catch (const std::invalid_argument& e) {
    throw io::InputError("h", e.what());
  }
  const Json report = cli::rank_one_report(*u, minimizing_diagonal(*u));
  emit(as_json, report, cli::rank_one_summary(report));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Best diagonal approximants of Hermitian matrices"};
  app.require_subcommand(1);

  Common mc;
  std::uint64_t seed = 0;
  int starts = 1;
  int max_iters = OptimizeParams{}.max_iters;
  std::string rule = to_string(OptimizeParams{}.step_rule);
  CLI::App* minimize = app.add_subcommand("minimize", "minimize ||A0 + Diag(x)|| and certify the result");
  add_common(*minimize, mc);
  minimize->add_option("--seed", seed, "seed for the perturbed starts")->capture_default_str();
  minimize->add_option("--starts", starts, "number of starts")->capture_default_str()->check(CLI::PositiveNumber);
  minimize->add_option("--max-iters", max_iters, "iteration cap per start")->capture_default_str()->check(CLI::PositiveNumber);
  minimize->add_option("--step-rule", rule, "quasi_newton, polyak or diminishing")->capture_default_str();

  Common cc;
  std::vector<double> x;
  CLI::App* certify = app.add_subcommand("certify", "decide whether A0 + Diag(x) is minimal");
  add_common(*certify, cc);
  certify->add_option("--x", x, "comma-separated diagonal (default 0)")->delimiter(',');

  std::string sdpa_in, sdpa_out;
  CLI::App* exporter = app.add_subcommand("export-sdpa", "write the real SDP in SDPA sparse format");
  exporter->add_option("input", sdpa_in, "problem file (JSON)")->required();
  exporter->add_option("output", sdpa_out, "output .dat-s file")->required();

  std::string h_file, h_re, h_im;
  bool h_json = false;
  CLI::App* rank1 = app.add_subcommand("rank1", "closed-form minimizing diagonal of h h^*");
  rank1->set_help_flag("--help", "print this help message and exit");
  rank1->add_option("file", h_file, "JSON with arrays real and optional imag");
  rank1->add_option("--h", h_re, "comma-separated real parts of h");
  rank1->add_option("--h-imag", h_im, "comma-separated imaginary parts of h");
  rank1->add_flag("--json", h_json, "print the machine-readable report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*minimize) return run_minimize(mc, seed, starts, max_iters, rule);
    if (*certify) return run_certify(cc, x);
    if (*exporter) return run_export(sdpa_in, sdpa_out);
    if (*rank1) return run_rank1(h_file, h_re, h_im, h_json);
  } catch (const io::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kInconclusive;
  }
  return kBadInput;
}
