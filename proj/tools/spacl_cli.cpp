// Command-line driver for MMSB simulation, SPACL fitting, evaluation, and
// the experiment presets. Exit codes: 0 success, 1 estimator failure,
// 2 I/O or configuration error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spacl/estimator.hpp"
#include "spacl/experiments.hpp"
#include "spacl/identifiability.hpp"
#include "spacl/io.hpp"
#include "spacl/metrics.hpp"
#include "spacl/model.hpp"
#include "spacl/sampling.hpp"

namespace {

using namespace spacl;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Vector parse_vector(const std::string& text) {
  std::vector<double> vals;
  std::istringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  Vector v(static_cast<Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) v[static_cast<Index>(i)] = vals[i];
  return v;
}

// "1,0.2;0.2,0.6" -> rows split on ';', entries on ','.
Matrix parse_matrix(const std::string& text) {
  std::vector<Vector> rows;
  std::istringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(parse_vector(row));
  if (rows.empty()) throw ValueError("empty matrix literal");
  Matrix m(static_cast<Index>(rows.size()), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw ValueError("ragged matrix literal");
    m.row(static_cast<Index>(i)) = rows[i].transpose();
  }
  return m;
}

struct GenerateArgs {
  std::int64_t n = 1000;
  int K = 3;
  std::string alpha = "0.4,0.4,0.4";
  std::string b;  // explicit matrix literal wins over diag/offdiag
  double b_diag = 1.0;
  double b_offdiag = 0.05;
  double rho = 0.1;
  std::uint64_t seed = 1;
  bool no_pure = false;
  std::string pure_placement = "first";
  std::string out_prefix = "mmsb";
};

int cmd_generate(const GenerateArgs& args) {
  Matrix B;
  if (!args.b.empty()) {
    B = parse_matrix(args.b);
  } else {
    B = Matrix::Constant(args.K, args.K, args.b_offdiag);
    B.diagonal().setConstant(args.b_diag);
  }
  ModelParams params(args.n, args.K, parse_vector(args.alpha), B, args.rho);
  SamplerConfig config{args.seed, !args.no_pure,
                       args.pure_placement == "random" ? PurePlacement::kRandomRows
                                                       : PurePlacement::kFirstKRows};
  const MembershipMatrix theta = sample_theta(params, config);
  const SparseSymmetricGraph graph = sample_adjacency(theta, params, config);

  std::vector<std::string> provenance = {
      "spacl generate",
      "n=" + std::to_string(args.n),
      "K=" + std::to_string(args.K),
      "alpha=" + args.alpha,
      "rho=" + fmt(params.rho()),
      "seed=" + std::to_string(args.seed),
      "inject_pure=" + std::string(args.no_pure ? "0" : "1"),
      "pure_placement=" + args.pure_placement,
  };
  if (!args.b.empty()) provenance.push_back("B=" + args.b);
  else
    provenance.push_back("B_diag=" + fmt(args.b_diag) + " B_offdiag=" + fmt(args.b_offdiag));

  io::save_graph(args.out_prefix + ".edges", graph, provenance);
  io::save_membership(args.out_prefix + ".truth.csv", theta, provenance);
  std::cout << "wrote " << args.out_prefix << ".edges (" << graph.num_edges()
            << " edges) and " << args.out_prefix << ".truth.csv\n";
  return 0;
}

struct FitArgs {
  std::string graph_path;
  int K = 0;
  bool no_prune = false;
  int r = 10;
  double q = 0.75;
  double eps = 0.95;
  double tol = 1e-8;
  std::string out_prefix = "fit";
};

int cmd_fit(const FitArgs& args) {
  const auto loaded = io::load_graph(args.graph_path);
  if (loaded.self_loops_dropped > 0)
    std::cerr << "warning: dropped " << loaded.self_loops_dropped << " self-loop(s) from "
              << args.graph_path << "\n";
  PruneConfig prune_config{args.r, args.q, args.eps};
  SpaclOptions opts;
  opts.eigs.tol = args.tol;

  const auto start = std::chrono::steady_clock::now();
  const FitResult fit = spacl::spacl(loaded.graph, args.K, prune_config, !args.no_prune, opts);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  io::save_membership(args.out_prefix + ".theta.csv", fit.theta_hat,
                      {"spacl fit", "graph=" + args.graph_path, "K=" + std::to_string(args.K)});

  std::ofstream json(args.out_prefix + ".fit.json");
  if (!json) throw io::IoError("cannot open " + args.out_prefix + ".fit.json");
  json << "{\n  \"rho_hat\": " << fmt(fit.rho_hat) << ",\n  \"B_hat\": [";
  for (Index i = 0; i < fit.B_hat.rows(); ++i) {
    json << (i ? ",\n            [" : "[");
    for (Index j = 0; j < fit.B_hat.cols(); ++j)
      json << (j ? ", " : "") << fmt(fit.B_hat(i, j));
    json << "]";
  }
  json << "],\n  \"pure_indices\": [";
  for (size_t k = 0; k < fit.pure_indices.size(); ++k)
    json << (k ? ", " : "") << fit.pure_indices[k];
  json << "],\n  \"pruned_count\": " << fit.pruned_set.size()
       << ",\n  \"zeroed_rows\": " << fit.theta_hat.zeroed_count()
       << ",\n  \"seconds\": " << fmt(seconds) << "\n}\n";

  std::cout << "n=" << loaded.graph.n() << " edges=" << loaded.graph.num_edges()
            << " pruned=" << fit.pruned_set.size()
            << " zeroed=" << fit.theta_hat.zeroed_count() << " rho_hat=" << fmt(fit.rho_hat)
            << " seconds=" << fmt(seconds) << "\n";
  return 0;
}

int cmd_eval(const std::string& est_path, const std::string& truth_path,
             const std::string& metric, const std::string& csv_path) {
  const MembershipMatrix est = io::load_membership(est_path);
  const MembershipMatrix truth = io::load_membership(truth_path);

  std::vector<std::pair<std::string, double>> results;
  if (metric == "frob" || metric == "all")
    results.emplace_back("frob", relative_frobenius_error(est.theta(), truth.theta()));
  if (metric == "rowwise" || metric == "all") {
    const auto rep = max_rowwise_relative_error(est, truth.theta());
    results.emplace_back("rowwise", rep.max_relative_error);
    results.emplace_back("zeroed_rows", static_cast<double>(rep.zeroed_rows));
  }
  if (metric == "rc" || metric == "all")
    results.emplace_back("rc", rc_avg(est.theta(), truth.theta()));
  if (results.empty()) throw ValueError("unknown metric: " + metric);

  for (const auto& [name, value] : results) std::cout << name << " " << fmt(value) << "\n";
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path, std::ios::app);
    if (!csv) throw io::IoError("cannot open " + csv_path);
    for (const auto& [name, value] : results)
      csv << est_path << "," << truth_path << "," << name << "," << fmt(value) << "\n";
  }
  return 0;
}

struct ExperimentArgs {
  std::string preset;
  std::string config_path;
  std::int64_t n = 0;
  int seed_count = 10;
  std::string seed_list;
  std::string metrics;
  std::string out_dir = ".";
  int threads = 0;
};

int cmd_experiment(const ExperimentArgs& args) {
  ExperimentConfig config;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw io::IoError("cannot open " + args.config_path);
    std::ostringstream text;
    text << in.rdbuf();
    config = ExperimentConfig::parse(text.str());
  } else {
    config.preset = args.preset;
    config.n = args.n;
    config.seeds.clear();
    if (!args.seed_list.empty()) {
      std::istringstream ss(args.seed_list);
      std::string tok;
      while (std::getline(ss, tok, ',')) config.seeds.push_back(std::stoull(tok));
    } else {
      for (int s = 1; s <= args.seed_count; ++s)
        config.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  if (!args.metrics.empty()) {
    config.metrics.clear();
    std::istringstream ss(args.metrics);
    std::string tok;
    while (std::getline(ss, tok, ',')) config.metrics.push_back(tok);
  }
  config.threads = args.threads;
  if (config.preset.empty()) throw ValueError("experiment: preset required");

  const auto rows = run_experiment(config);
  std::filesystem::create_directories(args.out_dir);
  const std::string path = args.out_dir + "/" + config.preset + ".csv";
  write_experiment_csv(path, config, rows);
  std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_check_assumptions(std::int64_t n, int K, const std::string& alpha,
                          const std::string& b, double b_diag, double b_offdiag,
                          double rho, double xi) {
  Matrix B;
  if (!b.empty()) {
    B = parse_matrix(b);
  } else {
    B = Matrix::Constant(K, K, b_offdiag);
    B.diagonal().setConstant(b_diag);
  }
  ModelParams params(n, K, parse_vector(alpha), B, rho);
  const AssumptionReport rep = validate_assumptions(params, xi);
  std::cout << "assumption1.nu: lhs=" << fmt(rep.a1_nu_lhs) << " rhs=" << fmt(rep.a1_nu_rhs)
            << " ok=" << rep.a1_nu_ok << "\n";
  std::cout << "assumption1.separation: lhs=" << fmt(rep.a1_sep_lhs)
            << " rhs=" << fmt(rep.a1_sep_rhs) << " ok=" << rep.a1_sep_ok << "\n";
  std::cout << "assumption2.rank: rank=" << rep.a2_rank << " of " << K
            << " min_singular=" << fmt(rep.a2_min_singular) << " ok=" << rep.a2_ok << "\n";
  std::cout << "assumption3.separation: lhs=" << fmt(rep.a3_lhs) << " rhs=" << fmt(rep.a3_rhs)
            << " ok=" << rep.a3_ok << "\n";
  std::cout << "convention: " << rep.convention << " (xi=" << xi << ")\n";
  return 0;
}

int cmd_check_identifiability(const std::string& theta_path, const std::string& b,
                              double rho, const std::string& witness_prefix) {
  const MembershipMatrix theta = io::load_membership(theta_path);
  const Matrix B = parse_matrix(b);
  const IdentifiabilityVerdict verdict = check_identifiability(theta, B, rho);
  const char* status = verdict.status == IdentifiabilityStatus::kIdentifiable
                           ? "identifiable"
                           : verdict.status == IdentifiabilityStatus::kNotIdentifiable
                                 ? "not-identifiable"
                                 : "undetermined";
  std::cout << "status " << status << "\nreason " << verdict.reason << "\n";
  if (verdict.witness && !witness_prefix.empty()) {
    const auto& [theta_prime, b_prime] = *verdict.witness;
    io::save_membership(witness_prefix + ".theta.csv",
                        MembershipMatrix(theta_prime, {}, {},
                                         MembershipMatrix::Validation::kRelaxed),
                        {"identifiability witness"});
    std::ofstream bout(witness_prefix + ".B.txt");
    bout << b_prime << "\n";
    std::cout << "witness written to " << witness_prefix << ".*\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPACL: spectral mixed-membership estimation for MMSB graphs"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* sub_gen = app.add_subcommand("generate", "sample an MMSB graph + ground truth");
  sub_gen->add_option("--n", gen.n);
  sub_gen->add_option("--k", gen.K);
  sub_gen->add_option("--alpha", gen.alpha, "comma list, length K");
  sub_gen->add_option("--b", gen.b, "matrix literal r1;r2;... (overrides diag/offdiag)");
  sub_gen->add_option("--b-diag", gen.b_diag);
  sub_gen->add_option("--b-offdiag", gen.b_offdiag);
  sub_gen->add_option("--rho", gen.rho);
  sub_gen->add_option("--seed", gen.seed);
  sub_gen->add_flag("--no-pure", gen.no_pure, "skip pure-node injection");
  sub_gen->add_option("--pure-placement", gen.pure_placement, "first|random");
  sub_gen->add_option("--out-prefix", gen.out_prefix);

  FitArgs fit;
  auto* sub_fit = app.add_subcommand("fit", "run SPACL on an edge-list graph");
  sub_fit->add_option("graph", fit.graph_path)->required();
  sub_fit->add_option("--k", fit.K)->required();
  sub_fit->add_flag("--no-prune", fit.no_prune);
  sub_fit->add_option("--r", fit.r);
  sub_fit->add_option("--q", fit.q);
  sub_fit->add_option("--eps", fit.eps);
  sub_fit->add_option("--tol", fit.tol);
  sub_fit->add_option("--out-prefix", fit.out_prefix);

  std::string eval_est, eval_truth, eval_metric = "all", eval_csv;
  auto* sub_eval = app.add_subcommand("eval", "score an estimate against ground truth");
  sub_eval->add_option("estimate", eval_est)->required();
  sub_eval->add_option("truth", eval_truth)->required();
  sub_eval->add_option("--metric", eval_metric, "frob|rowwise|rc|all");
  sub_eval->add_option("--csv", eval_csv, "append results to this CSV");

  ExperimentArgs exp;
  auto* sub_exp = app.add_subcommand("experiment", "run a named preset sweep");
  sub_exp->add_option("preset", exp.preset, "fig1b|fig2a|fig2b|fig2c|fig2d|suppK|suppAlpha|prune-diag");
  sub_exp->add_option("--config", exp.config_path, "key=value config file");
  sub_exp->add_option("--n", exp.n, "override node count");
  sub_exp->add_option("--seeds", exp.seed_count, "number of seeds (1..N)");
  sub_exp->add_option("--seed-list", exp.seed_list, "explicit comma list");
  sub_exp->add_option("--metrics", exp.metrics, "comma list of relfrob|rowwise|rc");
  sub_exp->add_option("--out", exp.out_dir);
  sub_exp->add_option("--threads", exp.threads);

  std::int64_t ca_n = 5000;
  int ca_k = 3;
  std::string ca_alpha = "0.33333333333333331,0.33333333333333331,0.33333333333333331";
  std::string ca_b;
  double ca_bdiag = 1.0, ca_boffdiag = 0.05, ca_rho = 0.2, ca_xi = 1.5;
  auto* sub_ca = app.add_subcommand("check-assumptions", "evaluate the feasibility assumptions");
  sub_ca->add_option("--n", ca_n);
  sub_ca->add_option("--k", ca_k);
  sub_ca->add_option("--alpha", ca_alpha);
  sub_ca->add_option("--b", ca_b);
  sub_ca->add_option("--b-diag", ca_bdiag);
  sub_ca->add_option("--b-offdiag", ca_boffdiag);
  sub_ca->add_option("--rho", ca_rho);
  sub_ca->add_option("--xi", ca_xi);

  std::string ci_theta, ci_b, ci_witness;
  double ci_rho = 1.0;
  auto* sub_ci = app.add_subcommand("check-identifiability", "rank/affine identifiability check");
  sub_ci->add_option("--theta", ci_theta)->required();
  sub_ci->add_option("--b", ci_b, "matrix literal")->required();
  sub_ci->add_option("--rho", ci_rho);
  sub_ci->add_option("--witness-prefix", ci_witness);

  try {
    app.parse(argc, argv);
    if (*sub_gen) return cmd_generate(gen);
    if (*sub_fit) return cmd_fit(fit);
    if (*sub_eval) return cmd_eval(eval_est, eval_truth, eval_metric, eval_csv);
    if (*sub_exp) return cmd_experiment(exp);
    if (*sub_ca)
      return cmd_check_assumptions(ca_n, ca_k, ca_alpha, ca_b, ca_bdiag, ca_boffdiag,
                                   ca_rho, ca_xi);
    if (*sub_ci) return cmd_check_identifiability(ci_theta, ci_b, ci_rho, ci_witness);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const spacl::EstimatorError& e) {
    std::cerr << "estimator failure: " << e.what() << "\n";
    return 1;
  } catch (const spacl::EigsConvergenceError& e) {
    std::cerr << "eigensolver failure: " << e.what()
              << " (worst residual " << e.worst_residual << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
