// Command-line front end: solves a polynomial system file and prints a
// run-history table or a JSON report.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mrv/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mrv: real (and complex) varieties of polynomial ideals via moment matrices"};
  app.require_subcommand(1);

  CLI::App* solve = app.add_subcommand("solve", "solve a system file");
  std::string file;
  solve->add_option("file", file, "system file (vars:/eq:/ineq: lines)")->required();

  int order = 0, max_order = 0;
  std::string mode = "real", basis = "auto", ordering = "grlex", json_path;
  mrv::RunConfig config;
  std::uint64_t seed = 0;
  bool verbose = false;
  solve->add_option("--order", order, "fixed relaxation order t");
  solve->add_option("--max-order", max_order, "auto mode order cap (default d+6)");
  solve->add_option("--mode", mode, "real|complex")->check(CLI::IsMember({"real", "complex"}));
  solve->add_option("--basis", basis, "svd|monomial|sieve (default: monomial with svd fallback)")
      ->check(CLI::IsMember({"auto", "svd", "monomial", "sieve"}));
  solve->add_option("--ordering", ordering, "grlex|grevlex|lex")
      ->check(CLI::IsMember({"grlex", "grevlex", "lex"}));
  solve->add_option("--svd-zero-tol", config.tol.svd_zero, "singular values below this are zero");
  solve->add_option("--gap-ratio", config.tol.gap_ratio, "rank cut on consecutive decay");
  solve->add_option("--comm-tol", config.tol.comm, "commutativity gate for extraction");
  solve->add_option("--accept-tol", config.tol.accept, "residual tolerance for root filtering");
  solve->add_option("--trace-cap", config.trace_cap, "trace bound on the moment matrix");
  solve->add_option("--seed", seed, "random seed for the eigenvalue combination");
  solve->add_option("--json", json_path, "write a JSON report to this path");
  solve->add_flag("--verbose", verbose, "log solver iterations to stderr");

  CLI11_PARSE(app, argc, argv);

  config.order = order;
  config.max_order = max_order;
  config.mode = mode == "complex" ? mrv::RunMode::Complex : mrv::RunMode::Real;
  config.seed = seed;
  if (basis == "svd") config.basis = mrv::BasisMethod::Svd;
  else if (basis == "monomial") config.basis = mrv::BasisMethod::Monomial;
  else if (basis == "sieve") config.basis = mrv::BasisMethod::Sieve;
  else config.basis = mrv::BasisMethod::Auto;
  if (ordering == "grevlex") config.ordering = mrv::MonomialOrder::grevlex();
  else if (ordering == "lex") config.ordering = mrv::MonomialOrder::lex();
  if (verbose) config.log = &std::cerr;

  try {
    const mrv::PolySystem system = mrv::load_system(file);
    const mrv::RunReport report = mrv::run(config, system);
    std::cout << mrv::render_report(report, mrv::ReportFormat::Table);
    if (!json_path.empty()) {
      std::ofstream out(json_path);
      if (!out) {
        std::cerr << "error: cannot write '" << json_path << "'\n";
        return 3;
      }
      out << mrv::render_report(report, mrv::ReportFormat::Json);
    }
    return mrv::exit_code(report);
  } catch (const mrv::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case mrv::errc::parse_error:
      case mrv::errc::unknown_variable:
      case mrv::errc::malformed_term:
      case mrv::errc::empty_polynomial:
      case mrv::errc::zero_polynomial:
      case mrv::errc::order_too_small:
        return 3;
      default:
        return 4;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
