#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdl/machine.hpp"

namespace qdl {

/// Per-scenario results: the exact round distribution and/or Monte Carlo
/// summaries, with everything needed to reproduce the run.
struct DebateReport {
  std::string scenario;
  std::string verifier;
  std::string input;
  long n = 0;
  std::string p1_name, p0_name;
  std::uint64_t seed = 0;

  // Exact side (populated by exact_report).
  bool has_exact = false;
  Prob p_accept, p_reject, p_restart, residual;
  std::optional<Prob> overall;  // empty on nonhalting rounds (undefined ratio)
  std::optional<Prob> expected_rounds;
  Prob expected_round_steps;
  std::optional<Prob> expected_total_steps;
  bool converged = true;

  // Monte Carlo side.
  bool has_mc = false;
  long trials = 0;
  long mc_accept = 0, mc_reject = 0, mc_no_decision = 0;
  double mean_rounds = 0, mean_steps = 0;
  double accept_ci_low = 0, accept_ci_high = 0;  // Wilson interval on acceptance
  bool flagged_no_decision = false;

  std::string text() const;
};

struct ReportCaps : EngineCaps {
  // Residual share of the halting mass above which the exact report is
  // marked non-converged.
  double residual_tolerance = 1e-6;
};

DebateReport exact_report(const VerifierSpec& spec, const std::string& w,
                          const DebaterStrategy& p1, const DebaterStrategy& p0,
                          const ReportCaps& caps = {});

DebateReport monte_carlo(const VerifierSpec& spec, const std::string& w, const DebaterStrategy& p1,
                         const DebaterStrategy& p0, std::uint64_t seed, long trials,
                         const ReportCaps& caps = {});

/// Wilson score interval for `successes`/`trials` at z = 1.96.
std::pair<double, double> wilson_interval(long successes, long trials);

/// Chi-square statistic against expected probabilities; `threshold_df` maps
/// to the p > 0.001 cut-off.
double chi_square(const std::vector<long>& counts, const std::vector<double>& probs);
double chi_square_cutoff_p001(int df);

struct GrowthFit {
  double slope = 0;
  double intercept = 0;
  double max_residual = 0;  // on log-log points
};

/// Least-squares slope of log(y) against log(n). Requires at least four
/// points with increasing positive n and positive y.
GrowthFit growth_fit(const std::vector<std::pair<double, double>>& points);

/// CSV emission. Fixed schema, one header comment line, and a trailing
/// completeness marker row so truncated files are detectable.
std::string csv_header();
std::string csv_row(const DebateReport& report);
std::string csv_document(const std::vector<DebateReport>& reports);

}  // namespace qdl
