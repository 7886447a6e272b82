#include "qdl/analysis.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qdl {

DebateReport exact_report(const VerifierSpec& spec, const std::string& w,
                          const DebaterStrategy& p1, const DebaterStrategy& p0,
                          const ReportCaps& caps) {
  DebateReport r;
  r.verifier = spec.name();
  r.input = w;
  r.n = static_cast<long>(w.size());
  r.p1_name = p1.name();
  r.p0_name = p0.name();
  r.scenario = "exact";

  auto dist = run_round_exact(spec, w, p1, p0, caps);
  r.has_exact = true;
  r.p_accept = dist.accept;
  r.p_reject = dist.reject;
  r.p_restart = dist.restart;
  r.residual = dist.residual;
  r.expected_round_steps = dist.expected_steps;
  Prob halting = dist.accept + dist.reject;
  if (!halting.is_zero()) {
    r.overall = dist.accept / halting;
    r.expected_rounds = Prob::one() / halting;
    // Rounds are independent; a debate runs E[N]-1 restarting rounds and one
    // halting round.
    if (!dist.restart.is_zero()) {
      Prob e_restart_steps = dist.steps_restart / dist.restart;
      Prob e_halt_steps = (dist.steps_accept + dist.steps_reject) / halting;
      r.expected_total_steps = (*r.expected_rounds - Prob::one()) * e_restart_steps + e_halt_steps;
    } else {
      r.expected_total_steps = (dist.steps_accept + dist.steps_reject) / halting;
    }
  }
  r.converged = dist.converged;
  if (!dist.converged && !halting.is_zero()) {
    double rel = dist.residual.to_double() / halting.to_double();
    if (rel > caps.residual_tolerance) r.converged = false;
  }
  return r;
}

DebateReport monte_carlo(const VerifierSpec& spec, const std::string& w, const DebaterStrategy& p1,
                         const DebaterStrategy& p0, std::uint64_t seed, long trials,
                         const ReportCaps& caps) {
  DebateReport r;
  r.verifier = spec.name();
  r.input = w;
  r.n = static_cast<long>(w.size());
  r.p1_name = p1.name();
  r.p0_name = p0.name();
  r.seed = seed;
  r.scenario = "mc";
  r.has_mc = true;
  r.trials = trials;

  Rng root(seed);
  double total_rounds = 0, total_steps = 0;
  for (long t = 0; t < trials; ++t) {
    auto s1 = p1.clone();
    auto s0 = p0.clone();
    Rng rng = root.split(static_cast<std::uint64_t>(t));
    Decision d = run_debate(spec, w, *s1, *s0, rng, caps);
    total_rounds += static_cast<double>(d.rounds);
    total_steps += static_cast<double>(d.total_steps);
    switch (d.kind) {
      case Decision::Kind::kAccept: ++r.mc_accept; break;
      case Decision::Kind::kReject: ++r.mc_reject; break;
      case Decision::Kind::kNoDecision: ++r.mc_no_decision; break;
    }
  }
  r.mean_rounds = trials > 0 ? total_rounds / static_cast<double>(trials) : 0;
  r.mean_steps = trials > 0 ? total_steps / static_cast<double>(trials) : 0;
  auto [lo, hi] = wilson_interval(r.mc_accept, trials);
  r.accept_ci_low = lo;
  r.accept_ci_high = hi;
  r.flagged_no_decision = r.mc_no_decision == trials && trials > 0;
  return r;
}

std::pair<double, double> wilson_interval(long successes, long trials) {
  if (trials <= 0) return {0.0, 1.0};
  const double z = 1.96;
  double n = static_cast<double>(trials);
  double p = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1 + z2 / n;
  double center = (p + z2 / (2 * n)) / denom;
  double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double chi_square(const std::vector<long>& counts, const std::vector<double>& probs) {
  if (counts.size() != probs.size()) throw std::invalid_argument("chi_square: arity mismatch");
  long total = 0;
  for (long c : counts) total += c;
  double chi = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    double expected = probs[i] * static_cast<double>(total);
    if (expected <= 0) {
      if (counts[i] != 0) throw std::invalid_argument("chi_square: mass on a zero-probability bin");
      continue;
    }
    double diff = static_cast<double>(counts[i]) - expected;
    chi += diff * diff / expected;
  }
  return chi;
}

double chi_square_cutoff_p001(int df) {
  static const double table[] = {0,      10.828, 13.816, 16.266, 18.467,
                                 20.515, 22.458, 24.322, 26.124};
  if (df >= 1 && df <= 8) return table[df];
  // Wilson-Hilferty approximation for larger degrees of freedom.
  double z = 3.0902;  // p = 0.001 one-sided
  double h = 2.0 / (9.0 * df);
  double t = 1 - h + z * std::sqrt(h);
  return df * t * t * t;
}

GrowthFit growth_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw std::invalid_argument("growth_fit: need at least four points");
  double prev_n = 0;
  for (const auto& [n, y] : points) {
    if (n <= prev_n) throw std::invalid_argument("growth_fit: sizes must increase");
    if (y <= 0) throw std::invalid_argument("growth_fit: values must be positive");
    prev_n = n;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(points.size());
  for (const auto& [n, y] : points) {
    double x = std::log(n), ly = std::log(y);
    sx += x;
    sy += ly;
    sxx += x * x;
    sxy += x * ly;
  }
  GrowthFit fit;
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / m;
  for (const auto& [n, y] : points) {
    double pred = fit.intercept + fit.slope * std::log(n);
    fit.max_residual = std::max(fit.max_residual, std::abs(std::log(y) - pred));
  }
  return fit;
}

namespace {

std::string csv_escape(const std::string& s) {
  bool needs = s.find_first_of(",\"\n") != std::string::npos;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string prob_str(const Prob& p) { return p.str(); }

std::string opt_prob_str(const std::optional<Prob>& p) { return p ? p->str() : ""; }

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

std::string csv_header() {
  return "# qdl-report v1: rationals as num/den, reals as decimal; final row marks completeness\n"
         "scenario,verifier,input,n,p1,p0,p_accept,p_reject,p_restart,residual,overall,"
         "mean_rounds,mean_steps,ci_low,ci_high,trials,accepts,rejects,no_decision,converged,seed\n";
}

std::string csv_row(const DebateReport& r) {
  std::ostringstream os;
  os << csv_escape(r.scenario) << ',' << csv_escape(r.verifier) << ',' << csv_escape(r.input)
     << ',' << r.n << ',' << csv_escape(r.p1_name) << ',' << csv_escape(r.p0_name) << ',';
  if (r.has_exact) {
    os << prob_str(r.p_accept) << ',' << prob_str(r.p_reject) << ',' << prob_str(r.p_restart)
       << ',' << prob_str(r.residual) << ',' << opt_prob_str(r.overall) << ','
       << opt_prob_str(r.expected_rounds) << ',' << opt_prob_str(r.expected_total_steps) << ',';
  } else {
    double n = static_cast<double>(std::max(r.trials, 1L));
    os << fmt_double(r.mc_accept / n) << ',' << fmt_double(r.mc_reject / n) << ",,"
       << ',' << fmt_double(r.mc_accept / std::max(1.0, static_cast<double>(r.mc_accept + r.mc_reject)))
       << ',' << fmt_double(r.mean_rounds) << ',' << fmt_double(r.mean_steps) << ',';
  }
  if (r.has_mc)
    os << fmt_double(r.accept_ci_low) << ',' << fmt_double(r.accept_ci_high) << ',' << r.trials
       << ',' << r.mc_accept << ',' << r.mc_reject << ',' << r.mc_no_decision;
  else
    os << ",,,,,";
  os << ',' << (r.converged && !r.flagged_no_decision ? "yes" : "flagged") << ',' << r.seed << '\n';
  return os.str();
}

std::string csv_document(const std::vector<DebateReport>& reports) {
  std::string out = csv_header();
  for (const auto& r : reports) out += csv_row(r);
  out += "# complete: " + std::to_string(reports.size()) + " rows\n";
  return out;
}

std::string DebateReport::text() const {
  std::ostringstream os;
  os << "verifier " << verifier << " on input \"" << input << "\" (n=" << n << ")\n"
     << "  P1: " << p1_name << "   P0: " << p0_name << "\n";
  if (has_exact) {
    os << "  exact round: accept=" << p_accept.str() << " reject=" << p_reject.str()
       << " restart=" << p_restart.str() << " residual=" << residual.str() << "\n";
    if (overall)
      os << "  overall acceptance: " << overall->str()
         << "  expected rounds: " << (expected_rounds ? expected_rounds->str() : "-") << "\n";
    else
      os << "  overall acceptance: undefined (nonhalting round)\n";
    if (!converged) os << "  [non-converged: residual above tolerance]\n";
  }
  if (has_mc) {
    os << "  monte-carlo: " << trials << " trials, accept=" << mc_accept << " reject=" << mc_reject
       << " none=" << mc_no_decision << " mean rounds=" << mean_rounds << "\n"
       << "  acceptance CI [" << accept_ci_low << ", " << accept_ci_high << "]\n";
    if (flagged_no_decision) os << "  [flagged: every trial ended without a decision]\n";
  }
  return os.str();
}

}  // namespace qdl
