#include "mdplab/driver.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mdplab/parallel.hpp"
#include "mdplab/sha1.hpp"
#include "mdplab/svg.hpp"
#include "mdplab/text_io.hpp"

namespace mdplab {

namespace {

std::string config_prolog(const ExperimentConfig& cfg, const std::string& kind) {
  std::ostringstream os;
  os << "# mdplab " << kind << '\n';
  os << "# config_hash " << git_blob_hash(cfg.raw_text) << '\n';
  os << "# config-begin\n";
  std::istringstream in(cfg.raw_text);
  std::string line;
  while (std::getline(in, line)) os << "#   " << line << '\n';
  os << "# config-end\n";
  return os.str();
}

struct SeedResult {
  std::vector<RunTrace> traces;          // one per epoch (single entry without doubling)
  std::vector<TraceAnalysis> analyses;   // aligned with traces
  double global_total = 0.0;
};

struct LearnerPlan {
  double eta = 0.0;
  int horizon = 0;
  LearnerFactory factory;
};

LearnerPlan plan_learner(const ExperimentConfig& cfg, const TabularMdp& mdp, int64_t steps) {
  LearnerPlan plan;
  plan.horizon = cfg.horizon_override >= 0 ? cfg.horizon_override
                                           : horizon_steps(mdp.gamma, steps);
  const int num_actions = mdp.num_actions;
  const double gamma = mdp.gamma;
  if (cfg.learner_kind == "uniform") {
    plan.factory = [num_actions, gamma] { return make_uniform_learner(num_actions, gamma); };
  } else {
    plan.eta = cfg.eta_override > 0.0 ? cfg.eta_override : exp3_default_eta(num_actions, steps);
    const double eta = plan.eta;
    plan.factory = [num_actions, eta, gamma] {
      return std::make_unique<Exp3>(num_actions, eta, gamma);
    };
  }
  if (cfg.wrapper) {
    LearnerFactory base = plan.factory;
    const int delay = plan.horizon;
    plan.factory = [base, delay] { return wrap_delay(base, delay); };
  }
  return plan;
}

SeedResult run_one_seed(const ExperimentConfig& cfg, const TabularMdp& mdp, uint64_t seed,
                        const std::string& hash) {
  SeedResult result;
  std::vector<Epoch> epochs =
      cfg.doubling ? doubling_schedule(cfg.steps) : std::vector<Epoch>{{cfg.steps, cfg.steps}};
  int state = cfg.initial_state;
  for (size_t e = 0; e < epochs.size(); ++e) {
    LearnerPlan plan = plan_learner(cfg, mdp, epochs[e].nominal);
    RunOptions options;
    options.initial_state = state;
    options.snapshot_cadence = cfg.snapshot_cadence;
    options.raw_gain_exponent = cfg.raw_gain_exponent;
    options.horizon_override = plan.horizon;
    options.learner_kind = cfg.learner_kind + (cfg.wrapper ? "+wrapper" : "");
    options.eta = plan.eta;
    options.delay = cfg.wrapper ? plan.horizon : -1;
    options.config_hash = hash;
    RunTrace trace = run_main(mdp, epochs[e].length, plan.factory, seed + 7919 * e, options);
    state = trace.final_state;
    if (cfg.snapshot_cadence == 1)
      result.analyses.push_back(analyze_trace(trace, mdp, cfg.eval_tol));
    result.traces.push_back(std::move(trace));
  }
  for (const TraceAnalysis& a : result.analyses) result.global_total += a.global_total;
  return result;
}

std::string seed_file_name(uint64_t seed, size_t epoch, size_t num_epochs) {
  std::ostringstream os;
  os << "trace_seed" << seed;
  if (num_epochs > 1) os << "_epoch" << epoch;
  os << ".txt";
  return os.str();
}

}  // namespace

RunArtifacts cli_run(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const TabularMdp mdp = cfg.env.build();
  const std::string hash = git_blob_hash(cfg.raw_text);
  const int S = mdp.num_states;

  std::vector<SeedResult> results(cfg.seeds.size());
  parallel_for(static_cast<int>(cfg.seeds.size()), cfg.jobs, [&](int i) {
    results[i] = run_one_seed(cfg, mdp, cfg.seeds[i], hash);
  });

  RunArtifacts artifacts;
  write_file((fs::path(cfg.output_dir) / "env.txt").string(),
             "# config_hash " + hash + '\n' + mdp_to_text(mdp));
  for (size_t i = 0; i < cfg.seeds.size(); ++i) {
    for (size_t e = 0; e < results[i].traces.size(); ++e) {
      const std::string name = seed_file_name(cfg.seeds[i], e, results[i].traces.size());
      const std::string path = (fs::path(cfg.output_dir) / name).string();
      write_file(path, trace_to_text(results[i].traces[e]));
      artifacts.trace_paths.push_back(path);
    }
    artifacts.global_regret_by_seed.push_back(results[i].global_total);
  }

  // Merged per-step CSV.
  std::ostringstream csv;
  csv << config_prolog(cfg, "regret csv");
  csv << "seed,epoch,t,cumulative_global_regret";
  for (int s = 0; s < S; ++s) csv << ",local_regret_s" << s;
  csv << ",change_rate,nu_mu_gap\n";
  for (size_t i = 0; i < cfg.seeds.size(); ++i) {
    int64_t t_offset = 0;
    for (size_t e = 0; e < results[i].analyses.size(); ++e) {
      const TraceAnalysis& a = results[i].analyses[e];
      const RunTrace& trace = results[i].traces[e];
      const Matrix& pi_star = a.optimal.policy.probs;
      double cum_global = 0.0;
      Vector cum_local = Vector::Zero(S);
      for (int64_t t = 1; t <= a.num_steps; ++t) {
        cum_global += a.global_gap[static_cast<size_t>(t - 1)];
        const Matrix& pi_t = trace.snapshot(t);
        const Matrix& q = a.q_tables[static_cast<size_t>(t - 1)];
        for (int s = 0; s < S; ++s)
          for (int act = 0; act < mdp.num_actions; ++act)
            cum_local[s] += (pi_star(s, act) - pi_t(s, act)) * q(s, act);
        const double change =
            t < a.num_steps ? a.change_series[static_cast<size_t>(t - 1)] : 0.0;
        csv << cfg.seeds[i] << ',' << e << ',' << t_offset + t << ','
            << format_double(cum_global);
        for (int s = 0; s < S; ++s) csv << ',' << format_double(cum_local[s]);
        csv << ',' << format_double(change) << ','
            << format_double(a.nu_mu_gap[static_cast<size_t>(t - 1)]) << '\n';
      }
      t_offset += a.num_steps;
    }
  }
  artifacts.csv_path = (fs::path(cfg.output_dir) / "regret.csv").string();
  write_file(artifacts.csv_path, csv.str());

  // Assumption estimates for the summary.
  bool assumptions_ok = true;
  std::string assumption_note;
  double beta_hat = 0.0, tau_hat = 1.0;
  try {
    beta_hat = estimate_beta(mdp, 256, cfg.env.seed).beta_hat;
    tau_hat = estimate_mixing(mdp, 256, cfg.env.seed).tau_hat;
    if (beta_hat < 1e-9) {
      assumptions_ok = false;
      assumption_note = "stationary mass not bounded away from zero";
    }
  } catch (const AssumptionViolation& e) {
    assumptions_ok = false;
    assumption_note = e.what();
  }

  std::ostringstream summary;
  summary << config_prolog(cfg, "run summary");
  summary << "env " << cfg.env.describe() << '\n';
  summary << "learner " << cfg.learner_kind << (cfg.wrapper ? "+wrapper" : "") << '\n';
  if (cfg.snapshot_cadence != 1)
    summary << "note regret analysis skipped: snapshot cadence " << cfg.snapshot_cadence
            << " (needs every-step snapshots)\n";
  if (!results.empty() && !results[0].traces.empty()) {
    summary << "horizon " << results[0].traces.back().horizon << '\n';
    summary << "eta " << format_double(results[0].traces.back().options.eta) << '\n';
  }
  if (assumptions_ok)
    summary << "beta_hat " << format_double(beta_hat) << "\ntau_hat " << format_double(tau_hat)
            << '\n';
  else
    summary << "assumption_violation " << assumption_note << '\n';

  summary << "columns seed global_regret full_span observed unobserved observed_surrogate c_hat\n";
  double mean_regret = 0.0;
  for (size_t i = 0; i < cfg.seeds.size(); ++i) {
    double fs_total = 0, ob = 0, un = 0, obs = 0, c_hat = 0;
    for (const TraceAnalysis& a : results[i].analyses) {
      fs_total += a.full_span;
      ob += a.observed;
      un += a.unobserved;
      obs += a.observed_surrogate;
      c_hat = std::max(c_hat, a.c_hat);
    }
    mean_regret += results[i].global_total;
    summary << "seed " << cfg.seeds[i] << ' ' << format_double(results[i].global_total) << ' '
            << format_double(fs_total) << ' ' << format_double(ob) << ' ' << format_double(un)
            << ' ' << format_double(obs) << ' ' << format_double(c_hat) << '\n';
  }
  mean_regret /= static_cast<double>(cfg.seeds.size());
  summary << "mean_global_regret " << format_double(mean_regret) << '\n';

  if (!results.empty() && !results[0].analyses.empty() && !cfg.doubling) {
    const RunTrace& t0 = results[0].traces[0];
    RegretReport report = build_regret_report(results[0].analyses[0], mdp, t0.horizon, beta_hat,
                                              tau_hat, assumptions_ok);
    summary << "bound checks for seed " << cfg.seeds[0]
            << " (name lhs rhs slack):\n";
    for (const BoundCheck& c : report.bound_checks)
      summary << "  " << c.name << ' ' << format_double(c.lhs) << ' ' << format_double(c.rhs)
              << ' ' << format_double(c.slack) << '\n';
  }
  artifacts.summary_path = (fs::path(cfg.output_dir) / "summary.txt").string();
  write_file(artifacts.summary_path, summary.str());

  if (cfg.plot && !results.empty() && !results[0].analyses.empty()) {
    const std::string comment = "<!-- config_hash " + hash + " -->\n";
    const int64_t total_steps = [&] {
      int64_t n = 0;
      for (const TraceAnalysis& a : results[0].analyses) n += a.num_steps;
      return n;
    }();
    SvgSeries regret_t{"mean cumulative regret", {}, {}};
    SvgSeries regret_sqrt{"mean cumulative regret", {}, {}};
    SvgSeries change{"seed " + std::to_string(cfg.seeds[0]) + " change rate", {}, {}};
    SvgSeries gap{"seed " + std::to_string(cfg.seeds[0]) + " |nu - mu|_1", {}, {}};
    std::vector<double> mean_cum(static_cast<size_t>(total_steps), 0.0);
    for (const SeedResult& r : results) {
      size_t idx = 0;
      double cum = 0.0;
      for (const TraceAnalysis& a : r.analyses)
        for (double g : a.global_gap) {
          cum += g;
          mean_cum[idx++] += cum / static_cast<double>(results.size());
        }
    }
    const int64_t stride = std::max<int64_t>(1, total_steps / 2000);
    for (int64_t t = 1; t <= total_steps; t += stride) {
      regret_t.x.push_back(static_cast<double>(t));
      regret_t.y.push_back(mean_cum[static_cast<size_t>(t - 1)]);
      regret_sqrt.x.push_back(std::sqrt(static_cast<double>(t)));
      regret_sqrt.y.push_back(mean_cum[static_cast<size_t>(t - 1)]);
    }
    size_t idx = 0;
    for (const TraceAnalysis& a : results[0].analyses) {
      for (int64_t t = 1; t <= a.num_steps; t += stride) {
        if (t < a.num_steps) {
          change.x.push_back(static_cast<double>(idx + t));
          change.y.push_back(a.change_series[static_cast<size_t>(t - 1)]);
        }
        gap.x.push_back(static_cast<double>(idx + t));
        gap.y.push_back(a.nu_mu_gap[static_cast<size_t>(t - 1)]);
      }
      idx += a.num_steps;
    }
    const std::vector<std::pair<std::string, std::string>> plots = {
        {"regret_vs_t.svg", comment + svg_line_plot("cumulative regret vs t", "t", "regret", {regret_t})},
        {"regret_vs_sqrt_t.svg",
         comment + svg_line_plot("cumulative regret vs sqrt(t)", "sqrt(t)", "regret", {regret_sqrt})},
        {"change_rate.svg", comment + svg_line_plot("per-step policy change", "t", "||pi_{t+1} - pi_t||", {change})},
        {"nu_mu_gap.svg", comment + svg_line_plot("plug-in vs stationary distribution", "t", "L1 gap", {gap})}};
    for (const auto& [name, content] : plots) {
      const std::string path = (fs::path(cfg.output_dir) / name).string();
      write_file(path, content);
      artifacts.plot_paths.push_back(path);
    }
  }
  return artifacts;
}

std::vector<SweepRow> cli_sweep(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.sweep_steps.empty())
    throw std::invalid_argument("cli_sweep: [sweep] steps_list is empty");
  fs::create_directories(cfg.output_dir);
  const TabularMdp mdp = cfg.env.build();
  const std::string hash = git_blob_hash(cfg.raw_text);

  std::vector<SweepRow> rows;
  for (int64_t steps : cfg.sweep_steps) {
    ExperimentConfig point = cfg;
    point.steps = steps;
    std::vector<SeedResult> results(cfg.seeds.size());
    parallel_for(static_cast<int>(cfg.seeds.size()), cfg.jobs, [&](int i) {
      results[i] = run_one_seed(point, mdp, cfg.seeds[i], hash);
    });
    SweepRow row;
    row.steps = steps;
    for (const SeedResult& r : results) row.mean_regret += r.global_total;
    row.mean_regret /= static_cast<double>(results.size());
    double var = 0.0;
    for (const SeedResult& r : results)
      var += (r.global_total - row.mean_regret) * (r.global_total - row.mean_regret);
    row.sem = results.size() > 1
                  ? std::sqrt(var / static_cast<double>(results.size() - 1) /
                              static_cast<double>(results.size()))
                  : 0.0;
    if (!rows.empty()) row.ratio_to_prev = row.mean_regret / rows.back().mean_regret;
    rows.push_back(row);
  }

  std::ostringstream csv;
  csv << config_prolog(cfg, "sweep summary");
  csv << "steps,mean_global_regret,sem,ratio_to_prev\n";
  for (const SweepRow& row : rows)
    csv << row.steps << ',' << format_double(row.mean_regret) << ',' << format_double(row.sem)
        << ',' << format_double(row.ratio_to_prev) << '\n';
  write_file((fs::path(cfg.output_dir) / "sweep_summary.csv").string(), csv.str());
  return rows;
}

VerifyConfig verify_config_from(const ExperimentConfig& cfg) {
  VerifyConfig vc;
  vc.env = cfg.env;
  vc.trials = cfg.verify_trials;
  vc.run_seeds = cfg.verify_run_seeds;
  vc.run_steps = cfg.verify_run_steps;
  vc.only = cfg.verify_only;
  vc.wrapper = cfg.wrapper;
  vc.eta_override = cfg.eta_override;
  vc.eval_tol = cfg.eval_tol;
  vc.jobs = cfg.jobs;
  return vc;
}

int cli_verify(const ExperimentConfig& cfg, std::ostream& out) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  VerifyReport report = verify_suite(verify_config_from(cfg));
  const std::string path = (fs::path(cfg.output_dir) / "verify_report.txt").string();
  write_file(path, config_prolog(cfg, "verify report") + report.to_text());
  out << report.summary_table();
  out << "report written to " << path << '\n';
  return report.hard_failure ? 1 : 0;
}

std::string inspect_env(const EnvSpec& spec, double eval_tol) {
  TabularMdp mdp = spec.build();
  std::ostringstream os;
  os << "env " << spec.describe() << '\n';
  os << "states " << mdp.num_states << "\nactions " << mdp.num_actions << "\ngamma "
     << format_double(mdp.gamma) << '\n';
  try {
    BetaEstimate beta = estimate_beta(mdp, 256, spec.seed);
    MixingEstimate mix = estimate_mixing(mdp, 256, spec.seed);
    os << "beta_hat " << format_double(beta.beta_hat) << " (argmin state " << beta.argmin_state
       << ", " << (beta.exhaustive ? "exhaustive over deterministic policies" : "sampled") << ")\n";
    os << "tau_hat " << format_double(mix.tau_hat) << " (worst one-step factor "
       << format_double(mix.worst_factor) << ")\n";
    if (beta.beta_hat < 1e-9)
      os << "warning: stationary mass reaches zero; assumptions unmet\n";
  } catch (const AssumptionViolation& e) {
    os << "warning: assumption violation: " << e.what() << '\n';
  }
  os << "horizons:";
  for (int64_t t : {100LL, 1000LL, 10000LL, 100000LL})
    os << " T=" << t << " -> H=" << horizon_steps(mdp.gamma, t);
  os << '\n';
  OptimalPolicyResult opt = optimal_policy(mdp, eval_tol);
  os << "optimal value range [" << format_double(opt.values.v.minCoeff()) << ", "
     << format_double(opt.values.v.maxCoeff()) << "]\n";
  return os.str();
}

}  // namespace mdplab
