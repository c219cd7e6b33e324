#include "seqcfa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <tuple>

#include "seqcfa/error.hpp"

namespace seqcfa {

GridSpec default_grid(Design design) {
  GridSpec g;
  if (design == Design::MostComplex) {
    g.sizes = {200, 500, 1000};
    g.cross_loadings = {0.0, 0.2};
  } else {
    g.sizes = {100, 500, 1000, 2000, 5000};
  }
  return g;
}

std::vector<SimCondition> expand_grid(Design design, const GridSpec& grid, const std::optional<ModelSpec>& custom) {
  std::vector<SimCondition> out;
  for (int n : grid.sizes)
    for (auto dist : grid.distributions)
      for (auto pattern : grid.patterns)
        for (double e : grid.error_levels)
          for (double cl : grid.cross_loadings) {
            SimCondition c;
            c.design = design;
            c.custom_spec = custom;
            c.n_obs = n;
            c.error_level = e;
            c.distribution = dist;
            c.residual_pattern = pattern;
            c.cross_loading = cl;
            c.validate();
            out.push_back(std::move(c));
          }
  return out;
}

namespace {

double unbiasedness_error(const FittedModel& fit) {
  const ScoringWeights sw = scoring_weights(fit, ScoreMethod::Bartlett);
  const Eigen::MatrixXd wl = sw.weights * sw.loadings;
  return (wl - Eigen::MatrixXd::Identity(wl.rows(), wl.cols())).cwiseAbs().maxCoeff();
}

// Mean RMSE and |r| over the scored factors against their true realizations.
std::pair<double, double> score_metrics(const FactorScores& scores, const SimulatedDataset& ds) {
  double rmse = 0.0, r = 0.0;
  for (std::size_t k = 0; k < scores.factor_names.size(); ++k) {
    const Eigen::VectorXd est = scores.values.col(static_cast<Eigen::Index>(k));
    const Eigen::VectorXd truth = ds.latent(scores.factor_names[k]);
    rmse += rmse_aligned(est, truth);
    r += std::abs(pearson_r(est, truth));
  }
  const auto k = static_cast<double>(scores.factor_names.size());
  return {rmse / k, r / k};
}

}  // namespace

ReplicationResult run_replication(const SimCondition& condition, int condition_index, int rep,
                                  const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  ReplicationResult res;
  res.condition = condition;
  res.condition_index = condition_index;
  res.rep = rep;

  const SimulatedDataset ds = generate(condition);
  const ModelSpec& spec = ds.params.spec;
  res.data_checksum = ds.data.checksum();

  SequentialOptions seq_opts;
  seq_opts.fit = options.fit;
  seq_opts.method = options.method;
  seq_opts.standardize_forwarded = options.standardize_forwarded;
  try {
    const SequentialResult seq = fit_sequential(spec, ds.data, seq_opts);
    if (seq.completed) {
      const auto [rmse, r] = score_metrics(seq.final_scores, ds);
      double bias = 0.0;
      for (const auto& fit : seq.stage_fits) bias = std::max(bias, unbiasedness_error(fit));
      res.rmse_seq = rmse;
      res.r_seq = r;
      res.status_seq = FitStatus::Converged;
      res.max_unbiasedness_error = std::max(res.max_unbiasedness_error, bias);
    } else {
      res.status_seq = seq.failed_status.value_or(FitStatus::NonConverged);
    }
  } catch (const Error&) {
    res.status_seq = FitStatus::NonConverged;
  }

  try {
    const FittedModel trad = fit_traditional(spec, ds.data, options.fit);
    res.status_trad = trad.status;
    if (trad.converged()) {
      const FactorScores scores = compute_scores(trad, ds.data, options.method);
      const auto [rmse, r] = score_metrics(scores, ds);
      const double bias = unbiasedness_error(trad);
      res.rmse_trad = rmse;
      res.r_trad = r;
      res.max_unbiasedness_error = std::max(res.max_unbiasedness_error, bias);
    }
  } catch (const Error&) {
    res.status_trad = FitStatus::NonConverged;
    res.rmse_trad.reset();
    res.r_trad.reset();
  }

  res.wall_time = std::chrono::steady_clock::now() - start;
  return res;
}

std::vector<ReplicationResult> run_grid(Design design, const GridSpec& grid, int reps, std::uint64_t seed,
                                        const RunOptions& options, const std::optional<ModelSpec>& custom) {
  if (reps < 1) throw Error("reps must be at least 1");
  const std::vector<SimCondition> conditions = expand_grid(design, grid, custom);
  const std::size_t total = conditions.size() * static_cast<std::size_t>(reps);
  std::vector<ReplicationResult> out(total);

  auto work = [&](std::size_t slot) {
    const auto ci = slot / static_cast<std::size_t>(reps);
    const auto rep = static_cast<int>(slot % static_cast<std::size_t>(reps));
    SimCondition c = conditions[ci];
    c.seed = derive_seed(seed, ci, static_cast<std::uint64_t>(rep));
    out[slot] = run_replication(c, static_cast<int>(ci), rep, options);
  };

  int threads = options.threads;
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), total));
  if (threads <= 1) {
    for (std::size_t s = 0; s < total; ++s) work(s);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t s = next++; s < total; s = next++) work(s);
    });
  pool.clear();
  return out;
}

namespace {

auto canonical_key(const ReplicationResult& r) {
  const auto& c = r.condition;
  return std::make_tuple(c.n_obs, static_cast<int>(c.distribution), -static_cast<int>(c.residual_pattern),
                         c.error_level, c.cross_loading, r.condition_index, r.rep, c.seed);
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

PairedOutcome paired_outcome(const std::vector<ReplicationResult>& results,
                             const std::function<bool(const ReplicationResult&)>& select, bool use_rmse,
                             double confidence) {
  std::vector<double> diffs;
  for (const auto& r : results) {
    if (!r.both_converged() || !select(r)) continue;
    diffs.push_back(use_rmse ? *r.rmse_seq - *r.rmse_trad : *r.r_seq - *r.r_trad);
  }
  PairedOutcome out;
  out.n_pairs = static_cast<int>(diffs.size());
  out.mean_diff = mean_of(diffs).value_or(0.0);
  if (diffs.size() < 2) {
    out.note = "fewer than two paired replications";
    return out;
  }
  try {
    out.test = paired_t_test(Eigen::Map<const Eigen::VectorXd>(diffs.data(), static_cast<Eigen::Index>(diffs.size())),
                             confidence);
  } catch (const NumericError&) {
    out.note = "degenerate: differences have zero variance";
  }
  return out;
}

SummaryTable summarize(std::vector<ReplicationResult> results) {
  if (results.empty()) throw Error("summarize needs at least one replication");
  std::sort(results.begin(), results.end(),
            [](const ReplicationResult& a, const ReplicationResult& b) { return canonical_key(a) < canonical_key(b); });
  const bool any = std::any_of(results.begin(), results.end(), [](const ReplicationResult& r) {
    return r.status_seq == FitStatus::Converged || r.status_trad == FitStatus::Converged;
  });
  if (!any) throw AllFailedError("all replications failed for both methods");

  SummaryTable table;
  table.total_replications = static_cast<int>(results.size());

  std::size_t i = 0;
  while (i < results.size()) {
    const auto& c0 = results[i].condition;
    SummaryRow row;
    row.n = c0.n_obs;
    row.distribution = c0.distribution;
    row.pattern = c0.residual_pattern;
    std::vector<double> rs, rt, cs, ct;
    for (; i < results.size(); ++i) {
      const auto& r = results[i];
      const auto& c = r.condition;
      if (c.n_obs != row.n || c.distribution != row.distribution || c.residual_pattern != row.pattern) break;
      ++row.replications;
      if (r.status_seq == FitStatus::Converged) {
        ++row.converged_seq;
        rs.push_back(*r.rmse_seq);
        cs.push_back(*r.r_seq);
      }
      if (r.status_trad == FitStatus::Converged) {
        ++row.converged_trad;
        rt.push_back(*r.rmse_trad);
        ct.push_back(*r.r_trad);
      }
      if (r.both_converged()) ++row.converged_both;
    }
    row.rmse_seq = mean_of(rs);
    row.rmse_trad = mean_of(rt);
    row.r_seq = mean_of(cs);
    row.r_trad = mean_of(ct);
    table.rows.push_back(row);
  }

  auto all = [](const ReplicationResult&) { return true; };
  table.rmse = paired_outcome(results, all, true);
  table.r = paired_outcome(results, all, false);
  return table;
}

// ---------------------------------------------------------------------------

std::vector<YearReport> validate_pipeline(const PanelData& panel, const ModelSpec& spec,
                                          const SequentialOptions& options) {
  if (panel.groups.empty()) throw DataError("panel has no groups");
  const auto& items = spec.variable_names();
  std::vector<YearReport> reports;
  bool any_stage = false;

  for (const auto& [key, group] : panel.groups) {
    YearReport rep;
    rep.group = key;
    rep.n_obs = static_cast<int>(group.data.n_obs());
    rep.rows_dropped = group.rows_dropped;
    rep.ids = group.ids;
    const DataMatrix data = group.data.select(items);
    rep.mean_index = mean_index(data.values());

    {
      rep.traditional_attempted = true;
      try {
        FittedModel trad =
            spec.levels() >= 2 ? fit_traditional(spec, data, options.fit) : fit_cfa(spec, data, options.fit);
        rep.traditional_status = trad.status;
        rep.traditional_message = trad.message;
        if (trad.converged()) {
          rep.traditional_indices = fit_indices(trad, trad.sample_cov);
          rep.traditional_fit = std::move(trad);
        }
      } catch (const Error& e) {
        rep.traditional_status = FitStatus::NonConverged;
        rep.traditional_message = e.what();
      }
    }

    SequentialResult seq;
    bool seq_ran = false;
    if (spec.levels() >= 2) {
      try {
        seq = fit_sequential(spec, data, options);
        seq_ran = true;
      } catch (const Error& e) {
        rep.failed_stage = 1;
        rep.sequential_message = e.what();
      }
    } else {
      // A one-level model is a single stage.
      seq.stage_specs = {spec};
      try {
        FittedModel fit = fit_cfa(spec, data, options.fit);
        if (fit.converged()) {
          seq.stage_scores.push_back(compute_scores(fit, data, options.method));
          seq.final_scores = seq.stage_scores.back();
          seq.completed = true;
        } else {
          seq.failed_stage = 1;
          seq.failed_status = fit.status;
          seq.message = "stage 1 " + std::string(to_string(fit.status)) + ": " + fit.message;
        }
        seq.stage_fits.push_back(std::move(fit));
      } catch (const Error& e) {
        seq.failed_stage = 1;
        seq.message = std::string("stage 1: ") + e.what();
      }
      seq_ran = true;
    }

    if (seq_ran) {
      rep.sequential_completed = seq.completed;
      rep.failed_stage = seq.failed_stage;
      rep.sequential_message = seq.message;
      for (std::size_t k = 0; k < seq.stage_fits.size(); ++k) {
        const FittedModel& fit = seq.stage_fits[k];
        StageReport sr;
        sr.stage = static_cast<int>(k) + 1;
        sr.factors = fit.factors;
        sr.status = fit.status;
        sr.message = fit.message;
        if (fit.converged()) {
          any_stage = true;
          sr.indices = fit_indices(fit, fit.sample_cov);
          sr.omega = omega_per_factor(fit);
          if (!sr.omega.empty()) {
            double s = 0.0;
            for (const auto& [name, w] : sr.omega) s += w;
            sr.mean_omega = s / static_cast<double>(sr.omega.size());
          }
        }
        rep.stages.push_back(std::move(sr));
      }
      if (seq.completed) {
        rep.sequential_scores = seq.final_scores.values;
        rep.score_names = seq.final_scores.factor_names;
      }
    }
    reports.push_back(std::move(rep));
  }

  if (!any_stage) throw AllFailedError("no group produced a converged stage");
  return reports;
}

}  // namespace seqcfa
