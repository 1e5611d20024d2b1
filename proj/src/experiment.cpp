#include "melasso/experiment.hpp"

#include "melasso/csv.hpp"
#include "melasso/dataset_io.hpp"
#include "melasso/projection.hpp"
#include "melasso/rng.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

namespace melasso {

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::table1: return "table1";
    case Scenario::table2: return "table2";
    case Scenario::table3: return "table3";
    case Scenario::roc_logistic: return "roc-logistic";
    case Scenario::custom: return "custom";
  }
  return "custom";
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "table1") return Scenario::table1;
  if (name == "table2") return Scenario::table2;
  if (name == "table3") return Scenario::table3;
  if (name == "roc-logistic") return Scenario::roc_logistic;
  if (name == "custom") return Scenario::custom;
  throw config_error("unknown scenario '" + name + "'");
}

CovarianceSpec scenario_sigma_xx(const ExperimentConfig& config) {
  if (config.scenario == Scenario::table2) {
    if (config.p % 50 != 0)
      throw config_error("table2 uses 50-wide blocks; p must be divisible by 50");
    return CovarianceSpec::block_toeplitz(config.p, 50, 0.8, 1.0);
  }
  return CovarianceSpec::identity_scaled(config.p, 1.0);
}

CovarianceSpec scenario_sigma_uu(const ExperimentConfig& config) {
  if (config.scenario == Scenario::table3) {
    if (!(config.sigma_u_sq > 0.0 && config.sigma_u_sq < 1.0))
      throw config_error("table3 needs sigma_u_sq in (0,1) as the Toeplitz decay base");
    return CovarianceSpec::toeplitz_decay(config.p, config.sigma_u_sq);
  }
  if (config.sigma_u_sq > 0.0)
    return CovarianceSpec::identity_scaled(config.p, config.sigma_u_sq);
  return CovarianceSpec::diagonal(Vector::Zero(config.p));
}

namespace {

nlohmann::json glm_config_json(const GlmConfig& g) {
  return {{"alpha", g.alpha},
          {"max_iter", g.max_iter},
          {"tol", g.tol},
          {"exact_iterations", g.exact_iterations},
          {"halve_on_increase", g.halve_on_increase}};
}

nlohmann::json corrected_config_json(const CorrectedConfig& c) {
  return {{"fixed_alpha", c.fixed_alpha},
          {"max_iter", c.max_iter},
          {"tol_change", c.tol_change},
          {"tol_pg", c.tol_pg}};
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

// Replicates are pulled from a shared counter; results land in
// caller-indexed slots so the reduction order never depends on scheduling.
void parallel_for(long count, int threads, const std::function<void(long)>& work) {
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = static_cast<int>(std::min<long>(workers, count));
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const long i = next.fetch_add(1);
        if (i >= count) break;
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> guard(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next.store(count);
          break;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void validate_common(const ExperimentConfig& config) {
  if (config.replicates < 1) throw config_error("replicates must be >= 1");
  if (config.n < 2) throw config_error("n must be >= 2");
  if (config.p < 1) throw config_error("p must be >= 1");
  if (config.s0 < 0 || config.s0 > config.p) throw config_error("s0 must lie in [0, p]");
  if (!(config.sigma_u_sq >= 0.0)) throw config_error("sigma_u_sq must be >= 0");
}

}  // namespace

nlohmann::json to_json(const ExperimentConfig& config) {
  // threads and output_dir are deliberately absent: they must not change
  // results, so they do not participate in the provenance hash.
  nlohmann::json j;
  j["scenario"] = scenario_name(config.scenario);
  j["n"] = config.n;
  j["p"] = config.p;
  j["s0"] = config.s0;
  j["sigma_u_sq"] = config.sigma_u_sq;
  j["sigma_eps"] = config.sigma_eps;
  j["coef_sd"] = config.coef_sd;
  j["randomize_support"] = config.randomize_support;
  j["replicates"] = config.replicates;
  j["seed"] = config.seed;
  j["cv_folds"] = config.cv_folds;
  j["lambda_grid_size"] = config.lambda_grid_size;
  j["lambda_min_ratio"] = config.lambda_min_ratio;
  j["kappa_grid_size"] = config.kappa_grid_size;
  j["kappa_lo_frac"] = config.kappa_lo_frac;
  j["roc_kappa_grid"] = config.roc_kappa_grid;
  j["glm"] = glm_config_json(config.glm);
  j["corrected"] = corrected_config_json(config.corrected);
  j["corrected_cv"] = corrected_config_json(config.corrected_cv);
  j["lasso"] = {{"tol", config.lasso.tol}, {"max_sweeps", config.lasso.max_sweeps}};
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  return hex64(fnv1a64(to_json(config).dump()));
}

namespace {

struct ReplicatePair {
  ReplicateRecord naive;
  ReplicateRecord corrected;
};

ReplicatePair run_linear_replicate(const ExperimentConfig& config,
                                   const CovarianceSpec& sxx, const CovarianceSpec& suu,
                                   const MeasurementModel& sigma_uu, long rep) {
  const auto t0 = std::chrono::steady_clock::now();

  TrueModel model = draw_model(config.p, config.s0, config.coef_sd,
                               config.randomize_support, config.seed,
                               static_cast<std::uint64_t>(rep));
  model.sigma_xx = sxx;
  model.sigma_uu = suu;
  model.sigma_eps = config.sigma_eps;

  const SimulatedDataset data = simulate_linear(model, config.n, /*center=*/true,
                                                config.seed,
                                                static_cast<std::uint64_t>(rep));

  // Naive lasso, lambda from 10-fold CV over a log grid under lambda_max.
  const double lmax = lambda_max(data.W, data.y);
  const auto lgrid = lambda_grid(lmax, config.lambda_grid_size, config.lambda_min_ratio);
  const std::uint64_t seed_l =
      RngStream(config.seed, static_cast<std::uint64_t>(rep), rng_purpose::cv_folds_naive)
          .next_u64();
  const CvPlan plan_l = make_cv_plan(config.n, config.cv_folds, lgrid, seed_l);
  const CvResult cv_l =
      cv_select(CvSolver::naive_lasso, data.W, data.y, nullptr, plan_l, config.lasso);
  const FitResult fit_naive = naive_lasso(data.W, data.y, cv_l.best, config.lasso);

  // Corrected lasso, kappa from 10-fold CV over [1e-3 R, R], R = 2 ||beta_L||_1.
  double radius = 2.0 * fit_naive.beta.lpNorm<1>();
  if (!(radius > 0.0)) radius = 1e-3;  // all-zero naive fit; keep the grid usable
  const auto kgrid = kappa_grid(radius, config.kappa_grid_size, config.kappa_lo_frac);
  const std::uint64_t seed_k =
      RngStream(config.seed, static_cast<std::uint64_t>(rep),
                rng_purpose::cv_folds_corrected)
          .next_u64();
  const CvPlan plan_k = make_cv_plan(config.n, config.cv_folds, kgrid, seed_k);
  // The corrected stage cross-validates the corrected loss itself, which is
  // what reproduces the published selection behavior (plain held-out MSE
  // systematically prefers smaller kappa).
  const CvResult cv_k = cv_select(CvSolver::corrected_ccl, data.W, data.y, &sigma_uu,
                                  plan_k, config.lasso, config.corrected_cv,
                                  CvLoss::corrected_loss);
  const FitResult fit_corrected =
      corrected_lasso_constrained(data.W, data.y, sigma_uu, cv_k.best, config.corrected);

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ReplicatePair out;
  out.naive = {rep, "naive", cv_l.best, selection_metrics(fit_naive.beta, model.beta0),
               fit_naive.converged, elapsed / 2.0};
  out.corrected = {rep, "corrected", cv_k.best,
                   selection_metrics(fit_corrected.beta, model.beta0),
                   fit_corrected.converged, elapsed / 2.0};
  return out;
}

}  // namespace

std::string ExperimentResult::table_csv() const {
  std::ostringstream out;
  out << "scenario,config_hash,seed,replicates,n,p,s0,sigma_u_sq,method,"
         "tp_mean,tp_se,fp_mean,fp_se,l2_mean,l2_se,l1_mean,l1_se,nonconverged\n";
  for (const std::string& method : {std::string("naive"), std::string("corrected")}) {
    const auto it = summary.find(method);
    if (it == summary.end()) continue;
    const MethodAggregate& a = it->second;
    out << scenario_name(config.scenario) << ',' << hash << ',' << config.seed << ','
        << config.replicates << ',' << config.n << ',' << config.p << ',' << config.s0
        << ',' << format_double(config.sigma_u_sq) << ',' << method << ','
        << format_double(a.tp.mean) << ',' << format_double(a.tp.se) << ','
        << format_double(a.fp.mean) << ',' << format_double(a.fp.se) << ','
        << format_double(a.l2.mean) << ',' << format_double(a.l2.se) << ','
        << format_double(a.l1.mean) << ',' << format_double(a.l1.se) << ','
        << a.nonconverged << '\n';
  }
  return out.str();
}

std::string ExperimentResult::replicates_csv() const {
  std::ostringstream out;
  out << "config_hash,seed,replicate,method,tuning_value,tp,fp,sign_correct,"
         "l1_err,l2_err,converged\n";
  for (const auto& r : records) {
    out << hash << ',' << config.seed << ',' << r.replicate << ',' << r.method << ','
        << format_double(r.tuning_value) << ',' << r.metrics.tp << ',' << r.metrics.fp
        << ',' << (r.metrics.sign_correct ? 1 : 0) << ','
        << format_double(r.metrics.l1_err) << ',' << format_double(r.metrics.l2_err)
        << ',' << (r.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

nlohmann::json ExperimentResult::table_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const std::string& method : {std::string("naive"), std::string("corrected")}) {
    const auto it = summary.find(method);
    if (it == summary.end()) continue;
    const MethodAggregate& a = it->second;
    rows.push_back({{"method", method},
                    {"tp_mean", a.tp.mean},
                    {"tp_se", a.tp.se},
                    {"fp_mean", a.fp.mean},
                    {"fp_se", a.fp.se},
                    {"l2_mean", a.l2.mean},
                    {"l2_se", a.l2.se},
                    {"l1_mean", a.l1.mean},
                    {"l1_se", a.l1.se},
                    {"nonconverged", a.nonconverged}});
  }
  return {{"config", to_json(config)}, {"config_hash", hash}, {"rows", rows}};
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate_common(config);
  if (config.scenario == Scenario::roc_logistic)
    throw config_error("run_experiment handles the linear scenarios; use run_roc");

  const CovarianceSpec sxx = scenario_sigma_xx(config);
  const CovarianceSpec suu = scenario_sigma_uu(config);
  const MeasurementModel sigma_uu = MeasurementModel::from_spec(suu);

  ExperimentResult result;
  result.config = config;
  result.hash = config_hash(config);
  result.records.resize(static_cast<std::size_t>(2 * config.replicates));

  parallel_for(config.replicates, config.threads, [&](long rep) {
    const ReplicatePair pair = run_linear_replicate(config, sxx, suu, sigma_uu, rep);
    result.records[static_cast<std::size_t>(2 * rep)] = pair.naive;
    result.records[static_cast<std::size_t>(2 * rep + 1)] = pair.corrected;
  });

  result.summary = aggregate(result.records);
  result.naive_nonconverged = result.summary.at("naive").nonconverged;
  result.corrected_nonconverged = result.summary.at("corrected").nonconverged;

  if (!config.output_dir.empty()) {
    const std::filesystem::path dir(config.output_dir);
    write_file_atomic(dir / "results.csv", result.table_csv());
    write_file_atomic(dir / "results.json", result.table_json().dump(2) + "\n");
    write_file_atomic(dir / "replicates.csv", result.replicates_csv());
  }
  return result;
}

std::string RocResult::table_csv() const {
  std::ostringstream out;
  out << "scenario,config_hash,seed,replicates,n,p,s0,sigma_u_sq,method,kappa,"
         "tpr_mean,tpr_se,fpr_mean,fpr_se,l1_mean,l1_se\n";
  for (const auto& pt : points) {
    out << scenario_name(config.scenario) << ',' << hash << ',' << config.seed << ','
        << config.replicates << ',' << config.n << ',' << config.p << ',' << config.s0
        << ',' << format_double(config.sigma_u_sq) << ',' << pt.method << ','
        << format_double(pt.kappa) << ',' << format_double(pt.tpr.mean) << ','
        << format_double(pt.tpr.se) << ',' << format_double(pt.fpr.mean) << ','
        << format_double(pt.fpr.se) << ',' << format_double(pt.l1.mean) << ','
        << format_double(pt.l1.se) << '\n';
  }
  return out.str();
}

nlohmann::json RocResult::table_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& pt : points) {
    rows.push_back({{"method", pt.method},
                    {"kappa", pt.kappa},
                    {"tpr_mean", pt.tpr.mean},
                    {"tpr_se", pt.tpr.se},
                    {"fpr_mean", pt.fpr.mean},
                    {"fpr_se", pt.fpr.se},
                    {"l1_mean", pt.l1.mean},
                    {"l1_se", pt.l1.se}});
  }
  return {{"config", to_json(config)}, {"config_hash", hash}, {"rows", rows}};
}

RocResult run_roc(const ExperimentConfig& config) {
  validate_common(config);
  if (config.s0 < 1) throw config_error("roc scenario needs s0 >= 1");

  std::vector<double> grid = config.roc_kappa_grid;
  if (grid.empty()) {
    // Spread kappa from near zero to past the expected ||beta0||_1
    // (= s0 * coef_sd * sqrt(2/pi)).
    const double expected_norm =
        static_cast<double>(config.s0) * config.coef_sd * std::sqrt(2.0 / M_PI);
    grid = kappa_grid(1.5 * expected_norm, 16, 0.02);
  }

  const CovarianceSpec sxx = scenario_sigma_xx(config);
  const CovarianceSpec suu = scenario_sigma_uu(config);
  const MeasurementModel sigma_uu = MeasurementModel::from_spec(suu);
  const MeasurementModel sigma_zero = MeasurementModel::zero(config.p);

  const std::size_t g = grid.size();
  // metric slot: [rep][method][kappa]
  struct Cell {
    double tpr = 0.0, fpr = 0.0, l1 = 0.0;
  };
  std::vector<std::vector<std::vector<Cell>>> cells(
      static_cast<std::size_t>(config.replicates),
      std::vector<std::vector<Cell>>(2, std::vector<Cell>(g)));

  parallel_for(config.replicates, config.threads, [&](long rep) {
    TrueModel model = draw_model(config.p, config.s0, config.coef_sd,
                                 config.randomize_support, config.seed,
                                 static_cast<std::uint64_t>(rep));
    model.sigma_xx = sxx;
    model.sigma_uu = suu;
    const SimulatedDataset data = simulate_glm(model, config.n, GlmFamily::logistic,
                                               config.seed,
                                               static_cast<std::uint64_t>(rep));
    for (int m = 0; m < 2; ++m) {
      const MeasurementModel& sigma = (m == 0) ? sigma_zero : sigma_uu;
      std::optional<Vector> warm;
      for (std::size_t i = 0; i < g; ++i) {
        const FitResult fit = conditional_score_lasso(GlmFamily::logistic, data.W,
                                                      data.y, sigma, grid[i], config.glm,
                                                      warm);
        warm = fit.beta;
        const SelectionMetrics sm = selection_metrics(fit.beta, model.beta0);
        Cell& c = cells[static_cast<std::size_t>(rep)][static_cast<std::size_t>(m)][i];
        c.tpr = static_cast<double>(sm.tp) / static_cast<double>(config.s0);
        c.fpr = config.p > config.s0 ? static_cast<double>(sm.fp) /
                                           static_cast<double>(config.p - config.s0)
                                     : 0.0;
        c.l1 = sm.l1_err;
      }
    }
  });

  RocResult result;
  result.config = config;
  result.hash = config_hash(config);
  const char* method_names[2] = {"naive", "corrected"};
  for (std::size_t i = 0; i < g; ++i) {
    for (int m = 0; m < 2; ++m) {
      std::vector<double> tpr, fpr, l1;
      tpr.reserve(static_cast<std::size_t>(config.replicates));
      for (long rep = 0; rep < config.replicates; ++rep) {
        const Cell& c = cells[static_cast<std::size_t>(rep)][static_cast<std::size_t>(m)][i];
        tpr.push_back(c.tpr);
        fpr.push_back(c.fpr);
        l1.push_back(c.l1);
      }
      auto mean_se = [](const std::vector<double>& v) {
        MetricSummary s;
        double sum = 0.0;
        for (double x : v) sum += x;
        s.mean = sum / static_cast<double>(v.size());
        if (v.size() > 1) {
          double ss = 0.0;
          for (double x : v) ss += (x - s.mean) * (x - s.mean);
          s.se = std::sqrt(ss / static_cast<double>(v.size() - 1)) /
                 std::sqrt(static_cast<double>(v.size()));
        }
        return s;
      };
      RocPoint pt;
      pt.kappa = grid[i];
      pt.method = method_names[m];
      pt.tpr = mean_se(tpr);
      pt.fpr = mean_se(fpr);
      pt.l1 = mean_se(l1);
      result.points.push_back(std::move(pt));
    }
  }

  if (!config.output_dir.empty()) {
    const std::filesystem::path dir(config.output_dir);
    write_file_atomic(dir / "roc.csv", result.table_csv());
    write_file_atomic(dir / "roc.json", result.table_json().dump(2) + "\n");
  }
  return result;
}

}  // namespace melasso
