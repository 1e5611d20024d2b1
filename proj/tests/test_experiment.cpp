#include "melasso/experiment.hpp"

#include "melasso/csv.hpp"
#include "melasso/dataset_io.hpp"
#include "melasso/rng.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace melasso;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("melasso_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig small_config() {
  ExperimentConfig config;
  config.scenario = Scenario::custom;
  config.n = 40;
  config.p = 25;
  config.s0 = 3;
  config.sigma_u_sq = 0.2;
  config.replicates = 4;
  config.seed = 99;
  config.cv_folds = 5;
  config.lambda_grid_size = 20;
  config.kappa_grid_size = 15;
  config.corrected_cv.max_iter = 300;
  return config;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  RngStream rng(701);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::exp(20.0 * (rng.next_uniform() - 0.5)) *
                     (rng.next_uniform() < 0.5 ? -1.0 : 1.0);
    const std::string s = format_double(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.5) == "1.5");
}

TEST_CASE("csv read errors carry coordinates") {
  const fs::path dir = temp_dir("csv");
  {
    std::ofstream out(dir / "bad.csv");
    out << "a,b\n1,2\n3,oops\n";
  }
  const CsvTable t = read_csv(dir / "bad.csv", true);
  CHECK_THROWS_WITH_AS(to_matrix(t), doctest::Contains("row 2, column 2"),
                       validation_error);
}

TEST_CASE("atomic writes replace files in place") {
  const fs::path dir = temp_dir("atomic");
  write_file_atomic(dir / "f.csv", "one\n");
  write_file_atomic(dir / "f.csv", "two\n");
  CHECK(slurp(dir / "f.csv") == "two\n");
  CHECK_FALSE(fs::exists(dir / "f.csv.tmp"));
}

TEST_CASE("dataset export round-trips bitwise") {
  TrueModel model = draw_model(8, 2, 2.0, true, 703, 0);
  model.sigma_uu = CovarianceSpec::identity_scaled(8, 0.2);
  const SimulatedDataset data = simulate_linear(model, 30, false, 703, 0);
  const fs::path dir = temp_dir("dataset");
  write_dataset(data, dir, true);

  const Matrix W = to_matrix(read_csv(dir / "W.csv", true));
  const Matrix y = to_matrix(read_csv(dir / "y.csv", true));
  REQUIRE(W.rows() == data.W.rows());
  CHECK((W - data.W).cwiseAbs().maxCoeff() == 0.0);
  CHECK((y.col(0) - data.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fs::exists(dir / "truemodel.json"));
  CHECK(fs::exists(dir / "beta0.csv"));
}

TEST_CASE("config hash ignores threads and output directory") {
  ExperimentConfig a = small_config();
  ExperimentConfig b = small_config();
  b.threads = 7;
  b.output_dir = "/somewhere/else";
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 100;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("experiment output is byte-identical across thread counts") {
  ExperimentConfig config = small_config();
  config.threads = 1;
  const ExperimentResult one = run_experiment(config);
  config.threads = 2;
  const ExperimentResult two = run_experiment(config);
  config.threads = 4;
  const ExperimentResult four = run_experiment(config);
  CHECK(one.table_csv() == two.table_csv());
  CHECK(one.table_csv() == four.table_csv());
  CHECK(one.replicates_csv() == two.replicates_csv());
  CHECK(one.replicates_csv() == four.replicates_csv());
}

TEST_CASE("experiment rerun with the same seed is bit-identical on disk") {
  ExperimentConfig config = small_config();
  const fs::path dir = temp_dir("exp");
  config.output_dir = dir.string();
  run_experiment(config);
  const std::string first = slurp(dir / "results.csv");
  run_experiment(config);
  CHECK(slurp(dir / "results.csv") == first);
  CHECK(slurp(dir / "results.csv").find("naive") != std::string::npos);
  const auto replicates = slurp(dir / "replicates.csv");
  CHECK(replicates.find("corrected") != std::string::npos);
}

TEST_CASE("experiment summary carries both methods with sane metrics") {
  ExperimentConfig config = small_config();
  const ExperimentResult result = run_experiment(config);
  REQUIRE(result.summary.count("naive") == 1);
  REQUIRE(result.summary.count("corrected") == 1);
  const auto& naive = result.summary.at("naive");
  CHECK(naive.count == config.replicates);
  CHECK(naive.tp.mean >= 0.0);
  CHECK(naive.tp.mean <= static_cast<double>(config.s0));
  CHECK(result.records.size() == static_cast<std::size_t>(2 * config.replicates));
  // replicate-major and deterministic ordering: naive then corrected
  CHECK(result.records[0].method == "naive");
  CHECK(result.records[1].method == "corrected");
  CHECK(result.records[0].replicate == 0);
}

TEST_CASE("roc sweep produces monotone-bounded rates and both methods") {
  ExperimentConfig config;
  config.scenario = Scenario::roc_logistic;
  config.n = 50;
  config.p = 30;
  config.s0 = 3;
  config.sigma_u_sq = 0.2;
  config.coef_sd = 5.0;
  config.randomize_support = false;
  config.replicates = 3;
  config.seed = 7;
  config.glm.max_iter = 150;
  config.glm.tol = 1e-4;
  config.roc_kappa_grid = {0.05, 0.5, 2.0, 6.0};
  const RocResult result = run_roc(config);
  REQUIRE(result.points.size() == 8);
  for (const auto& pt : result.points) {
    CHECK(pt.tpr.mean >= 0.0);
    CHECK(pt.tpr.mean <= 1.0);
    CHECK(pt.fpr.mean >= 0.0);
    CHECK(pt.fpr.mean <= 1.0);
    CHECK(pt.l1.mean >= 0.0);
  }
  // tiny kappa keeps nearly everything at zero
  CHECK(result.points[0].fpr.mean <= 0.05);
}

TEST_CASE("fit_file reproduces the in-memory fit bit for bit") {
  TrueModel model = draw_model(12, 3, 2.0, true, 709, 0);
  model.sigma_uu = CovarianceSpec::identity_scaled(12, 0.2);
  model.sigma_eps = 0.2;
  const SimulatedDataset data = simulate_linear(model, 60, false, 709, 0);
  const fs::path dir = temp_dir("fitfile");
  write_dataset(data, dir, false);

  FitFileConfig config;
  config.w_csv = dir / "W.csv";
  config.y_csv = dir / "y.csv";
  config.sigma_source = SigmaSource::scalar;
  config.sigma_scalar = 0.2;
  config.method = FitMethod::naive;
  config.family = FitFamily::linear;
  config.lambda = 0.15;
  const FitFileResult from_file = fit_file(config);

  // In-memory pipeline with the same standardization arithmetic.
  const Index n = data.W.rows(), p = data.W.cols();
  const Vector means = data.W.colwise().mean();
  Vector sds(p);
  for (Index j = 0; j < p; ++j)
    sds[j] = std::sqrt((data.W.col(j).array() - means[j]).square().sum() /
                       static_cast<double>(n));
  Matrix Ws(n, p);
  for (Index j = 0; j < p; ++j) Ws.col(j) = (data.W.col(j).array() - means[j]) / sds[j];
  const Vector yc = data.y.array() - data.y.mean();
  const FitResult direct = naive_lasso(Ws, yc, 0.15);

  CHECK((from_file.fit.beta - direct.beta).cwiseAbs().maxCoeff() == 0.0);
  CHECK(from_file.fit.iterations == direct.iterations);
}

TEST_CASE("fit_file corrected and naive agree when Sigma_uu is zero") {
  TrueModel model = draw_model(10, 2, 2.0, true, 711, 0);
  model.sigma_eps = 0.3;
  const SimulatedDataset data = simulate_linear(model, 50, false, 711, 0);
  const fs::path dir = temp_dir("fitzero");
  write_dataset(data, dir, false);

  FitFileConfig config;
  config.w_csv = dir / "W.csv";
  config.y_csv = dir / "y.csv";
  config.sigma_source = SigmaSource::scalar;
  config.sigma_scalar = 0.0;
  config.family = FitFamily::linear;
  config.lambda = 0.2;
  config.method = FitMethod::naive;
  const FitFileResult naive = fit_file(config);

  config.method = FitMethod::corrected;
  config.lambda.reset();
  config.kappa = std::max(naive.fit.beta.lpNorm<1>(), 1e-3);
  const FitFileResult corrected = fit_file(config);

  CHECK(naive.fit.active_set == corrected.fit.active_set);
}

TEST_CASE("noise filter drops loud covariates and can empty the model") {
  const fs::path dir = temp_dir("filter");
  {
    std::ofstream w(dir / "W.csv");
    w << "a,b\n";
    RngStream rng(713);
    for (int i = 0; i < 30; ++i)
      w << format_double(rng.next_normal()) << ',' << format_double(rng.next_normal())
        << "\n";
    std::ofstream yv(dir / "y.csv");
    yv << "y\n";
    RngStream ry(714);
    for (int i = 0; i < 30; ++i) yv << format_double(ry.next_normal()) << "\n";
  }
  FitFileConfig config;
  config.w_csv = dir / "W.csv";
  config.y_csv = dir / "y.csv";
  config.sigma_source = SigmaSource::diag_csv;
  config.family = FitFamily::linear;
  config.method = FitMethod::naive;
  config.lambda = 0.1;
  config.filter_noise = true;

  {
    // variances at 60% of each column's variance: everything is filtered
    const Matrix W = to_matrix(read_csv(dir / "W.csv", true));
    Vector var(2);
    for (Index j = 0; j < 2; ++j) {
      const double m = W.col(j).mean();
      var[j] = (W.col(j).array() - m).square().sum() / static_cast<double>(W.rows());
    }
    std::ofstream sig(dir / "sigma_all.csv");
    sig << format_double(0.6 * var[0]) << "\n" << format_double(0.6 * var[1]) << "\n";
    std::ofstream sig_one(dir / "sigma_one.csv");
    sig_one << format_double(0.6 * var[0]) << "\n" << format_double(0.1 * var[1]) << "\n";
  }

  config.sigma_path = dir / "sigma_all.csv";
  CHECK_THROWS_AS(fit_file(config), validation_error);

  config.sigma_path = dir / "sigma_one.csv";
  const FitFileResult result = fit_file(config);
  REQUIRE(result.kept_columns.size() == 1);
  CHECK(result.kept_columns[0] == 1);
  CHECK(result.covariate_names[0] == "b");
}

TEST_CASE("fit_file validates shapes and cells") {
  const fs::path dir = temp_dir("fitbad");
  {
    std::ofstream w(dir / "W.csv");
    w << "a,b\n1,2\n3,4\n";
    std::ofstream yv(dir / "y.csv");
    yv << "1\n2\n3\n";  // wrong length
  }
  FitFileConfig config;
  config.w_csv = dir / "W.csv";
  config.y_csv = dir / "y.csv";
  config.sigma_source = SigmaSource::scalar;
  config.sigma_scalar = 0.1;
  config.family = FitFamily::linear;
  config.method = FitMethod::naive;
  config.lambda = 0.1;
  CHECK_THROWS_AS(fit_file(config), validation_error);
}

TEST_CASE("scenario name round trip") {
  for (const auto s : {Scenario::table1, Scenario::table2, Scenario::table3,
                       Scenario::roc_logistic, Scenario::custom})
    CHECK(scenario_from_name(scenario_name(s)) == s);
  CHECK_THROWS_AS(scenario_from_name("tableX"), config_error);
}
