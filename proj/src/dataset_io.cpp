#include "melasso/dataset_io.hpp"

#include "melasso/csv.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace melasso {

void write_dataset(const SimulatedDataset& data, const std::filesystem::path& dir,
                   bool include_truth) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::vector<std::string> names(static_cast<std::size_t>(data.W.cols()));
  for (std::size_t j = 0; j < names.size(); ++j) names[j] = "w" + std::to_string(j + 1);

  write_vector_csv(dir / "y.csv", data.y, "y");
  write_matrix_csv(dir / "W.csv", data.W, names);
  if (include_truth) {
    write_matrix_csv(dir / "X.csv", data.X, names);
    write_matrix_csv(dir / "U.csv", data.U, names);
    write_vector_csv(dir / "beta0.csv", data.truth.beta0, "beta0");
  }

  nlohmann::json truth;
  truth["support"] = data.truth.support;
  truth["sigma_eps"] = data.truth.sigma_eps;
  truth["mu0"] = data.truth.mu0;
  truth["coef_sd"] = data.truth.coef_sd;
  truth["centered"] = data.centered;
  nlohmann::json sxx, suu;
  to_json(sxx, data.truth.sigma_xx);
  to_json(suu, data.truth.sigma_uu);
  truth["sigma_xx"] = sxx;
  truth["sigma_uu"] = suu;
  write_file_atomic(dir / "truemodel.json", truth.dump(2) + "\n");
}

}  // namespace melasso
