#pragma once

#include "melasso/simulate.hpp"

#include <filesystem>

namespace melasso {

/// Write a simulated dataset as CSV files (y.csv, W.csv and, when
/// include_truth, X.csv, U.csv, beta0.csv) plus a truemodel.json sidecar.
void write_dataset(const SimulatedDataset& data, const std::filesystem::path& dir,
                   bool include_truth);

}  // namespace melasso
