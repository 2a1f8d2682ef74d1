#pragma once

#include <string>
#include <vector>

#include "tailopt/common.hpp"

namespace tailopt {

/// Ordered caudal-vertebra centrum lengths for one specimen.
struct VertebralSeries {
  enum class Group { kInertialManeuvering, kNonspecialist };

  std::string species;
  Group group = Group::kNonspecialist;
  std::vector<double> lengths_mm;  // proximal to distal
};

/// Divide every centrum length by the first caudal vertebra's length.
std::vector<double> normalize(const VertebralSeries& series);
std::vector<double> normalize(const std::vector<double>& lengths);

/// Maximum absolute difference between neighboring normalized lengths.
double max_neighbor_diff(const std::vector<double>& normalized);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

/// Welch's unequal-variance t-test with Welch-Satterthwaite df.
TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// Paired t-test (df = n - 1). Zero difference variance is an error.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// CSV schema: species, group, vertebra_index (1-based), centrum_length_mm.
/// group is "inertial_maneuvering" or "nonspecialist".
std::vector<VertebralSeries> read_morpho_csv(const std::string& text);
std::vector<VertebralSeries> read_morpho_file(const std::string& path);

struct MorphoReport {
  double mean_inertial = 0.0;      // group mean of per-species max neighbor diffs
  double mean_nonspecialist = 0.0;
  TTestResult welch;
  int n_inertial = 0;
  int n_nonspecialist = 0;
  std::vector<std::string> skipped;  // species with fewer than 2 vertebrae
};

/// normalize -> max_neighbor_diff per species -> Welch test across groups.
MorphoReport morpho_compare(const std::vector<VertebralSeries>& series);

}  // namespace tailopt
