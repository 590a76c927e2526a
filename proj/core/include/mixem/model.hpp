#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace mixem {

enum class Family { Gaussian, Laplacian };

std::string family_name(Family family);
Family family_from_name(const std::string& name);

/// Equal-weight mixture with K mean vectors and a shared scale
/// (sigma for Gaussian components, b for Laplacian ones). Weights are
/// 1/K by construction and never stored. Immutable after construction.
class MixtureModel {
 public:
  MixtureModel(Family family, Eigen::MatrixXd means, double scale = 1.0);

  Family family() const { return family_; }
  const Eigen::MatrixXd& means() const { return means_; }
  double scale() const { return scale_; }
  int K() const { return static_cast<int>(means_.rows()); }
  int d() const { return static_cast<int>(means_.cols()); }

 private:
  Family family_;
  Eigen::MatrixXd means_;  // K x d
  double scale_;
};

/// A batch of draws plus the provenance needed to regenerate it.
struct SampleSet {
  Eigen::MatrixXd data;  // n x d
  std::uint64_t seed = 0;
  bool centered = false;

  int n() const { return static_cast<int>(data.rows()); }
  int d() const { return static_cast<int>(data.cols()); }
};

}  // namespace mixem
