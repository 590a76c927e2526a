#include "mixem/model.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace mixem {

std::string family_name(Family family) {
  switch (family) {
    case Family::Gaussian:
      return "gaussian";
    case Family::Laplacian:
      return "laplacian";
  }
  throw std::invalid_argument("family_name: unknown family");
}

Family family_from_name(const std::string& name) {
  if (name == "gaussian") return Family::Gaussian;
  if (name == "laplacian") return Family::Laplacian;
  throw std::invalid_argument("unknown mixture family: " + name);
}

MixtureModel::MixtureModel(Family family, Eigen::MatrixXd means, double scale)
    : family_(family), means_(std::move(means)), scale_(scale) {
  if (means_.rows() < 1 || means_.cols() < 1) {
    throw std::invalid_argument("MixtureModel: need K >= 1 and d >= 1");
  }
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) {
    throw std::invalid_argument("MixtureModel: scale must be positive");
  }
  if (!means_.allFinite()) {
    throw std::invalid_argument("MixtureModel: means must be finite");
  }
}

}  // namespace mixem
