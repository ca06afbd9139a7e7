#include "grasp/adam.hpp"

#include <cmath>

#include "grasp/errors.hpp"

namespace grasp {

Adam::Adam(Eigen::VectorXd learning_rates, AdamMoments moments)
    : lr_(std::move(learning_rates)),
      moments_(moments),
      m_(Eigen::VectorXd::Zero(lr_.size())),
      v_(Eigen::VectorXd::Zero(lr_.size())) {
  if (!(moments_.beta1 >= 0.0 && moments_.beta1 < 1.0 && moments_.beta2 >= 0.0 && moments_.beta2 < 1.0 &&
        moments_.epsilon > 0.0)) {
    fail(ErrorCode::kInvalidParams, "invalid Adam moment coefficients");
  }
}

Eigen::VectorXd Adam::step(const Eigen::VectorXd& gradient) {
  if (gradient.size() != lr_.size()) fail(ErrorCode::kInvalidParams, "gradient size mismatch");
  ++t_;
  const double b1 = moments_.beta1, b2 = moments_.beta2;
  m_ = b1 * m_ + (1.0 - b1) * gradient;
  v_ = b2 * v_ + (1.0 - b2) * gradient.cwiseProduct(gradient);
  const double c1 = 1.0 - std::pow(b1, t_), c2 = 1.0 - std::pow(b2, t_);
  Eigen::VectorXd update(lr_.size());
  for (Eigen::Index i = 0; i < lr_.size(); ++i) {
    update[i] = -lr_[i] * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + moments_.epsilon);
  }
  return update;
}

}  // namespace grasp
