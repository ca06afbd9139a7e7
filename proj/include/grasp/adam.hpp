#ifndef GRASP_ADAM_HPP
#define GRASP_ADAM_HPP

#include <Eigen/Core>

namespace grasp {

struct AdamMoments {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with a learning rate per coordinate, so parameter groups (rotation,
// translation, joint angles) can use different step sizes.
class Adam {
 public:
  Adam(Eigen::VectorXd learning_rates, AdamMoments moments = {});

  // Returns the update to add to the parameters.
  Eigen::VectorXd step(const Eigen::VectorXd& gradient);
  int steps() const { return t_; }

 private:
  Eigen::VectorXd lr_;
  AdamMoments moments_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  int t_ = 0;
};

}  // namespace grasp

#endif  // GRASP_ADAM_HPP
