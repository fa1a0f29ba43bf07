#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fpsi {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Physical and scheme coefficients of the coupled Stokes-Biot problem.
struct PhysicalParams {
  double mu_f = 1.0;      // fluid viscosity
  double rho_f = 1.0;     // fluid density
  double rho_p = 1.0;     // structure density
  double mu_p = 1.0;      // Lame coefficients of the skeleton
  double lambda_p = 1.0;
  double s0 = 1.0;        // storativity
  Eigen::Matrix2d K = Eigen::Matrix2d::Identity();  // permeability
  double alpha = 1.0;     // Biot-Willis constant
  double alpha_BJS = 0.0;
  double gamma_BJS = 0.0;  // slip coefficient; 0 means no-slip
  double gamma_f = 1.0;    // Robin combination parameters
  double gamma_p = 1.0;
  double beta = 0.0;       // spring coefficient of the wall
  bool quasistatic_fluid = false;
  bool allow_zero_storativity = false;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  Eigen::Matrix2d K_inv() const { return K.inverse(); }
  /// Tangential BJS coefficient sqrt(tau.K.tau)/(mu_f alpha_BJS) for tangent `tx, ty`.
  double bjs_from_alpha(double tx, double ty) const;
};

}  // namespace fpsi
