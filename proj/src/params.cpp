#include "fpsi/params.hpp"

#include <cmath>

namespace fpsi {

namespace {
void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("invalid parameter '" + key + "': " + what);
}
}  // namespace

void PhysicalParams::validate() const {
  require(std::isfinite(mu_f) && mu_f > 0.0, "mu_f", "must be > 0");
  require(std::isfinite(rho_f) && rho_f >= 0.0, "rho_f", "must be >= 0");
  require(std::isfinite(rho_p) && rho_p >= 0.0, "rho_p", "must be >= 0");
  require(std::isfinite(mu_p) && mu_p > 0.0, "mu_p", "must be > 0");
  require(std::isfinite(lambda_p) && lambda_p > 0.0, "lambda_p", "must be > 0");
  if (allow_zero_storativity) {
    require(std::isfinite(s0) && s0 >= 0.0, "s0", "must be >= 0");
  } else {
    require(std::isfinite(s0) && s0 > 0.0, "s0", "must be > 0 (set allow_zero_storativity for s0 = 0)");
  }
  require(K.allFinite() && std::abs(K(0, 1) - K(1, 0)) <= 1e-14 * K.cwiseAbs().maxCoeff(), "K",
          "must be symmetric");
  require(K(0, 0) > 0.0 && K.determinant() > 0.0, "K", "must be positive definite");
  require(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0, "alpha", "must lie in [0, 1]");
  require(std::isfinite(alpha_BJS) && alpha_BJS >= 0.0, "alpha_BJS", "must be >= 0");
  require(std::isfinite(gamma_BJS) && gamma_BJS >= 0.0, "gamma_BJS", "must be >= 0");
  require(std::isfinite(gamma_f) && gamma_f > 0.0, "gamma_f", "must be > 0");
  require(std::isfinite(gamma_p) && gamma_p > 0.0, "gamma_p", "must be > 0");
  require(std::isfinite(beta) && beta >= 0.0, "beta", "must be >= 0");
}

double PhysicalParams::bjs_from_alpha(double tx, double ty) const {
  if (alpha_BJS <= 0.0) return 0.0;
  const double k_tau = tx * (K(0, 0) * tx + K(0, 1) * ty) + ty * (K(1, 0) * tx + K(1, 1) * ty);
  return std::sqrt(k_tau) / (mu_f * alpha_BJS);
}

}  // namespace fpsi
