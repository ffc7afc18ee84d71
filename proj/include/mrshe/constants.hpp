#pragma once

#include "mrshe/errors.hpp"

namespace mrshe {

/// Inputs for the explicit transport-inequality constants. Everything is
/// evaluated in the natural-log domain: the constants reach magnitudes far
/// beyond double range for moderate Lipschitz constants.
struct ConstantEnv {
  double horizon = 1.0;      // T
  double lipschitz = 0.0;    // joint Lipschitz constant of f and sigma in u
  double sigma_bound = 1.0;  // uniform bound of sigma
  double lip_lower = 0.0;    // lower bi-Lipschitz constant of h (general case)
  double lip_upper = 0.0;    // upper bi-Lipschitz constant of h

  bool has_ratio() const { return lip_lower > 0.0; }

  void validate(bool need_ratio) const {
    if (!(horizon > 0.0)) throw std::domain_error("env: horizon must be > 0");
    if (!(lipschitz >= 0.0)) throw std::domain_error("env: lipschitz must be >= 0");
    if (!(sigma_bound > 0.0)) throw std::domain_error("env: sigma_bound must be > 0");
    if (need_ratio && (!(lip_lower > 0.0) || lip_upper < lip_lower))
      throw std::domain_error("env: need 0 < lip_lower <= lip_upper");
  }
};

/// log of the moment-bound constant C(T,q); defined for q > 10 only (pole at
/// q = 10).
double log_c_tq(double T, double q);

struct InfimumResult {
  double log_value;
  double argmin;
};

/// log of C(T,p,eps) = inf over q > 10 of
///   (p/(q-p)) q^(-q/p) eps^(1-q/p) (q - p + q C(T,q))^(q/p),
/// for p in (0,10], eps > 0. Deterministic grid pre-scan plus golden-section.
InfimumResult log_c_tpe_detail(double T, double p, double eps);
double log_c_tpe(double T, double p, double eps);

struct ConstantResult {
  double log_value;
  double eps_argmin;  // 0 when the closed-form limit applies
  double q_argmin;    // inner argmin at eps_argmin; 0 in the limit case
};

/// log of the transport constant for the linear mean reflection.
ConstantResult log_c1_detail(const ConstantEnv& env);
double log_c1(const ConstantEnv& env);

/// log of the transport constant for the general mean reflection; the factor
/// 12 becomes 6 (1 + lip_upper/lip_lower) throughout.
ConstantResult log_c2_detail(const ConstantEnv& env);
double log_c2(const ConstantEnv& env);

}  // namespace mrshe
