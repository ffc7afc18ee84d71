#include "mrshe/constants.hpp"

#include <cmath>
#include <limits>

#include "mrshe/logdomain.hpp"

namespace mrshe {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kQGuard = 1e-6;  // search domain starts at 10 + guard
constexpr double kQMax = 500.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

double half_log_2t_over_pi(double T) { return 0.5 * std::log(2.0 * T / kPi); }

// Shared body of the two transport constants: prefactor log plus the
// Gronwall exponent, minimized over eps in (0, 1/(factor * lipschitz^2)).
ConstantResult transport_constant(double factor, const ConstantEnv& env) {
  const double T = env.horizon;
  const double ct2 = env.lipschitz * env.lipschitz;
  const double base =
      std::log(factor) + half_log_2t_over_pi(T) + 2.0 * std::log(env.sigma_bound);
  if (ct2 == 0.0) {
    // Constant coefficients: the exponential factor is 1 and the eps
    // dependence drops out entirely.
    return {base, 0.0, 0.0};
  }
  const double eps_max = 1.0 / (factor * ct2);
  double q_at_min = 0.0;
  auto value = [&](double eps) {
    const double r = factor * eps * ct2;
    if (!(r < 1.0)) return kInf;
    const InfimumResult inner = log_c_tpe_detail(T, 2.0, eps);
    // log( sqrt(2T/pi) + C(T,2,eps) ), assembled without leaving log domain.
    const double log_sum = log_sum_exp(half_log_2t_over_pi(T), inner.log_value);
    const double log_exponent =
        std::log(factor * ct2) + log_sum - std::log1p(-r);
    if (log_exponent > 709.0) return kInf;  // exp would overflow
    return base - std::log1p(-r) + std::exp(log_exponent);
  };
  const MinResult m = scan_then_refine(value, 0.0, eps_max, 200, eps_max * 1e-10);
  q_at_min = log_c_tpe_detail(T, 2.0, m.x).argmin;
  return {m.value, m.x, q_at_min};
}

}  // namespace

double log_c_tq(double T, double q) {
  if (!(T > 0.0)) throw std::domain_error("log_c_tq: T must be > 0");
  if (!(q > 10.0)) throw std::domain_error("log_c_tq: q must be > 10");
  return 0.5 * q * std::log(q) + (0.25 * q - 1.5) * std::log(T) +
         q * std::log(2.0 / kPi) +
         (0.5 * q + 1.0) * std::log(1.0 / std::sqrt(2.0 * kPi)) +
         (1.5 * q - 2.0) * std::log((6.0 * q - 8.0) / (q - 10.0));
}

InfimumResult log_c_tpe_detail(double T, double p, double eps) {
  if (!(T > 0.0)) throw std::domain_error("log_c_tpe: T must be > 0");
  if (!(p > 0.0 && p <= 10.0))
    throw std::domain_error("log_c_tpe: p must lie in (0, 10]");
  if (!(eps > 0.0)) throw std::domain_error("log_c_tpe: eps must be > 0");
  const double log_eps = std::log(eps);
  auto objective = [&](double q) {
    const double qp = q / p;
    // log( q - p + q C(T,q) ) via log-sum-exp; C(T,q) alone can overflow.
    const double log_inner = log_sum_exp(std::log(q - p), std::log(q) + log_c_tq(T, q));
    return std::log(p) - std::log(q - p) - qp * std::log(q) +
           (1.0 - qp) * log_eps + qp * log_inner;
  };
  const MinResult m = scan_geometric_then_refine(objective, 10.0 + kQGuard,
                                                 kQMax, kQGuard, 512, 1e-10);
  return {m.value, m.x};
}

double log_c_tpe(double T, double p, double eps) {
  return log_c_tpe_detail(T, p, eps).log_value;
}

ConstantResult log_c1_detail(const ConstantEnv& env) {
  env.validate(false);
  return transport_constant(12.0, env);
}

double log_c1(const ConstantEnv& env) { return log_c1_detail(env).log_value; }

ConstantResult log_c2_detail(const ConstantEnv& env) {
  env.validate(true);
  const double ratio = env.lip_upper / env.lip_lower;
  return transport_constant(6.0 * (1.0 + ratio), env);
}

double log_c2(const ConstantEnv& env) { return log_c2_detail(env).log_value; }

}  // namespace mrshe
