#include "slbm/lbm_core.hpp"

#include <cmath>
#include <string>

namespace slbm {

CollisionParams CollisionParams::srt(double omega) {
  CollisionParams p{omega, CollisionModel::SRT, omega};
  p.validate();
  return p;
}

CollisionParams CollisionParams::trt(double omega, double lambda_odd) {
  CollisionParams p{omega, CollisionModel::TRT, lambda_odd};
  p.validate();
  return p;
}

void CollisionParams::validate() const {
  if (!(omega > 0.0 && omega < 2.0)) throw ConfigError("omega must lie in (0, 2), got " + std::to_string(omega));
  if (model == CollisionModel::TRT && !(lambda_odd > 0.0 && lambda_odd < 2.0))
    throw ConfigError("TRT lambda_odd must lie in (0, 2), got " + std::to_string(lambda_odd));
}

Macroscopics macroscopic(std::span<const double> f, const Stencil& s) {
  if (int(f.size()) != s.q) throw ConfigError("macroscopic: expected " + std::to_string(s.q) + " PDFs");
  Macroscopics m;
  Vec3 j{0, 0, 0};
  for (int i = 0; i < s.q; ++i) {
    m.rho += f[i];
    for (int a = 0; a < 3; ++a) j[a] += s.c[i][a] * f[i];
  }
  if (!(m.rho > 0.0)) detail::throw_instability(m.rho);
  for (int a = 0; a < 3; ++a) m.u[a] = j[a] / m.rho;
  return m;
}

std::vector<double> equilibrium(const Macroscopics& m, const Stencil& s) {
  std::vector<double> feq(s.q);
  const double usq = m.u[0] * m.u[0] + m.u[1] * m.u[1] + m.u[2] * m.u[2];
  for (int i = 0; i < s.q; ++i) {
    const double cu = s.c[i][0] * m.u[0] + s.c[i][1] * m.u[1] + s.c[i][2] * m.u[2];
    feq[i] = s.w[i] * m.rho * (1.0 + cu / s.cs2 + cu * cu / (2.0 * s.cs2 * s.cs2) - usq / (2.0 * s.cs2));
  }
  return feq;
}

std::vector<double> collide_srt(std::span<const double> f, const CollisionParams& p, const Stencil& s) {
  const auto feq = equilibrium(macroscopic(f, s), s);
  std::vector<double> out(s.q);
  for (int i = 0; i < s.q; ++i) out[i] = f[i] - p.omega * (f[i] - feq[i]);
  return out;
}

std::vector<double> collide_trt(std::span<const double> f, const CollisionParams& p, const Stencil& s) {
  const auto feq = equilibrium(macroscopic(f, s), s);
  std::vector<double> out(s.q);
  for (int i = 0; i < s.q; ++i) {
    const int j = s.inv[i];
    const double even = 0.5 * (f[i] + f[j]) - 0.5 * (feq[i] + feq[j]);
    const double odd = 0.5 * (f[i] - f[j]) - 0.5 * (feq[i] - feq[j]);
    out[i] = f[i] - p.omega * even - p.lambda_odd * odd;
  }
  return out;
}

std::vector<double> collide(std::span<const double> f, const CollisionParams& p, const Stencil& s) {
  return p.model == CollisionModel::SRT ? collide_srt(f, p, s) : collide_trt(f, p, s);
}

double omega_from_viscosity(double nu) {
  if (!(nu > 0.0)) throw ConfigError("viscosity must be positive, got " + std::to_string(nu));
  return 1.0 / (3.0 * nu + 0.5);
}

double viscosity_from_omega(double omega) { return (1.0 / omega - 0.5) / 3.0; }

double ubb_correction(const Stencil& s, int i, const Vec3& u_wall) {
  const double cu = s.c[i][0] * u_wall[0] + s.c[i][1] * u_wall[1] + s.c[i][2] * u_wall[2];
  return 2.0 * s.w[i] * cu / s.cs2;
}

namespace detail {
void throw_instability(double rho) {
  throw NumericalInstability("non-positive or non-finite density " + std::to_string(rho));
}
}  // namespace detail

}  // namespace slbm
