#pragma once

#include <array>
#include <span>
#include <vector>

#include "slbm/error.hpp"
#include "slbm/stencil.hpp"

namespace slbm {

using Vec3 = std::array<double, 3>;

enum class CollisionModel { SRT, TRT };

struct CollisionParams {
  double omega = 1.0;
  CollisionModel model = CollisionModel::SRT;
  double lambda_odd = 1.0;  // TRT only

  static CollisionParams srt(double omega);
  static CollisionParams trt(double omega, double lambda_odd);
  /// Throws ConfigError unless 0 < omega < 2 (and 0 < lambda_odd < 2 for TRT).
  void validate() const;
};

struct Macroscopics {
  double rho = 0.0;
  Vec3 u{0.0, 0.0, 0.0};
};

Macroscopics macroscopic(std::span<const double> f, const Stencil& s);
std::vector<double> equilibrium(const Macroscopics& m, const Stencil& s);
std::vector<double> collide_srt(std::span<const double> f, const CollisionParams& p, const Stencil& s);
std::vector<double> collide_trt(std::span<const double> f, const CollisionParams& p, const Stencil& s);
/// Dispatches on p.model.
std::vector<double> collide(std::span<const double> f, const CollisionParams& p, const Stencil& s);

double omega_from_viscosity(double nu);
double viscosity_from_omega(double omega);

/// Momentum correction added to a PDF reflected off a moving wall; `i` is the
/// direction pointing from the wall into the fluid. Wall density is 1.
double ubb_correction(const Stencil& s, int i, const Vec3& u_wall);

namespace detail {

/// Compile-time sized copy of a stencil used by the kernels.
template <int Q>
struct Lattice {
  static constexpr int kQ = Q;
  std::array<std::array<double, 3>, Q> c{};
  std::array<double, Q> w{};
  std::array<int, Q> inv{};

  explicit Lattice(const Stencil& s) {
    for (int i = 0; i < Q; ++i) {
      for (int a = 0; a < 3; ++a) c[i][a] = s.c[i][a];
      w[i] = s.w[i];
      inv[i] = s.inv[i];
    }
  }
};

[[noreturn]] void throw_instability(double rho);

template <int Q>
inline void equilibrium_into(const Lattice<Q>& L, double rho, double ux, double uy, double uz,
                             double* feq) {
  const double usq = 1.5 * (ux * ux + uy * uy + uz * uz);
  for (int i = 0; i < Q; ++i) {
    const double cu = L.c[i][0] * ux + L.c[i][1] * uy + L.c[i][2] * uz;
    feq[i] = L.w[i] * rho * (1.0 + 3.0 * cu + 4.5 * cu * cu - usq);
  }
}

/// In-place fused collision on one cell. Shared by every kernel so that dense
/// and sparse layouts produce bitwise identical results.
template <int Q>
inline void collide_cell(const Lattice<Q>& L, const CollisionParams& p, double* f) {
  double rho = 0.0, jx = 0.0, jy = 0.0, jz = 0.0;
  for (int i = 0; i < Q; ++i) {
    rho += f[i];
    jx += L.c[i][0] * f[i];
    jy += L.c[i][1] * f[i];
    jz += L.c[i][2] * f[i];
  }
  if (!(rho > 0.0)) throw_instability(rho);
  const double inv_rho = 1.0 / rho;
  std::array<double, Q> feq;
  equilibrium_into(L, rho, jx * inv_rho, jy * inv_rho, jz * inv_rho, feq.data());
  if (p.model == CollisionModel::SRT) {
    for (int i = 0; i < Q; ++i) f[i] -= p.omega * (f[i] - feq[i]);
    return;
  }
  std::array<double, Q> out;
  for (int i = 0; i < Q; ++i) {
    const int j = L.inv[i];
    const double f_even = 0.5 * (f[i] + f[j]), f_odd = 0.5 * (f[i] - f[j]);
    const double e_even = 0.5 * (feq[i] + feq[j]), e_odd = 0.5 * (feq[i] - feq[j]);
    out[i] = f[i] - p.omega * (f_even - e_even) - p.lambda_odd * (f_odd - e_odd);
  }
  for (int i = 0; i < Q; ++i) f[i] = out[i];
}

/// Calls fn(Lattice<Q>) for the stencil's Q.
template <class Fn>
decltype(auto) with_lattice(const Stencil& s, Fn&& fn) {
  switch (s.q) {
    case 5: return fn(Lattice<5>(s));
    case 9: return fn(Lattice<9>(s));
    case 19: return fn(Lattice<19>(s));
    case 27: return fn(Lattice<27>(s));
    default: throw ConfigError("unsupported stencil size Q=" + std::to_string(s.q));
  }
}

}  // namespace detail
}  // namespace slbm
