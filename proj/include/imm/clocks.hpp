#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <variant>
#include <vector>

#include "imm/market.hpp"
#include "imm/portfolios.hpp"

namespace imm {

struct AtomClock {
  std::size_t atom = 0;  // 0-based
};
struct AtomSetClock {
  std::vector<std::size_t> atoms;
};
struct AtomGopClock {};

using IntrinsicKind = std::variant<AtomClock, AtomSetClock, AtomGopClock>;

namespace detail {

// phi_t - phi_0 for d(phi) = B exp(tau - tau_0) d(tau) / 4 with tau given on
// the grid. Over a step exp(tau) integrates exactly in tau; B enters through
// its geometric mean on the step (exact when B is constant). With
// denominated = true the B factor is dropped and the result is exact.
inline std::vector<double> intrinsic_from_clock(const std::vector<double>& tau,
                                                const std::vector<double>& log_basis,
                                                bool denominated) {
  std::vector<double> phi(tau.size(), 0.0);
  for (std::size_t i = 1; i < tau.size(); ++i) {
    const double e0 = std::exp(tau[i - 1] - tau[0]);
    const double e1 = std::exp(tau[i] - tau[0]);
    double inc = 0.25 * (e1 - e0);
    if (!denominated) inc *= std::exp(0.5 * (log_basis[i - 1] + log_basis[i]));
    phi[i] = phi[i - 1] + inc;
  }
  return phi;
}

}  // namespace detail

// Intrinsic time phi_t - phi_0 on the grid. For an atom or a set of atoms the
// clock rate is B_t exp(tau_t - tau_0) a_t / 4; for the atom GOP it is
// S*_t Z_t a_t / 4. With basis_denominated the factor B_t is removed, which
// is the clock of the B-denominated values.
inline std::vector<double> intrinsic_time(const MarketConfig& cfg, const MarketPath& p,
                                          const IntrinsicKind& kind,
                                          bool basis_denominated = false) {
  if (const auto* a = std::get_if<AtomClock>(&kind)) {
    if (a->atom >= p.atoms()) throw std::out_of_range("intrinsic_time: missing atom");
    return detail::intrinsic_from_clock(p.clock[a->atom], p.log_basis, basis_denominated);
  }
  if (const auto* s = std::get_if<AtomSetClock>(&kind)) {
    detail::check_index_set(s->atoms, p.atoms());
    const auto& ref = p.clock[s->atoms.front()];
    for (std::size_t k : s->atoms) {
      if (p.clock[k] != ref) {
        throw std::invalid_argument("intrinsic_time: atoms in the set run on different clocks");
      }
    }
    return detail::intrinsic_from_clock(ref, p.log_basis, basis_denominated);
  }
  // S* = B Y* exp(tau*) and a Z dt = d(tau*) / Y*, so the S* clock has the
  // same form in tau*.
  const AtomGopPath gop = atom_gop_path(cfg, p);
  return detail::intrinsic_from_clock(gop.clock, p.log_basis, basis_denominated);
}

}  // namespace imm
