#pragma once

#include <cstddef>

namespace qbc {

/// Numeric slack used by every Loewner-order and convergence decision.
///
/// The first three fields are the user-facing tolerances; the rest are engine
/// limits.
struct Tolerances {
  double psd_eps = 1e-9;         // eigenvalue slack for A <= B
  double trace_eps = 1e-9;       // trace non-increase slack
  double loop_tail_eps = 1e-12;  // while-loop truncation threshold

  double hermitian_eps = 1e-7;   // asymmetry beyond this is an error
  double unitary_eps = 1e-8;
  double povm_eps = 1e-9;        // sum of measurement operators vs identity
  double projection_eps = 1e-9;  // P^2 = P check
  double seq_conv_eps = 1e-8;    // HT.while limit check

  int loop_cap = 10000;  // while iterations
  int n_check = 64;      // HT.while monotonicity checked for n = 0..n_check

  std::size_t dim_cap = 1024;
  std::size_t superop_dim_cap = 32;  // transfer matrices are d^2 x d^2

  bool valid() const {
    return psd_eps >= 0 && trace_eps >= 0 && loop_tail_eps >= 0 && hermitian_eps >= 0 &&
           unitary_eps >= 0 && povm_eps >= 0 && projection_eps >= 0 && seq_conv_eps >= 0 &&
           loop_cap > 0 && n_check > 0;
  }
};

}  // namespace qbc
