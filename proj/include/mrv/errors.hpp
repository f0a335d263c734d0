#pragma once

#include <stdexcept>
#include <string>

namespace mrv {

enum class errc {
  unknown_variable,
  malformed_term,
  empty_polynomial,
  dimension_mismatch,
  zero_polynomial,
  non_finite,
  unsorted_input,
  no_convergence,
  not_symmetric,
  not_positive_definite,
  order_too_large,
  order_too_small,
  degree_too_large,
  not_flat,
  inconsistent_entries,
  numerical_failure,
  basis_incomplete,
  singular_basis_block,
  degenerate_spectrum,
  non_commuting,
  not_order_ideal,
  not_standard_monomial_basis,
  complex_coefficients_unsupported,
  parse_error,
  order_exhausted,
};

// Single exception type for the whole library; callers discriminate on code().
class error : public std::runtime_error {
public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace mrv
