#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ikg/kernel.hpp"

namespace ikg {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;  // worst observed discrepancy
};

struct SelftestOptions {
  std::uint64_t seed = 20240611;
  // Analytic kernel gradient under test; Kernel::grad_x when empty.
  std::function<Vector(const Kernel&, const Vector& v, const Vector& x)> kernel_gradient;
};

// Fast invariant suite: kernel symmetry, PSD and gradients, batch vs
// sequential posteriors, variance monotonicity, sigma_tilde bound and
// gradient, g_func shape, h >= 0, log vs naive IKG, Mills branches and the
// IKG gradient. Each property reports independently.
std::vector<PropertyResult> run_selftest(const SelftestOptions& options = {});

// Individual checks, exposed for tests.
PropertyResult check_kernel_gradient(const SelftestOptions& options);
PropertyResult check_kernel_symmetry_psd(const SelftestOptions& options);
PropertyResult check_batch_vs_sequential(const SelftestOptions& options);
PropertyResult check_variance_monotone(const SelftestOptions& options);
PropertyResult check_sigma_tilde_bound(const SelftestOptions& options);
PropertyResult check_sigma_tilde_gradient(const SelftestOptions& options);
PropertyResult check_g_func_shape(const SelftestOptions& options);
PropertyResult check_h_nonnegative(const SelftestOptions& options);
PropertyResult check_log_vs_naive(const SelftestOptions& options);
PropertyResult check_mills_branches(const SelftestOptions& options);
PropertyResult check_ikg_gradient(const SelftestOptions& options);

}  // namespace ikg
