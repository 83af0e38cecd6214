#include <gtest/gtest.h>

#include "ikg/selftest.hpp"

namespace {

TEST(Selftest, EveryPropertyPassesOnTheShippedCode) {
  for (const auto& r : ikg::run_selftest()) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

TEST(Selftest, DetectsAFlippedKernelGradient) {
  ikg::SelftestOptions options;
  options.kernel_gradient = [](const ikg::Kernel& k, const ikg::Vector& v, const ikg::Vector& x) {
    return (-k.grad_x(v, x)).eval();
  };
  EXPECT_FALSE(ikg::check_kernel_gradient(options).passed);
  EXPECT_TRUE(ikg::check_kernel_gradient({}).passed);
}

TEST(Selftest, OtherSeedsPassToo) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    ikg::SelftestOptions options;
    options.seed = seed;
    for (const auto& r : ikg::run_selftest(options)) {
      EXPECT_TRUE(r.passed) << "seed " << seed << ": " << r.name << ": " << r.detail;
    }
  }
}

}  // namespace
