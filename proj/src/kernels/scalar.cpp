#include <cmath>

#include "gapf/kernels/kernels.hpp"
#include "kernels/scalar_impl.hpp"

namespace gapf::kernels {

const KernelTable& scalar() {
  static const KernelTable table{
      "scalar",
      &detail::transform_points_scalar,
      &detail::project_points_scalar,
      &detail::nearest_in_block_scalar,
      &detail::count_inliers_scalar,
      &detail::sum_squared_residuals_scalar,
  };
  return table;
}

}  // namespace gapf::kernels
