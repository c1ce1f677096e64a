#pragma once

#include <array>

namespace adaptmg::tensor
{
  /**
   * Contract a tensor-product array with a small matrix along one axis.
   *
   * `matrix` is row-major rows x cols. Without `transpose` the axis of `in`
   * has length cols and the result axis length rows; with `transpose` the
   * roles swap. `extents` gives the lengths of all axes of `in` (axis 0 runs
   * fastest). With `add` the result is accumulated into `out`.
   */
  template <typename Number>
  void
  apply_1d(const Number *matrix, int rows, int cols, int axis, int dim,
           const std::array<int, 3> &extents, const Number *in, Number *out, bool transpose,
           bool add)
  {
    int pre = 1, post = 1;
    for (int k = 0; k < axis; ++k)
      pre *= extents[k];
    for (int k = axis + 1; k < dim; ++k)
      post *= extents[k];
    const int n_in  = transpose ? rows : cols;
    const int n_out = transpose ? cols : rows;

    for (int o = 0; o < post; ++o)
      for (int i_out = 0; i_out < n_out; ++i_out)
        {
          Number *dst = out + (o * n_out + i_out) * pre;
          if (!add)
            for (int s = 0; s < pre; ++s)
              dst[s] = Number(0);
          for (int j = 0; j < n_in; ++j)
            {
              const Number  m   = transpose ? matrix[j * cols + i_out] : matrix[i_out * cols + j];
              const Number *src = in + (o * n_in + j) * pre;
              for (int s = 0; s < pre; ++s)
                dst[s] += m * src[s];
            }
        }
  }
} // namespace adaptmg::tensor
