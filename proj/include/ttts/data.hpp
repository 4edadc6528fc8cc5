#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "ttts/tensor.hpp"
#include "ttts/tt.hpp"

namespace ttts {

struct SyntheticData {
    Tensor tensor;  ///< full(truth) plus noise
    TT truth;
};

/// Gaussian TT of the given rank chain plus i.i.d. N(0, noise_std^2) noise.
SyntheticData gen_synthetic(const Dims& dims, const Dims& ranks, double noise_std, std::uint64_t seed,
                            Index cap = default_memory_cap);

enum class FunctionKind { sinc, osc };

/**
 * Samples of a one-dimensional function reshaped (column-major) into dims.
 * sinc: sin(pi x) / (pi x) at `count` equispaced points of [-5, 5], both ends
 * included. osc: sin(4 / x) cos(x^2) at x_i = i / count, i = 1..count.
 */
Tensor gen_function_tensor(FunctionKind kind, Index count, Dims dims);

enum class PsnrVariant {
    per_slice_sse,  ///< 10 log10(255^2 / ||slice diff||_F^2), averaged over last-mode slices
    per_slice_mse,  ///< same with the squared error divided by the slice size
};

/// Mean over last-mode slices; +infinity when the tensors are identical.
double psnr(const Tensor& a, const Tensor& approx, PsnrVariant variant = PsnrVariant::per_slice_sse);

/**
 * DTF file format, little endian:
 *   "DTF1" | order d (u32) | d dims (u64 each) | prod(dims) binary64 values, column-major.
 */
std::string encode_dtf(const Tensor& a);
Tensor decode_dtf(std::string_view bytes);

void save_dtf(const Tensor& a, const std::filesystem::path& path);
Tensor load_dtf(const std::filesystem::path& path);

}  // namespace ttts
