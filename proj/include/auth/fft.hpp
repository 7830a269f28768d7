#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace auth {

std::size_t next_pow2(std::size_t n);

// In-place iterative radix-2 DFT; data.size() must be a power of two.
// X[k] = sum_j x[j] * exp(-2*pi*i*j*k/N)
void fft_inplace(std::vector<std::complex<double>>& data);

}  // namespace auth
