#pragma once

// Thin reentrant wrapper over FFTW. Plans are created once per size under a
// lock (FFTW's planner is not thread-safe) and executed through the
// new-array interface, which is.

#include <complex>
#include <span>
#include <vector>

namespace sparsehm::fft {

using Complex = std::complex<double>;

/// Unnormalized forward real-to-complex DFT; returns bins 0..n/2.
std::vector<Complex> forward_real(std::span<const double> x);

/// Inverse of forward_real for a length-n signal, including the 1/n factor.
std::vector<double> inverse_real(std::span<const Complex> half_spectrum, std::size_t n);

/// Inverse complex DFT including the 1/n factor.
std::vector<Complex> inverse_complex(std::span<const Complex> spectrum);

}  // namespace sparsehm::fft
