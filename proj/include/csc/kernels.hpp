#pragma once

#include "csc/conv_dictionary.hpp"
#include "csc/tensor.hpp"

// Two implementations of the convolution operators.
//
// `reference` is the literal definition: a serial scatter loop over needles
// and atom taps. It exists for tests and for the benchmark baseline.
//
// `parallel` computes every output element independently (gather form) so
// rows can be split across OpenMP threads. Each element is accumulated in
// the same order regardless of the thread count, so results are
// bit-identical for any number of threads.
//
// Shapes are validated by the public synthesize()/adjoint() wrappers; the
// kernels assume `out` is already sized.

namespace csc::reference {

void synthesize(const ConvDictionary& dict, const Tensor3& gamma, Tensor3& out);
void adjoint(const ConvDictionary& dict, const Tensor3& x, Tensor3& out);
double inner(const Tensor3& a, const Tensor3& b);

}  // namespace csc::reference

namespace csc::parallel {

void synthesize(const ConvDictionary& dict, const Tensor3& gamma, Tensor3& out);
/// synthesize() that also returns 0.5 * ||D gamma - x||^2, evaluated before
/// the output is rounded to float. `x` must have the output's shape.
double synthesize_residual(const ConvDictionary& dict, const Tensor3& gamma, const Tensor3& x, Tensor3& out);
void adjoint(const ConvDictionary& dict, const Tensor3& x, Tensor3& out);
/// OpenMP reduction; differs from the serial sum only by rounding.
double inner(const Tensor3& a, const Tensor3& b);

}  // namespace csc::parallel

namespace csc {

/// Thread count used by the parallel kernels. Defaults to 1.
void set_thread_count(int threads);
int thread_count();
bool openmp_enabled();

}  // namespace csc
