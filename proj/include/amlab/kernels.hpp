#pragma once

#include "amlab/matrix.hpp"

// Dense compute kernels behind the network code. Two implementations share
// one contract: kernels::serial is the plain-loop reference, kernels::par
// adds OpenMP worksharing over output rows. Every output element is computed
// by exactly one thread with the same inner summation order as the serial
// path, so both backends produce bitwise-identical results and the dispatch
// choice never affects reproducibility. tools/bench_kernels.cpp compares
// their throughput.

namespace amlab::kernels {

enum class Backend {
    serial,
    openmp,
    automatic,  // openmp when compiled in and the problem is big enough
};

void set_backend(Backend b);
Backend backend();

// True when this build has OpenMP support.
bool openmp_available();
// OpenMP worker count (1 without OpenMP).
int max_threads();

namespace serial {

// C = A * B
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);
// C = A^T * B  (A is K x M, B is K x N, C is M x N)
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);
// C = A * B^T  (A is M x K, B is N x K, C is M x N)
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c);
// Z(i, j) += bias[i]
void add_bias_cols(Matrix& z, const Vector& bias);
// out[i] = sum_j M(i, j)
void row_sums(const Matrix& m, Vector& out);

void sigmoid(const Matrix& z, Matrix& a);
void relu(const Matrix& z, Matrix& a);
void tanh_act(const Matrix& z, Matrix& a);
// Column-wise softmax with max subtraction.
void softmax_cols(const Matrix& z, Matrix& a);
// delta *= act'(z) evaluated from pre-activations z and activations a.
void sigmoid_deriv_mul(Matrix& delta, const Matrix& a);
void relu_deriv_mul(Matrix& delta, const Matrix& z);
void tanh_deriv_mul(Matrix& delta, const Matrix& a);

}  // namespace serial

namespace par {

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c);
void add_bias_cols(Matrix& z, const Vector& bias);
void row_sums(const Matrix& m, Vector& out);

void sigmoid(const Matrix& z, Matrix& a);
void relu(const Matrix& z, Matrix& a);
void tanh_act(const Matrix& z, Matrix& a);
void softmax_cols(const Matrix& z, Matrix& a);
void sigmoid_deriv_mul(Matrix& delta, const Matrix& a);
void relu_deriv_mul(Matrix& delta, const Matrix& z);
void tanh_deriv_mul(Matrix& delta, const Matrix& a);

}  // namespace par

// Dispatching entry points used by the rest of the library.
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c);
void add_bias_cols(Matrix& z, const Vector& bias);
void row_sums(const Matrix& m, Vector& out);
void sigmoid(const Matrix& z, Matrix& a);
void relu(const Matrix& z, Matrix& a);
void tanh_act(const Matrix& z, Matrix& a);
void softmax_cols(const Matrix& z, Matrix& a);
void sigmoid_deriv_mul(Matrix& delta, const Matrix& a);
void relu_deriv_mul(Matrix& delta, const Matrix& z);
void tanh_deriv_mul(Matrix& delta, const Matrix& a);

}  // namespace amlab::kernels
