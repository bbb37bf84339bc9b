#include "amlab/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace amlab::kernels {

namespace {

std::atomic<Backend> g_backend{Backend::automatic};

// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::size_t kParallelFlopThreshold = 32 * 1024;

void check_gemm_nn(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw ShapeError("gemm_nn: inner dimensions disagree");
}

void check_gemm_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw ShapeError("gemm_tn: inner dimensions disagree");
}

void check_gemm_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw ShapeError("gemm_nt: inner dimensions disagree");
}

bool use_parallel(std::size_t work) {
#ifdef _OPENMP
    switch (g_backend.load(std::memory_order_relaxed)) {
        case Backend::serial: return false;
        case Backend::openmp: return true;
        case Backend::automatic:
            return work >= kParallelFlopThreshold && omp_get_max_threads() > 1;
    }
    return false;
#else
    (void)work;
    return false;
#endif
}

inline void gemm_nn_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    double* cr = c.row(i);
    std::fill(cr, cr + c.cols, 0.0);
    for (std::size_t k = 0; k < a.cols; ++k) {
        const double aik = a(i, k);
        const double* br = b.row(k);
        for (std::size_t j = 0; j < b.cols; ++j) cr[j] += aik * br[j];
    }
}

inline void gemm_tn_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    double* cr = c.row(i);
    std::fill(cr, cr + c.cols, 0.0);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double aki = a(k, i);
        const double* br = b.row(k);
        for (std::size_t j = 0; j < b.cols; ++j) cr[j] += aki * br[j];
    }
}

inline void gemm_nt_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    const double* ar = a.row(i);
    double* cr = c.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
        const double* br = b.row(j);
        double acc = 0.0;
        for (std::size_t k = 0; k < a.cols; ++k) acc += ar[k] * br[k];
        cr[j] = acc;
    }
}

inline void softmax_col(const Matrix& z, Matrix& a, std::size_t j) {
    double mx = z(0, j);
    for (std::size_t i = 1; i < z.rows; ++i) mx = std::max(mx, z(i, j));
    double sum = 0.0;
    for (std::size_t i = 0; i < z.rows; ++i) {
        const double e = std::exp(z(i, j) - mx);
        a(i, j) = e;
        sum += e;
    }
    for (std::size_t i = 0; i < z.rows; ++i) a(i, j) /= sum;
}

}  // namespace

void set_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }
Backend backend() { return g_backend.load(std::memory_order_relaxed); }

bool openmp_available() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// ---------------------------------------------------------------------------
// serial reference
// ---------------------------------------------------------------------------

namespace serial {

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
    check_gemm_nn(a, b);
    c.resize(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) gemm_nn_row(a, b, c, i);
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    check_gemm_tn(a, b);
    c.resize(a.cols, b.cols);
    for (std::size_t i = 0; i < a.cols; ++i) gemm_tn_row(a, b, c, i);
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    check_gemm_nt(a, b);
    c.resize(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) gemm_nt_row(a, b, c, i);
}

void add_bias_cols(Matrix& z, const Vector& bias) {
    if (z.rows != bias.size()) throw ShapeError("add_bias_cols: bias length mismatch");
    for (std::size_t i = 0; i < z.rows; ++i) {
        double* zr = z.row(i);
        const double b = bias[i];
        for (std::size_t j = 0; j < z.cols; ++j) zr[j] += b;
    }
}

void row_sums(const Matrix& m, Vector& out) {
    out.assign(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) acc += r[j];
        out[i] = acc;
    }
}

void sigmoid(const Matrix& z, Matrix& a) {
    a.resize(z.rows, z.cols);
    for (std::size_t i = 0; i < z.data.size(); ++i) a.data[i] = 1.0 / (1.0 + std::exp(-z.data[i]));
}

void relu(const Matrix& z, Matrix& a) {
    a.resize(z.rows, z.cols);
    for (std::size_t i = 0; i < z.data.size(); ++i) a.data[i] = z.data[i] > 0.0 ? z.data[i] : 0.0;
}

void tanh_act(const Matrix& z, Matrix& a) {
    a.resize(z.rows, z.cols);
    for (std::size_t i = 0; i < z.data.size(); ++i) a.data[i] = std::tanh(z.data[i]);
}

void softmax_cols(const Matrix& z, Matrix& a) {
    a.resize(z.rows, z.cols);
    for (std::size_t j = 0; j < z.cols; ++j) softmax_col(z, a, j);
}

void sigmoid_deriv_mul(Matrix& delta, const Matrix& a) {
    for (std::size_t i = 0; i < delta.data.size(); ++i) delta.data[i] *= a.data[i] * (1.0 - a.data[i]);
}

void relu_deriv_mul(Matrix& delta, const Matrix& z) {
    // derivative at exactly 0 is 0
    for (std::size_t i = 0; i < delta.data.size(); ++i)
        if (z.data[i] <= 0.0) delta.data[i] = 0.0;
}

void tanh_deriv_mul(Matrix& delta, const Matrix& a) {
    for (std::size_t i = 0; i < delta.data.size(); ++i) delta.data[i] *= 1.0 - a.data[i] * a.data[i];
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP
// ---------------------------------------------------------------------------

namespace par {

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
    check_gemm_nn(a, b);
    c.resize(a.rows, b.cols);
    const std::int64_t n = static_cast<std::int64_t>(a.rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) gemm_nn_row(a, b, c, static_cast<std::size_t>(i));
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    check_gemm_tn(a, b);
    c.resize(a.cols, b.cols);
    const std::int64_t n = static_cast<std::int64_t>(a.cols);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) gemm_tn_row(a, b, c, static_cast<std::size_t>(i));
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    check_gemm_nt(a, b);
    c.resize(a.rows, b.rows);
    const std::int64_t n = static_cast<std::int64_t>(a.rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) gemm_nt_row(a, b, c, static_cast<std::size_t>(i));
}

void add_bias_cols(Matrix& z, const Vector& bias) {
    if (z.rows != bias.size()) throw ShapeError("add_bias_cols: bias length mismatch");
    const std::int64_t n = static_cast<std::int64_t>(z.rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        double* zr = z.row(static_cast<std::size_t>(i));
        const double b = bias[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < z.cols; ++j) zr[j] += b;
    }
}

void row_sums(const Matrix& m, Vector& out) {
    out.assign(m.rows, 0.0);
    const std::int64_t n = static_cast<std::int64_t>(m.rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const double* r = m.row(static_cast<std::size_t>(i));
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) acc += r[j];
        out[static_cast<std::size_t>(i)] = acc;
    }
}

void sigmoid(const Matrix& z, Matrix& a) {
    a.resize(z.rows, z.cols);
    const std::int64_t n = static_cast<std::int64_t>(z.data.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) a.data[i] = 1.0 / (1.0 + std::exp(-z.data[i]));
}

void relu(const Matrix& z, Matrix& a) {
    a.resize(z.rows, z.cols);
    const std::int64_t n = static_cast<std::int64_t>(z.data.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) a.data[i] = z.data[i] > 0.0 ? z.data[i] : 0.0;
}

void tanh_act(const Matrix& z, Matrix& a) {
    a.resize(z.rows, z.cols);
    const std::int64_t n = static_cast<std::int64_t>(z.data.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) a.data[i] = std::tanh(z.data[i]);
}

void softmax_cols(const Matrix& z, Matrix& a) {
    a.resize(z.rows, z.cols);
    const std::int64_t n = static_cast<std::int64_t>(z.cols);
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < n; ++j) softmax_col(z, a, static_cast<std::size_t>(j));
}

void sigmoid_deriv_mul(Matrix& delta, const Matrix& a) {
    const std::int64_t n = static_cast<std::int64_t>(delta.data.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) delta.data[i] *= a.data[i] * (1.0 - a.data[i]);
}

void relu_deriv_mul(Matrix& delta, const Matrix& z) {
    const std::int64_t n = static_cast<std::int64_t>(delta.data.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        if (z.data[i] <= 0.0) delta.data[i] = 0.0;
}

void tanh_deriv_mul(Matrix& delta, const Matrix& a) {
    const std::int64_t n = static_cast<std::int64_t>(delta.data.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) delta.data[i] *= 1.0 - a.data[i] * a.data[i];
}

}  // namespace par

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
    if (use_parallel(a.rows * a.cols * b.cols)) par::gemm_nn(a, b, c);
    else serial::gemm_nn(a, b, c);
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    if (use_parallel(a.rows * a.cols * b.cols)) par::gemm_tn(a, b, c);
    else serial::gemm_tn(a, b, c);
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    if (use_parallel(a.rows * a.cols * b.rows)) par::gemm_nt(a, b, c);
    else serial::gemm_nt(a, b, c);
}

void add_bias_cols(Matrix& z, const Vector& bias) {
    if (use_parallel(z.data.size())) par::add_bias_cols(z, bias);
    else serial::add_bias_cols(z, bias);
}

void row_sums(const Matrix& m, Vector& out) {
    if (use_parallel(m.data.size())) par::row_sums(m, out);
    else serial::row_sums(m, out);
}

void sigmoid(const Matrix& z, Matrix& a) {
    if (use_parallel(z.data.size())) par::sigmoid(z, a);
    else serial::sigmoid(z, a);
}

void relu(const Matrix& z, Matrix& a) {
    if (use_parallel(z.data.size())) par::relu(z, a);
    else serial::relu(z, a);
}

void tanh_act(const Matrix& z, Matrix& a) {
    if (use_parallel(z.data.size())) par::tanh_act(z, a);
    else serial::tanh_act(z, a);
}

void softmax_cols(const Matrix& z, Matrix& a) {
    if (use_parallel(z.data.size())) par::softmax_cols(z, a);
    else serial::softmax_cols(z, a);
}

void sigmoid_deriv_mul(Matrix& delta, const Matrix& a) {
    if (use_parallel(delta.data.size())) par::sigmoid_deriv_mul(delta, a);
    else serial::sigmoid_deriv_mul(delta, a);
}

void relu_deriv_mul(Matrix& delta, const Matrix& z) {
    if (use_parallel(delta.data.size())) par::relu_deriv_mul(delta, z);
    else serial::relu_deriv_mul(delta, z);
}

void tanh_deriv_mul(Matrix& delta, const Matrix& a) {
    if (use_parallel(delta.data.size())) par::tanh_deriv_mul(delta, a);
    else serial::tanh_deriv_mul(delta, a);
}

}  // namespace amlab::kernels
