// Compares the serial reference kernels against the OpenMP versions on
// training-shaped workloads and checks they agree bitwise.
//
//   bench_kernels [--size N] [--batch B] [--reps R]

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <string>

#include "amlab/kernels.hpp"
#include "amlab/matrix.hpp"
#include "amlab/rng.hpp"

using namespace amlab;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
    return m;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

template <typename F>
double time_reps(std::size_t reps, F&& f) {
    auto start = std::chrono::steady_clock::now();
    for (std::size_t r = 0; r < reps; ++r) f();
    return seconds_since(start) / static_cast<double>(reps);
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-14s serial %10.6f s   openmp %10.6f s   speedup %5.2fx   %s\n",
                name, serial_s, parallel_s, serial_s / parallel_s,
                identical ? "bitwise-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP kernel benchmark"};
    std::size_t size = 512;
    std::size_t batch = 256;
    std::size_t reps = 5;
    app.add_option("--size", size, "square matrix dimension");
    app.add_option("--batch", batch, "batch (column) count");
    app.add_option("--reps", reps, "repetitions per measurement");
    CLI11_PARSE(app, argc, argv);

    std::printf("openmp compiled in: %s, max threads %d\n",
                kernels::openmp_available() ? "yes" : "no", kernels::max_threads());

    Rng rng(12345);
    Matrix a = random_matrix(size, size, rng);
    Matrix b = random_matrix(size, batch, rng);
    Matrix c_serial(size, batch), c_par(size, batch);
    Vector bias(size);
    for (double& v : bias) v = rng.uniform(-1.0, 1.0);

    double s, p;

    s = time_reps(reps, [&] { kernels::serial::gemm_nn(a, b, c_serial); });
    p = time_reps(reps, [&] { kernels::par::gemm_nn(a, b, c_par); });
    report("gemm_nn", s, p, c_serial == c_par);

    Matrix at = random_matrix(size, size, rng);
    s = time_reps(reps, [&] { kernels::serial::gemm_tn(at, b, c_serial); });
    p = time_reps(reps, [&] { kernels::par::gemm_tn(at, b, c_par); });
    report("gemm_tn", s, p, c_serial == c_par);

    Matrix bt = random_matrix(batch, size, rng);
    Matrix d_serial(size, size), d_par(size, size);
    s = time_reps(reps, [&] { kernels::serial::gemm_nt(b, bt, d_serial); });
    p = time_reps(reps, [&] { kernels::par::gemm_nt(b, bt, d_par); });
    report("gemm_nt", s, p, d_serial == d_par);

    Matrix z = random_matrix(size, batch, rng);
    Matrix act_serial(size, batch), act_par(size, batch);
    s = time_reps(reps, [&] {
        Matrix t = z;
        kernels::serial::add_bias_cols(t, bias);
        kernels::serial::sigmoid(t, act_serial);
    });
    p = time_reps(reps, [&] {
        Matrix t = z;
        kernels::par::add_bias_cols(t, bias);
        kernels::par::sigmoid(t, act_par);
    });
    report("bias+sigmoid", s, p, act_serial == act_par);

    Matrix sm_in = random_matrix(size, batch, rng);
    Matrix sm_serial(size, batch), sm_par(size, batch);
    s = time_reps(reps, [&] { kernels::serial::softmax_cols(sm_in, sm_serial); });
    p = time_reps(reps, [&] { kernels::par::softmax_cols(sm_in, sm_par); });
    report("softmax_cols", s, p, sm_serial == sm_par);

    return 0;
}
